use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use ffem_core::eig::{EigOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use ffem_core::fem::MassKind;
use ffem_core::fuzzy::{uniform_levels, DEFAULT_LEVEL_COUNT};
use ffem_core::mesh::Family;
use ffem_core::study::{
    BcMode, EigenSetup, FamilyLevels, Formulation, Strategy, StudyConfig, UncertainCoefficients,
    DEFAULT_BOX_GRID, DEFAULT_SIDE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Matched,
    Corners,
    Box,
}

/// Everything a run needs. Missing keys take their defaults; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub formulation: Formulation,
    pub bc_mode: BcMode,
    pub strategy: StrategyName,
    pub box_grid: usize,
    pub alpha_levels: Vec<f64>,
    pub side: f64,
    pub families: Vec<FamilyLevels>,
    pub coefficients: UncertainCoefficients,
    pub mass: MassKind,
    pub tol: f64,
    pub max_iter: usize,
    /// Output file; standard output when absent.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            formulation: Formulation::A,
            bc_mode: BcMode::Centroid,
            strategy: StrategyName::Matched,
            box_grid: DEFAULT_BOX_GRID,
            alpha_levels: uniform_levels(DEFAULT_LEVEL_COUNT).expect("valid count"),
            side: DEFAULT_SIDE,
            families: StudyConfig::default_families(),
            coefficients: UncertainCoefficients::reference_case(),
            mass: MassKind::Consistent,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            out: None,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_formulation)]
    pub formulation: Option<Formulation>,
    #[arg(long, value_parser = parse_bc)]
    pub bc: Option<BcMode>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyName>,
    #[arg(long)]
    pub side: Option<f64>,
    /// Comma-separated refinement levels
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
}

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    s.parse().map_err(|e: ffem_core::Error| e.to_string())
}

fn parse_bc(s: &str) -> Result<BcMode, String> {
    s.parse().map_err(|e: ffem_core::Error| e.to_string())
}

pub fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: ffem_core::Error| e.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve(o: &Overrides) -> anyhow::Result<Self> {
        let mut cfg = match &o.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(f) = o.formulation {
            cfg.formulation = f;
        }
        if let Some(bc) = o.bc {
            cfg.bc_mode = bc;
        }
        if let Some(s) = o.strategy {
            cfg.strategy = s;
        }
        if let Some(side) = o.side {
            cfg.side = side;
        }
        if let Some(out) = &o.out {
            cfg.out = Some(out.clone());
        }
        match (o.family, &o.levels) {
            (Some(family), Some(levels)) => {
                cfg.families = vec![FamilyLevels {
                    family,
                    levels: levels.clone(),
                }];
            }
            (Some(family), None) => cfg.families.retain(|f| f.family == family),
            (None, Some(levels)) => {
                for f in &mut cfg.families {
                    f.levels = levels.clone();
                }
            }
            (None, None) => {}
        }
        cfg.study()?;
        Ok(cfg)
    }

    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyName::Matched => Strategy::MatchedCorners,
            StrategyName::Corners => Strategy::AllCorners,
            StrategyName::Box => Strategy::BoxSampling(self.box_grid),
        }
    }

    pub fn setup(&self) -> EigenSetup {
        EigenSetup {
            formulation: self.formulation,
            bc_mode: self.bc_mode,
            mass: self.mass,
            eig: EigOptions {
                tol: self.tol,
                max_iter: self.max_iter,
            },
        }
    }

    /// Validated study configuration.
    pub fn study(&self) -> anyhow::Result<StudyConfig> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_iter == 0 {
            return Err(ffem_core::Error::InvalidArgument(
                "tol must be positive and max_iter at least 1".into(),
            )
            .into());
        }
        self.coefficients.validate()?;
        let cfg = StudyConfig {
            setup: self.setup(),
            strategy: self.strategy(),
            alpha_levels: self.alpha_levels.clone(),
            side: self.side,
            families: self.families.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
