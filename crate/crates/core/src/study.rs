//! Crisp and fuzzy eigenvalue studies.
//!
//! Uncertain coefficients enter through ordinary FEM solves: at each α
//! level the coefficients are cut to intervals and the eigenvalue is
//! evaluated at selected points of the resulting parameter box. The
//! smallest and largest values found form the cut of the fuzzy
//! eigenvalue.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eig::{smallest_eig, EigOptions, EigenResult};
use crate::error::{Error, Result};
use crate::fem::{assemble_with, Coefficients, MassKind, SymmetricSystem};
use crate::fuzzy::{
    uniform_levels, validate_levels, FuzzyResult, TriangularFuzzyNumber, DEFAULT_LEVEL_COUNT,
};
use crate::interval::Interval;
use crate::mesh::{Family, Mesh};
use crate::sparse::SymMatrix;

/// Default side length of the reactor.
pub const DEFAULT_SIDE: f64 = 4.0;
/// Default number of samples per parameter for box sampling.
pub const DEFAULT_BOX_GRID: usize = 9;

/// Which generalized eigenproblem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    /// `(K1 + K2) x = λ M x`
    A,
    /// `K1 x = λ K2 x`
    B,
    /// `K2 x = λ (K1 + K2) x`
    C,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::A, Formulation::B, Formulation::C];

    pub fn as_str(&self) -> &'static str {
        match self {
            Formulation::A => "A",
            Formulation::B => "B",
            Formulation::C => "C",
        }
    }

    /// `(left, right)` operators of the pencil.
    pub fn pencil(&self, sys: &SymmetricSystem) -> Result<(SymMatrix, SymMatrix)> {
        Ok(match self {
            Formulation::A => (sys.k1.combine(1.0, &sys.k2, 1.0)?, sys.mass.clone()),
            Formulation::B => (sys.k1.clone(), sys.k2.clone()),
            Formulation::C => (sys.k2.clone(), sys.k1.combine(1.0, &sys.k2, 1.0)?),
        })
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Formulation::A),
            "B" | "b" => Ok(Formulation::B),
            "C" | "c" => Ok(Formulation::C),
            other => Err(Error::InvalidArgument(format!(
                "unknown formulation '{other}'"
            ))),
        }
    }
}

/// Nodes held at zero flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcMode {
    Centroid,
    Boundary,
    Both,
}

impl BcMode {
    pub const ALL: [BcMode; 3] = [BcMode::Centroid, BcMode::Boundary, BcMode::Both];

    pub fn as_str(&self) -> &'static str {
        match self {
            BcMode::Centroid => "centroid",
            BcMode::Boundary => "boundary",
            BcMode::Both => "both",
        }
    }

    /// Sorted constrained node set of this mode on `mesh`.
    pub fn constrained_nodes(&self, mesh: &Mesh) -> Result<Vec<usize>> {
        let centroid = || mesh.centroid_node().ok_or(Error::MissingCentroid);
        Ok(match self {
            BcMode::Centroid => vec![centroid()?],
            BcMode::Boundary => mesh.boundary_nodes().to_vec(),
            BcMode::Both => {
                let mut nodes = mesh.boundary_nodes().to_vec();
                let c = centroid()?;
                if let Err(pos) = nodes.binary_search(&c) {
                    nodes.insert(pos, c);
                }
                nodes
            }
        })
    }
}

impl fmt::Display for BcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centroid" => Ok(BcMode::Centroid),
            "boundary" => Ok(BcMode::Boundary),
            "both" => Ok(BcMode::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary mode '{other}'"
            ))),
        }
    }
}

/// How the parameter box at each α level is explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// All parameters at their lower ends, then all at their upper ends.
    MatchedCorners,
    /// Every corner of the box.
    AllCorners,
    /// Uniform grid with the given number of points per parameter,
    /// endpoints included.
    BoxSampling(usize),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MatchedCorners => "matched",
            Strategy::AllCorners => "corners",
            Strategy::BoxSampling(_) => "box",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::BoxSampling(n) => write!(f, "box({n})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Fuzzy inputs of the eigenvalue study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertainCoefficients {
    #[serde(rename = "D")]
    pub d: TriangularFuzzyNumber,
    pub sigma: TriangularFuzzyNumber,
    #[serde(rename = "S", default = "no_source")]
    pub source: TriangularFuzzyNumber,
    /// Multiplies every node coordinate before assembly.
    #[serde(default = "unit_scale")]
    pub geometry_scale: TriangularFuzzyNumber,
}

fn no_source() -> TriangularFuzzyNumber {
    TriangularFuzzyNumber::crisp(0.0).expect("valid")
}

fn unit_scale() -> TriangularFuzzyNumber {
    TriangularFuzzyNumber::crisp(1.0).expect("valid")
}

impl Default for UncertainCoefficients {
    fn default() -> Self {
        Self::reference_case()
    }
}

impl UncertainCoefficients {
    /// `D` and `σ` both `[0.5, 1, 1.5]`, no source, crisp geometry.
    pub fn reference_case() -> Self {
        let tfn = TriangularFuzzyNumber::new(0.5, 1.0, 1.5).expect("valid");
        Self {
            d: tfn,
            sigma: tfn,
            source: no_source(),
            geometry_scale: unit_scale(),
        }
    }

    /// Every input fixed at its peak value.
    pub fn crisp(c: &Coefficients) -> Result<Self> {
        Ok(Self {
            d: TriangularFuzzyNumber::crisp(c.d)?,
            sigma: TriangularFuzzyNumber::crisp(c.sigma)?,
            source: TriangularFuzzyNumber::crisp(c.source)?,
            geometry_scale: TriangularFuzzyNumber::crisp(1.0)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("D", self.d),
            ("sigma", self.sigma),
            ("geometry_scale", self.geometry_scale),
        ] {
            if !(t.left() > 0.0) {
                return Err(Error::InvalidCoefficients(format!(
                    "support of {name} must be strictly positive"
                )));
            }
        }
        if self.source.left() < 0.0 {
            return Err(Error::InvalidCoefficients(
                "source must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn peak(&self) -> Coefficients {
        Coefficients {
            d: self.d.peak(),
            sigma: self.sigma.peak(),
            source: self.source.peak(),
        }
    }
}

/// Discretization and solver choices shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSetup {
    pub formulation: Formulation,
    pub bc_mode: BcMode,
    pub mass: MassKind,
    pub eig: EigOptions,
}

impl EigenSetup {
    pub fn new(formulation: Formulation, bc_mode: BcMode) -> Self {
        Self {
            formulation,
            bc_mode,
            mass: MassKind::Consistent,
            eig: EigOptions::default(),
        }
    }
}

/// Reduced pencil of a mesh under the chosen constraints.
pub fn build_pencil(
    mesh: &Mesh,
    c: &Coefficients,
    setup: &EigenSetup,
) -> Result<(SymMatrix, SymMatrix)> {
    let constrained = setup.bc_mode.constrained_nodes(mesh)?;
    let sys = assemble_with(mesh, c, setup.mass)?.apply_dirichlet(&constrained)?;
    setup.formulation.pencil(&sys)
}

pub fn crisp_eigen(mesh: &Mesh, c: &Coefficients, setup: &EigenSetup) -> Result<EigenResult> {
    let (a, b) = build_pencil(mesh, c, setup)?;
    smallest_eig(&a, &b, setup.eig)
}

/// Smallest eigenvalue of the configured pencil with default solver settings.
pub fn crisp_lambda(
    mesh: &Mesh,
    c: &Coefficients,
    formulation: Formulation,
    bc_mode: BcMode,
) -> Result<f64> {
    Ok(crisp_eigen(mesh, c, &EigenSetup::new(formulation, bc_mode))?.lambda)
}

/// One point of the parameter box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub d: f64,
    pub sigma: f64,
    pub scale: f64,
}

impl SamplePoint {
    fn key(&self) -> [u64; 3] {
        [self.d.to_bits(), self.sigma.to_bits(), self.scale.to_bits()]
    }
}

fn grid(cut: Interval, n: usize) -> Vec<f64> {
    if cut.is_degenerate() {
        return vec![cut.lo()];
    }
    let last = n - 1;
    (0..n)
        .map(|i| match i {
            0 => cut.lo(),
            i if i == last => cut.hi(),
            i => cut.lo() + cut.width() * i as f64 / last as f64,
        })
        .collect()
}

fn product(ds: &[f64], sigmas: &[f64], scales: &[f64]) -> Vec<SamplePoint> {
    let mut out = Vec::with_capacity(ds.len() * sigmas.len() * scales.len());
    for &d in ds {
        for &sigma in sigmas {
            for &scale in scales {
                out.push(SamplePoint { d, sigma, scale });
            }
        }
    }
    out
}

/// Evaluation points of `strategy` in the box cut from `u` at level `alpha`.
/// The source does not affect the eigenvalue and is not sampled.
pub fn sample_points(
    u: &UncertainCoefficients,
    alpha: f64,
    strategy: Strategy,
) -> Result<Vec<SamplePoint>> {
    let d = u.d.alpha_cut(alpha)?;
    let sigma = u.sigma.alpha_cut(alpha)?;
    let scale = u.geometry_scale.alpha_cut(alpha)?;
    let mut points = match strategy {
        Strategy::MatchedCorners => vec![
            SamplePoint {
                d: d.lo(),
                sigma: sigma.lo(),
                scale: scale.lo(),
            },
            SamplePoint {
                d: d.hi(),
                sigma: sigma.hi(),
                scale: scale.hi(),
            },
        ],
        Strategy::AllCorners => {
            let ends = |c: Interval| grid(c, 2);
            product(&ends(d), &ends(sigma), &ends(scale))
        }
        Strategy::BoxSampling(n) => {
            if n < 3 {
                return Err(Error::InvalidArgument(format!(
                    "box sampling needs at least 3 points per parameter, got {n}"
                )));
            }
            product(&grid(d, n), &grid(sigma, n), &grid(scale, n))
        }
    };
    let mut seen = std::collections::HashSet::new();
    points.retain(|p| seen.insert(p.key()));
    Ok(points)
}

/// Memoized eigenvalue evaluations on one mesh.
pub struct Evaluator<'m> {
    mesh: &'m Mesh,
    setup: EigenSetup,
    cache: Mutex<HashMap<[u64; 3], f64>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(mesh: &'m Mesh, setup: EigenSetup) -> Self {
        Self {
            mesh,
            setup,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn setup(&self) -> &EigenSetup {
        &self.setup
    }

    fn solve(&self, p: &SamplePoint) -> Result<f64> {
        let c = Coefficients::new(p.d, p.sigma, 0.0)?;
        let result = if p.scale == 1.0 {
            crisp_eigen(self.mesh, &c, &self.setup)
        } else {
            crisp_eigen(&self.mesh.scaled(p.scale)?, &c, &self.setup)
        };
        result.map(|r| r.lambda).map_err(|e| {
            e.context(format!(
                "D = {}, sigma = {}, scale = {}",
                p.d, p.sigma, p.scale
            ))
        })
    }

    /// Eigenvalues at the given points, in order.
    pub fn evaluate(&self, points: &[SamplePoint]) -> Result<Vec<f64>> {
        let missing: Vec<SamplePoint> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut seen = std::collections::HashSet::new();
            points
                .iter()
                .filter(|p| !cache.contains_key(&p.key()) && seen.insert(p.key()))
                .copied()
                .collect()
        };
        let solved: Vec<(SamplePoint, f64)> = missing
            .par_iter()
            .map(|p| self.solve(p).map(|v| (*p, v)))
            .collect::<Result<_>>()?;
        let mut cache = self.cache.lock().expect("cache lock");
        for (p, v) in solved {
            cache.insert(p.key(), v);
        }
        Ok(points.iter().map(|p| cache[&p.key()]).collect())
    }

    pub fn interval(
        &self,
        u: &UncertainCoefficients,
        alpha: f64,
        strategy: Strategy,
    ) -> Result<Interval> {
        let points = sample_points(u, alpha, strategy)?;
        Interval::hull_of(self.evaluate(&points)?)
    }

    pub fn fuzzy(
        &self,
        u: &UncertainCoefficients,
        levels: &[f64],
        strategy: Strategy,
    ) -> Result<FuzzyResult> {
        validate_levels(levels)?;
        let all: Vec<SamplePoint> = levels
            .iter()
            .map(|&a| sample_points(u, a, strategy))
            .collect::<Result<Vec<_>>>()?
            .concat();
        self.evaluate(&all)?;
        let cuts = levels
            .iter()
            .map(|&a| {
                self.interval(u, a, strategy)
                    .map_err(|e| e.context(format!("alpha = {a}")))
            })
            .collect::<Result<Vec<_>>>()?;
        FuzzyResult::from_samples(levels.to_vec(), cuts)
    }
}

/// Eigenvalue interval at level `alpha`.
pub fn interval_lambda(
    mesh: &Mesh,
    u: &UncertainCoefficients,
    alpha: f64,
    strategy: Strategy,
    setup: &EigenSetup,
) -> Result<Interval> {
    u.validate()?;
    Evaluator::new(mesh, *setup).interval(u, alpha, strategy)
}

/// Mesh levels of one refinement family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyLevels {
    pub family: Family,
    pub levels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub setup: EigenSetup,
    pub strategy: Strategy,
    pub alpha_levels: Vec<f64>,
    pub side: f64,
    pub families: Vec<FamilyLevels>,
}

impl StudyConfig {
    /// Meshes of 6, 12, 24, 48, 96, 192, 384 and 1536 elements.
    pub fn default_families() -> Vec<FamilyLevels> {
        vec![
            FamilyLevels {
                family: Family::Fan,
                levels: vec![0, 1, 2, 3, 4],
            },
            FamilyLevels {
                family: Family::Bisected,
                levels: vec![0, 1, 2],
            },
        ]
    }

    pub fn new(formulation: Formulation, bc_mode: BcMode, strategy: Strategy) -> Self {
        Self {
            setup: EigenSetup::new(formulation, bc_mode),
            strategy,
            alpha_levels: uniform_levels(DEFAULT_LEVEL_COUNT).expect("valid count"),
            side: DEFAULT_SIDE,
            families: Self::default_families(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_levels(&self.alpha_levels)?;
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "side must be positive, got {}",
                self.side
            )));
        }
        if let Strategy::BoxSampling(n) = self.strategy {
            if n < 3 {
                return Err(Error::InvalidArgument(format!(
                    "box sampling needs at least 3 points per parameter, got {n}"
                )));
            }
        }
        if self.families.iter().all(|f| f.levels.is_empty()) {
            return Err(Error::InvalidArgument("no mesh levels selected".into()));
        }
        Ok(())
    }
}

/// Fuzzy eigenvalue on every α level of `cfg`.
pub fn fuzzy_lambda(
    mesh: &Mesh,
    u: &UncertainCoefficients,
    cfg: &StudyConfig,
) -> Result<FuzzyResult> {
    u.validate()?;
    validate_levels(&cfg.alpha_levels)?;
    Evaluator::new(mesh, cfg.setup).fuzzy(u, &cfg.alpha_levels, cfg.strategy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub family: Family,
    pub level: u32,
    pub n_elements: usize,
    pub n_nodes: usize,
    pub crisp: f64,
    pub fuzzy: FuzzyResult,
}

impl LevelResult {
    /// Width of the support (the α = 0 cut).
    pub fn width(&self) -> f64 {
        self.fuzzy.support().width()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyEigenStudy {
    /// Ordered by element count.
    pub levels: Vec<LevelResult>,
}

impl FuzzyEigenStudy {
    pub fn family(&self, family: Family) -> impl Iterator<Item = &LevelResult> {
        self.levels.iter().filter(move |l| l.family == family)
    }
}

pub fn study_level(
    cfg: &StudyConfig,
    u: &UncertainCoefficients,
    family: Family,
    level: u32,
) -> Result<LevelResult> {
    let mesh = family.build(cfg.side, level)?;
    let eval = Evaluator::new(&mesh, cfg.setup);
    let crisp_point = SamplePoint {
        d: u.d.peak(),
        sigma: u.sigma.peak(),
        scale: u.geometry_scale.peak(),
    };
    let crisp = eval.evaluate(&[crisp_point])?[0];
    let fuzzy = eval.fuzzy(u, &cfg.alpha_levels, cfg.strategy)?;
    Ok(LevelResult {
        family,
        level,
        n_elements: mesh.element_count(),
        n_nodes: mesh.node_count(),
        crisp,
        fuzzy,
    })
}

/// Crisp and fuzzy eigenvalues on every configured mesh level.
pub fn convergence_study(cfg: &StudyConfig, u: &UncertainCoefficients) -> Result<FuzzyEigenStudy> {
    cfg.validate()?;
    u.validate()?;
    let jobs: Vec<(Family, u32)> = cfg
        .families
        .iter()
        .flat_map(|f| f.levels.iter().map(move |&l| (f.family, l)))
        .collect();
    let mut levels = jobs
        .par_iter()
        .map(|&(family, level)| {
            study_level(cfg, u, family, level).map_err(|e| {
                e.context(format!(
                    "{family} level {level} ({} elements)",
                    family.element_count(level)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    levels.sort_by_key(|l| (l.n_elements, l.family, l.level));
    Ok(FuzzyEigenStudy { levels })
}
