mod config;
mod output;

use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use ffem_core::fem::{assemble, solve_fixed_source};
use ffem_core::mesh::{Family, Point};
use ffem_core::study::{convergence_study, crisp_eigen};
use ffem_core::Error;

use config::{parse_family, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "ffem",
    version,
    about = "Fuzzy finite element neutron diffusion on an equilateral triangle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one mesh as JSON
    Mesh {
        #[arg(long, value_parser = parse_family, default_value = "fan")]
        family: Family,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long, default_value_t = ffem_core::study::DEFAULT_SIDE)]
        side: f64,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Fuzzy eigenvalue cuts on every mesh level, as CSV
    Converge(Overrides),
    /// Membership polylines on every mesh level, as JSON
    Membership(Overrides),
    /// Nodal flux at the peak coefficients on the first selected mesh
    Solve {
        #[command(flatten)]
        overrides: Overrides,
        /// Solve the fixed-source problem instead of the eigenproblem
        #[arg(long)]
        fixed_source: bool,
    },
    /// Print the effective configuration
    DumpConfig(Overrides),
}

#[derive(Serialize)]
struct Flux {
    family: Family,
    level: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    nodes: Vec<Point>,
    flux: Vec<f64>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Mesh {
            family,
            level,
            side,
            out,
        } => {
            let mesh = family.build(side, level)?;
            output::emit(out.as_deref(), &output::json(&mesh)?)?;
            eprintln!(
                "{} nodes, {} elements",
                mesh.node_count(),
                mesh.element_count()
            );
            Ok(())
        }
        Command::Converge(o) => {
            let cfg = RunConfig::resolve(&o)?;
            let study = convergence_study(&cfg.study()?, &cfg.coefficients)?;
            output::emit(cfg.out.as_deref(), &output::study_csv(&study)?)
        }
        Command::Membership(o) => {
            let cfg = RunConfig::resolve(&o)?;
            let study = convergence_study(&cfg.study()?, &cfg.coefficients)?;
            output::emit(
                cfg.out.as_deref(),
                &output::json(&output::memberships(&study))?,
            )
        }
        Command::Solve {
            overrides,
            fixed_source,
        } => {
            let cfg = RunConfig::resolve(&overrides)?;
            let fl = cfg
                .families
                .iter()
                .find(|f| !f.levels.is_empty())
                .context("no mesh level selected")?;
            let (family, level) = (fl.family, fl.levels[0]);
            let c = cfg.coefficients.peak();
            let scale = cfg.coefficients.geometry_scale.peak();
            let mesh = family.build(cfg.side, level)?.scaled(scale)?;
            let constrained = cfg.bc_mode.constrained_nodes(&mesh)?;
            let (lambda, flux) = if fixed_source {
                (None, solve_fixed_source(&mesh, &c, &constrained)?)
            } else {
                let r = crisp_eigen(&mesh, &c, &cfg.setup())?;
                let sys = assemble(&mesh, &c)?.apply_dirichlet(&constrained)?;
                (Some(r.lambda), sys.expand(&r.vector))
            };
            let result = Flux {
                family,
                level,
                lambda,
                nodes: mesh.nodes().to_vec(),
                flux,
            };
            output::emit(cfg.out.as_deref(), &output::json(&result)?)
        }
        Command::DumpConfig(o) => {
            let cfg = RunConfig::resolve(&o)?;
            let text = output::json(&cfg)?;
            // The output path names where results go, not this dump.
            output::emit(None, &text)
        }
    }
}

/// 2 for bad input, 3 for numerical failure, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e.root() {
                Error::NotConverged { .. }
                | Error::FactorizationFailure(_)
                | Error::SingularSystem
                | Error::IndefiniteB
                | Error::NestingViolation { .. } => 3,
                _ => 2,
            };
        }
        if cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
