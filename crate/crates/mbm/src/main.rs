use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbm::spec::{DEFAULT_GRID, DEFAULT_SAMPLES};
use mbm::{check_numerical, run, write_outputs, ExperimentKind, ExperimentSpec, HarnessError};
use mbm_core::surface::{catalog, MinimalGraph};

#[derive(Parser)]
#[command(name = "mbm", version, about = "Monte Carlo experiments for Brownian motion on minimal graphs")]
struct Cli {
    /// Worker threads (defaults to the number of cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the JSON summary here as well as to stdout.
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog surfaces.
    Surfaces {
        #[command(subcommand)]
        action: SurfacesAction,
    },
    /// Run any experiment spec.
    Run {
        spec: PathBuf,
        /// Per-path CSV output (overrides the spec).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the f, g formulas on a (theta, phi) grid.
    CouplingVerify {
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Estimate the region constants c3, c4.
    CalibrateRegions {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a reduced-dynamics spec.
    Reduced {
        spec: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare graph-coordinate and conformal simulations.
    CrossCheck {
        spec: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SurfacesAction {
    List,
}

fn load(path: &PathBuf, expect: Option<ExperimentKind>) -> Result<ExperimentSpec, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec = ExperimentSpec::from_json(&text)?;
    if let Some(kind) = expect {
        if spec.kind != kind {
            return Err(HarnessError::config(format!(
                "expected a `{}` spec, got `{}`",
                kind.name(),
                spec.kind.name()
            )));
        }
    }
    Ok(spec)
}

fn execute(cli: &Cli, mut spec: ExperimentSpec, csv: Option<&PathBuf>) -> Result<(), HarnessError> {
    if let Some(p) = csv {
        spec.output.csv = Some(p.display().to_string());
    }
    if let Some(p) = &cli.summary {
        spec.output.summary = Some(p.display().to_string());
    }
    let runner = mbm::ensemble::Runner::new(cli.workers)?;
    let out = run(&spec, &runner)?;
    write_outputs(&spec, &out)?;
    println!("{}", out.report.to_json());
    check_numerical(&out.report)
}

fn dispatch(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Surfaces {
            action: SurfacesAction::List,
        } => {
            for s in catalog() {
                println!("{:<16} {}", s.name(), s.describe());
            }
            Ok(())
        }
        Command::Run { spec, csv } => execute(cli, load(spec, None)?, csv.as_ref()),
        Command::Reduced { spec, csv } => {
            execute(cli, load(spec, Some(ExperimentKind::Reduced))?, csv.as_ref())
        }
        Command::CrossCheck { spec, csv } => {
            execute(cli, load(spec, Some(ExperimentKind::CrossCheck))?, csv.as_ref())
        }
        Command::CouplingVerify { grid } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::CouplingVerify);
            spec.grid = Some(*grid);
            execute(cli, spec, None)
        }
        Command::CalibrateRegions { n, seed } => {
            let mut spec = ExperimentSpec::new(ExperimentKind::CalibrateRegions);
            spec.samples = Some(*n);
            spec.seed = *seed;
            execute(cli, spec, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
