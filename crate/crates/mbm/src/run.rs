//! Dispatch of an experiment spec to its simulator and estimators.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mbm_core::conformal::ChartOptions;
use mbm_core::graph_sim::{PathOptions, TrajectoryRecord};
use serde::Serialize;

use crate::coupling::{calibrate_regions, coupling_verify};
use crate::ensemble::{chart_ensemble, graph_ensemble, Runner};
use crate::error::HarnessError;
use crate::experiments::{checkpoint_times, cross_check, harmonic_estimate, hitting_probability};
use crate::output::{path_csv, reduced_csv};
use crate::reduced::{bessel_comparison, reduced_ensemble, summarize_reduced, ReducedConfig};
use crate::report::SummaryReport;
use crate::spec::{
    ExperimentKind, ExperimentSpec, DEFAULT_BOOTSTRAP, DEFAULT_DELTA, DEFAULT_GRID, DEFAULT_SAMPLES,
};
use crate::stats::Estimate;

/// Runs whose flagged fraction exceeds this are numerical failures.
pub const MAX_FLAGGED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: SummaryReport,
    /// Per-path table (graph paths for cross-checks).
    pub csv: Option<Vec<u8>>,
    /// Per-path table of the conformal side of a cross-check.
    pub chart_csv: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Serialize)]
struct SimulateResult {
    #[serde(flatten)]
    hitting: crate::experiments::HittingResult,
    /// Mean of the last recorded state over all paths.
    final_x: Estimate,
    final_y: Estimate,
    final_var_x: f64,
    final_var_y: f64,
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results always serialize")
}

fn graph_options(spec: &ExperimentSpec) -> Result<PathOptions, HarnessError> {
    let horizon = spec.horizon()?;
    Ok(PathOptions::new(spec.dt(), horizon).with_checkpoints(&checkpoint_times(horizon, &spec.checkpoints)))
}

fn graph_records(spec: &ExperimentSpec, runner: &Runner) -> Result<Vec<TrajectoryRecord>, HarnessError> {
    graph_ensemble(
        runner,
        &spec.surface()?,
        spec.start()?,
        &graph_options(spec)?,
        spec.paths()?,
        spec.seed,
    )
}

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)
}

pub fn run(spec: &ExperimentSpec, runner: &Runner) -> Result<RunOutput, HarnessError> {
    spec.validate()?;
    let t0 = Instant::now();
    let mut csv = None;
    let mut chart_csv = None;
    let (paths, flagged, results) = match spec.kind {
        ExperimentKind::Simulate => {
            let records = graph_records(spec, runner)?;
            let hitting = hitting_probability(&records, spec.horizon()?)?;
            let last = |f: fn(&mbm_core::graph_sim::State) -> f64| -> Vec<f64> {
                records.iter().filter_map(|r| r.states.last()).map(f).collect()
            };
            let (xs, ys) = (last(|s| s.x), last(|s| s.y));
            let res = SimulateResult {
                final_x: Estimate::mean(&xs),
                final_y: Estimate::mean(&ys),
                final_var_x: variance(&xs),
                final_var_y: variance(&ys),
                hitting,
            };
            csv = Some(path_csv(&records)?);
            (records.len() as u64, res.hitting.flagged, to_value(&res))
        }
        ExperimentKind::Hitting => {
            let records = graph_records(spec, runner)?;
            let res = hitting_probability(&records, spec.horizon()?)?;
            csv = Some(path_csv(&records)?);
            (records.len() as u64, res.flagged, to_value(&res))
        }
        ExperimentKind::Harmonic => {
            let records = graph_records(spec, runner)?;
            let h = spec.boundary.expect("validated");
            let res = harmonic_estimate(&records, h);
            csv = Some(path_csv(&records)?);
            (records.len() as u64, res.flagged, to_value(&res))
        }
        ExperimentKind::CrossCheck => {
            let graph = graph_records(spec, runner)?;
            let horizon = spec.horizon()?;
            let copts = ChartOptions::new(spec.dvarsigma(), horizon)
                .with_checkpoints(&checkpoint_times(horizon, &spec.checkpoints));
            let chart = chart_ensemble(
                runner,
                &spec.surface()?,
                spec.start()?,
                &copts,
                spec.paths()?,
                spec.seed,
            )?;
            let res = cross_check(&graph, &chart)?;
            csv = Some(path_csv(&graph)?);
            chart_csv = Some(path_csv(&chart)?);
            (
                (graph.len() + chart.len()) as u64,
                res.graph.flagged + res.chart.flagged,
                to_value(&res),
            )
        }
        ExperimentKind::CouplingVerify => {
            let res = coupling_verify(spec.grid.unwrap_or(DEFAULT_GRID));
            (0, 0, to_value(&res))
        }
        ExperimentKind::CalibrateRegions => {
            let res = calibrate_regions(
                &spec.regions.unwrap_or_default(),
                spec.samples.unwrap_or(DEFAULT_SAMPLES),
                spec.seed,
            )?;
            (0, 0, to_value(&res))
        }
        ExperimentKind::Reduced => {
            let cfg = ReducedConfig {
                params: spec.reduced.unwrap_or_default(),
                ds: spec.ds(),
                horizon: spec.horizon()?,
                paths: spec.paths()?,
                seed: spec.seed,
                rho0: spec.rho0.unwrap_or(0.0),
                psi0: spec.psi0.unwrap_or(0.0),
                delta: spec.delta.unwrap_or(DEFAULT_DELTA),
                bootstrap: spec.bootstrap.unwrap_or(DEFAULT_BOOTSTRAP),
                bessel: spec.bessel,
            };
            let ensemble = reduced_ensemble(runner, &cfg);
            let bessel = cfg
                .bessel
                .map(|b| bessel_comparison(runner, &b, cfg.seed))
                .transpose()?;
            let res = summarize_reduced(&cfg, &ensemble, bessel)?;
            csv = Some(reduced_csv(&ensemble)?);
            // Only the Bessel comparison can flag paths.
            let checked = cfg.bessel.map_or(0, |b| b.paths);
            (checked, res.flagged, to_value(&res))
        }
    };
    let report = SummaryReport::new(spec, paths, flagged, results, t0.elapsed().as_secs_f64());
    Ok(RunOutput {
        report,
        csv,
        chart_csv,
    })
}

/// `out.csv` → `out.chart.csv`.
pub fn chart_csv_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(e) => format!("{stem}.chart.{e}"),
        None => format!("{stem}.chart"),
    };
    path.with_file_name(name)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the artifacts named in the spec's `output` section.
pub fn write_outputs(spec: &ExperimentSpec, out: &RunOutput) -> Result<(), HarnessError> {
    if let (Some(path), Some(bytes)) = (&spec.output.csv, &out.csv) {
        write(Path::new(path), bytes)?;
        if let Some(chart) = &out.chart_csv {
            write(&chart_csv_path(Path::new(path)), chart)?;
        }
    }
    if let Some(path) = &spec.output.summary {
        write(Path::new(path), out.report.to_json().as_bytes())?;
    }
    Ok(())
}

/// Fails when more than [`MAX_FLAGGED_FRACTION`] of the checked paths were flagged.
pub fn check_numerical(report: &SummaryReport) -> Result<(), HarnessError> {
    if report.flagged_fraction() > MAX_FLAGGED_FRACTION {
        Err(HarnessError::Numerical {
            flagged: report.flagged,
            total: report.paths,
        })
    } else {
        Ok(())
    }
}
