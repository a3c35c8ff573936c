//! CSV tables for per-path data.

use mbm_core::graph_sim::{HitTime, TrajectoryRecord};
use mbm_core::reduced::{last_exit, ReducedPath};

use crate::error::HarnessError;

pub const PATH_COLUMNS: [&str; 6] = ["path_id", "hit", "sigma", "clock", "exit_x", "exit_y"];

pub const REDUCED_COLUMNS: [&str; 6] =
    ["path_id", "rho_final", "w_final", "drift_integral", "last_exit", "band_fraction"];

/// `σ` as written to CSV: the time for hits, `>=T` for censored paths.
pub fn sigma_field(sigma: HitTime) -> String {
    match sigma {
        HitTime::Hit(t) => t.to_string(),
        HitTime::Censored(t) => format!(">={t}"),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, HarnessError> {
    w.into_inner()
        .map_err(|e| HarnessError::config(format!("csv encoding failed: {e}")))
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::config(format!("csv encoding failed: {e}"))
}

pub fn path_csv(records: &[TrajectoryRecord]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PATH_COLUMNS).map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        let (ex, ey) = r
            .exit
            .map_or((String::new(), String::new()), |p| (p.x.to_string(), p.y.to_string()));
        w.write_record([
            i.to_string(),
            r.hit().to_string(),
            sigma_field(r.sigma),
            r.curvature_clock.to_string(),
            ex,
            ey,
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn reduced_csv(paths: &[ReducedPath]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REDUCED_COLUMNS).map_err(csv_err)?;
    for (i, p) in paths.iter().enumerate() {
        let last = p.final_sample();
        w.write_record([
            i.to_string(),
            last.rho.to_string(),
            last.w.to_string(),
            p.interval_drift.iter().sum::<f64>().to_string(),
            last_exit(p, 0.0).map_or(String::new(), |t| t.to_string()),
            p.band_fraction.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}
