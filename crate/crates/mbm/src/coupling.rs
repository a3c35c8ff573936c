//! Grid verification of `f`, `g` and calibration of the region constants.

use std::f64::consts::FRAC_PI_4;

use mbm_core::coupling::{
    calibrate_constants, fg, fg_branch, verify_fg_grid, Calibration, FgGridReport, RegionGaps,
    RegionParams,
};
use mbm_core::rng::{path_rng, Purpose};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Largest relative change of `c3`, `c4` under doubling the sample accepted as stable.
pub const CALIBRATION_STABILITY_TOL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub theta: f64,
    pub phi: f64,
    pub a: f64,
    pub f: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub grid: FgGridReport,
    /// `θ = φ = 0` on the `A = 1` branch, then `θ = φ = π/4` on `A = −1`.
    pub special_points: Vec<SpecialPoint>,
    /// `θ = φ = π/4` returns both branches.
    pub quarter_point_ambiguous: bool,
}

pub fn coupling_verify(grid: usize) -> CouplingReport {
    let special = |theta, phi, a| {
        let b = fg_branch(theta, phi, a);
        SpecialPoint {
            theta,
            phi,
            a,
            f: b.f,
            g: b.g,
        }
    };
    CouplingReport {
        grid: verify_fg_grid(grid),
        special_points: vec![special(0.0, 0.0, 1.0), special(FRAC_PI_4, FRAC_PI_4, -1.0)],
        quarter_point_ambiguous: fg(FRAC_PI_4, FRAC_PI_4).is_ambiguous(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub params: RegionParams,
    pub gaps: RegionGaps,
    pub samples: Calibration,
    /// Independent run with twice the sample.
    pub doubled: Calibration,
    pub c3_change: f64,
    pub c4_change: f64,
    pub stable: bool,
}

pub fn calibrate_regions(params: &RegionParams, n: usize, seed: u64) -> Result<CalibrationReport, HarnessError> {
    let gaps = params.validate()?;
    let a = calibrate_constants(params, n, &mut path_rng(seed, Purpose::Calibration, 0))?;
    let b = calibrate_constants(params, 2 * n, &mut path_rng(seed, Purpose::Calibration, 1))?;
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    let (c3_change, c4_change) = (rel(a.c3, b.c3), rel(a.c4, b.c4));
    Ok(CalibrationReport {
        params: *params,
        gaps,
        samples: a,
        doubled: b,
        c3_change,
        c4_change,
        stable: c3_change < CALIBRATION_STABILITY_TOL && c4_change < CALIBRATION_STABILITY_TOL,
    })
}
