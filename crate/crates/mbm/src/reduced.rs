//! Ensembles of the reduced dynamics and the statistics reported for them.

use mbm_core::reduced::{
    bernoulli_stats, bessel_domination, last_exit, linear_decay_fit, simulate_reduced,
    sublinearity_check, BesselReport, ConstantFg, DecayFit, DrivenGreatCircle, ReducedOptions,
    ReducedParams, ReducedPath, SublinearityReport,
};
use mbm_core::rng::{path_rng, Purpose};
use serde::{Deserialize, Serialize};

use crate::ensemble::Runner;
use crate::error::HarnessError;
use crate::spec::BesselSpec;
use crate::stats::{Estimate, Quantiles};

/// Stream of the Brownian motion shared by `r`, `R` and `r₀ + W`.
const BESSEL_DRIVER: Purpose = Purpose::Custom(7);

/// Pathwise slack allowed in the Bessel comparison, in units of `√dτ`.
pub const BESSEL_SLACK: f64 = 5.0;

/// Tolerance of the check `slope ≤ −γ̂·δ`.
pub const SLOPE_BOUND_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedConfig {
    pub params: ReducedParams,
    pub ds: f64,
    pub horizon: f64,
    pub paths: u64,
    pub seed: u64,
    pub rho0: f64,
    pub psi0: f64,
    pub delta: f64,
    pub bootstrap: usize,
    pub bessel: Option<BesselSpec>,
}

pub fn reduced_ensemble(runner: &Runner, cfg: &ReducedConfig) -> Vec<ReducedPath> {
    let mut opts = ReducedOptions::new(cfg.ds, cfg.horizon);
    opts.rho0 = cfg.rho0;
    opts.psi0 = cfg.psi0;
    opts.exit_levels = vec![0.0];
    runner.map(cfg.paths, |i| {
        simulate_reduced(&cfg.params, &opts, &mut path_rng(cfg.seed, Purpose::Reduced, i))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LastExitSummary {
    pub level: f64,
    /// Paths with `ρ` never above the level after time 0.
    pub never_above: u64,
    /// Fraction of paths whose last exit (if any) precedes `S/2`.
    pub before_half_horizon: Estimate,
    /// Quantiles over paths that were above the level at some time.
    pub quantiles: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselSummary {
    pub spec: BesselSpec,
    pub slack: f64,
    /// `max(r − R)` over all steps and paths.
    pub max_above_bessel: f64,
    /// `max(r₀ + W − r)` over all steps and paths.
    pub max_below_brownian: f64,
    pub max_violation: f64,
    pub within_slack: bool,
    pub truncated: u64,
    /// The `g ≡ f` run reproduced the Bessel process bit for bit.
    pub g_equals_f_identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedResult {
    pub params: ReducedParams,
    pub ds: f64,
    pub horizon: f64,
    pub paths: u64,
    pub delta: f64,
    pub gamma_hat: Estimate,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub slope_ci_level: f64,
    /// `slope ≤ −γ̂·δ + SLOPE_BOUND_TOL`.
    pub slope_bound_holds: bool,
    /// Fraction of paths with `ρ_S < ρ₀ − 1`.
    pub rho_drop: Estimate,
    pub final_rho: Quantiles,
    pub mean_band_fraction: f64,
    pub last_exit: LastExitSummary,
    pub sublinearity: Option<SublinearityReport>,
    pub bessel: Option<BesselSummary>,
    pub flagged: u64,
}

pub fn summarize_reduced(
    cfg: &ReducedConfig,
    paths: &[ReducedPath],
    bessel: Option<BesselSummary>,
) -> Result<ReducedResult, HarnessError> {
    let n = paths.len() as u64;
    let bern = bernoulli_stats(paths, cfg.delta)?;
    let cells = n * bern.intervals as u64;
    let ones = (bern.gamma_hat * cells as f64).round() as u64;
    let fit: DecayFit = linear_decay_fit(
        paths,
        cfg.bootstrap,
        &mut path_rng(cfg.seed, Purpose::Bootstrap, 0),
    )?;
    let finals: Vec<f64> = paths.iter().map(|p| p.final_sample().rho).collect();
    let drops = finals.iter().filter(|&&r| r < cfg.rho0 - 1.0).count() as u64;
    let exits: Vec<Option<f64>> = paths.iter().map(|p| last_exit(p, 0.0)).collect();
    let finite: Vec<f64> = exits.iter().flatten().copied().collect();
    let before = exits
        .iter()
        .filter(|e| e.is_none_or(|t| t < 0.5 * cfg.horizon))
        .count() as u64;
    let sublinearity = if cfg.horizon >= 1000.0 {
        Some(sublinearity_check(paths, &[100.0, 1000.0], 0.2)?)
    } else {
        None
    };
    Ok(ReducedResult {
        params: cfg.params,
        ds: cfg.ds,
        horizon: cfg.horizon,
        paths: n,
        delta: cfg.delta,
        gamma_hat: Estimate::proportion(ones, cells.max(1)),
        slope: fit.slope,
        slope_ci: fit.ci,
        slope_ci_level: fit.level,
        slope_bound_holds: fit.slope <= -bern.gamma_hat * cfg.delta + SLOPE_BOUND_TOL,
        rho_drop: Estimate::proportion(drops, n),
        final_rho: Quantiles::of(&finals),
        mean_band_fraction: paths.iter().map(|p| p.band_fraction).sum::<f64>() / n.max(1) as f64,
        last_exit: LastExitSummary {
            level: 0.0,
            never_above: (n as usize - finite.len()) as u64,
            before_half_horizon: Estimate::proportion(before, n),
            quantiles: (!finite.is_empty()).then(|| Quantiles::of(&finite)),
        },
        sublinearity,
        flagged: bessel.as_ref().map_or(0, |b| b.truncated),
        bessel,
    })
}

pub fn bessel_comparison(runner: &Runner, spec: &BesselSpec, seed: u64) -> Result<BesselSummary, HarnessError> {
    let reports: Vec<Result<BesselReport, _>> = runner.map(spec.paths, |i| {
        let mut schedule = DrivenGreatCircle {
            theta: spec.theta0,
            phi: spec.phi0,
            vol: spec.vol,
            dtau: spec.dtau,
            noise: path_rng(seed, Purpose::Schedule, i),
        };
        bessel_domination(
            spec.r0,
            &mut schedule,
            spec.horizon,
            spec.dtau,
            &mut path_rng(seed, BESSEL_DRIVER, i),
        )
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    let identical = bessel_domination(
        spec.r0,
        &mut ConstantFg { f: 1.0, g: 1.0 },
        spec.horizon,
        spec.dtau,
        &mut path_rng(seed, BESSEL_DRIVER, 0),
    )?;
    let above = reports.iter().map(|r| r.max_above_bessel).fold(0.0, f64::max);
    let below = reports.iter().map(|r| r.max_below_brownian).fold(0.0, f64::max);
    let slack = BESSEL_SLACK * spec.dtau.sqrt();
    Ok(BesselSummary {
        spec: *spec,
        slack,
        max_above_bessel: above,
        max_below_brownian: below,
        max_violation: above.max(below),
        within_slack: above <= slack && below <= slack,
        truncated: reports.iter().filter(|r| r.truncated).count() as u64,
        g_equals_f_identical: identical.identical && identical.max_above_bessel == 0.0,
    })
}
