//! Estimators over simulated ensembles.

use mbm_core::graph_sim::TrajectoryRecord;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::spec::BoundaryFunctional;
use crate::stats::{ks_two_sample, Estimate, KsResult, Quantiles};

/// Relative change of the clock's 99th percentile between `T/2` and `T` accepted as
/// "stabilized".
pub const CLOCK_STABILITY_TOL: f64 = 0.05;

/// Checkpoint times for an ensemble with horizon `T`: the requested ones inside
/// `(0, T]` plus `T/2`, sorted and deduplicated.
pub fn checkpoint_times(horizon: f64, extra: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = extra.iter().copied().filter(|&c| c > 0.0 && c <= horizon).collect();
    v.push(0.5 * horizon);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEstimate {
    pub t: f64,
    pub hit: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingResult {
    pub horizon: f64,
    pub hit: Estimate,
    pub censored_mass: Estimate,
    pub checkpoints: Vec<CheckpointEstimate>,
    /// Quantiles of `σ` over hit paths.
    pub hit_time: Option<Quantiles>,
    pub clock: ClockSummary,
    /// Smallest third component of the Gauss map seen by any path.
    pub min_normal_z: f64,
    pub flagged: u64,
}

pub fn flagged(records: &[TrajectoryRecord]) -> u64 {
    records.iter().filter(|r| r.failed).count() as u64
}

pub fn hitting_probability(records: &[TrajectoryRecord], horizon: f64) -> Result<HittingResult, HarnessError> {
    let n = records.len() as u64;
    let hits = records.iter().filter(|r| r.hit()).count() as u64;
    let times: Vec<f64> = records.iter().filter_map(|r| r.sigma.time()).collect();
    let mut checkpoints = Vec::new();
    if let Some(first) = records.first() {
        for (j, c) in first.checkpoints.iter().enumerate() {
            let k = records.iter().filter(|r| r.checkpoints[j].hit).count() as u64;
            checkpoints.push(CheckpointEstimate {
                t: c.t,
                hit: Estimate::proportion(k, n),
            });
        }
    }
    Ok(HittingResult {
        horizon,
        hit: Estimate::proportion(hits, n),
        censored_mass: Estimate::proportion(n - hits, n),
        checkpoints,
        hit_time: (!times.is_empty()).then(|| Quantiles::of(&times)),
        clock: curvature_clock_summary(records, horizon)?,
        min_normal_z: records
            .iter()
            .map(|r| r.min_normal_z)
            .filter(|z| !z.is_nan())
            .fold(f64::INFINITY, f64::min),
        flagged: flagged(records),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockSummary {
    /// `u(σ ∧ T)`.
    pub at_horizon: Quantiles,
    /// `u(σ ∧ T/2)`, when recorded.
    pub at_half_horizon: Option<Quantiles>,
    /// The 99th percentile moved by less than [`CLOCK_STABILITY_TOL`] (relative)
    /// between `T/2` and `T`.
    pub p99_stable: Option<bool>,
}

pub fn curvature_clock_summary(
    records: &[TrajectoryRecord],
    horizon: f64,
) -> Result<ClockSummary, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::config("clock summary of an empty ensemble"));
    }
    let clocks: Vec<f64> = records.iter().map(|r| r.curvature_clock).collect();
    let at_horizon = Quantiles::of(&clocks);
    let half = records[0]
        .checkpoints
        .iter()
        .position(|c| (c.t - 0.5 * horizon).abs() <= 1e-12 * horizon.max(1.0));
    let at_half_horizon = half.map(|j| {
        let v: Vec<f64> = records.iter().map(|r| r.checkpoints[j].clock).collect();
        Quantiles::of(&v)
    });
    let p99_stable = at_half_horizon.map(|h| {
        let scale = at_horizon.p99.abs().max(1e-300);
        (at_horizon.p99 - h.p99).abs() <= CLOCK_STABILITY_TOL * scale
            || at_horizon.p99 == h.p99
    });
    Ok(ClockSummary {
        at_horizon,
        at_half_horizon,
        p99_stable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicResult {
    pub functional: BoundaryFunctional,
    /// Mean of `h` over exit points of hit paths.
    pub estimate: Estimate,
    pub non_hit_mass: Estimate,
    pub flagged: u64,
}

pub fn harmonic_estimate(records: &[TrajectoryRecord], h: BoundaryFunctional) -> HarmonicResult {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.hit())
        .filter_map(|r| r.exit)
        .map(|p| h.eval(p))
        .collect();
    let n = records.len() as u64;
    let hits = values.len() as u64;
    let estimate = if h.is_indicator() && hits > 0 {
        Estimate::proportion(values.iter().filter(|&&v| v > 0.5).count() as u64, hits)
    } else {
        Estimate::mean(&values)
    };
    HarmonicResult {
        functional: h,
        estimate,
        non_hit_mass: Estimate::proportion(n - hits, n),
        flagged: flagged(records),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub hit: Estimate,
    pub censored_mass: Estimate,
    pub hit_time: Option<Quantiles>,
    pub clock: Quantiles,
    pub flagged: u64,
}

impl SideSummary {
    fn of(records: &[TrajectoryRecord]) -> Self {
        let n = records.len() as u64;
        let times: Vec<f64> = records.iter().filter_map(|r| r.sigma.time()).collect();
        let clocks: Vec<f64> = records.iter().map(|r| r.curvature_clock).collect();
        Self {
            hit: Estimate::proportion(times.len() as u64, n),
            censored_mass: Estimate::proportion(n - times.len() as u64, n),
            hit_time: (!times.is_empty()).then(|| Quantiles::of(&times)),
            clock: Quantiles::of(&clocks),
            flagged: flagged(records),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckResult {
    pub graph: SideSummary,
    pub chart: SideSummary,
    /// KS test on `σ` of hit paths; absent if either side has no hits.
    pub sigma_ks: Option<KsResult>,
    /// KS test on `u(σ ∧ T)` over all paths.
    pub clock_ks: KsResult,
    /// Two-proportion z-score of the censored masses.
    pub censored_z: f64,
}

pub fn cross_check(graph: &[TrajectoryRecord], chart: &[TrajectoryRecord]) -> Result<CrossCheckResult, HarnessError> {
    if graph.is_empty() || chart.is_empty() {
        return Err(HarnessError::config("cross-check needs nonempty ensembles"));
    }
    let times = |rs: &[TrajectoryRecord]| -> Vec<f64> { rs.iter().filter_map(|r| r.sigma.time()).collect() };
    let clocks = |rs: &[TrajectoryRecord]| -> Vec<f64> { rs.iter().map(|r| r.curvature_clock).collect() };
    let (tg, tc) = (times(graph), times(chart));
    let g = SideSummary::of(graph);
    let c = SideSummary::of(chart);
    let (n1, n2) = (graph.len() as f64, chart.len() as f64);
    let pooled = (g.censored_mass.value * n1 + c.censored_mass.value * n2) / (n1 + n2);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let diff = g.censored_mass.value - c.censored_mass.value;
    Ok(CrossCheckResult {
        graph: g,
        chart: c,
        sigma_ks: (!tg.is_empty() && !tc.is_empty()).then(|| ks_two_sample(&tg, &tc)),
        clock_ks: ks_two_sample(&clocks(graph), &clocks(chart)),
        censored_z: if se > 0.0 { diff / se } else { 0.0 },
    })
}
