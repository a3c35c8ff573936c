use mbm::ensemble::{chart_ensemble, graph_ensemble, Runner};
use mbm::experiments::{curvature_clock_summary, harmonic_estimate, hitting_probability};
use mbm::spec::BoundaryFunctional;
use mbm::stats::Estimate;
use mbm_core::conformal::ChartOptions;
use mbm_core::graph_sim::PathOptions;
use mbm_core::{Point2, Surface};
use statrs::distribution::{ContinuousCDF, Normal};

// Discrete monitoring of an Euler path overshoots the barrier by about this many step
// standard deviations on average.
const OVERSHOOT: f64 = 0.5826;

fn phi(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

fn runner() -> Runner {
    Runner::new(None).unwrap()
}

/// Reflection-principle law of the first passage through a line at distance `d`,
/// shifted for discrete monitoring with step variance `h`.
fn passage_cdf(d: f64, t: f64, h: f64) -> f64 {
    2.0 * phi(-(d + OVERSHOOT * h.sqrt()) / t.sqrt())
}

#[test]
fn flat_first_passage_follows_the_reflection_law() {
    let dt = 1e-3;
    let opts = PathOptions::new(dt, 4.0).with_checkpoints(&[0.25, 1.0]);
    let recs = graph_ensemble(&runner(), &Surface::FlatHalfPlane, Point2::new(1.0, 0.0), &opts, 20_000, 31)
        .unwrap();
    let n = recs.len() as u64;
    for (j, t) in [0.25, 1.0].into_iter().enumerate() {
        let hits = recs.iter().filter(|r| r.checkpoints[j].hit).count() as u64;
        let est = Estimate::proportion(hits, n);
        let want = passage_cdf(1.0, t, dt);
        assert!(est.within_stderr(want, 4.0), "t = {t}: {} vs {want}", est.value);
    }
    let res = hitting_probability(&recs, 4.0).unwrap();
    let want = passage_cdf(1.0, 4.0, dt);
    assert!(res.hit.within_stderr(want, 4.0), "{} vs {want}", res.hit.value);
    assert!((res.hit.value + res.censored_mass.value - 1.0).abs() < 1e-12);
}

#[test]
fn flat_coordinates_have_unit_rate_variance() {
    let t = 0.1;
    let opts = PathOptions::new(1e-3, t);
    let recs = graph_ensemble(&runner(), &Surface::FlatHalfPlane, Point2::new(10.0, 0.0), &opts, 20_000, 5)
        .unwrap();
    let n = recs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0);
    for r in &recs {
        assert!(!r.hit());
        let s = r.states.last().unwrap();
        assert_eq!(s.t, t);
        sx += s.x - 10.0;
        sy += s.y;
        sxx += (s.x - 10.0).powi(2);
        syy += s.y.powi(2);
    }
    let var = |s: f64, ss: f64| (ss - s * s / n) / (n - 1.0);
    // Sample variance of a Gaussian has relative standard error sqrt(2/(n-1)).
    let tol = 4.0 * t * (2.0 / (n - 1.0)).sqrt();
    assert!((var(sx, sxx) - t).abs() < tol, "{}", var(sx, sxx));
    assert!((var(sy, syy) - t).abs() < tol, "{}", var(sy, syy));
    assert!(recs.iter().all(|r| r.curvature_clock == 0.0));
}

#[test]
fn halving_the_step_stays_within_the_interval() {
    let est = |dt: f64| {
        let opts = PathOptions::new(dt, 1.0);
        let recs = graph_ensemble(&runner(), &Surface::FlatHalfPlane, Point2::new(1.0, 0.0), &opts, 20_000, 77)
            .unwrap();
        hitting_probability(&recs, 1.0).unwrap().hit
    };
    let a = est(1e-3);
    let b = est(5e-4);
    assert!((a.value - b.value).abs() <= a.hi - a.lo, "{} vs {}", a.value, b.value);
}

#[test]
fn scherk_paths_almost_surely_leave_the_square() {
    let opts = PathOptions::new(1e-3, 50.0);
    let s = Surface::Scherk { half_width: 1.2 };
    let recs = graph_ensemble(&runner(), &s, Point2::new(0.0, 0.0), &opts, 2000, 9).unwrap();
    let res = hitting_probability(&recs, 50.0).unwrap();
    assert!(res.hit.value >= 0.999, "{}", res.hit.value);
    for r in recs.iter().filter(|r| r.hit()) {
        // The exit is interpolated on the signed distance, so it lands near the edge
        // rather than on it when the last step is long.
        let e = r.exit.unwrap();
        assert!((e.x.abs().max(e.y.abs()) - 1.2).abs() < 0.05, "{e:?}");
    }
}

#[test]
fn zero_horizon_never_hits() {
    let opts = PathOptions::new(1e-3, 0.0);
    let recs = graph_ensemble(&runner(), &Surface::FlatHalfPlane, Point2::new(1e-3, 0.0), &opts, 100, 1)
        .unwrap();
    let res = hitting_probability(&recs, 0.0).unwrap();
    assert_eq!(res.hit.value, 0.0);
    assert_eq!(res.censored_mass.value, 1.0);
}

#[test]
fn catenoid_chart_time_passage_follows_the_reflection_law() {
    let ds = 1e-3;
    let v0 = 2f64.acosh();
    let opts = ChartOptions::new(ds, 1e3).keep_states();
    let recs = chart_ensemble(&runner(), &Surface::HalfCatenoid, Point2::new(2.0, 0.0), &opts, 10_000, 13)
        .unwrap();
    let n = recs.len() as u64;
    // One state is kept per chart step plus the start and the final point.
    let chart_time = |r: &mbm_core::graph_sim::TrajectoryRecord| (r.states.len() as f64 - 2.0) * ds;
    for s in [0.5, 1.0, 2.0] {
        let hits = recs.iter().filter(|r| r.hit() && chart_time(r) < s).count() as u64;
        let est = Estimate::proportion(hits, n);
        // The chart tests for crossings inside a step, so no overshoot shift applies.
        let want = passage_cdf(v0, s, 0.0);
        assert!(est.within_stderr(want, 4.0), "chart time {s}: {} vs {want}", est.value);
    }
}

#[test]
fn bridge_test_removes_the_coarse_step_bias() {
    let t = 1.0;
    let exact = passage_cdf(1.0, t, 0.0);
    let run = |opts: ChartOptions| {
        let recs = chart_ensemble(&runner(), &Surface::FlatHalfPlane, Point2::new(1.0, 0.0), &opts, 20_000, 55)
            .unwrap();
        hitting_probability(&recs, t).unwrap().hit
    };
    let bridged = run(ChartOptions::new(5e-2, t));
    assert!(bridged.within_stderr(exact, 4.0), "{} vs {exact}", bridged.value);
    let plain = run(ChartOptions::new(5e-2, t).without_bridge());
    assert!(plain.value < exact - 4.0 * plain.stderr, "{} vs {exact}", plain.value);
}

#[test]
fn harmonic_measure_respects_symmetry() {
    let opts = PathOptions::new(1e-2, 100.0);
    let recs = graph_ensemble(&runner(), &Surface::FlatHalfPlane, Point2::new(1.0, 0.0), &opts, 10_000, 21)
        .unwrap();
    let upper = harmonic_estimate(&recs, BoundaryFunctional::UpperHalf);
    assert!(upper.estimate.within_stderr(0.5, 4.0), "{}", upper.estimate.value);
    let one = harmonic_estimate(&recs, BoundaryFunctional::Constant { value: 1.0 });
    assert_eq!(one.estimate.value, 1.0);
    assert_eq!(one.non_hit_mass, upper.non_hit_mass);

    let opts = PathOptions::new(1e-2, 100.0);
    let recs = graph_ensemble(&runner(), &Surface::HalfCatenoid, Point2::new(2.0, 0.0), &opts, 2000, 22)
        .unwrap();
    let top = harmonic_estimate(
        &recs,
        BoundaryFunctional::AngleInRange { lo: 0.0, hi: std::f64::consts::PI },
    );
    assert!(top.estimate.within_stderr(0.5, 4.0), "{}", top.estimate.value);
}

#[test]
fn catenoid_clock_stays_below_the_total_curvature() {
    // The median converges only logarithmically in T, so it is compared across a
    // doubling near the end of the run.
    let opts = ChartOptions::new(1e-3, 1e4).with_checkpoints(&[5e3]);
    let recs = chart_ensemble(&runner(), &Surface::HalfCatenoid, Point2::new(2.0, 0.0), &opts, 2000, 41)
        .unwrap();
    let summary = curvature_clock_summary(&recs, 1e4).unwrap();
    // Single paths can exceed the total curvature; the bound is on the bulk of the law.
    assert!(summary.at_horizon.p99 < std::f64::consts::TAU);
    assert_eq!(summary.p99_stable, Some(true));
    let mut early: Vec<f64> = recs.iter().map(|r| r.checkpoints[0].clock).collect();
    early.sort_by(f64::total_cmp);
    let med = early[early.len() / 2];
    let late = summary.at_horizon.p50;
    assert!((late - med).abs() <= 0.05 * late, "{med} vs {late}");
}
