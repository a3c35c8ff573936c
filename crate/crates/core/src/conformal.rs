//! Surface Brownian motion as time-changed planar Brownian motion.
//!
//! In a conformal chart the surface metric is `λ²(du² + dv²)`, so surface Brownian
//! motion is planar Brownian motion run on the clock `t = ∫ λ² dς`. This module is
//! the independent check on [`crate::graph_sim`]: it shares no coefficient code with
//! it, and the charts below are derived by hand.
//!
//! | surface | chart domain | map to graph coordinates | `λ²` |
//! |---|---|---|---|
//! | flat half-plane | `u > 0` | identity | `1` |
//! | half-catenoid | `v > 0`, `u` periodic | `(cosh v cos u, cosh v sin u)` | `cosh² v` |
//! | helicoid graph | `|u| < π/2`, `v > 0` | `(sinh v cos u, sinh v sin u)` | `cosh² v` |

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::UnsupportedSurface;
use crate::graph_sim::{CheckpointTracker, HitTime, State, TrajectoryRecord};
use crate::noise::Noise;
use crate::surface::{MinimalGraph, Point2, Surface};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
}

impl ChartPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConformalChart {
    FlatHalfPlane,
    HalfCatenoid,
    HelicoidGraph,
}

/// Charts for every catalog surface that has one.
pub fn charts() -> Vec<ConformalChart> {
    vec![
        ConformalChart::FlatHalfPlane,
        ConformalChart::HalfCatenoid,
        ConformalChart::HelicoidGraph,
    ]
}

impl ConformalChart {
    pub fn for_surface(surface: &Surface) -> Result<Self, UnsupportedSurface> {
        match surface {
            Surface::FlatHalfPlane => Ok(Self::FlatHalfPlane),
            Surface::HalfCatenoid => Ok(Self::HalfCatenoid),
            Surface::HelicoidGraph => Ok(Self::HelicoidGraph),
            other => Err(UnsupportedSurface(other.name().to_string())),
        }
    }

    pub fn surface(&self) -> Surface {
        match self {
            Self::FlatHalfPlane => Surface::FlatHalfPlane,
            Self::HalfCatenoid => Surface::HalfCatenoid,
            Self::HelicoidGraph => Surface::HelicoidGraph,
        }
    }

    /// `λ²` at a chart point.
    #[inline]
    pub fn conformal_factor(&self, c: ChartPoint) -> f64 {
        match self {
            Self::FlatHalfPlane => 1.0,
            Self::HalfCatenoid | Self::HelicoidGraph => {
                let ch = c.v.cosh();
                ch * ch
            }
        }
    }

    /// `−K λ²`, the rate of the curvature clock per unit chart time. For both curved
    /// charts this is `sech² v`.
    #[inline]
    pub fn curvature_density(&self, c: ChartPoint) -> f64 {
        match self {
            Self::FlatHalfPlane => 0.0,
            Self::HalfCatenoid | Self::HelicoidGraph => {
                let ch = c.v.cosh();
                1.0 / (ch * ch)
            }
        }
    }

    #[inline]
    pub fn to_graph(&self, c: ChartPoint) -> Point2 {
        match self {
            Self::FlatHalfPlane => Point2::new(c.u, c.v),
            Self::HalfCatenoid => {
                let r = c.v.cosh();
                let (s, co) = c.u.sin_cos();
                Point2::new(r * co, r * s)
            }
            Self::HelicoidGraph => {
                let r = c.v.sinh();
                let (s, co) = c.u.sin_cos();
                Point2::new(r * co, r * s)
            }
        }
    }

    /// Inverse of [`Self::to_graph`] on the domain interior.
    pub fn from_graph(&self, p: Point2) -> Option<ChartPoint> {
        let c = match self {
            Self::FlatHalfPlane => ChartPoint::new(p.x, p.y),
            Self::HalfCatenoid => {
                let r = p.x.hypot(p.y);
                if r <= 1.0 {
                    return None;
                }
                ChartPoint::new(p.y.atan2(p.x), r.acosh())
            }
            Self::HelicoidGraph => {
                if p.x <= 0.0 {
                    return None;
                }
                ChartPoint::new(p.y.atan2(p.x), p.x.hypot(p.y).asinh())
            }
        };
        self.contains(c).then_some(c)
    }

    /// Signed distance to the chart boundary, negative inside.
    #[inline]
    pub fn boundary_distance(&self, c: ChartPoint) -> f64 {
        match self {
            Self::FlatHalfPlane => -c.u,
            Self::HalfCatenoid => -c.v,
            Self::HelicoidGraph => (c.u.abs() - FRAC_PI_2).max(-c.v),
        }
    }

    /// Distances from an interior point to the straight edges of the chart domain.
    /// Unused slots are infinite.
    fn edge_distances(&self, c: ChartPoint) -> [f64; 3] {
        match self {
            Self::FlatHalfPlane => [c.u, f64::INFINITY, f64::INFINITY],
            Self::HalfCatenoid => [c.v, f64::INFINITY, f64::INFINITY],
            Self::HelicoidGraph => [c.v, FRAC_PI_2 - c.u, FRAC_PI_2 + c.u],
        }
    }

    fn project_to_edge(&self, c: ChartPoint, edge: usize) -> ChartPoint {
        match (self, edge) {
            (Self::FlatHalfPlane, _) => ChartPoint::new(0.0, c.v),
            (_, 0) => ChartPoint::new(c.u, 0.0),
            (_, 1) => ChartPoint::new(FRAC_PI_2, c.v),
            _ => ChartPoint::new(-FRAC_PI_2, c.v),
        }
    }

    pub fn contains(&self, c: ChartPoint) -> bool {
        self.boundary_distance(c) < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    /// Chart-time step `dς`.
    pub dvarsigma: f64,
    /// Horizon in surface time.
    pub horizon: f64,
    pub checkpoints: Vec<f64>,
    pub keep_states: bool,
    /// Brownian-bridge crossing test between grid points.
    pub bridge: bool,
}

impl ChartOptions {
    pub fn new(dvarsigma: f64, horizon: f64) -> Self {
        Self {
            dvarsigma,
            horizon,
            checkpoints: Vec::new(),
            keep_states: false,
            bridge: true,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: &[f64]) -> Self {
        self.checkpoints = checkpoints.to_vec();
        self
    }

    pub fn keep_states(mut self) -> Self {
        self.keep_states = true;
        self
    }

    pub fn without_bridge(mut self) -> Self {
        self.bridge = false;
        self
    }
}

// Past this exponent the bridge crossing probability is below 1e-21 and no uniform is
// drawn.
const BRIDGE_CUTOFF: f64 = 48.0;

/// Tests whether the Brownian bridge between two interior points touched an edge.
///
/// For a straight edge at distances `a`, `b` from the endpoints the probability is
/// `exp(−2ab/dς)`. Edges are treated as independent, which is exact for a single edge
/// and accurate away from corners. Returns the crossing fraction and the edge.
fn bridge_crossing<N: Noise + ?Sized>(
    chart: ConformalChart,
    from: ChartPoint,
    to: ChartPoint,
    ds: f64,
    noise: &mut N,
) -> Option<(f64, Option<usize>)> {
    let a = chart.edge_distances(from);
    let b = chart.edge_distances(to);
    let mut survive = 1.0;
    let mut best = (0.0, 0);
    for i in 0..3 {
        let x = 2.0 * a[i] * b[i] / ds;
        if x < BRIDGE_CUTOFF {
            let p = (-x).exp();
            survive *= 1.0 - p;
            if p > best.0 {
                best = (p, i);
            }
        }
    }
    if best.0 == 0.0 || noise.uniform() < survive {
        return None;
    }
    let i = best.1;
    Some((a[i] / (a[i] + b[i]), Some(i)))
}

/// Planar Brownian motion in the chart, absorbed at the chart boundary, reported in
/// surface time.
///
/// Surface time advances by `λ²(left endpoint)·dς` per step and the curvature clock by
/// `sech² v · dς`. The exit is interpolated linearly in the chart. With
/// [`ChartOptions::bridge`] set, steps between interior points are also tested for a
/// crossing inside the step, which removes the bias of monitoring only at grid times.
pub fn simulate_chart_path<N: Noise + ?Sized>(
    chart: ConformalChart,
    start: ChartPoint,
    opts: &ChartOptions,
    noise: &mut N,
) -> TrajectoryRecord {
    let ds = opts.dvarsigma;
    let sq = ds.sqrt();
    let horizon = opts.horizon.max(0.0);
    let mut c = start;
    let mut d_old = chart.boundary_distance(c);
    let mut t = 0.0;
    let mut clock = 0.0;
    let start_graph = chart.to_graph(c);
    let mut states = vec![State {
        t: 0.0,
        x: start_graph.x,
        y: start_graph.y,
    }];
    let mut tracker = CheckpointTracker::new(&opts.checkpoints);
    let mut sigma = HitTime::Censored(horizon);
    let mut exit = None;

    if horizon > 0.0 {
        loop {
            let lam2 = chart.conformal_factor(c);
            let rate = chart.curvature_density(c);
            let dt = lam2 * ds;
            let next = ChartPoint::new(c.u + noise.gaussian() * sq, c.v + noise.gaussian() * sq);
            let d_new = chart.boundary_distance(next);
            let crossing = if d_new >= 0.0 {
                let frac = if d_old < d_new { d_old / (d_old - d_new) } else { 1.0 };
                Some((frac.clamp(0.0, 1.0), None))
            } else if opts.bridge {
                bridge_crossing(chart, c, next, ds, noise)
            } else {
                None
            };
            if let Some((frac, edge)) = crossing {
                let tau = t + frac * dt;
                if tau < horizon {
                    let c1 = clock + rate * frac * ds;
                    tracker.advance(t, clock, tau, c1);
                    clock = c1;
                    let mut e = ChartPoint::new(c.u + frac * (next.u - c.u), c.v + frac * (next.v - c.v));
                    if let Some(i) = edge {
                        e = chart.project_to_edge(e, i);
                    }
                    sigma = HitTime::Hit(tau);
                    exit = Some(chart.to_graph(e));
                    t = tau;
                    c = e;
                    break;
                }
            }
            if t + dt >= horizon {
                let c1 = clock + rate * ds * ((horizon - t) / dt);
                tracker.advance(t, clock, horizon, c1);
                clock = c1;
                t = horizon;
                if d_new < 0.0 {
                    c = next;
                }
                break;
            }
            let c1 = clock + rate * ds;
            tracker.advance(t, clock, t + dt, c1);
            clock = c1;
            t += dt;
            c = next;
            d_old = d_new;
            if opts.keep_states {
                let g = chart.to_graph(c);
                states.push(State { t, x: g.x, y: g.y });
            }
        }
    }

    if t > 0.0 {
        let g = chart.to_graph(c);
        states.push(State { t, x: g.x, y: g.y });
    }
    let surface = chart.surface();
    let last_interior = chart.to_graph(c);
    let final_normal = surface
        .jet(last_interior)
        .map(|j| j.normal())
        .unwrap_or([0.0, 0.0, 1.0]);
    TrajectoryRecord {
        surface: surface.name().to_string(),
        dt: ds,
        states,
        sigma,
        curvature_clock: clock,
        exit,
        final_normal,
        min_normal_z: f64::NAN,
        checkpoints: tracker.finish(sigma.hit(), clock),
        failed: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ZeroNoise;
    use crate::rng::{path_rng, Purpose};

    #[test]
    fn flat_chart_factor_is_one() {
        assert_eq!(
            ConformalChart::FlatHalfPlane.conformal_factor(ChartPoint::new(0.4, -3.0)),
            1.0
        );
    }

    #[test]
    fn catenoid_radius_is_cosh_v() {
        let v = 2.0f64.acosh();
        let p = ConformalChart::HalfCatenoid.to_graph(ChartPoint::new(0.0, v));
        assert!((p.x - 2.0).abs() < 1e-14 && p.y.abs() < 1e-14);
        let back = ConformalChart::HalfCatenoid.from_graph(Point2::new(2.0, 0.0)).unwrap();
        assert!((back.v - v).abs() < 1e-14 && back.u == 0.0);
    }

    #[test]
    fn helicoid_chart_axis_is_boundary() {
        let chart = ConformalChart::HelicoidGraph;
        // v = 0 is the axis x = 0, which is on the boundary of {x > 0}.
        let p = chart.to_graph(ChartPoint::new(0.3, 0.0));
        assert_eq!(p.x, 0.0);
        assert!(!chart.contains(ChartPoint::new(0.3, 0.0)));
        assert!(!chart.contains(ChartPoint::new(FRAC_PI_2, 1.0)));
        assert!(chart.contains(ChartPoint::new(0.3, 0.5)));
    }

    #[test]
    fn helicoid_chart_is_injective_on_samples() {
        let chart = ConformalChart::HelicoidGraph;
        for i in 1..40 {
            for j in 1..40 {
                let c = ChartPoint::new(-1.5 + 3.0 * i as f64 / 40.0, 0.1 * j as f64);
                let back = chart.from_graph(chart.to_graph(c)).unwrap();
                assert!((back.u - c.u).abs() < 1e-12 && (back.v - c.v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_surface_time_is_lambda_squared_times_chart_time() {
        let chart = ConformalChart::HalfCatenoid;
        let start = ChartPoint::new(0.0, 2.0f64.acosh());
        let opts = ChartOptions::new(1e-3, 2.0).keep_states();
        let rec = simulate_chart_path(chart, start, &opts, &mut ZeroNoise);
        assert!(!rec.hit());
        // λ² = 4 at the start, so 500 chart steps cover surface time 2.
        let steps = rec.states.len() - 1;
        assert!((499..=501).contains(&steps), "{steps}");
        for w in rec.states.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!((w[1].x - 2.0).abs() < 1e-12);
        }
        assert!((rec.curvature_clock - 0.25 * 2.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn flat_chart_surface_time_equals_chart_time() {
        let opts = ChartOptions::new(1e-2, 1.0).keep_states();
        let mut rng = path_rng(5, Purpose::ChartPath, 0);
        let rec = simulate_chart_path(ConformalChart::FlatHalfPlane, ChartPoint::new(3.0, 0.0), &opts, &mut rng);
        for (k, s) in rec.states.iter().enumerate().take(rec.states.len() - 1) {
            assert!((s.t - k as f64 * 1e-2).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_surface() {
        assert!(ConformalChart::for_surface(&Surface::Scherk { half_width: 1.2 }).is_err());
        assert_eq!(charts().len(), 3);
    }
}
