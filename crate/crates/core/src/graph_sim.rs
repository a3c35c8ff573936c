//! Intrinsic Brownian motion on a minimal graph, simulated in graph coordinates.
//!
//! The generator is `½Δ_M`. In graph coordinates the Itô SDE has diffusion `σ` with
//! `σσᵀ = g⁻¹` and drift `bⁱ = (1/(2√G)) ∂_j(√G gⁱʲ)`. Expanding the derivative for
//! `g = I + ∇u∇uᵀ` gives `b = −∇u · R / (2W²)` where `R` is the minimal-surface
//! residual, so the drift vanishes on a minimal graph up to rounding.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::noise::Noise;
use crate::sphere::Vec3;
use crate::surface::{Jet, MinimalGraph, Point2};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItoCoefficients {
    pub drift: [f64; 2],
    pub diffusion: [[f64; 2]; 2],
}

impl ItoCoefficients {
    pub fn from_jet(jet: &Jet) -> Self {
        let [ux, uy] = jet.grad;
        let w = jet.w();
        let sw = w.sqrt();
        let residual = jet.minimal_residual();
        let k = residual / (2.0 * w * w);
        // Symmetric square root of I − ppᵀ/W: eigenvalue 1/√W along p, 1 across it.
        let c = 1.0 / (sw * (1.0 + sw));
        Self {
            drift: [-ux * k, -uy * k],
            diffusion: [[1.0 - c * ux * ux, -c * ux * uy], [-c * ux * uy, 1.0 - c * uy * uy]],
        }
    }
}

pub fn ito_coefficients<S: MinimalGraph + ?Sized>(
    surface: &S,
    p: Point2,
) -> Result<ItoCoefficients, GeometryError> {
    Ok(ItoCoefficients::from_jet(&surface.jet(p)?))
}

/// First-passage outcome of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitTime {
    /// Boundary reached at this (surface) time.
    Hit(f64),
    /// Not reached before the horizon; the hitting time is at least this value.
    Censored(f64),
}

impl HitTime {
    pub fn hit(&self) -> bool {
        matches!(self, HitTime::Hit(_))
    }

    pub fn time(&self) -> Option<f64> {
        match *self {
            HitTime::Hit(t) => Some(t),
            HitTime::Censored(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// Status of a path at an intermediate time `t`: whether it had been absorbed by
/// then and the value of the curvature clock at `t ∧ σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub hit: bool,
    pub clock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub surface: String,
    /// Step size of the scheme that produced the path (surface time for graph paths,
    /// chart time for chart paths).
    pub dt: f64,
    /// Recorded states. Either every step or just the first and last state.
    pub states: Vec<State>,
    pub sigma: HitTime,
    /// `∫ −K dt` along the path up to `σ ∧ T`.
    pub curvature_clock: f64,
    pub exit: Option<Point2>,
    pub final_normal: Vec3,
    /// Smallest third component of the Gauss map over the visited states.
    pub min_normal_z: f64,
    pub checkpoints: Vec<Checkpoint>,
    /// Set when the scheme produced a non-finite state; the record stops there.
    pub failed: bool,
}

impl TrajectoryRecord {
    pub fn hit(&self) -> bool {
        self.sigma.hit()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathOptions {
    pub dt: f64,
    pub horizon: f64,
    /// Times (ascending, within the horizon) at which to record a [`Checkpoint`].
    pub checkpoints: Vec<f64>,
    pub keep_states: bool,
}

impl PathOptions {
    pub fn new(dt: f64, horizon: f64) -> Self {
        Self {
            dt,
            horizon,
            checkpoints: Vec::new(),
            keep_states: false,
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
}

/// Number of fixed steps covering `[0, horizon]` with the last one possibly shorter.
pub(crate) fn step_count(horizon: f64, dt: f64) -> u64 {
    if horizon <= 0.0 {
        0
    } else {
        (horizon / dt - 1e-9).ceil().max(1.0) as u64
    }
}

/// Records checkpoints as time advances. The clock is linear in time within one
/// step, so checkpoints falling inside a step are interpolated.
pub(crate) struct CheckpointTracker<'a> {
    times: &'a [f64],
    next: usize,
    out: Vec<Checkpoint>,
}

impl<'a> CheckpointTracker<'a> {
    pub(crate) fn new(times: &'a [f64]) -> Self {
        Self {
            times,
            next: 0,
            out: Vec::with_capacity(times.len()),
        }
    }

    /// The path moved from `(t0, c0)` to `(t1, c1)` without being absorbed.
    #[inline]
    pub(crate) fn advance(&mut self, t0: f64, c0: f64, t1: f64, c1: f64) {
        while self.next < self.times.len() && self.times[self.next] <= t1 {
            let tc = self.times[self.next];
            let clock = if t1 > t0 {
                c0 + (c1 - c0) * ((tc - t0) / (t1 - t0)).clamp(0.0, 1.0)
            } else {
                c1
            };
            self.out.push(Checkpoint { t: tc, hit: false, clock });
            self.next += 1;
        }
    }

    /// Remaining checkpoints after the path stopped with status `hit` and `clock`.
    pub(crate) fn finish(mut self, hit: bool, clock: f64) -> Vec<Checkpoint> {
        for &t in &self.times[self.next..] {
            self.out.push(Checkpoint { t, hit, clock });
        }
        self.out
    }
}

/// Euler–Maruyama path from `start` until the boundary is crossed or `horizon` is
/// reached.
///
/// A crossing is detected when the signed boundary distance becomes non-negative; the
/// hitting time and exit point are linearly interpolated between the last two states.
/// The curvature clock uses the left-endpoint rule.
pub fn simulate_path<S, N>(
    surface: &S,
    start: Point2,
    opts: &PathOptions,
    noise: &mut N,
) -> Result<TrajectoryRecord, GeometryError>
where
    S: MinimalGraph + ?Sized,
    N: Noise + ?Sized,
{
    let mut jet = surface.jet(start)?;
    let mut p = start;
    let mut d_old = surface.signed_distance(p);
    let mut clock = 0.0;
    let mut min_normal_z = 1.0 / jet.w().sqrt();
    let mut states = Vec::new();
    states.push(State { t: 0.0, x: p.x, y: p.y });
    let mut tracker = CheckpointTracker::new(&opts.checkpoints);

    let n = step_count(opts.horizon, opts.dt);
    let mut sigma = HitTime::Censored(opts.horizon.max(0.0));
    let mut exit = None;
    let mut failed = false;
    let mut t = 0.0;

    for k in 0..n {
        t = k as f64 * opts.dt;
        let h = (opts.horizon - t).min(opts.dt);
        let coef = ItoCoefficients::from_jet(&jet);
        let sq = h.sqrt();
        let (z1, z2) = (noise.gaussian() * sq, noise.gaussian() * sq);
        let s = &coef.diffusion;
        let q = Point2::new(
            p.x + coef.drift[0] * h + s[0][0] * z1 + s[0][1] * z2,
            p.y + coef.drift[1] * h + s[1][0] * z1 + s[1][1] * z2,
        );
        let rate = -jet.gauss_curvature();
        let d_new = surface.signed_distance(q);
        if d_new >= 0.0 {
            let lam = if d_old < d_new { d_old / (d_old - d_new) } else { 1.0 };
            let lam = lam.clamp(0.0, 1.0);
            let tau = t + lam * h;
            let c1 = clock + rate * lam * h;
            tracker.advance(t, clock, tau, c1);
            clock = c1;
            let e = Point2::new(p.x + lam * (q.x - p.x), p.y + lam * (q.y - p.y));
            sigma = HitTime::Hit(tau);
            exit = Some(e);
            t = tau;
            p = e;
            break;
        }
        let next = surface.jet_unchecked(q);
        if !(next.grad[0].is_finite() && next.grad[1].is_finite() && next.hess[0][1].is_finite())
            || !(d_new.is_finite())
        {
            failed = true;
            sigma = HitTime::Censored(t);
            break;
        }
        let c1 = clock + rate * h;
        tracker.advance(t, clock, t + h, c1);
        clock = c1;
        p = q;
        d_old = d_new;
        jet = next;
        min_normal_z = min_normal_z.min(1.0 / jet.w().sqrt());
        if opts.keep_states {
            states.push(State { t: t + h, x: p.x, y: p.y });
        }
        t += h;
    }

    if (sigma.hit() || !opts.keep_states) && t > 0.0 {
        states.push(State { t, x: p.x, y: p.y });
    }
    // On a hit the exit point sits on the boundary, where the normal can degenerate;
    // the last interior normal is reported instead.
    let final_normal = jet.normal();
    let checkpoints = tracker.finish(sigma.hit(), clock);
    Ok(TrajectoryRecord {
        surface: surface.name().to_string(),
        dt: opts.dt,
        states,
        sigma,
        curvature_clock: clock,
        exit,
        final_normal,
        min_normal_z,
        checkpoints,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ZeroNoise;
    use crate::rng::{path_rng, Purpose};
    use crate::surface::Surface;

    #[test]
    fn flat_coefficients_are_euclidean() {
        let c = ito_coefficients(&Surface::FlatHalfPlane, Point2::new(1.0, 2.0)).unwrap();
        assert_eq!(c.drift, [0.0, 0.0]);
        assert_eq!(c.diffusion, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn helicoid_diffusion_squares_to_inverse_metric() {
        let c = ito_coefficients(&Surface::HelicoidGraph, Point2::new(1.0, 0.0)).unwrap();
        let s = c.diffusion;
        let a = [
            [
                s[0][0] * s[0][0] + s[0][1] * s[0][1],
                s[0][0] * s[1][0] + s[0][1] * s[1][1],
            ],
            [
                s[1][0] * s[0][0] + s[1][1] * s[0][1],
                s[1][0] * s[1][0] + s[1][1] * s[1][1],
            ],
        ];
        let expect = [[1.0, 0.0], [0.0, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - expect[i][j]).abs() < 1e-12, "{a:?}");
            }
        }
    }

    #[test]
    fn zero_noise_flat_path_is_constant() {
        let opts = PathOptions::new(0.01, 1.0).keep_states();
        let rec = simulate_path(
            &Surface::FlatHalfPlane,
            Point2::new(1.0, 0.0),
            &opts,
            &mut ZeroNoise,
        )
        .unwrap();
        assert!(!rec.hit());
        assert_eq!(rec.sigma, HitTime::Censored(1.0));
        assert_eq!(rec.states.len(), 101);
        assert!(rec.states.iter().all(|s| s.x == 1.0 && s.y == 0.0));
        assert!(rec.states.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(rec.curvature_clock, 0.0);
    }

    #[test]
    fn zero_horizon_never_hits() {
        let mut rng = path_rng(1, Purpose::GraphPath, 0);
        let rec = simulate_path(
            &Surface::HalfCatenoid,
            Point2::new(2.0, 0.0),
            &PathOptions::new(1e-3, 0.0),
            &mut rng,
        )
        .unwrap();
        assert_eq!(rec.sigma, HitTime::Censored(0.0));
        assert_eq!(rec.curvature_clock, 0.0);
    }

    #[test]
    fn start_outside_is_an_error() {
        let mut rng = path_rng(1, Purpose::GraphPath, 0);
        let err = simulate_path(
            &Surface::HalfCatenoid,
            Point2::new(0.5, 0.0),
            &PathOptions::new(1e-3, 1.0),
            &mut rng,
        );
        assert!(err.is_err());
    }

    #[test]
    fn exit_is_interpolated_onto_the_boundary() {
        let s = Surface::FlatHalfPlane;
        for i in 0..50 {
            let mut rng = path_rng(3, Purpose::GraphPath, i);
            let rec = simulate_path(&s, Point2::new(0.2, 0.0), &PathOptions::new(1e-3, 10.0), &mut rng)
                .unwrap();
            if let Some(e) = rec.exit {
                assert!(e.x.abs() < 1e-12, "{e:?}");
                let sigma = rec.sigma.time().unwrap();
                assert!(sigma > 0.0 && sigma <= 10.0);
                assert_eq!(rec.states.last().unwrap().t, sigma);
            }
        }
    }

    #[test]
    fn curvature_clock_is_monotone_over_checkpoints() {
        let s = Surface::HalfCatenoid;
        let cps = [0.5, 1.0, 2.0, 4.0];
        for i in 0..20 {
            let mut rng = path_rng(9, Purpose::GraphPath, i);
            let opts = PathOptions::new(1e-3, 4.0).with_checkpoints(&cps);
            let rec = simulate_path(&s, Point2::new(2.0, 0.0), &opts, &mut rng).unwrap();
            assert_eq!(rec.checkpoints.len(), 4);
            let mut last = 0.0;
            for c in &rec.checkpoints {
                assert!(c.clock >= last);
                last = c.clock;
            }
            assert_eq!(rec.checkpoints[3].clock, rec.curvature_clock);
            assert!(rec.min_normal_z > 0.0);
        }
    }
}
