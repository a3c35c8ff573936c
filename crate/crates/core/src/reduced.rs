//! Reduced dynamics of the chord length in `s`-time.
//!
//! With `ρ = log r` and `s = ∫ r⁻² dτ` the chord length of the coupled pair evolves as
//!
//! ```text
//! dρ = dW − (1 − g/f)/2 ds
//! dψ = (2 + ε₁) dW' + a dW'' + [A(ψ)(2 + ε₂) + b] ds,    ψ = θ + φ,  A = sign cos ψ
//! ```
//!
//! The factor `(1 − g/f)/2` is only known through region-wise lower bounds, so the
//! engine substitutes a worst-case surrogate `D(ψ)` consistent with them. The drift of
//! `ψ` pulls it towards `cos ψ = 0`, exactly where `D` degenerates.
//!
//! The statistics in this module check the consequences: the integrated drift over
//! unit intervals exceeds a threshold with positive frequency, its running mean
//! decays linearly, `ρ` eventually stays below any level, and in `τ`-time the chord
//! length is sandwiched between a Brownian motion and a two-dimensional Bessel
//! process driven by the same noise.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::coupling::fg;
use crate::error::ParameterError;
use crate::noise::Noise;
#[allow(unused_imports)]
use num_traits::Float;

/// Form of the surrogate drift `D(ψ)` standing in for `(1 − g/f)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftModel {
    /// `c3p·|cos ψ|` inside the band `|cos ψ| ≤ kappa3`, `c4p` outside it: the lower
    /// bound on `S₃` and the uniform bound on `S₁ \ S₃`.
    #[default]
    Banded,
    /// `min(c4p, c3p·|cos ψ|)`.
    Min,
}

/// How the bounded perturbations `ε₁`, `ε₂` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    /// Independent draws, uniform on `[−eps, eps]`, every step.
    #[default]
    Uniform,
    /// Fixed values (each must satisfy `|ε| ≤ eps`).
    Constant { eps1: f64, eps2: f64 },
}

/// Coefficients `a` (of the extra noise) and `b` (extra drift) of the `ψ` equation,
/// as functions of `s`-time.
pub trait PerturbationSchedule {
    fn a(&self, s: f64) -> f64;
    fn b(&self, s: f64) -> f64;
}

/// `a(s) = a0·e^(−rate·s)`, `b(s) = b0·e^(−rate·s)`. The all-zero default switches
/// the perturbation off.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExponentialPerturbation {
    pub a0: f64,
    pub b0: f64,
    pub rate: f64,
}

impl ExponentialPerturbation {
    /// Schedule with `∫₀^∞ a² ds = a_budget` and `∫₀^∞ b ds = b_budget`.
    pub fn with_budgets(a_budget: f64, b_budget: f64, rate: f64) -> Self {
        Self {
            a0: (2.0 * rate * a_budget).sqrt(),
            b0: rate * b_budget,
            rate,
        }
    }

    /// `(∫ a² ds, ∫ b ds)` over `[0, ∞)`.
    pub fn budgets(&self) -> (f64, f64) {
        if self.a0 == 0.0 && self.b0 == 0.0 {
            return (0.0, 0.0);
        }
        if self.rate <= 0.0 {
            return (f64::INFINITY, f64::INFINITY);
        }
        (self.a0 * self.a0 / (2.0 * self.rate), self.b0 / self.rate)
    }

    pub fn is_zero(&self) -> bool {
        self.a0 == 0.0 && self.b0 == 0.0
    }
}

impl PerturbationSchedule for ExponentialPerturbation {
    #[inline]
    fn a(&self, s: f64) -> f64 {
        if self.a0 == 0.0 {
            0.0
        } else {
            self.a0 * (-self.rate * s).exp()
        }
    }

    #[inline]
    fn b(&self, s: f64) -> f64 {
        if self.b0 == 0.0 {
            0.0
        } else {
            self.b0 * (-self.rate * s).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReducedParams {
    /// Bound on `|ε₁|`, `|ε₂|`.
    pub eps: f64,
    pub c3p: f64,
    pub c4p: f64,
    /// Half-width of the `S₃` band in `|cos ψ|`.
    pub kappa3: f64,
    pub drift_model: DriftModel,
    pub epsilon_mode: EpsilonMode,
    /// Correlation between the noises of `ρ` and `ψ`.
    pub noise_corr: f64,
    pub perturbation: ExponentialPerturbation,
    /// Hold `ψ` at its initial value (deterministic checks).
    pub frozen_psi: bool,
}

impl Default for ReducedParams {
    fn default() -> Self {
        Self {
            eps: 0.05,
            c3p: 0.1,
            c4p: 0.2,
            kappa3: 0.2,
            drift_model: DriftModel::Banded,
            epsilon_mode: EpsilonMode::Uniform,
            noise_corr: 0.0,
            perturbation: ExponentialPerturbation::default(),
            frozen_psi: false,
        }
    }
}

impl ReducedParams {
    /// The drift-free control: `D ≡ 0`.
    pub fn control() -> Self {
        Self {
            c3p: 0.0,
            c4p: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParameterError> {
        let bad = |name, value, reason| Err(ParameterError::Invalid { name, value, reason });
        if !(0.0..2.0).contains(&self.eps) {
            return bad("eps", self.eps, "must lie in [0, 2)");
        }
        if !(self.c3p >= 0.0) {
            return bad("c3p", self.c3p, "must be non-negative");
        }
        if !(self.c4p >= 0.0) {
            return bad("c4p", self.c4p, "must be non-negative");
        }
        if !(self.kappa3 > 0.0 && self.kappa3 <= 1.0) {
            return bad("kappa3", self.kappa3, "must lie in (0, 1]");
        }
        let d_max = match self.drift_model {
            DriftModel::Banded => self.c4p.max(self.c3p * self.kappa3),
            DriftModel::Min => self.c4p.min(self.c3p),
        };
        if d_max > 0.5 {
            return bad("c4p", d_max, "surrogate drift must not exceed 1/2");
        }
        if !(-1.0..=1.0).contains(&self.noise_corr) {
            return bad("noise_corr", self.noise_corr, "must lie in [-1, 1]");
        }
        if let EpsilonMode::Constant { eps1, eps2 } = self.epsilon_mode {
            if eps1.abs() > self.eps || eps2.abs() > self.eps {
                return bad("eps1/eps2", eps1.abs().max(eps2.abs()), "exceeds the bound eps");
            }
        }
        let (ab, bb) = self.perturbation.budgets();
        if !(ab.is_finite() && bb.is_finite()) {
            return bad("perturbation.rate", self.perturbation.rate, "must be positive");
        }
        Ok(())
    }
}

/// The surrogate for `(1 − g/f)/2`, in `[0, 1/2]`.
#[inline]
pub fn surrogate_drift(psi: f64, params: &ReducedParams) -> f64 {
    let c = psi.cos().abs();
    match params.drift_model {
        DriftModel::Banded => {
            if c <= params.kappa3 {
                params.c3p * c
            } else {
                params.c4p
            }
        }
        DriftModel::Min => params.c4p.min(params.c3p * c),
    }
}

/// `A(ψ) = sign cos ψ`, with `+1` at `cos ψ = 0`.
#[inline]
pub fn branch_sign(psi: f64) -> f64 {
    if psi.cos() < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub rho: f64,
    pub psi: f64,
    pub s: f64,
}

/// Raw draws for one step: three standard normals and two uniforms on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepNoise {
    pub z_rho: f64,
    pub z_psi: f64,
    pub z_perp: f64,
    pub u1: f64,
    pub u2: f64,
}

impl StepNoise {
    pub fn draw<N: Noise + ?Sized>(noise: &mut N, params: &ReducedParams) -> Self {
        let z_rho = noise.gaussian();
        let z_psi = noise.gaussian();
        let z_perp = if params.perturbation.a0 != 0.0 {
            noise.gaussian()
        } else {
            0.0
        };
        let (u1, u2) = match params.epsilon_mode {
            EpsilonMode::Uniform if params.eps > 0.0 => (noise.uniform(), noise.uniform()),
            _ => (0.5, 0.5),
        };
        Self {
            z_rho,
            z_psi,
            z_perp,
            u1,
            u2,
        }
    }
}

/// Increments produced by one step, exposed for bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: ReducedState,
    /// `ΔW` of the `ρ` equation.
    pub dw: f64,
    /// `D(ψ)·ds` (left endpoint).
    pub drift: f64,
}

/// One Euler–Maruyama step of the reduced system.
#[inline]
pub fn step_reduced(
    state: ReducedState,
    params: &ReducedParams,
    ds: f64,
    z: &StepNoise,
) -> StepOutcome {
    let sq = ds.sqrt();
    let dw = sq * z.z_rho;
    let drift = surrogate_drift(state.psi, params) * ds;
    let rho = state.rho + dw - drift;

    let psi = if params.frozen_psi {
        state.psi
    } else {
        let (e1, e2) = match params.epsilon_mode {
            EpsilonMode::Uniform => (
                params.eps * (2.0 * z.u1 - 1.0),
                params.eps * (2.0 * z.u2 - 1.0),
            ),
            EpsilonMode::Constant { eps1, eps2 } => (eps1, eps2),
        };
        let rho_c = params.noise_corr;
        let dw_psi = sq * (rho_c * z.z_rho + (1.0 - rho_c * rho_c).sqrt() * z.z_psi);
        let pert = &params.perturbation;
        let a = pert.a(state.s);
        let b = pert.b(state.s);
        state.psi
            + (2.0 + e1) * dw_psi
            + a * sq * z.z_perp
            + (branch_sign(state.psi) * (2.0 + e2) + b) * ds
    };
    StepOutcome {
        state: ReducedState {
            rho,
            psi,
            s: state.s + ds,
        },
        dw,
        drift,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedOptions {
    pub ds: f64,
    /// Horizon `S` in `s`-time.
    pub horizon: f64,
    pub rho0: f64,
    pub psi0: f64,
    /// Spacing of recorded samples in `s`-time; `ds` records every step.
    pub sample_every: f64,
    /// Levels whose last exit time is tracked at full step resolution.
    pub exit_levels: Vec<f64>,
}

impl ReducedOptions {
    pub fn new(ds: f64, horizon: f64) -> Self {
        Self {
            ds,
            horizon,
            rho0: 0.0,
            psi0: 0.0,
            sample_every: 1.0,
            exit_levels: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<(), ParameterError> {
        let bad = |name, value, reason| Err(ParameterError::Invalid { name, value, reason });
        if !(self.ds > 0.0) {
            return bad("ds", self.ds, "must be positive");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon", self.horizon, "must be positive");
        }
        if !(self.sample_every >= self.ds) {
            return bad("sample_every", self.sample_every, "must be at least ds");
        }
        Ok(())
    }

    fn steps(&self) -> u64 {
        (self.horizon / self.ds).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedSample {
    pub s: f64,
    pub rho: f64,
    pub psi: f64,
    /// Driving Brownian motion of `ρ`.
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LastExit {
    pub level: f64,
    /// Last recorded time with `ρ > level`; `None` if `ρ` never exceeded it.
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedPath {
    pub rho0: f64,
    pub samples: Vec<ReducedSample>,
    /// `∫_{I_n} D(ψ) ds` for the unit intervals `I_n = [n−1, n)`, `n = 1, 2, …`.
    pub interval_drift: Vec<f64>,
    /// Fraction of `s`-time spent in the band `|cos ψ| ≤ kappa3`.
    pub band_fraction: f64,
    pub last_exits: Vec<LastExit>,
}

impl ReducedPath {
    pub fn final_sample(&self) -> &ReducedSample {
        self.samples.last().expect("a path has at least its initial sample")
    }

    /// `ρ` at the recorded sample nearest to `s` (within half a sample spacing).
    pub fn sample_at(&self, s: f64) -> Option<&ReducedSample> {
        let best = self
            .samples
            .iter()
            .min_by(|a, b| (a.s - s).abs().total_cmp(&(b.s - s).abs()))?;
        let spacing = if self.samples.len() > 1 {
            self.samples[1].s - self.samples[0].s
        } else {
            0.0
        };
        ((best.s - s).abs() <= 0.5 * spacing + 1e-9).then_some(best)
    }

    /// Cumulative `∫₀^n −D ds` at integer `n = 0, …, len(interval_drift)`.
    pub fn cumulative_drift(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.interval_drift.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for d in &self.interval_drift {
            acc -= d;
            out.push(acc);
        }
        out
    }
}

/// Simulates one reduced path to the horizon.
pub fn simulate_reduced<N: Noise + ?Sized>(
    params: &ReducedParams,
    opts: &ReducedOptions,
    noise: &mut N,
) -> ReducedPath {
    let ds = opts.ds;
    let n = opts.steps();
    let stride = ((opts.sample_every / ds).round() as u64).max(1);
    let intervals = (opts.horizon + 1e-9).floor() as usize;
    let mut interval_drift = vec![0.0; intervals];
    let mut last: Vec<Option<f64>> = opts
        .exit_levels
        .iter()
        .map(|&l| (opts.rho0 > l).then_some(0.0))
        .collect();
    let mut state = ReducedState {
        rho: opts.rho0,
        psi: opts.psi0,
        s: 0.0,
    };
    let mut w = 0.0;
    let mut band_steps = 0u64;
    let mut samples = Vec::with_capacity((n / stride) as usize + 2);
    samples.push(ReducedSample {
        s: 0.0,
        rho: state.rho,
        psi: state.psi,
        w,
    });

    for k in 0..n {
        if state.psi.cos().abs() <= params.kappa3 {
            band_steps += 1;
        }
        let z = StepNoise::draw(noise, params);
        let out = step_reduced(state, params, ds, &z);
        let idx = ((k as f64 + 0.5) * ds).floor() as usize;
        if let Some(slot) = interval_drift.get_mut(idx) {
            *slot += out.drift;
        }
        w += out.dw;
        state = out.state;
        state.s = (k + 1) as f64 * ds;
        for (slot, &level) in last.iter_mut().zip(&opts.exit_levels) {
            if state.rho > level {
                *slot = Some(state.s);
            }
        }
        if (k + 1) % stride == 0 || k + 1 == n {
            samples.push(ReducedSample {
                s: state.s,
                rho: state.rho,
                psi: state.psi,
                w,
            });
        }
    }

    ReducedPath {
        rho0: opts.rho0,
        samples,
        interval_drift,
        band_fraction: if n > 0 { band_steps as f64 / n as f64 } else { 0.0 },
        last_exits: opts
            .exit_levels
            .iter()
            .zip(last)
            .map(|(&level, time)| LastExit { level, time })
            .collect(),
    }
}

/// Last time `ρ > level`, from the full-resolution tracker if the level was tracked
/// during simulation and from the recorded samples otherwise.
pub fn last_exit(path: &ReducedPath, level: f64) -> Option<f64> {
    if let Some(e) = path.last_exits.iter().find(|e| e.level == level) {
        return e.time;
    }
    path.samples
        .iter()
        .rev()
        .find(|s| s.rho > level)
        .map(|s| s.s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliStats {
    pub delta: f64,
    /// Mean of `X_n` over all paths and intervals.
    pub gamma_hat: f64,
    pub intervals: usize,
    /// `X_n = 1{∫_{I_n} D ds ≥ delta}` per path.
    pub indicators: Vec<Vec<bool>>,
}

pub fn bernoulli_stats(paths: &[ReducedPath], delta: f64) -> Result<BernoulliStats, ParameterError> {
    if !(delta > 0.0) {
        return Err(ParameterError::Invalid {
            name: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let indicators: Vec<Vec<bool>> = paths
        .iter()
        .map(|p| p.interval_drift.iter().map(|&d| d >= delta).collect())
        .collect();
    let total: usize = indicators.iter().map(Vec::len).sum();
    let ones: usize = indicators
        .iter()
        .map(|v| v.iter().filter(|&&x| x).count())
        .sum();
    Ok(BernoulliStats {
        delta,
        gamma_hat: if total > 0 { ones as f64 / total as f64 } else { 0.0 },
        intervals: paths.first().map_or(0, |p| p.interval_drift.len()),
        indicators,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub ci: (f64, f64),
    pub level: f64,
}

impl DecayFit {
    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci.0 <= x && x <= self.ci.1
    }
}

/// Least-squares slope of `y` against `0, 1, …, len−1`.
fn ls_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Minimum horizon (in unit intervals) for [`linear_decay_fit`].
pub const MIN_DECAY_INTERVALS: usize = 100;

/// Slope of the ensemble mean of `∫₀^s −D` against `s`, with a 99% bootstrap
/// interval over paths.
///
/// The least-squares slope is linear in the data, so the slope of the mean equals the
/// mean of per-path slopes and the bootstrap resamples those.
pub fn linear_decay_fit<N: Noise + ?Sized>(
    paths: &[ReducedPath],
    resamples: usize,
    noise: &mut N,
) -> Result<DecayFit, ParameterError> {
    let intervals = paths.first().map_or(0, |p| p.interval_drift.len());
    if paths.is_empty() || intervals < MIN_DECAY_INTERVALS {
        return Err(ParameterError::Invalid {
            name: "horizon",
            value: intervals as f64,
            reason: "linear decay fit needs a horizon of at least 100",
        });
    }
    let slopes: Vec<f64> = paths.iter().map(|p| ls_slope(&p.cumulative_drift())).collect();
    let n = slopes.len();
    let slope = slopes.iter().sum::<f64>() / n as f64;
    let mut boot: Vec<f64> = (0..resamples.max(1))
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..n {
                let i = ((noise.uniform() * n as f64) as usize).min(n - 1);
                acc += slopes[i];
            }
            acc / n as f64
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let level = 0.99;
    let q = |p: f64| boot[((p * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
    let (lo, hi) = (q(0.005).min(slope), q(0.995).max(slope));
    Ok(DecayFit {
        slope,
        ci: (lo, hi),
        level,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublinearityReport {
    pub checkpoints: Vec<f64>,
    /// Maximum over paths of `|W_s|/s` at each checkpoint.
    pub max_ratio: Vec<f64>,
    pub mean_ratio: Vec<f64>,
    /// Fraction of paths whose ratio at the last checkpoint is below the ratio at the
    /// first.
    pub fraction_decreasing: f64,
    /// Fraction of paths with ratio below `threshold` at the last checkpoint.
    pub fraction_below: f64,
    pub threshold: f64,
}

/// `|W_s|/s` at the given checkpoints (ascending) for every path.
pub fn sublinearity_check(
    paths: &[ReducedPath],
    checkpoints: &[f64],
    threshold: f64,
) -> Result<SublinearityReport, ParameterError> {
    if checkpoints.is_empty() || checkpoints.iter().any(|&c| !(c > 0.0)) {
        return Err(ParameterError::Invalid {
            name: "checkpoints",
            value: f64::NAN,
            reason: "need at least one positive checkpoint",
        });
    }
    let mut ratios = vec![Vec::with_capacity(paths.len()); checkpoints.len()];
    for p in paths {
        for (j, &c) in checkpoints.iter().enumerate() {
            let s = p.sample_at(c).ok_or(ParameterError::Invalid {
                name: "checkpoints",
                value: c,
                reason: "no recorded sample at this time",
            })?;
            ratios[j].push(s.w.abs() / c);
        }
    }
    let n = paths.len().max(1) as f64;
    let first = &ratios[0];
    let lastv = &ratios[checkpoints.len() - 1];
    Ok(SublinearityReport {
        checkpoints: checkpoints.to_vec(),
        max_ratio: ratios.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect(),
        mean_ratio: ratios.iter().map(|r| r.iter().sum::<f64>() / n).collect(),
        fraction_decreasing: first.iter().zip(lastv).filter(|(a, b)| b < a).count() as f64 / n,
        fraction_below: lastv.iter().filter(|&&r| r < threshold).count() as f64 / n,
        threshold,
    })
}

/// Supplies `(f, g)` with `0 ≤ g ≤ f` along a path in `τ`-time.
pub trait FgSchedule {
    fn next(&mut self, tau: f64) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFg {
    pub f: f64,
    pub g: f64,
}

impl FgSchedule for ConstantFg {
    fn next(&mut self, _tau: f64) -> (f64, f64) {
        (self.f, self.g)
    }
}

/// `(f, g)` read from the principal branch along a great-circle path whose
/// coordinates `θ`, `φ` perform independent Brownian motions with volatility `vol`.
pub struct DrivenGreatCircle<N> {
    pub theta: f64,
    pub phi: f64,
    pub vol: f64,
    pub dtau: f64,
    pub noise: N,
}

impl<N: Noise> FgSchedule for DrivenGreatCircle<N> {
    fn next(&mut self, _tau: f64) -> (f64, f64) {
        let b = fg(self.theta, self.phi).principal();
        let sq = self.vol * self.dtau.sqrt();
        self.theta += sq * self.noise.gaussian();
        self.phi += sq * self.noise.gaussian();
        (b.f, b.g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselReport {
    pub steps: u64,
    /// `max_k (r_k − R_k)`.
    pub max_above_bessel: f64,
    /// `max_k (r₀ + W_k − r_k)`.
    pub max_below_brownian: f64,
    /// True if `r` and `R` agreed bit for bit at every step.
    pub identical: bool,
    /// Set when `r` or `R` reached zero; the comparison stops there.
    pub truncated: bool,
}

/// Pathwise comparison in `τ`-time of
/// `dr = dW + (g/f)/(2r) dτ` against the 2-d Bessel process `dR = dW + 1/(2R) dτ`
/// and the Brownian motion `r₀ + W`, all driven by the same `W`.
pub fn bessel_domination<S: FgSchedule + ?Sized, N: Noise + ?Sized>(
    r0: f64,
    schedule: &mut S,
    horizon: f64,
    dtau: f64,
    noise: &mut N,
) -> Result<BesselReport, ParameterError> {
    if !(r0 > 0.0) {
        return Err(ParameterError::Invalid {
            name: "r0",
            value: r0,
            reason: "must be positive",
        });
    }
    let n = (horizon / dtau).round() as u64;
    let sq = dtau.sqrt();
    let (mut r, mut big_r, mut w) = (r0, r0, 0.0);
    let mut report = BesselReport {
        steps: 0,
        max_above_bessel: 0.0,
        max_below_brownian: 0.0,
        identical: true,
        truncated: false,
    };
    for k in 0..n {
        let (f, g) = schedule.next(k as f64 * dtau);
        let q = if f > 0.0 { (g / f).clamp(0.0, 1.0) } else { 1.0 };
        let dw = sq * noise.gaussian();
        r = r + dw + q * dtau / (2.0 * r);
        big_r = big_r + dw + dtau / (2.0 * big_r);
        w += dw;
        if !(r > 0.0 && big_r > 0.0) {
            report.truncated = true;
            break;
        }
        report.steps = k + 1;
        report.identical &= r == big_r;
        report.max_above_bessel = report.max_above_bessel.max(r - big_r);
        report.max_below_brownian = report.max_below_brownian.max(r0 + w - r);
    }
    Ok(report)
}
