//! The configuration space `(S²)³` of a coupled pair of points on a surface.
//!
//! A configuration is the triple `(m(x), m(y), α)` of the two Gauss-map normals and
//! the unit chord direction `α = (x − y)/|x − y|`. When the three vectors lie on one
//! great circle, the signed arc lengths `θ`, `φ` from `α` to `m(x)`, `m(y)` determine
//! the coefficients of the chord-length SDE `dr = √f dW + g/(2r) dt`:
//!
//! ```text
//! f = (sin θ − A sin φ)²,   g = (cos θ − A cos φ)²,   A = sign cos(θ + φ)
//! f − g = 2 cos(θ + φ) (A − cos(θ − φ))
//! ```
//!
//! Off the great-circle set, `θ` and `φ` are extended by projecting onto the great
//! circle through `α` that best fits `m(x)` and `m(y)` in the least-squares sense.

use core::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigurationError, ParameterError};
use crate::noise::Noise;
use crate::sphere::{self, cross, dot, norm, scale, sphere_distance, sub, wrap_angle, Vec3};
use crate::surface::{MinimalGraph, Point2};
#[allow(unused_imports)]
use num_traits::Float;

const UNIT_TOL: f64 = 1e-12;
/// Membership slack for every region inequality.
pub const REGION_TOL: f64 = 1e-9;
/// `|cos(θ+φ)|` below which `A` is ambiguous and both branches are returned.
pub const BRANCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub m_x: Vec3,
    pub m_y: Vec3,
    pub alpha: Vec3,
}

impl Configuration {
    pub fn new(m_x: Vec3, m_y: Vec3, alpha: Vec3) -> Result<Self, ConfigurationError> {
        for (name, v) in [("m_x", m_x), ("m_y", m_y), ("alpha", alpha)] {
            let n = norm(v);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(ConfigurationError::NotUnit(name, n));
            }
        }
        Ok(Self { m_x, m_y, alpha })
    }

    /// Spherical distance between the two normals.
    pub fn separation(&self) -> f64 {
        sphere_distance(self.m_x, self.m_y)
    }

    /// `det[m_x, m_y, α]`; zero exactly on the great-circle set.
    pub fn coplanarity(&self) -> f64 {
        sphere::det3(self.m_x, self.m_y, self.alpha)
    }
}

/// Configuration of the pair `(p, q)` on a surface.
pub fn configuration_of<S: MinimalGraph + ?Sized>(
    surface: &S,
    p: Point2,
    q: Point2,
) -> Result<Configuration, ConfigurationError> {
    let jp = surface.jet(p)?;
    let jq = surface.jet(q)?;
    let chord = sub([p.x, p.y, jp.height], [q.x, q.y, jq.height]);
    let len = norm(chord);
    if len < 1e-14 {
        return Err(ConfigurationError::Degenerate(len));
    }
    Ok(Configuration {
        m_x: jp.normal(),
        m_y: jq.normal(),
        alpha: scale(chord, 1.0 / len),
    })
}

pub fn is_great_circle(config: &Configuration, tol: f64) -> bool {
    config.coplanarity().abs() <= tol
}

/// Which of the two circle orientations the coordinates use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Circle normal has non-negative third component (ties broken by the second,
    /// then the first component).
    Canonical,
    Flipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreatCircleCoords {
    pub theta: f64,
    pub phi: f64,
    /// Unit normal of the circle's plane; the circle is oriented by `normal × α`.
    pub normal: Vec3,
    pub orientation: Orientation,
}

impl GreatCircleCoords {
    pub fn sum(&self) -> f64 {
        self.theta + self.phi
    }

    /// The same circle with the opposite orientation: `(θ, φ) → (−θ, −φ)`.
    pub fn flipped(&self) -> Self {
        Self {
            theta: wrap_angle(-self.theta),
            phi: wrap_angle(-self.phi),
            normal: scale(self.normal, -1.0),
            orientation: match self.orientation {
                Orientation::Canonical => Orientation::Flipped,
                Orientation::Flipped => Orientation::Canonical,
            },
        }
    }

    /// Point at signed arc length `angle` from `alpha` along the circle.
    pub fn point_at(&self, alpha: Vec3, angle: f64) -> Vec3 {
        let t = cross(self.normal, alpha);
        let (s, c) = angle.sin_cos();
        [
            c * alpha[0] + s * t[0],
            c * alpha[1] + s * t[1],
            c * alpha[2] + s * t[2],
        ]
    }

    /// `(m_x, m_y)` rebuilt from `α` and the coordinates.
    pub fn reconstruct(&self, alpha: Vec3) -> (Vec3, Vec3) {
        (self.point_at(alpha, self.theta), self.point_at(alpha, self.phi))
    }
}

fn canonical(n: Vec3) -> Vec3 {
    const TIE: f64 = 1e-12;
    let flip = if n[2].abs() > TIE {
        n[2] < 0.0
    } else if n[1].abs() > TIE {
        n[1] < 0.0
    } else {
        n[0] < 0.0
    };
    if flip {
        scale(n, -1.0)
    } else {
        n
    }
}

/// A unit vector orthogonal to `a`, built from the coordinate axis least aligned
/// with it.
fn orthogonal_unit(a: Vec3) -> Vec3 {
    let axis = if a[0].abs() <= a[1].abs() && a[0].abs() <= a[2].abs() {
        [1.0, 0.0, 0.0]
    } else if a[1].abs() <= a[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    sphere::normalize(cross(a, axis)).unwrap_or([0.0, 0.0, 1.0])
}

/// Normal of the great circle through `α` minimising the summed squared distances of
/// `m_x` and `m_y` to its plane.
fn best_fit_normal(c: &Configuration) -> Vec3 {
    let e1 = orthogonal_unit(c.alpha);
    let e2 = cross(c.alpha, e1);
    let (p1, p2) = (dot(c.m_x, e1), dot(c.m_x, e2));
    let (q1, q2) = (dot(c.m_y, e1), dot(c.m_y, e2));
    let m11 = p1 * p1 + q1 * q1;
    let m22 = p2 * p2 + q2 * q2;
    let m12 = p1 * p2 + q1 * q2;
    // Major axis of the 2×2 scatter matrix; the normal is the minor axis.
    let major = 0.5 * (2.0 * m12).atan2(m11 - m22);
    let minor = major + FRAC_PI_2;
    let (s, co) = minor.sin_cos();
    let n = [
        co * e1[0] + s * e2[0],
        co * e1[1] + s * e2[1],
        co * e1[2] + s * e2[2],
    ];
    sphere::normalize(n).unwrap_or(e2)
}

fn signed_arc(normal: Vec3, alpha: Vec3, m: Vec3) -> f64 {
    let t = cross(normal, alpha);
    wrap_angle(dot(t, m).atan2(dot(alpha, m)))
}

/// Extended coordinates, defined for every configuration.
///
/// On the great-circle set they coincide with [`great_circle_coords`].
pub fn extended_coords(config: &Configuration) -> GreatCircleCoords {
    let normal = canonical(best_fit_normal(config));
    GreatCircleCoords {
        theta: signed_arc(normal, config.alpha, config.m_x),
        phi: signed_arc(normal, config.alpha, config.m_y),
        normal,
        orientation: Orientation::Canonical,
    }
}

/// Default coplanarity tolerance for [`great_circle_coords`].
pub const GREAT_CIRCLE_TOL: f64 = 1e-9;

/// Signed arc lengths from `α` to `m_x` and `m_y` on their common great circle, in the
/// canonical orientation.
pub fn great_circle_coords(config: &Configuration) -> Result<GreatCircleCoords, ConfigurationError> {
    let det = config.coplanarity();
    if det.abs() > GREAT_CIRCLE_TOL {
        return Err(ConfigurationError::NotGreatCircle(det.abs()));
    }
    Ok(extended_coords(config))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgBranch {
    /// `A ∈ {−1, 1}`.
    pub a: f64,
    pub f: f64,
    pub g: f64,
}

/// One or two `(A, f, g)` branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgBranches {
    branches: [FgBranch; 2],
    len: usize,
}

impl FgBranches {
    pub fn as_slice(&self) -> &[FgBranch] {
        &self.branches[..self.len]
    }

    /// The branch with `A = sign cos(θ+φ)`, or `A = +1` on the ambiguous set.
    pub fn principal(&self) -> FgBranch {
        self.branches[0]
    }

    pub fn is_ambiguous(&self) -> bool {
        self.len == 2
    }
}

#[inline]
pub fn fg_branch(theta: f64, phi: f64, a: f64) -> FgBranch {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let fs = st - a * sp;
    let gc = ct - a * cp;
    FgBranch {
        a,
        f: fs * fs,
        g: gc * gc,
    }
}

/// The coefficients `f`, `g` on the great-circle set.
///
/// When `|cos(θ+φ)| ≤ 1e−12` the sign `A` depends on the geometry of the surface
/// pair, so both branches are returned (`A = +1` first).
pub fn fg(theta: f64, phi: f64) -> FgBranches {
    let c = (theta + phi).cos();
    if c.abs() > BRANCH_TOL {
        let a = c.signum();
        let b = fg_branch(theta, phi, a);
        FgBranches {
            branches: [b, b],
            len: 1,
        }
    } else {
        FgBranches {
            branches: [fg_branch(theta, phi, 1.0), fg_branch(theta, phi, -1.0)],
            len: 2,
        }
    }
}

/// `f − g = 2 cos(θ+φ)(A − cos(θ−φ))`.
#[inline]
pub fn f_minus_g(theta: f64, phi: f64, a: f64) -> f64 {
    2.0 * (theta + phi).cos() * (a - (theta - phi).cos())
}

/// Checks of the `f`, `g` formulas over a uniform `(θ, φ)` grid on `[0, 2π)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgGridReport {
    pub grid: usize,
    /// Minimum of `f − g` on the principal branch.
    pub min_principal_f_minus_g: f64,
    /// Largest deviation between `f − g` from the formulas and the closed-form
    /// identity, over both branches.
    pub max_identity_error: f64,
    pub ambiguous_points: usize,
}

pub fn verify_fg_grid(grid: usize) -> FgGridReport {
    let step = 2.0 * PI / grid as f64;
    let mut min_fg = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    let mut ambiguous = 0;
    for i in 0..grid {
        let theta = i as f64 * step;
        for j in 0..grid {
            let phi = j as f64 * step;
            let branches = fg(theta, phi);
            let p = branches.principal();
            min_fg = min_fg.min(p.f - p.g);
            if branches.is_ambiguous() {
                ambiguous += 1;
            }
            for a in [1.0, -1.0] {
                let b = fg_branch(theta, phi, a);
                max_err = max_err.max(((b.f - b.g) - f_minus_g(theta, phi, a)).abs());
            }
        }
    }
    FgGridReport {
        grid,
        min_principal_f_minus_g: min_fg,
        max_identity_error: max_err,
        ambiguous_points: ambiguous,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    S4,
    S3,
    S2,
    S1,
    Outside,
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::S4 => "S4",
            Region::S3 => "S3",
            Region::S2 => "S2",
            Region::S1 => "S1",
            Region::Outside => "outside",
        }
    }
}

/// Parameters of the nested regions `S₄ ⊂ S₃ ⊂ S₂ ⊂ S₁`.
///
/// - `S₁`: normals separated by `d ∈ [c1, π − c1]`.
/// - `S₂`: `|cos(θ+φ)| ≤ c2` in extended coordinates and `d ∈ [s, π − s]` with
///   `s = (3·c1 − delta3)/2`, halfway between the separation bounds of `S₁` and `S₃`.
/// - `S₃`: within `delta3` of `S₄` (see [`distance_to_s4`]).
/// - `S₄`: great-circle configurations with `cos(θ+φ) = 0` and `d ∈ [2c1, π − 2c1]`.
///
/// Distances on `(S²)³` use the sum of the three spherical distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionParams {
    pub c1: f64,
    pub c2: f64,
    pub delta3: f64,
    pub tol_gc: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            c1: 0.1,
            c2: 0.1,
            delta3: 0.05,
            tol_gc: 1e-9,
        }
    }
}

/// Lower bounds on the distance between the boundaries of consecutive regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionGaps {
    pub s4_s3: f64,
    pub s3_s2: f64,
    pub s2_s1: f64,
}

impl RegionGaps {
    pub fn all_positive(&self) -> bool {
        self.s4_s3 > 0.0 && self.s3_s2 > 0.0 && self.s2_s1 > 0.0
    }
}

impl RegionParams {
    /// Lower separation bound of `S₂`.
    pub fn s2_separation(&self) -> f64 {
        0.5 * (3.0 * self.c1 - self.delta3)
    }

    /// Boundary gaps implied by the parameters.
    ///
    /// Moving a configuration by `ℓ` in the summed metric changes the separation by at
    /// most `ℓ` and `θ+φ` by at most `2ℓ`, which bounds how close `S₃` comes to the
    /// `|cos(θ+φ)| = c2` face of `S₂`.
    pub fn gaps(&self) -> RegionGaps {
        let sep_gap = (2.0 * self.c1 - self.delta3) - self.s2_separation();
        let cos_gap = if self.c2 < 1.0 {
            0.5 * self.c2.asin() - self.delta3
        } else {
            f64::INFINITY
        };
        RegionGaps {
            s4_s3: self.delta3,
            s3_s2: sep_gap.min(cos_gap),
            s2_s1: self.s2_separation() - self.c1,
        }
    }

    pub fn validate(&self) -> Result<RegionGaps, ParameterError> {
        for (name, value) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("delta3", self.delta3),
            ("tol_gc", self.tol_gc),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ParameterError::Invalid {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        if 4.0 * self.c1 >= PI {
            return Err(ParameterError::Nesting("c1 must be below pi/4"));
        }
        let gaps = self.gaps();
        if gaps.s3_s2 <= 0.0 {
            return Err(ParameterError::Nesting("S3 is not strictly inside S2"));
        }
        if gaps.s2_s1 <= 0.0 {
            return Err(ParameterError::Nesting("S2 is not strictly inside S1"));
        }
        Ok(gaps)
    }
}

/// Nearest point of `S₄` found by moving within the best-fit great circle, and its
/// distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S4Projection {
    pub point: Configuration,
    pub distance: f64,
}

/// Distance from `config` to a point of `S₄`, in the summed metric on `(S²)³`.
///
/// The candidate keeps the best-fit great circle and moves `α`, `m_x`, `m_y` along it:
/// `θ+φ` is shifted to the nearest zero of its cosine and `θ−φ` is widened or narrowed
/// into `[2c1, π − 2c1]` where necessary, with the cheapest split of the shift between
/// the three points. The result bounds the true distance to `S₄` from above and is
/// exact for on-circle moves.
pub fn distance_to_s4(config: &Configuration, params: &RegionParams) -> S4Projection {
    let gc = extended_coords(config);
    let sum = gc.sum();
    let diff = wrap_angle(gc.theta - gc.phi);

    // σ + Δ ≡ π/2 (mod π)
    let r = wrap_angle(2.0 * (sum - FRAC_PI_2)) / 2.0;
    let shift = -r;

    let lo = 2.0 * params.c1;
    let hi = PI - 2.0 * params.c1;
    let sgn = if diff < 0.0 { -1.0 } else { 1.0 };
    let widen = if diff.abs() < lo {
        sgn * (lo - diff.abs())
    } else if diff.abs() > hi {
        -sgn * (diff.abs() - hi)
    } else {
        0.0
    };

    // Moving m_x by (a+e)/2 and m_y by (a−e)/2 costs max(|a|, |e|), so up to |e| of the
    // sum shift is carried by the normals for free; α carries the rest at half cost.
    let carried = shift.signum() * widen.abs().min(shift.abs());
    let beta = -(shift - carried) / 2.0;
    let theta = gc.theta + 0.5 * (carried + widen);
    let phi = gc.phi + 0.5 * (carried - widen);

    let alpha = gc.point_at(config.alpha, beta);
    let m_x = gc.point_at(config.alpha, theta);
    let m_y = gc.point_at(config.alpha, phi);
    let distance = sphere_distance(config.alpha, alpha)
        + sphere_distance(config.m_x, m_x)
        + sphere_distance(config.m_y, m_y);
    S4Projection {
        point: Configuration {
            m_x,
            m_y,
            alpha,
        },
        distance,
    }
}

fn in_separation_band(sep: f64, lo: f64) -> bool {
    sep >= lo - REGION_TOL && sep <= PI - lo + REGION_TOL
}

fn in_s4(config: &Configuration, params: &RegionParams) -> bool {
    if !is_great_circle(config, params.tol_gc) {
        return false;
    }
    let gc = extended_coords(config);
    gc.sum().cos().abs() <= REGION_TOL && in_separation_band(config.separation(), 2.0 * params.c1)
}

/// Innermost region containing the configuration.
pub fn classify_region(
    config: &Configuration,
    params: &RegionParams,
) -> Result<Region, ParameterError> {
    params.validate()?;
    Ok(classify_unchecked(config, params))
}

fn classify_unchecked(config: &Configuration, params: &RegionParams) -> Region {
    let sep = config.separation();
    if !in_separation_band(sep, params.c1) {
        return Region::Outside;
    }
    if in_s4(config, params) {
        return Region::S4;
    }
    if distance_to_s4(config, params).distance <= params.delta3 + REGION_TOL {
        return Region::S3;
    }
    let gc = extended_coords(config);
    if gc.sum().cos().abs() <= params.c2 + REGION_TOL
        && in_separation_band(sep, params.s2_separation())
    {
        return Region::S2;
    }
    Region::S1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub s4: usize,
    pub s3: usize,
    pub s2: usize,
    pub s1: usize,
    pub outside: usize,
}

impl RegionCounts {
    fn add(&mut self, r: Region) {
        match r {
            Region::S4 => self.s4 += 1,
            Region::S3 => self.s3 += 1,
            Region::S2 => self.s2 += 1,
            Region::S1 => self.s1 += 1,
            Region::Outside => self.outside += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Empirical minimum of `(f − g)/|cos(θ+φ)|` over sampled `S₃` configurations.
    pub c3: f64,
    /// Empirical minimum of `f − g` over sampled `S₁ \ S₃` configurations.
    pub c4: f64,
    pub samples: usize,
    pub counts: RegionCounts,
    pub gaps: RegionGaps,
}

fn random_unit<N: Noise + ?Sized>(noise: &mut N) -> Vec3 {
    loop {
        let v = [noise.gaussian(), noise.gaussian(), noise.gaussian()];
        if let Some(u) = sphere::normalize(v) {
            return u;
        }
    }
}

/// A random great-circle configuration whose normals are separated by a distance in
/// `[lo, π − lo]`.
pub fn sample_great_circle<N: Noise + ?Sized>(noise: &mut N, lo: f64) -> Configuration {
    let alpha = random_unit(noise);
    let raw = random_unit(noise);
    let normal = sphere::normalize(sub(raw, scale(alpha, dot(raw, alpha))))
        .unwrap_or_else(|| orthogonal_unit(alpha));
    let coords = GreatCircleCoords {
        theta: 0.0,
        phi: 0.0,
        normal,
        orientation: Orientation::Canonical,
    };
    loop {
        let theta = PI * (2.0 * noise.uniform() - 1.0);
        let phi = PI * (2.0 * noise.uniform() - 1.0);
        let sep = wrap_angle(theta - phi).abs();
        if sep >= lo && sep <= PI - lo {
            return Configuration {
                m_x: coords.point_at(alpha, theta),
                m_y: coords.point_at(alpha, phi),
                alpha,
            };
        }
    }
}

/// Empirical `c3`, `c4` from `n` random great-circle configurations.
///
/// Samples are restricted to normals separated by `[2c1, π − 2c1]`, the band on which
/// `S₄` is defined. Below `2c1` the set `{cos(θ+φ) = 0}` has `f = g` but lies outside
/// `S₃`, and near-antipodal normals with `A = −1` give `f = g = 0`; neither admits a
/// positive `c4` or `c3`.
pub fn calibrate_constants<N: Noise + ?Sized>(
    params: &RegionParams,
    n: usize,
    noise: &mut N,
) -> Result<Calibration, ParameterError> {
    let gaps = params.validate()?;
    if n < 1000 {
        return Err(ParameterError::Invalid {
            name: "n",
            value: n as f64,
            reason: "at least 1000 samples are required",
        });
    }
    let mut counts = RegionCounts::default();
    let mut c3 = f64::INFINITY;
    let mut c4 = f64::INFINITY;
    for _ in 0..n {
        let config = sample_great_circle(noise, 2.0 * params.c1);
        let region = classify_unchecked(&config, params);
        counts.add(region);
        let gc = extended_coords(&config);
        let cos_sum = gc.sum().cos();
        match region {
            Region::S3 if cos_sum.abs() >= REGION_TOL => {
                let b = fg(gc.theta, gc.phi).principal();
                c3 = c3.min((b.f - b.g) / cos_sum.abs());
            }
            Region::S2 | Region::S1 => {
                let b = fg(gc.theta, gc.phi).principal();
                c4 = c4.min(b.f - b.g);
            }
            _ => {}
        }
    }
    if !c3.is_finite() {
        return Err(ParameterError::EmptyRegion("S3"));
    }
    if !c4.is_finite() {
        return Err(ParameterError::EmptyRegion("S1 \\ S3"));
    }
    Ok(Calibration {
        c3,
        c4,
        samples: n,
        counts,
        gaps,
    })
}
