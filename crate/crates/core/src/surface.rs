//! Minimal graphs `z = u(x, y)` over planar domains.
//!
//! A surface supplies its height, gradient and Hessian in closed form together with
//! a signed distance to the domain boundary (negative inside). Everything else (Gauss
//! map, curvature, metric, minimal-surface residual) is derived from that 2-jet.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, ParameterError};
use crate::sphere::Vec3;
#[allow(unused_imports)]
use num_traits::Float;

/// A point of the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

/// Height, gradient and Hessian of `u` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub height: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

/// The induced metric `I + ∇u ∇uᵀ`, its inverse and `√det`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    pub metric: [[f64; 2]; 2],
    pub inverse: [[f64; 2]; 2],
    pub sqrt_det: f64,
}

impl Jet {
    /// `W = 1 + |∇u|²`, the determinant of the graph metric.
    #[inline]
    pub fn w(&self) -> f64 {
        1.0 + self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1]
    }

    /// Upward unit normal `(-u_x, -u_y, 1)/√W`.
    #[inline]
    pub fn normal(&self) -> Vec3 {
        let inv = 1.0 / self.w().sqrt();
        [-self.grad[0] * inv, -self.grad[1] * inv, inv]
    }

    /// `K = det(Hess u) / W²`.
    #[inline]
    pub fn gauss_curvature(&self) -> f64 {
        let h = &self.hess;
        let w = self.w();
        (h[0][0] * h[1][1] - h[0][1] * h[1][0]) / (w * w)
    }

    /// `(1 + u_y²) u_xx − 2 u_x u_y u_xy + (1 + u_x²) u_yy`.
    #[inline]
    pub fn minimal_residual(&self) -> f64 {
        let [ux, uy] = self.grad;
        let h = &self.hess;
        (1.0 + uy * uy) * h[0][0] - 2.0 * ux * uy * h[0][1] + (1.0 + ux * ux) * h[1][1]
    }

    pub fn metric(&self) -> MetricData {
        let [ux, uy] = self.grad;
        let w = self.w();
        MetricData {
            metric: [[1.0 + ux * ux, ux * uy], [ux * uy, 1.0 + uy * uy]],
            inverse: [
                [1.0 - ux * ux / w, -ux * uy / w],
                [-ux * uy / w, 1.0 - uy * uy / w],
            ],
            sqrt_det: w.sqrt(),
        }
    }
}

/// A minimal graph with analytic derivatives.
///
/// Implementors only provide the 2-jet and the boundary; [`MinimalGraph::jet`] adds
/// the domain check used by every public query.
pub trait MinimalGraph {
    fn name(&self) -> &str;

    /// Signed distance to the domain boundary, negative in the interior.
    fn signed_distance(&self, p: Point2) -> f64;

    /// The 2-jet of `u` at an interior point. Behaviour outside the domain is
    /// unspecified.
    fn jet_unchecked(&self, p: Point2) -> Jet;

    /// Maps two uniforms in `[0, 1)` to a point of a bounded interior region. Used to
    /// draw the sample points on which the surface invariants are checked.
    fn sample_interior(&self, u1: f64, u2: f64) -> Point2;

    fn contains(&self, p: Point2) -> bool {
        self.signed_distance(p) < 0.0
    }

    fn jet(&self, p: Point2) -> Result<Jet, GeometryError> {
        if self.contains(p) {
            Ok(self.jet_unchecked(p))
        } else {
            Err(GeometryError {
                surface: self.name().to_string(),
                x: p.x,
                y: p.y,
            })
        }
    }

    /// Ambient position `(x, y, u(x, y))`.
    fn ambient(&self, p: Point2) -> Result<Vec3, GeometryError> {
        Ok([p.x, p.y, self.jet(p)?.height])
    }
}

pub fn gauss_map<S: MinimalGraph + ?Sized>(surface: &S, p: Point2) -> Result<Vec3, GeometryError> {
    Ok(surface.jet(p)?.normal())
}

pub fn gauss_curvature<S: MinimalGraph + ?Sized>(
    surface: &S,
    p: Point2,
) -> Result<f64, GeometryError> {
    Ok(surface.jet(p)?.gauss_curvature())
}

pub fn metric_data<S: MinimalGraph + ?Sized>(
    surface: &S,
    p: Point2,
) -> Result<MetricData, GeometryError> {
    Ok(surface.jet(p)?.metric())
}

pub fn minimal_residual<S: MinimalGraph + ?Sized>(
    surface: &S,
    p: Point2,
) -> Result<f64, GeometryError> {
    Ok(surface.jet(p)?.minimal_residual())
}

pub const DEFAULT_SCHERK_HALF_WIDTH: f64 = 1.2;

/// Extent of the sampling box used for the unbounded catalog domains.
const SAMPLE_EXTENT: f64 = 10.0;

/// The built-in minimal graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Surface {
    /// `u ≡ 0` over `{x > 0}`.
    FlatHalfPlane,
    /// `u = arccosh r` over `{r > 1}`: the upper half of the catenoid.
    HalfCatenoid,
    /// `u = arctan(y/x)` over `{x > 0}`: half a turn of the helicoid.
    HelicoidGraph,
    /// `u = log(cos x / cos y)` over the open square `|x|, |y| < s`.
    Scherk {
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
}

fn default_half_width() -> f64 {
    DEFAULT_SCHERK_HALF_WIDTH
}

impl Surface {
    pub fn scherk(half_width: f64) -> Result<Self, ParameterError> {
        if half_width > 0.0 && half_width < FRAC_PI_2 {
            Ok(Surface::Scherk { half_width })
        } else {
            Err(ParameterError::ScherkHalfWidth(half_width))
        }
    }

    pub const NAMES: [&'static str; 4] =
        ["flat-half-plane", "half-catenoid", "helicoid-graph", "scherk"];

    /// Looks a catalog surface up by name. `param` is consulted for parameterized
    /// surfaces (currently only `half_width` for Scherk).
    pub fn by_name(
        name: &str,
        param: impl Fn(&str) -> Option<f64>,
    ) -> Result<Option<Self>, ParameterError> {
        Ok(Some(match name {
            "flat-half-plane" => Surface::FlatHalfPlane,
            "half-catenoid" => Surface::HalfCatenoid,
            "helicoid-graph" => Surface::HelicoidGraph,
            "scherk" => Surface::scherk(param("half_width").unwrap_or(DEFAULT_SCHERK_HALF_WIDTH))?,
            _ => return Ok(None),
        }))
    }

    pub fn describe(&self) -> alloc::string::String {
        match self {
            Surface::FlatHalfPlane => "u = 0 over {x > 0}".into(),
            Surface::HalfCatenoid => "u = arccosh(r) over {r > 1}".into(),
            Surface::HelicoidGraph => "u = arctan(y/x) over {x > 0}".into(),
            Surface::Scherk { half_width } => {
                format!("u = log(cos x / cos y) over {{|x|, |y| < {half_width}}}")
            }
        }
    }
}

/// The four catalog surfaces, Scherk at its default half-width.
pub fn catalog() -> Vec<Surface> {
    vec![
        Surface::FlatHalfPlane,
        Surface::HalfCatenoid,
        Surface::HelicoidGraph,
        Surface::Scherk {
            half_width: DEFAULT_SCHERK_HALF_WIDTH,
        },
    ]
}

impl MinimalGraph for Surface {
    fn name(&self) -> &str {
        match self {
            Surface::FlatHalfPlane => "flat-half-plane",
            Surface::HalfCatenoid => "half-catenoid",
            Surface::HelicoidGraph => "helicoid-graph",
            Surface::Scherk { .. } => "scherk",
        }
    }

    #[inline]
    fn signed_distance(&self, p: Point2) -> f64 {
        match *self {
            Surface::FlatHalfPlane | Surface::HelicoidGraph => -p.x,
            Surface::HalfCatenoid => 1.0 - p.x.hypot(p.y),
            Surface::Scherk { half_width } => {
                let dx = p.x.abs() - half_width;
                let dy = p.y.abs() - half_width;
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
        }
    }

    #[inline]
    fn jet_unchecked(&self, p: Point2) -> Jet {
        let Point2 { x, y } = p;
        match *self {
            Surface::FlatHalfPlane => Jet {
                height: 0.0,
                grad: [0.0; 2],
                hess: [[0.0; 2]; 2],
            },
            Surface::HalfCatenoid => {
                let r2 = x * x + y * y;
                let r = r2.sqrt();
                let q = (r2 - 1.0).sqrt();
                let rq = r * q;
                // Hess u = I/(rq) - (2r² - 1)/(rq)³ · (x, y)(x, y)ᵀ
                let k = (2.0 * r2 - 1.0) / (rq * rq * rq);
                let d = 1.0 / rq;
                Jet {
                    height: (r + q).ln(),
                    grad: [x / rq, y / rq],
                    hess: [[d - k * x * x, -k * x * y], [-k * x * y, d - k * y * y]],
                }
            }
            Surface::HelicoidGraph => {
                let r2 = x * x + y * y;
                let r4 = r2 * r2;
                let mixed = (y * y - x * x) / r4;
                Jet {
                    height: y.atan2(x),
                    grad: [-y / r2, x / r2],
                    hess: [[2.0 * x * y / r4, mixed], [mixed, -2.0 * x * y / r4]],
                }
            }
            Surface::Scherk { .. } => {
                let (cx, cy) = (x.cos(), y.cos());
                Jet {
                    height: (cx / cy).ln(),
                    grad: [-x.tan(), y.tan()],
                    hess: [[-1.0 / (cx * cx), 0.0], [0.0, 1.0 / (cy * cy)]],
                }
            }
        }
    }

    fn sample_interior(&self, u1: f64, u2: f64) -> Point2 {
        match *self {
            Surface::FlatHalfPlane | Surface::HelicoidGraph => Point2::new(
                SAMPLE_EXTENT * (1.0 - u1),
                SAMPLE_EXTENT * (2.0 * u2 - 1.0),
            ),
            Surface::HalfCatenoid => {
                let outer2 = SAMPLE_EXTENT * SAMPLE_EXTENT;
                let r = (1.0 + (outer2 - 1.0) * (1.0 - u1)).sqrt();
                let (s, c) = (TAU * u2).sin_cos();
                Point2::new(r * c, r * s)
            }
            Surface::Scherk { half_width } => {
                let shrink = half_width * (1.0 - 1e-9);
                Point2::new(shrink * (2.0 * u1 - 1.0), shrink * (2.0 * u2 - 1.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gauss_map_examples() {
        let n = gauss_map(&Surface::FlatHalfPlane, Point2::new(1.0, 0.0)).unwrap();
        assert_eq!(n, [0.0, 0.0, 1.0]);

        let n = gauss_map(&Surface::HelicoidGraph, Point2::new(1.0, 0.0)).unwrap();
        let expect = [0.0, -1.0 / SQRT_2, 1.0 / SQRT_2];
        for i in 0..3 {
            assert!(close(n[i], expect[i], 1e-15), "{n:?}");
        }

        let n = gauss_map(&Surface::HalfCatenoid, Point2::new(2.0, 0.0)).unwrap();
        let expect = [-0.5, 0.0, 3.0f64.sqrt() / 2.0];
        for i in 0..3 {
            assert!(close(n[i], expect[i], 1e-15), "{n:?}");
        }
    }

    #[test]
    fn curvature_examples() {
        assert_eq!(
            gauss_curvature(&Surface::FlatHalfPlane, Point2::new(3.0, -2.0)).unwrap(),
            0.0
        );
        let jet = Surface::HalfCatenoid.jet(Point2::new(2.0, 0.0)).unwrap();
        let h = jet.hess;
        assert!(close(h[0][0] * h[1][1] - h[0][1] * h[1][0], -1.0 / 9.0, 1e-15));
        assert!(close(jet.w() * jet.w(), 16.0 / 9.0, 1e-15));
        assert!(close(jet.gauss_curvature(), -1.0 / 16.0, 1e-15));

        let scherk = Surface::scherk(1.2).unwrap();
        assert!(close(
            gauss_curvature(&scherk, Point2::new(0.0, 0.0)).unwrap(),
            -1.0,
            1e-15
        ));
    }

    #[test]
    fn metric_examples() {
        let m = metric_data(&Surface::FlatHalfPlane, Point2::new(1.0, 1.0)).unwrap();
        assert_eq!(m.metric, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.inverse, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.sqrt_det, 1.0);

        let m = metric_data(&Surface::HelicoidGraph, Point2::new(1.0, 0.0)).unwrap();
        assert_eq!(m.metric, [[1.0, 0.0], [0.0, 2.0]]);
        assert!(close(m.sqrt_det, SQRT_2, 1e-15));

        let m = metric_data(&Surface::HalfCatenoid, Point2::new(2.0, 0.0)).unwrap();
        assert!(close(m.metric[0][0], 4.0 / 3.0, 1e-15));
        assert!(close(m.metric[1][1], 1.0, 1e-15));
        assert!(close(m.metric[0][1], 0.0, 1e-15));
        assert!(close(m.sqrt_det, 2.0 / 3.0f64.sqrt(), 1e-15));
    }

    #[test]
    fn metric_inverse_is_inverse() {
        for s in catalog() {
            for &(u1, u2) in &[(0.1, 0.2), (0.5, 0.9), (0.97, 0.03)] {
                let p = s.sample_interior(u1, u2);
                let m = metric_data(&s, p).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        let e = m.metric[i][0] * m.inverse[0][j] + m.metric[i][1] * m.inverse[1][j];
                        let id = if i == j { 1.0 } else { 0.0 };
                        assert!(close(e, id, 1e-12), "{} {p:?}", s.name());
                    }
                }
            }
        }
    }

    #[test]
    fn residual_examples() {
        assert_eq!(
            minimal_residual(&Surface::FlatHalfPlane, Point2::new(0.3, 0.0)).unwrap(),
            0.0
        );
        let r = minimal_residual(&Surface::HelicoidGraph, Point2::new(1.0, 1.0)).unwrap();
        assert!(r.abs() <= 1e-12, "{r}");
        let r = minimal_residual(&Surface::scherk(1.2).unwrap(), Point2::new(0.3, -0.2)).unwrap();
        assert!(r.abs() <= 1e-12, "{r}");
    }

    #[test]
    fn catalog_and_membership() {
        let c = catalog();
        assert_eq!(c.len(), 4);
        let names: Vec<&str> = c.iter().map(|s| s.name()).collect();
        assert_eq!(names, Surface::NAMES);

        let scherk = Surface::scherk(1.2).unwrap();
        assert!(!scherk.contains(Point2::new(1.5, 0.0)));
        assert!(scherk.contains(Point2::new(1.1, -1.1)));
        assert!(close(
            Surface::HalfCatenoid.signed_distance(Point2::new(2.0, 0.0)),
            -1.0,
            1e-15
        ));
    }

    #[test]
    fn scherk_parameter_bounds() {
        assert!(matches!(
            Surface::scherk(FRAC_PI_2),
            Err(ParameterError::ScherkHalfWidth(_))
        ));
        assert!(Surface::scherk(2.0).is_err());
        assert!(Surface::scherk(0.0).is_err());
        assert!(Surface::by_name("scherk", |_| Some(1.6)).is_err());
        assert_eq!(
            Surface::by_name("scherk", |_| None).unwrap(),
            Some(Surface::Scherk { half_width: 1.2 })
        );
        assert_eq!(Surface::by_name("torus", |_| None).unwrap(), None);
    }

    #[test]
    fn domain_errors() {
        let p = Point2::new(-1.0, 0.0);
        assert!(gauss_map(&Surface::FlatHalfPlane, p).is_err());
        assert!(gauss_curvature(&Surface::HalfCatenoid, Point2::new(0.5, 0.0)).is_err());
        assert!(metric_data(&Surface::HelicoidGraph, p).is_err());
        let err = minimal_residual(&Surface::scherk(1.0).unwrap(), Point2::new(1.0, 0.0)).unwrap_err();
        assert_eq!(err.surface, "scherk");
    }
}
