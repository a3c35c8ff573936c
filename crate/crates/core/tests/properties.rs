use std::f64::consts::{FRAC_PI_2, PI};

use mbm_core::conformal::{charts, ChartPoint, ConformalChart};
use mbm_core::coupling::{
    classify_region, extended_coords, f_minus_g, fg, fg_branch, great_circle_coords,
    is_great_circle, Configuration, GreatCircleCoords, Orientation, Region, RegionParams,
};
use mbm_core::graph_sim::ito_coefficients;
use mbm_core::noise::Noise;
use mbm_core::rng::{path_rng, Purpose};
use mbm_core::sphere::{normalize, rotate, sub, Vec3};
use mbm_core::surface::{catalog, gauss_curvature, metric_data, MinimalGraph};
use mbm_core::Point2;
use proptest::prelude::*;

fn samples<S: MinimalGraph + ?Sized>(s: &S, n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = path_rng(seed, Purpose::Custom(99), 0);
    (0..n)
        .map(|_| {
            let (u1, u2) = (rng.uniform(), rng.uniform());
            s.sample_interior(u1, u2)
        })
        .collect()
}

#[test]
fn catalog_surfaces_are_minimal_with_nonpositive_curvature() {
    for s in catalog() {
        for p in samples(&s, 10_000, 1) {
            let jet = s.jet(p).unwrap();
            assert!(jet.minimal_residual().abs() <= 1e-9, "{} at {p:?}", s.name());
            assert!(jet.gauss_curvature() <= 1e-12, "{} at {p:?}", s.name());
            let n = jet.normal();
            assert!(n[2] > 0.0);
            assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() <= 1e-12);
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    let h = 1e-5;
    for s in catalog() {
        for p in samples(&s, 500, 2) {
            if s.signed_distance(p) > -10.0 * h {
                continue;
            }
            let at = |dx: f64, dy: f64| s.jet_unchecked(Point2::new(p.x + dx, p.y + dy));
            let j = at(0.0, 0.0);
            let ux = (at(h, 0.0).height - at(-h, 0.0).height) / (2.0 * h);
            let uy = (at(0.0, h).height - at(0.0, -h).height) / (2.0 * h);
            assert!(rel_close(j.grad[0], ux, 1e-6), "{} grad x at {p:?}", s.name());
            assert!(rel_close(j.grad[1], uy, 1e-6), "{} grad y at {p:?}", s.name());
            let hxx = (at(h, 0.0).grad[0] - at(-h, 0.0).grad[0]) / (2.0 * h);
            let hxy = (at(0.0, h).grad[0] - at(0.0, -h).grad[0]) / (2.0 * h);
            let hyy = (at(0.0, h).grad[1] - at(0.0, -h).grad[1]) / (2.0 * h);
            assert!(rel_close(j.hess[0][0], hxx, 1e-6), "{} u_xx at {p:?}", s.name());
            assert!(rel_close(j.hess[0][1], hxy, 1e-6), "{} u_xy at {p:?}", s.name());
            assert!(rel_close(j.hess[1][1], hyy, 1e-6), "{} u_yy at {p:?}", s.name());
        }
    }
}

/// `b^i = (1/(2√G)) ∂_j(√G g^{ij})` by central differences.
fn fd_drift<S: MinimalGraph + ?Sized>(s: &S, p: Point2) -> [f64; 2] {
    let h = 1e-5;
    let m = |dx: f64, dy: f64| metric_data(s, Point2::new(p.x + dx, p.y + dy)).unwrap();
    let flux = |dx, dy, i: usize, j: usize| {
        let d = m(dx, dy);
        d.sqrt_det * d.inverse[i][j]
    };
    let g = m(0.0, 0.0).sqrt_det;
    let mut b = [0.0; 2];
    for (i, bi) in b.iter_mut().enumerate() {
        let dj0 = (flux(h, 0.0, i, 0) - flux(-h, 0.0, i, 0)) / (2.0 * h);
        let dj1 = (flux(0.0, h, i, 1) - flux(0.0, -h, i, 1)) / (2.0 * h);
        *bi = (dj0 + dj1) / (2.0 * g);
    }
    b
}

#[test]
fn ito_drift_matches_finite_difference_divergence() {
    for s in catalog() {
        for p in samples(&s, 100, 3) {
            if s.signed_distance(p) > -1e-3 {
                continue;
            }
            let c = ito_coefficients(&s, p).unwrap();
            let fd = fd_drift(&s, p);
            assert!((c.drift[0] - fd[0]).abs() <= 1e-6, "{} at {p:?}", s.name());
            assert!((c.drift[1] - fd[1]).abs() <= 1e-6, "{} at {p:?}", s.name());
            let d = c.diffusion;
            let inv = metric_data(&s, p).unwrap().inverse;
            for i in 0..2 {
                for j in 0..2 {
                    let sst = d[i][0] * d[j][0] + d[i][1] * d[j][1];
                    assert!((sst - inv[i][j]).abs() <= 1e-12);
                }
            }
        }
    }
    let cat = &catalog()[1];
    let c = ito_coefficients(cat, Point2::new(2.0, 0.0)).unwrap();
    let fd = fd_drift(cat, Point2::new(2.0, 0.0));
    assert!((c.drift[0] - fd[0]).abs() <= 1e-6 && (c.drift[1] - fd[1]).abs() <= 1e-6);
}

fn chart_jacobian(chart: ConformalChart, c: ChartPoint) -> [[f64; 2]; 2] {
    let (su, cu) = c.u.sin_cos();
    let (sh, ch) = (c.v.sinh(), c.v.cosh());
    match chart {
        ConformalChart::FlatHalfPlane => [[1.0, 0.0], [0.0, 1.0]],
        ConformalChart::HalfCatenoid => [[-ch * su, sh * cu], [ch * cu, sh * su]],
        ConformalChart::HelicoidGraph => [[-sh * su, ch * cu], [sh * cu, ch * su]],
    }
}

fn chart_sample(chart: ConformalChart, u1: f64, u2: f64) -> ChartPoint {
    match chart {
        ConformalChart::FlatHalfPlane => ChartPoint::new(10.0 * u1 + 1e-3, 20.0 * u2 - 10.0),
        ConformalChart::HalfCatenoid => ChartPoint::new(2.0 * PI * u1, 0.01 + 3.0 * u2),
        ConformalChart::HelicoidGraph => {
            ChartPoint::new((PI - 0.02) * (u1 - 0.5), 0.01 + 3.0 * u2)
        }
    }
}

#[test]
fn chart_metrics_agree_with_graph_metrics() {
    let mut rng = path_rng(4, Purpose::Custom(98), 0);
    for chart in charts() {
        let surface = chart.surface();
        for _ in 0..1000 {
            let c = chart_sample(chart, rng.uniform(), rng.uniform());
            assert!(chart.contains(c), "{chart:?} {c:?}");
            let lambda2 = chart.conformal_factor(c);
            assert!(lambda2 > 0.0);
            let p = chart.to_graph(c);
            let g = metric_data(&surface, p).unwrap().metric;
            let j = chart_jacobian(chart, c);
            for a in 0..2 {
                for b in 0..2 {
                    let mut pull = 0.0;
                    for i in 0..2 {
                        for k in 0..2 {
                            pull += j[i][a] * g[i][k] * j[k][b];
                        }
                    }
                    let want = if a == b { lambda2 } else { 0.0 };
                    assert!(
                        (pull - want).abs() <= 1e-9 * lambda2.max(1.0),
                        "{chart:?} at {c:?}: {pull} vs {want}"
                    );
                }
            }
            let back = chart.from_graph(p).unwrap();
            let p2 = chart.to_graph(back);
            assert!((p2.x - p.x).abs() <= 1e-9 && (p2.y - p.y).abs() <= 1e-9);
        }
    }
}

#[test]
fn chart_curvature_density_matches_graph_curvature() {
    let mut rng = path_rng(5, Purpose::Custom(97), 0);
    for chart in [ConformalChart::HalfCatenoid, ConformalChart::HelicoidGraph] {
        let surface = chart.surface();
        for _ in 0..1000 {
            let c = chart_sample(chart, rng.uniform(), rng.uniform());
            let k = gauss_curvature(&surface, chart.to_graph(c)).unwrap();
            let want = -k * chart.conformal_factor(c);
            assert!((chart.curvature_density(c) - want).abs() <= 1e-9);
            assert!((chart.curvature_density(c) - 1.0 / c.v.cosh().powi(2)).abs() <= 1e-12);
        }
    }
}

fn unit(v: [f64; 3]) -> Option<Vec3> {
    normalize(v).filter(|_| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

prop_compose! {
    fn coplanar_triple()(
        axis in prop::array::uniform3(-1.0f64..1.0),
        rot in -PI..PI,
        a in -PI..PI, t in -PI..PI, p in -PI..PI,
    ) -> Option<Configuration> {
        let axis = unit(axis)?;
        let on = |x: f64| rotate([x.cos(), x.sin(), 0.0], axis, rot);
        Configuration::new(on(t), on(p), on(a)).ok()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn principal_branch_has_f_at_least_g(theta in -10.0f64..10.0, phi in -10.0f64..10.0) {
        let b = fg(theta, phi).principal();
        prop_assert!(b.f - b.g >= -1e-12);
    }

    #[test]
    fn difference_identity_holds_on_both_branches(
        theta in -10.0f64..10.0, phi in -10.0f64..10.0, a in prop::sample::select(vec![-1.0, 1.0])
    ) {
        let b = fg_branch(theta, phi, a);
        prop_assert!((b.f - b.g - f_minus_g(theta, phi, a)).abs() <= 1e-12);
        if (b.f - b.g).abs() <= 1e-13 {
            prop_assert!(((theta + phi).cos() * (a - (theta - phi).cos())).abs() <= 1e-12);
        }
    }

    #[test]
    fn coordinates_round_trip(cfg in coplanar_triple()) {
        let Some(cfg) = cfg else { return Ok(()) };
        prop_assert!(is_great_circle(&cfg, 1e-9));
        let gc = great_circle_coords(&cfg).unwrap();
        let (mx, my) = gc.reconstruct(cfg.alpha);
        for i in 0..3 {
            prop_assert!((mx[i] - cfg.m_x[i]).abs() < 1e-10);
            prop_assert!((my[i] - cfg.m_y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn flipped_orientation_preserves_invariants(cfg in coplanar_triple()) {
        let Some(cfg) = cfg else { return Ok(()) };
        let gc = great_circle_coords(&cfg).unwrap();
        let fl = gc.flipped();
        prop_assert_eq!(fl.orientation == Orientation::Flipped, gc.orientation == Orientation::Canonical);
        prop_assert!((gc.sum().cos() - fl.sum().cos()).abs() <= 1e-12);
        let d = |g: &GreatCircleCoords| {
            let x = (g.theta - g.phi).rem_euclid(2.0 * PI);
            x.min(2.0 * PI - x)
        };
        prop_assert!((d(&gc) - d(&fl)).abs() <= 1e-12);
        let (a, b) = (fg(gc.theta, gc.phi), fg(fl.theta, fl.phi));
        prop_assert_eq!(a.as_slice().len(), b.as_slice().len());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x.f - y.f).abs() <= 1e-12 && (x.g - y.g).abs() <= 1e-12);
        }
        let (mx, my) = fl.reconstruct(cfg.alpha);
        prop_assert!(sub(mx, cfg.m_x).iter().all(|e| e.abs() < 1e-10));
        prop_assert!(sub(my, cfg.m_y).iter().all(|e| e.abs() < 1e-10));
    }

    #[test]
    fn s4_configurations_satisfy_outer_region_constraints(
        axis in prop::array::uniform3(-1.0f64..1.0),
        rot in -PI..PI,
        a in -PI..PI, t in -PI..PI, branch in 0u8..4,
    ) {
        let Some(axis) = unit(axis) else { return Ok(()) };
        // φ with cos(θ+φ) = 0.
        let phi = FRAC_PI_2 * (2 * branch as i32 - 3) as f64 - t;
        let on = |x: f64| rotate([(a + x).cos(), (a + x).sin(), 0.0], axis, rot);
        let cfg = Configuration::new(on(t), on(phi), on(0.0)).unwrap();
        let params = RegionParams::default();
        let region = classify_region(&cfg, &params).unwrap();
        let sep = cfg.separation();
        if region == Region::S4 {
            prop_assert!(sep >= 2.0 * params.c1 - 1e-9);
            prop_assert!(sep >= params.c1 - 1e-9);
            prop_assert!(extended_coords(&cfg).sum().cos().abs() <= params.c2);
        }
        if sep >= 2.0 * params.c1 + 1e-9 && sep <= PI - 2.0 * params.c1 - 1e-9 {
            prop_assert_eq!(region, Region::S4);
        }
    }

    #[test]
    fn region_classification_is_nested(cfg in coplanar_triple(), tilt in -0.2f64..0.2) {
        let Some(cfg) = cfg else { return Ok(()) };
        let m_x = rotate(cfg.m_x, cfg.alpha, tilt);
        let Ok(cfg) = Configuration::new(m_x, cfg.m_y, cfg.alpha) else { return Ok(()) };
        let params = RegionParams::default();
        let region = classify_region(&cfg, &params).unwrap();
        let sep = cfg.separation();
        match region {
            Region::Outside => prop_assert!(sep < params.c1 + 1e-9 || sep > PI - params.c1 - 1e-9),
            _ => prop_assert!(sep >= params.c1 - 1e-9),
        }
    }
}
