use super::*;
use crate::planar::{boundary_sample, CompositeOp};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn z(x: Point, y: Point) -> C2 {
    C2::from_xy(x, y)
}

fn annulus(r_in: f64, r_out: f64) -> PlanarRegion {
    PlanarRegion::annulus([0.0, 0.0], r_in, r_out).unwrap()
}

/// Independent route: sample `L = {w·(−b, a)}` on a polar grid in `w` and
/// minimize `|y|` over samples whose `x` lies in `X̄`.
fn chart_oracle(form: &ComplexLinearForm, region: &PlanarRegion, w_max: f64, n: usize) -> f64 {
    let v = form.kernel_direction();
    let mut best = f64::INFINITY;
    for i in 1..=n {
        let rho = w_max * i as f64 / n as f64;
        for k in 0..(4 * n) {
            let w = Complex64::from_polar(rho, 2.0 * PI * k as f64 / (4 * n) as f64);
            let p = v.scale(w);
            if region.sdf(p.x()) >= 0.0 {
                best = best.min(geom::norm(p.y()));
            }
        }
    }
    best
}

fn radius(form: &ComplexLinearForm, region: &PlanarRegion, grid: usize) -> SeparationReport {
    let cfg = SeparationConfig { grid, ..Default::default() };
    match separation_radius(form, region, &cfg).unwrap() {
        SeparationRadius::Finite(r) => r,
        other => panic!("expected finite radius, got {other:?}"),
    }
}

#[test]
fn tube_membership() {
    let t = TubeDomain::new(annulus(1.0, 2.0), FiberRegion::ball(0.5)).unwrap();
    assert!(tube_contains(&t, &z([1.5, 0.0], [0.0, 0.3])));
    assert!(!tube_contains(&t, &z([1.5, 0.0], [0.0, 0.6])));
    assert!(!tube_contains(&t, &z([0.5, 0.0], [0.0, 0.0])));
}

#[test]
fn model_domain_membership() {
    let p = ModelParams::new(1.0, 2.0, 0.5).unwrap();
    assert!(model_domain_contains(&p, &z([1.5, 0.0], [0.0, 0.3])).unwrap());
    assert!(!model_domain_contains(&p, &z([1.0, 0.0], [0.0, 0.0])).unwrap());
    let p0 = ModelParams::new(0.0, 2.0, 0.5).unwrap();
    assert!(model_domain_contains(&p0, &z([0.1, 0.0], [0.0, 0.0])).unwrap());
    assert!(ModelParams::new(2.0, 1.0, 0.5).is_err());
    assert!(ModelParams::new(0.0, 1.0, 0.0).is_err());
}

#[test]
fn fiber_map_parametrizes_the_line() {
    let l = ComplexLinearForm::new(Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.7)).unwrap();
    let t = line_fiber_map(&l).unwrap();
    for x in [[1.0, 0.0], [0.3, -2.0], [-1.5, 0.25]] {
        let y = [t[(0, 0)] * x[0] + t[(0, 1)] * x[1], t[(1, 0)] * x[0] + t[(1, 1)] * x[1]];
        assert!(l.eval(&z(x, y)).norm() < 1e-12);
    }
    let reference = line_fiber_map(&ComplexLinearForm::reference()).unwrap();
    assert_eq!(reference, Matrix2::new(0.0, 1.0, -1.0, 0.0));
}

#[test]
fn reference_radius_of_unit_annulus_is_one() {
    let l = ComplexLinearForm::reference();
    let r = radius(&l, &annulus(1.0, 2.0), 1024);
    assert!((r.radius - 1.0).abs() < 1e-9, "{}", r.radius);
    assert!(r.certified);
    assert!(r.lipschitz_lower_bound <= r.radius);
    let oracle = chart_oracle(&l, &annulus(1.0, 2.0), 3.0, 600);
    assert!((oracle - 1.0).abs() < 1e-2);
    let r2 = radius(&l, &annulus(2.0, 3.0), 512);
    assert!((r2.radius - 2.0).abs() < 1e-9);
}

#[test]
fn horizontal_line_has_no_positive_radius() {
    let l = ComplexLinearForm::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
    let err = separation_radius(&l, &annulus(1.0, 2.0), &SeparationConfig::default()).unwrap_err();
    assert!(matches!(err, TubeError::NoPositiveRadius { .. }));
}

#[test]
fn degenerate_projection_missing_the_region_is_infinite() {
    let l = ComplexLinearForm::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
    let d = PlanarRegion::disc([0.0, 3.0], 1.0).unwrap();
    let r = separation_radius(&l, &d, &SeparationConfig::default()).unwrap();
    assert!(matches!(r, SeparationRadius::Infinite { .. }));
    assert!(r.value().is_infinite());
}

#[test]
fn region_containing_origin_is_rejected() {
    let l = ComplexLinearForm::reference();
    let d = PlanarRegion::disc([0.5, 0.0], 1.0).unwrap();
    assert!(separation_radius(&l, &d, &SeparationConfig::default()).is_err());
}

#[test]
fn general_line_matches_chart_oracle() {
    let l = ComplexLinearForm::new(Complex64::new(1.0, 0.4), Complex64::new(-0.2, -1.5)).unwrap();
    for region in [annulus(1.0, 2.0), PlanarRegion::standard_cut_annulus()] {
        let r = radius(&l, &region, 400);
        let oracle = chart_oracle(&l, &region, 6.0, 800);
        assert!(r.certified);
        assert!(oracle >= r.radius * (1.0 - 1e-9), "oracle {oracle} below {}", r.radius);
        assert!((oracle - r.radius) / r.radius < 2e-2, "oracle {oracle} vs {}", r.radius);
    }
}

#[test]
fn spiral_radius_is_positive() {
    let l = ComplexLinearForm::reference();
    let x = PlanarRegion::spiral_strip(0.5, 1.0, 0.0, None).unwrap();
    let r = radius(&l, &x, 256);
    // the closure contains the unit circle and |Tx| = |x| for this line
    assert!((r.radius - 1.0).abs() < 1e-9);
    let xk = PlanarRegion::truncated_spiral(3);
    let rk = radius(&l, &xk, 256);
    assert!(rk.radius > 1.0 && rk.certified);
}

#[test]
fn line_misses_tube_below_radius_and_hits_above() {
    let l = ComplexLinearForm::new(Complex64::new(1.0, 0.4), Complex64::new(-0.2, -1.5)).unwrap();
    let x = annulus(1.0, 2.0);
    let r = radius(&l, &x, 256).radius;
    let v = l.kernel_direction();
    let hits = |rr: f64| {
        let t = TubeDomain::new(x.clone(), FiberRegion::ball(rr)).unwrap();
        let n = 400;
        (0..n).any(|i| {
            (0..4 * n).any(|k| {
                let w = Complex64::from_polar(6.0 * i as f64 / n as f64, 2.0 * PI * k as f64 / (4 * n) as f64);
                t.contains(&v.scale(w))
            })
        })
    };
    assert!(!hits(r * 0.99));
    assert!(hits(r * 1.05));
}

#[test]
fn curvature_side_examples() {
    let c = PlanarRegion::disc([1.5, -2.0], 2.0).unwrap();
    let s = &boundary_sample(&c, 64.0, None).unwrap().components[0];
    let idx = (0..s.len())
        .min_by(|&a, &b| geom::dist(s.points[a], [1.5, 0.0]).total_cmp(&geom::dist(s.points[b], [1.5, 0.0])))
        .unwrap();
    let side = curvature_side(s, idx).unwrap();
    assert!(side.strict);
    assert!(geom::dist(side.pseudoconvex_side_normal, [0.0, -1.0]) < 1e-2);

    // same circle traversed clockwise
    let rev = CurveSamples::new(s.points.iter().rev().copied().collect()).unwrap();
    let idx = (0..rev.len())
        .min_by(|&a, &b| geom::dist(rev.points[a], [1.5, 0.0]).total_cmp(&geom::dist(rev.points[b], [1.5, 0.0])))
        .unwrap();
    assert!(geom::dist(curvature_side(&rev, idx).unwrap().pseudoconvex_side_normal, [0.0, -1.0]) < 1e-2);

    let unit = &boundary_sample(&PlanarRegion::disc([0.0, 0.0], 1.0).unwrap(), 64.0, None).unwrap().components[0];
    let n0 = curvature_side(unit, 0).unwrap().pseudoconvex_side_normal;
    assert!(geom::dist(n0, [-1.0, 0.0]) < 1e-12);
}

#[test]
fn stadium_segment_is_flat() {
    let mut pts = Vec::new();
    let n = 64;
    for k in 0..n {
        pts.push([-1.0 + 2.0 * k as f64 / n as f64, -1.0]);
    }
    for k in 0..n {
        let a = -PI / 2.0 + PI * k as f64 / n as f64;
        pts.push([1.0 + a.cos(), a.sin()]);
    }
    for k in 0..n {
        pts.push([1.0 - 2.0 * k as f64 / n as f64, 1.0]);
    }
    for k in 0..n {
        let a = PI / 2.0 + PI * k as f64 / n as f64;
        pts.push([-1.0 + a.cos(), a.sin()]);
    }
    let s = CurveSamples::new(pts).unwrap();
    assert!(matches!(curvature_side(&s, n / 2), Err(TubeError::FlatPoint { .. })));
}

#[test]
fn fiber_shapes() {
    let y = FiberRegion::ball(1.0).scaled(5.0);
    assert!(y.contains([0.0, 4.9]) && !y.contains([0.0, 5.1]));
    assert!((y.min_dist_to_boundary([0.0, 2.0]) - 3.0).abs() < 1e-15);
    let e = FiberRegion::Ellipse { center: [0.0, 0.0], semi_axes: [2.0, 1.0], angle: 0.0 };
    assert!((e.min_dist_to_boundary([0.0, 0.0]) - 1.0).abs() < 1e-9);
    assert!(FiberRegion::ball(-1.0).validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn radius_scales_linearly(r_in in 0.3f64..2.0, width in 0.1f64..2.0, c in prop::sample::select(vec![0.5, 2.0])) {
        let l = ComplexLinearForm::reference();
        let a = radius(&l, &annulus(r_in, r_in + width), 128).radius;
        let b = radius(&l, &annulus(c * r_in, c * (r_in + width)), 128).radius;
        prop_assert!((b - c * a).abs() < 1e-9 * b);
    }

    #[test]
    fn radius_is_monotone_under_inclusion(r_in in 0.3f64..2.0, width in 0.2f64..2.0, shrink in 0.01f64..0.9) {
        let l = ComplexLinearForm::new(Complex64::new(1.0, 0.4), Complex64::new(-0.2, -1.5)).unwrap();
        let outer = annulus(r_in, r_in + width);
        let inner_region = annulus(r_in + shrink * width * 0.5, r_in + width * (1.0 - 0.5 * shrink));
        let big = radius(&l, &outer, 128).radius;
        let small = radius(&l, &inner_region, 128).radius;
        prop_assert!(small >= big * (1.0 - 1e-12));
    }

    #[test]
    fn curvature_normal_is_orthogonal(rx in 0.5f64..3.0, ry in 0.5f64..3.0, k in 0usize..256) {
        let pts: Vec<Point> = (0..256).map(|i| {
            let t = 2.0 * PI * i as f64 / 256.0;
            [rx * t.cos(), ry * t.sin()]
        }).collect();
        let s = CurveSamples::new(pts).unwrap();
        let side = curvature_side(&s, k).unwrap();
        prop_assert!(geom::dot(side.pseudoconvex_side_normal, s.tangents[k]).abs() < 1e-9);
    }
}

#[test]
fn difference_regions_have_radius() {
    let l = ComplexLinearForm::reference();
    let base = PlanarRegion::disc([0.0, 0.0], 3.0).unwrap();
    let hole = PlanarRegion::disc([0.0, 0.0], 1.5).unwrap();
    let x = PlanarRegion::composite(CompositeOp::Difference, vec![base, hole]).unwrap();
    assert!((radius(&l, &x, 256).radius - 1.5).abs() < 1e-9);
}
