use super::*;
use proptest::prelude::*;

fn orientation_ok(region: &PlanarRegion, truncation: Option<f64>, step: f64) {
    // a short step to the left of each sampled tangent lands inside
    for comp in region.boundary_components(truncation).unwrap() {
        assert!(comp.closure_gap() < 1e-9, "gap {}", comp.closure_gap());
        for piece in &comp.pieces {
            for k in 1..8 {
                let t = k as f64 / 8.0;
                let p = piece.eval(t);
                let q = piece.eval(t + 1e-6);
                let Some(d) = geom::normalize(sub(q, p)) else { continue };
                let left = geom::add(p, geom::scale(geom::perp(d), step));
                let right = geom::sub(p, geom::scale(geom::perp(d), step));
                assert!(region.sdf(left) > 0.0, "left of {piece:?} at {t} not inside");
                assert!(region.sdf(right) < 0.0, "right of {piece:?} at {t} not outside");
            }
        }
    }
}

#[test]
fn annulus_membership_and_holes() {
    let a = PlanarRegion::annulus([0.0, 0.0], 1.0, 2.0).unwrap();
    assert!(a.contains([1.5, 0.0]).inside);
    assert!((a.contains([1.5, 0.0]).margin - 0.5).abs() < 1e-15);
    assert!(!a.contains([0.5, 0.0]).inside);
    assert!(!a.contains([2.0, 0.0]).inside);
    assert_eq!(a.holes().unwrap(), vec![Hole::Disc { center: [0.0, 0.0], radius: 1.0 }]);
    orientation_ok(&a, None, 2e-4);
    assert_eq!(classify_holes(&a).verdict, HoleVerdict::Eligible);
}

#[test]
fn invalid_shapes_are_rejected() {
    assert!(PlanarRegion::annulus([0.0, 0.0], 2.0, 1.0).is_err());
    assert!(PlanarRegion::spiral_strip(0.4, 1.0, 0.0, None).is_err());
    assert!(PlanarRegion::spiral_strip(0.5, 1.0, 0.0, Some(0.0)).is_err());
    assert!(PlanarRegion::pinched_spiral(0.1, 0.5, None, None).is_err());
    assert!(PlanarRegion::composite(CompositeOp::Difference, vec![]).is_err());
}

#[test]
fn spiral_chart_round_trip() {
    for &(s, t) in &[(0.5, 0.0), (0.75, 1.0), (1.0, 7.3), (0.6, 14.0)] {
        let p = spiral_point(s, t).unwrap();
        let (s2, t2) = spiral_chart_inverse(p).unwrap();
        // (r − 1)e^θ loses ~e^θ ulps of relative accuracy
        assert!((s2 - s).abs() < 1e-14 * t.exp().max(1.0), "{s} {s2}");
        assert!((t2 - t).abs() < 1e-9);
    }
    assert!(spiral_chart_inverse([0.5, 0.0]).is_none());
    assert!(spiral_chart_inverse([3.0, 0.0]).is_none());
    assert!(spiral_point(0.3, 1.0).is_err());
}

#[test]
fn chart_values() {
    assert_eq!(spiral_point(0.5, 0.0).unwrap(), [1.5, 0.0]);
    assert_eq!(spiral_point(1.0, 0.0).unwrap(), [2.0, 0.0]);
    let p = spiral_point(0.5, 2.0 * PI).unwrap();
    assert!((p[0] - (1.0 + 0.5 * (-2.0 * PI).exp())).abs() < 1e-12 && p[1].abs() < 1e-12);
    assert!((-2.0 * PI).exp() < 0.5);
    let q = pinched_spiral_point(0.1, 0.0).unwrap();
    assert!((q[0] - 1.05).abs() < 1e-15);
    assert!(norm(pinched_spiral_point(0.1, -1e4).unwrap()) - 1.0 < 0.1 / 100.0);
    let q = pinched_spiral_point(0.1, PI).unwrap();
    assert!((norm(q) - (1.0 + 0.1 * (0.5 + PI.atan() / PI))).abs() < 1e-12);
    assert!((q[0] + norm(q)).abs() < 1e-12);
    assert!(pinched_spiral_point(0.0, 1.0).is_err());
}

#[test]
fn infinite_spiral_membership_via_chart() {
    let x = PlanarRegion::spiral_strip(0.5, 1.0, 0.0, None).unwrap();
    assert!(x.contains(spiral_point(0.75, 5.0).unwrap()).inside);
    assert!(!x.contains([0.9, 0.0]).inside);
}

#[test]
fn truncated_spiral_membership() {
    let x = PlanarRegion::truncated_spiral(1);
    let p = spiral_point(0.75, 3.0).unwrap();
    assert!(x.contains(p).inside);
    // beyond θ_max = 4π
    let q = spiral_point(0.75, 4.0 * PI + 1.0).unwrap();
    assert!(!x.contains(q).inside);
    // between two turns of the strip
    let gap = polar(1.0 + 0.45 * (-2.0 * PI - 1.0_f64).exp(), 1.0);
    assert!(!x.contains(gap).inside);
    orientation_ok(&x, None, 1e-8);
}

#[test]
fn untruncated_spiral_needs_cutoff() {
    let x = PlanarRegion::spiral_strip(0.5, 1.0, 0.0, None).unwrap();
    assert!(matches!(x.boundary_components(None), Err(RegionError::Unbounded(_))));
    let s = boundary_sample(&x, 50.0, Some(20.0)).unwrap();
    assert_eq!(s.truncated_at, Some(20.0));
    let pieces = x.closure_pieces().unwrap();
    assert!(pieces.iter().any(|p| matches!(p, Piece::Arc { radius, .. } if *radius == 1.0)));
    assert_eq!(classify_holes(&x).verdict, HoleVerdict::Inconclusive);
}

#[test]
fn pinched_spiral_membership() {
    let eps = 0.2;
    let x = PlanarRegion::pinched_spiral(eps, 0.25, Some(-20.0), Some(20.0)).unwrap();
    for &t in &[-15.0, -1.0, 0.0, 2.5, 15.0] {
        let p = pinched_spiral_point(eps, t).unwrap();
        assert!(x.contains(p).inside, "ψ({t}) not inside");
    }
    assert!(!x.contains([0.9, 0.0]).inside);
    assert!(!x.contains([1.0 + eps + 0.01, 0.0]).inside);
    orientation_ok(&x, None, 2e-4);
    let untruncated = PlanarRegion::pinched_spiral(eps, 0.25, None, None).unwrap();
    assert!(untruncated.closure_pieces().is_err());
}

#[test]
fn standard_cut_annulus_is_simply_connected() {
    let x = PlanarRegion::standard_cut_annulus();
    let comps = x.boundary_components(None).unwrap();
    assert_eq!(comps.len(), 1);
    orientation_ok(&x, None, 2e-4);
    assert!(x.contains([-1.5, 0.0]).inside);
    assert!(!x.contains([1.5, 0.0]).inside);
    let samples = boundary_sample(&x, 200.0, None).unwrap();
    assert!(curve::first_self_intersection(samples.components[0].distinct()).is_none());
    assert!(samples.components[0].signed_area() > 0.0);
}

#[test]
fn standard_bridged_annulus_has_one_hole() {
    let x = PlanarRegion::standard_bridged_annulus();
    let comps = x.boundary_components(None).unwrap();
    assert_eq!(comps.len(), 2);
    orientation_ok(&x, None, 2e-4);
    assert!(x.contains([0.0, 1.0]).inside);
    assert!(x.contains([0.0, -1.0]).inside);
    assert!(!x.contains([1.0, 0.0]).inside);
    assert!(!x.contains([0.0, 0.1 - 0.025]).inside);
    assert!(x.contains([2.5, 0.0]).inside);
    let c = classify_holes(&x);
    assert_eq!(c.verdict, HoleVerdict::NotEligible);
}

#[test]
fn disc_minus_discs_is_eligible() {
    let base = PlanarRegion::disc([0.0, 0.0], 5.0).unwrap();
    let h1 = PlanarRegion::disc([2.0, 0.0], 1.0).unwrap();
    let h2 = PlanarRegion::disc([-2.0, 0.0], 1.0).unwrap();
    let x = PlanarRegion::composite(CompositeOp::Difference, vec![base, h1, h2]).unwrap();
    assert_eq!(x.boundary_components(None).unwrap().len(), 3);
    assert_eq!(x.holes().unwrap().len(), 2);
    orientation_ok(&x, None, 2e-4);
    assert_eq!(classify_holes(&x).verdict, HoleVerdict::Eligible);
}

#[test]
fn lens_union_hole_is_not_strictly_convex() {
    let base = PlanarRegion::disc([0.0, 0.0], 5.0).unwrap();
    // two overlapping discs: the hole has reflex corners
    let a = PlanarRegion::disc([0.6, 0.0], 1.0).unwrap();
    let b = PlanarRegion::disc([-0.6, 0.0], 1.0).unwrap();
    let hole = PlanarRegion::composite(CompositeOp::Union, vec![a, b]).unwrap();
    let x = PlanarRegion::composite(CompositeOp::Difference, vec![base, hole]).unwrap();
    assert_eq!(classify_holes(&x).verdict, HoleVerdict::NotEligible);
}

#[test]
fn shape_json_round_trip() {
    let x = PlanarRegion::standard_bridged_annulus();
    let s = serde_json::to_string(&x).unwrap();
    assert!(s.contains("\"shape\":\"bridged_annulus\""));
    let y: PlanarRegion = serde_json::from_str(&s).unwrap();
    assert_eq!(x, y);
    let bad = r#"{"shape":"annulus","r_in":3,"r_out":1}"#;
    assert!(serde_json::from_str::<PlanarRegion>(bad).is_err());
    let unknown = r#"{"shape":"disc","radius":1,"colour":"red"}"#;
    assert!(serde_json::from_str::<PlanarRegion>(unknown).is_err());
}

proptest! {
    #[test]
    fn spiral_chart_is_inverse(s in 0.5f64..1.0, t in 0.0f64..15.0) {
        let p = spiral_point(s, t).unwrap();
        let (s2, t2) = spiral_chart_inverse(p).unwrap();
        prop_assert!((t2 - t).abs() < 1e-8);
        prop_assert!((s2 - s).abs() < 1e-14 * t.exp().max(1.0));
    }

    #[test]
    fn pinched_radius_in_range(eps in 1e-3f64..1.0, t in -1e3f64..1e3) {
        let r = norm(pinched_spiral_point(eps, t).unwrap());
        prop_assert!(r > 1.0 && r < 1.0 + eps);
    }

    #[test]
    fn sdf_sign_matches_annulus(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let a = PlanarRegion::annulus([0.0, 0.0], 1.0, 2.0).unwrap();
        let r = (x * x + y * y).sqrt();
        prop_assume!((r - 1.0).abs() > 1e-9 && (r - 2.0).abs() > 1e-9);
        prop_assert_eq!(a.contains([x, y]).inside, r > 1.0 && r < 2.0);
    }

    #[test]
    fn spiral_strip_membership_matches_chart(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let region = PlanarRegion::truncated_spiral(2);
        let tmax = 6.0 * PI;
        let expected = spiral_chart_inverse([x, y])
            .map(|(s, t)| s > 0.5 && s < 1.0 && t > 0.0 && t < tmax);
        let m = region.contains([x, y]);
        if let Some(e) = expected {
            prop_assume!(m.margin.abs() > 1e-9);
            prop_assert_eq!(m.inside, e);
        } else {
            prop_assert!(!m.inside || m.margin < 1e-9);
        }
    }
}
