use super::*;
use proptest::prelude::*;

fn c2(x: Point, y: Point) -> C2 {
    C2::from_xy(x, y)
}

fn model() -> ModelParams {
    ModelParams::new(1.0, 2.0, 0.5).unwrap()
}

#[test]
fn model_envelope_examples() {
    let p = model();
    assert!(model_envelope_contains(&p, &c2([1.5, 0.0], [0.0, 0.0])).unwrap());
    // inside the hole, |y|² < |x|² − 0.75
    assert!(model_envelope_contains(&p, &c2([0.95, 0.0], [0.0, 0.3])).unwrap());
    assert!(!model_envelope_contains(&p, &c2([0.5, 0.0], [0.0, 0.0])).unwrap());
    assert!(!model_envelope_contains(&p, &c2([1.5, 0.0], [0.0, 0.5])).unwrap());
    assert!(!model_envelope_contains(&p, &c2([2.0, 0.0], [0.0, 0.0])).unwrap());
}

#[test]
fn torus_hull_and_fixed_witness_agree_off_the_boundary() {
    let k = TorusK::solid_torus(1.0, 0.5).unwrap();
    let inside = c2([0.3, 0.1], [0.2, -0.1]);
    assert!(torus_hull_contains(1.0, 0.5, &inside).unwrap());
    assert_eq!(fixed_witness(&inside, &k, 2000).verdict, HullVerdict::NotExcluded);
    let outside = c2([0.95, 0.0], [0.0, 0.1]);
    assert!(!torus_hull_contains(1.0, 0.5, &outside).unwrap());
    let cert = fixed_witness(&outside, &k, 2000);
    assert_eq!(cert.verdict, HullVerdict::Excluded);
    assert!(cert.relative_margin > SAFETY);
    assert!(!cert.low_confidence);
    assert!((cert.log_max_modulus_on_k - 0.75).abs() < 1e-15);
}

#[test]
fn sampled_max_never_exceeds_analytic() {
    let k = TorusK::new(
        ConvexSet::Polygon { vertices: vec![[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]] },
        FiberRegion::Ellipse { center: [0.1, 0.0], semi_axes: [1.0, 0.6], angle: 0.4 },
    )
    .unwrap();
    for zeta in [C2::ZERO, c2([1.0, 0.5], [0.3, 0.2]), c2([-2.0, 3.0], [1.0, -1.0])] {
        let a = k.log_max_modulus(&zeta);
        let s = k.sampled_log_max_modulus(&zeta, 20_000);
        assert!(s <= a + 1e-9, "{s} > {a}");
        assert!(a - s < 0.05 * (1.0 + a.abs()), "sampled max too far below: {s} vs {a}");
    }
}

#[test]
fn halton_first_terms() {
    let v: Vec<f64> = (1..5).map(|i| halton(i, 2)).collect();
    assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-16);
}

#[test]
fn leaf_check_certifies_hull_points() {
    for z in [
        c2([0.3, 0.1], [0.2, -0.1]),
        c2([0.0, 0.0], [0.0, 0.0]),
        c2([0.5, 0.0], [0.0, 0.45]),
        c2([0.2, 0.2], [-0.3, 0.1]),
    ] {
        let l = leaf_boundary_check(1.0, 0.5, &z, 1024).unwrap();
        assert_eq!(l.verdict, LeafVerdict::Certified, "{z:?}: {}", l.reason);
        assert!(l.max_residual <= LEAF_TOL);
    }
}

#[test]
fn leaf_check_linear_leaf() {
    // c = z₁² + z₂² = 0 for z = (a, ia)
    let a = Complex64::new(0.2, 0.1);
    let z = C2::new(a, Complex64::i() * a);
    assert!((z.z1 * z.z1 + z.z2 * z.z2).norm() < 1e-15);
    let l = leaf_boundary_check(1.0, 0.5, &z, 1024).unwrap();
    assert_eq!(l.verdict, LeafVerdict::Certified, "{}", l.reason);
}

#[test]
fn leaf_check_rejects_points_outside_hull() {
    let z = c2([0.95, 0.0], [0.0, 0.1]);
    assert!(matches!(leaf_boundary_check(1.0, 0.5, &z, 256), Err(HullError::Precondition(_))));
}

#[test]
fn leaf_on_k_is_trivially_certified() {
    let z = c2([0.3, 0.0], [0.0, 0.5]);
    let l = leaf_boundary_check(1.0, 0.5, &z, 256).unwrap();
    assert_eq!(l.verdict, LeafVerdict::Certified);
    assert_eq!(l.boundary_samples, 1);
}

#[test]
fn escape_radius_for_unit_disc() {
    let kx = ConvexSet::disc([0.0, 0.0], 1.0);
    let rep = hull_escape_radius(&kx, &FiberRegion::ball(1.0), 2.0, &EscapeConfig::default()).unwrap();
    // max |x − ζ_x|² = 4 and min |y − ζ_y|² = (R − 2)² give R₁ = 4
    assert!(rep.r1 > 4.0 - 1e-3 && rep.r1 <= 4.0 + 1e-3, "{}", rep.r1);
    assert!(rep.r1 <= 5.0);
    assert!(rep.margin < 1.0);
    let smaller = hull_escape_radius(&kx, &FiberRegion::ball(1.0), 1.0, &EscapeConfig::default()).unwrap();
    assert!(smaller.r1 <= rep.r1);
}

#[test]
fn escape_margin_at_five() {
    let kx = ConvexSet::disc([0.0, 0.0], 1.0);
    let m = escape_log_margin(&kx, &FiberRegion::ball(1.0), 2.0, 5.0, 64).exp();
    assert!(m <= (-5.0f64).exp() + 1e-12, "{m}");
}

#[test]
fn escape_radius_errors() {
    let y = FiberRegion::ball(1.0);
    assert!(hull_escape_radius(&ConvexSet::disc([0.0, 0.0], 0.0), &y, 1.0, &EscapeConfig::default()).is_err());
    let off = FiberRegion::Ball { center: [3.0, 0.0], radius: 1.0 };
    assert!(matches!(
        hull_escape_radius(&ConvexSet::disc([0.0, 0.0], 1.0), &off, 1.0, &EscapeConfig::default()),
        Err(HullError::Precondition(_))
    ));
}

#[test]
fn envelope_slice_matches_model() {
    let x = PlanarRegion::annulus([0.0, 0.0], 1.0, 2.0).unwrap();
    let y = FiberRegion::ball(0.5);
    let spec = SliceSpec::x1_y2([-2.2, 2.2], [-0.6, 0.6]);
    let g = envelope_slice(&x, &y, &spec, 61, &SliceConfig::default()).unwrap();
    assert_eq!(g.contradictions, 0);
    assert_eq!(g.counts.unresolved_gap, 0);
    let p = model();
    for cell in &g.cells {
        let z = spec.point(cell.u, cell.v);
        assert_eq!(cell.class.in_envelope(), model_envelope_contains(&p, &z).unwrap(), "{cell:?}");
    }
    assert!(g.counts.in_envelope_added > 0 && g.counts.in_hull_certified > 0);
}

#[test]
fn convex_base_has_no_hull_cells() {
    let x = PlanarRegion::disc([0.0, 0.0], 1.0).unwrap();
    let g = envelope_slice(&x, &FiberRegion::ball(0.5), &SliceSpec::x1_y2([-1.0, 1.0], [-0.4, 0.4]), 20, &SliceConfig::default()).unwrap();
    assert_eq!(g.counts.in_d, 400);
}

#[test]
fn slice_rejects_ineligible_base() {
    let x = PlanarRegion::standard_bridged_annulus();
    let r = envelope_slice(&x, &FiberRegion::ball(0.5), &SliceSpec::x1_y2([-1.0, 1.0], [-0.4, 0.4]), 4, &SliceConfig::default());
    assert!(matches!(r, Err(HullError::Hypothesis(_))));
}

#[test]
fn convex_set_json() {
    let k = TorusK::solid_torus(1.0, 0.5).unwrap();
    let s = serde_json::to_string(&k).unwrap();
    assert_eq!(serde_json::from_str::<TorusK>(&s).unwrap(), k);
}

fn torus_point() -> impl Strategy<Value = C2> {
    prop::array::uniform4(-1.2f64..1.2).prop_map(|a| c2([a[0], a[1]], [0.6 * a[2], 0.6 * a[3]]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_witness_complements_hull(z in torus_point()) {
        let (r1, r3) = (1.0, 0.5);
        let x2 = geom::dot(z.x(), z.x());
        let y2 = geom::dot(z.y(), z.y());
        prop_assume!(x2 <= r1 * r1 && y2 <= r3 * r3);
        prop_assume!((x2 - y2 - 0.75).abs() > 1e-6);
        let k = TorusK::solid_torus(r1, r3).unwrap();
        let excluded = fixed_witness(&z, &k, 64).verdict == HullVerdict::Excluded;
        prop_assert_eq!(excluded, !torus_hull_contains(r1, r3, &z).unwrap());
    }

    #[test]
    fn leaf_certified_points_are_never_excluded(z in torus_point(), zeta in torus_point()) {
        prop_assume!(torus_hull_contains(1.0, 0.5, &z).unwrap());
        let k = TorusK::solid_torus(1.0, 0.5).unwrap();
        let l = leaf_boundary_check(1.0, 0.5, &z, 512).unwrap();
        if l.verdict == LeafVerdict::Certified {
            for w in [C2::ZERO, zeta] {
                let cert = gaussian_certificate(&w, &z, &k, 64, WitnessKind::ShiftedGaussian);
                prop_assert_eq!(cert.verdict, HullVerdict::NotExcluded);
            }
        }
    }

    #[test]
    fn translation_equivariance(zeta in torus_point(), dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
        let k = TorusK::solid_torus(1.0, 0.5).unwrap();
        let moved = translate_k(&k, [dx, dy]);
        let shifted = c2(geom::add(zeta.x(), [dx, dy]), zeta.y());
        let a = k.log_max_modulus(&zeta);
        let b = moved.log_max_modulus(&shifted);
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn hull_scales(z in torus_point(), t in 0.2f64..5.0) {
        let x2 = geom::dot(z.x(), z.x());
        let y2 = geom::dot(z.y(), z.y());
        prop_assume!((x2 - y2 - 0.75).abs() > 1e-9 && (x2 - 1.0).abs() > 1e-9 && (y2 - 0.25).abs() > 1e-9);
        prop_assert_eq!(
            torus_hull_contains(1.0, 0.5, &z).unwrap(),
            torus_hull_contains(t, 0.5 * t, &z.scale(Complex64::new(t, 0.0))).unwrap()
        );
    }

    #[test]
    fn escape_margin_decreases_in_r(r0 in 0.0f64..3.0, a in 1.0f64..20.0, b in 1.0f64..20.0) {
        let kx = ConvexSet::disc([0.0, 0.0], 1.0);
        let y = FiberRegion::ball(1.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(lo > r0 + 1.0);
        let m_lo = escape_log_margin(&kx, &y, r0, lo, 16);
        let m_hi = escape_log_margin(&kx, &y, r0, hi, 16);
        prop_assert!(m_hi <= m_lo + 1e-12);
    }
}
