use super::*;
use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{graph_matrix, RealPlane2, TransverseFrame};

fn reference_log() -> MultiFn {
    MultiFn::log(ComplexLinearForm::reference())
}

fn unit_circle(n: usize) -> PolyPath {
    PolyPath::real_circle([0.0, 0.0], 1.0, n).unwrap()
}

fn small_config() -> SheetConfig {
    SheetConfig {
        separation: SeparationConfig { grid: 128, ..Default::default() },
        ..Default::default()
    }
}

#[test]
fn degenerate_path_returns_start() {
    let f = reference_log();
    let p = C2::real(1.0, 0.0);
    let g = f.principal_germ(p).unwrap();
    let path = PolyPath::closed(vec![p]).unwrap();
    assert_eq!(continue_branch(&f, &path, &g).unwrap().value, g.value);
}

#[test]
fn unit_circle_decreases_log_by_two_pi_i() {
    let f = reference_log();
    let path = unit_circle(64);
    let g = f.principal_germ(path.first()).unwrap();
    let end = continue_branch(&f, &path, &g).unwrap();
    assert!((end.value - g.value - Complex64::new(0.0, -TWO_PI)).norm() < 1e-12);
    match loop_monodromy(&f, &path).unwrap() {
        Monodromy::Additive { increment, winding } => {
            assert_eq!(winding, -1);
            assert!((increment - Complex64::new(0.0, -TWO_PI)).norm() < 1e-9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unlinked_loop_lifts_as_loop() {
    let f = reference_log();
    let path = PolyPath::real_circle([3.0, 0.0], 1.0, 32).unwrap();
    assert_eq!(
        loop_monodromy(&f, &path).unwrap(),
        Monodromy::Additive { increment: Complex64::new(0.0, 0.0), winding: 0 }
    );
}

#[test]
fn sqrt_monodromy_around_branch_points() {
    let f = MultiFn::bridged_sqrt();
    for c in [[1.0, 0.0], [-1.0, 0.0]] {
        let path = PolyPath::real_circle(c, 0.5, 48).unwrap();
        let g = f.principal_germ(path.first()).unwrap();
        let end = continue_branch(&f, &path, &g).unwrap();
        assert!((end.value + g.value).norm() < 1e-12 * g.value.norm());
        assert!(matches!(loop_monodromy(&f, &path).unwrap(), Monodromy::Multiplicative { factor: -1, .. }));
    }
    let both = PolyPath::real_circle([0.0, 0.0], 2.0, 64).unwrap();
    match loop_monodromy(&f, &both).unwrap() {
        Monodromy::Multiplicative { factor, windings } => {
            assert_eq!(factor, 1);
            assert_eq!(windings[0].abs() + windings[1].abs(), 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn branch_locus_contact_is_an_error() {
    let f = reference_log();
    let path = PolyPath::open(vec![C2::real(-1.0, 0.0), C2::real(1.0, 0.0)]).unwrap();
    let g = f.principal_germ(path.first()).unwrap();
    assert!(matches!(continue_branch(&f, &path, &g), Err(MonodromyError::OnBranchLocus { .. })));
}

#[test]
fn invalid_start_germ_is_rejected() {
    let f = reference_log();
    let p = C2::real(1.0, 0.0);
    assert!(Germ::new(f.clone(), p, Complex64::new(0.3, 0.0)).is_err());
    let bad = Germ { func: f.clone(), base: p, value: Complex64::new(0.3, 0.0) };
    let path = PolyPath::open(vec![p, C2::real(2.0, 0.0)]).unwrap();
    assert!(matches!(continue_branch(&f, &path, &bad), Err(MonodromyError::InvalidGerm { .. })));
}

#[test]
fn random_loops_match_winding() {
    // independent route: winding of ℓ∘γ from the accumulated principal
    // angle of closely sampled vertices
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let form = ComplexLinearForm::new(Complex64::new(1.0, 0.2), Complex64::new(-0.4, 1.1)).unwrap();
    let f = MultiFn::log(form);
    for _ in 0..100 {
        let n = rng.gen_range(3..9);
        let mut verts: Vec<C2> = (0..n)
            .map(|_| {
                C2::new(
                    Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                    Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                )
            })
            .collect();
        verts.push(verts[0]);
        let path = PolyPath::new(verts, true).unwrap();
        let Ok(m) = loop_monodromy(&f, &path) else { continue };
        let Monodromy::Additive { increment, winding } = m else { panic!() };
        let fine = path.subdivided(2000);
        let total: f64 = fine.segments().map(|(p, q)| (form.eval(&q) / form.eval(&p)).arg()).sum();
        assert_eq!(winding, (total / TWO_PI).round() as i64);
        assert!((increment.im - TWO_PI * winding as f64).abs() < 1e-9);
    }
}

#[test]
fn embedded_loops_in_transverse_planes_have_unit_monodromy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let form = ComplexLinearForm::reference();
    let frame = TransverseFrame::new(&form, &RealPlane2::real_coordinate()).unwrap();
    let f = MultiFn::log(form);
    for _ in 0..20 {
        let a = Matrix2::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let plane = frame.graph_plane(&a);
        assert!((graph_matrix(&plane, &form, &RealPlane2::real_coordinate()).unwrap() - a).norm() < 1e-9);
        let pts: Vec<C2> = (0..96)
            .map(|k| {
                let t = TWO_PI * k as f64 / 96.0;
                let s = Vector2::new(t.cos(), 0.5 * t.sin());
                C2::from_r4(&frame.embed(&s, &(a * s)))
            })
            .collect();
        let path = PolyPath::closed(pts).unwrap();
        let Monodromy::Additive { winding, .. } = loop_monodromy(&f, &path).unwrap() else { panic!() };
        assert_eq!(winding.abs(), 1);
    }
}

#[test]
fn hop_examples() {
    let l = ComplexLinearForm::reference();
    let h = hop_feasible(FRAC_PI_2, 0.01, 0.2, &l, DEFAULT_WINDOW_HALF_ANGLE);
    assert!(h.feasible && !h.inconclusive && h.witness.is_some());
    let h = hop_feasible(FRAC_PI_2, 0.3, 0.01, &l, DEFAULT_WINDOW_HALF_ANGLE);
    assert!(!h.feasible && !h.inconclusive, "{h:?}");
    assert!(h.lower_bound >= 0.01);
    let h = hop_feasible(FRAC_PI_2, 0.3, 5.0, &l, DEFAULT_WINDOW_HALF_ANGLE);
    assert!(h.feasible);
    assert!(!hop_feasible(0.0, -1.0, 0.1, &l, 1.0).feasible);
}

#[test]
fn sheets_on_truncated_spiral() {
    let l = ComplexLinearForm::reference();
    let x = PlanarRegion::truncated_spiral(3);
    let rep = exhibit_sheets(&x, &l, 0.5, FRAC_PI_2, 3, &small_config()).unwrap();
    assert_eq!(rep.entries.len(), 4);
    assert_eq!(rep.distinct_count, 4);
    assert_eq!(rep.progression_step, Some(Complex64::new(0.0, -TWO_PI)));
    assert!(rep.progression_residual < 1e-9);
    assert!(rep.all_hops_feasible);
    assert!(rep.entries.iter().all(|e| e.germ_residual < GERM_TOL));
    assert!(rep.chart_constant_c.is_none() && !rep.hop_assumption_notes.is_empty());

    let one = exhibit_sheets(&x, &l, 0.5, FRAC_PI_2, 0, &small_config()).unwrap();
    assert_eq!(one.distinct_count, 1);
    assert!(one.progression_step.is_none());
}

#[test]
fn sheets_reject_large_radius_and_bad_range() {
    let l = ComplexLinearForm::reference();
    let x = PlanarRegion::truncated_spiral(2);
    assert!(matches!(
        exhibit_sheets(&x, &l, 1.5, FRAC_PI_2, 1, &small_config()),
        Err(MonodromyError::Precondition(_))
    ));
    assert!(exhibit_sheets(&x, &l, 0.5, FRAC_PI_2, 5, &small_config()).is_err());
    let annulus = PlanarRegion::annulus([0.0, 0.0], 1.0, 2.0).unwrap();
    assert!(exhibit_sheets(&annulus, &l, 0.5, 0.0, 1, &small_config()).is_err());
}

#[test]
fn pinched_sheets_all_hops_feasible() {
    let l = ComplexLinearForm::reference();
    let x = PlanarRegion::pinched_spiral(0.01, 0.25, Some(-80.0), Some(80.0)).unwrap();
    let rep = exhibit_sheets(&x, &l, 0.2, FRAC_PI_2, 10, &small_config()).unwrap();
    assert_eq!(rep.distinct_count, 11);
    assert!(rep.all_hops_feasible);
}

#[test]
fn universal_cover_cases() {
    let l = ComplexLinearForm::reference();
    let ok = universal_cover_evidence(0.005, 0.1, &l, 5, &small_config()).unwrap();
    assert_eq!(ok.values.len(), 11);
    assert_eq!(ok.distinct_count, 11);
    assert!(ok.monotone && ok.all_hops_feasible);
    assert_eq!(ok.verdict, EvidenceVerdict::Complete);

    let trivial = universal_cover_evidence(0.005, 0.1, &l, 0, &small_config()).unwrap();
    assert_eq!(trivial.values.len(), 1);

    let broken = universal_cover_evidence(0.3, 0.01, &l, 5, &small_config()).unwrap();
    assert_eq!(broken.verdict, EvidenceVerdict::EvidenceIncomplete);
}

#[test]
fn distinct_count_clusters() {
    let v = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0 * PI)];
    assert_eq!(distinct_count(&v), 2);
    assert_eq!(distinct_count(&[]), 0);
}

fn arb_path() -> impl Strategy<Value = Vec<C2>> {
    prop::collection::vec(
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|(a, b, c, d)| C2::new(Complex64::new(a, b), Complex64::new(c, d))),
        2..7,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_does_not_change_value(verts in arb_path(), k in 2usize..5) {
        let f = reference_log();
        let path = PolyPath::open(verts).unwrap();
        let g = f.principal_germ(path.first());
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let a = continue_branch(&f, &path, &g);
        prop_assume!(a.is_ok());
        let b = continue_branch(&f, &path.subdivided(k), &g).unwrap();
        prop_assert!((a.unwrap().value - b.value).norm() < 1e-10);
    }

    #[test]
    fn reversal_and_concatenation(v1 in arb_path(), v2 in arb_path()) {
        let f = MultiFn::bridged_sqrt();
        let p = PolyPath::open(v1).unwrap();
        let mut tail = v2;
        tail.insert(0, p.last());
        let q = PolyPath::open(tail).unwrap();
        let g = f.principal_germ(p.first());
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let mid = continue_branch(&f, &p, &g);
        prop_assume!(mid.is_ok());
        let mid = mid.unwrap();
        prop_assert!(mid.residual() < GERM_TOL);
        let back = continue_branch(&f, &p.reversed(), &mid).unwrap();
        prop_assert!((back.value - g.value).norm() < 1e-10 * (1.0 + g.value.norm()));
        let end = continue_branch(&f, &q, &mid);
        prop_assume!(end.is_ok());
        let whole = continue_branch(&f, &p.concat(&q).unwrap(), &g).unwrap();
        prop_assert!((whole.value - end.unwrap().value).norm() < 1e-10 * (1.0 + whole.value.norm()));
    }
}
