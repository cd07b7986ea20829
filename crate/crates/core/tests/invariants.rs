use finsler_core::fixtures;
use finsler_core::liealg::{KVector, ValidatedModel};
use finsler_core::meanberwald::{eij_closed, eij_numeric};
use finsler_core::metric::{PhiFamily, PhiSpec};
use finsler_core::par::Execution;
use finsler_core::phicalc::{quantities_closed, quantities_generic, CurvContext};
use finsler_core::scurvature::SCurvature;
use proptest::prelude::*;

fn solvable3_with(v: [f64; 3]) -> Option<ValidatedModel> {
    let m = fixtures::solvable3().with_v(v.to_vec()).ok()?;
    (m.b() < 0.35).then(|| m.into_validated().ok()).flatten()
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0f64..2.0).prop_filter("nonzero", |y| y.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

fn v_strategy() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-0.2f64..0.2)
}

fn family() -> impl Strategy<Value = PhiSpec> {
    prop_oneof![Just(PhiSpec::square()), Just(PhiSpec::randers_square())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_quantities_match_generic(n in 2usize..7, b in 0.0f64..0.37, t in -1.0f64..1.0, phi in family()) {
        let ctx = CurvContext::new(n, b, t * b).unwrap();
        let g = quantities_generic(&phi, &ctx).unwrap();
        let c = quantities_closed(&phi, &ctx).unwrap();
        prop_assert!(c.max_relative_diff(&g) < 1e-10, "{:?} vs {:?}", c, g);
    }

    #[test]
    fn s_closed_matches_general(v in v_strategy(), y in direction(), phi in family()) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let eval = SCurvature::new(&m, &phi, None).unwrap();
        let y = KVector::new(y.to_vec());
        let general = eval.general(&y).unwrap();
        let closed = eval.closed(&y).unwrap().unwrap();
        prop_assert!((general - closed).abs() <= 1e-11 * (1.0 + general.abs()), "{general} vs {closed}");
    }

    #[test]
    fn s_is_positively_homogeneous(v in v_strategy(), y in direction(), lambda in 0.1f64..10.0, phi in family()) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let eval = SCurvature::new(&m, &phi, None).unwrap();
        let y = KVector::new(y.to_vec());
        let s1 = eval.general(&y).unwrap();
        let s2 = eval.general(&y.scaled(lambda)).unwrap();
        prop_assert!((s2 - lambda * s1).abs() <= 1e-11 * (1.0 + s2.abs()));
    }

    #[test]
    fn s_vanishes_along_v(v in v_strategy(), lambda in 0.1f64..5.0, phi in family()) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let eval = SCurvature::new(&m, &phi, None).unwrap();
        let s = eval.general(&m.v().scaled(lambda)).unwrap();
        prop_assert!(s.abs() < 1e-12);
    }

    #[test]
    fn eij_is_symmetric_and_annihilates_y(v in v_strategy(), y in direction(), phi in family()) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let (m, _) = m.orthonormalize().unwrap();
        let y = KVector::new(y.to_vec());
        let e = eij_closed(&m, phi.family(), 3, &y).unwrap();
        let scale = 1.0 + e.sup_norm();
        prop_assert!(e.asymmetry() < 1e-12 * scale);
        prop_assert!(e.euler_residual() < 1e-10 * scale);
    }

    #[test]
    fn eij_closed_agrees_with_numeric(v in v_strategy(), y in direction(), phi in family()) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let (m, _) = m.orthonormalize().unwrap();
        let y = KVector::new(y.to_vec());
        let closed = eij_closed(&m, phi.family(), 3, &y).unwrap();
        let numeric = eij_numeric(&m, &phi, 3, &y, None).unwrap();
        let gap = closed.max_abs_diff(&numeric.matrix);
        prop_assert!(gap < 1e-5 * (1.0 + closed.sup_norm()), "gap {gap}");
    }

    #[test]
    fn eij_scales_inversely(v in v_strategy(), y in direction(), lambda in 0.2f64..5.0) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let (m, _) = m.orthonormalize().unwrap();
        let y = KVector::new(y.to_vec());
        let e1 = eij_closed(&m, PhiFamily::Square, 3, &y).unwrap().to_matrix();
        let e2 = eij_closed(&m, PhiFamily::Square, 3, &y.scaled(lambda)).unwrap().to_matrix();
        let gap = (e2 * lambda - &e1).amax();
        prop_assert!(gap < 1e-11 * (1.0 + e1.amax()));
    }

    #[test]
    fn sweep_modes_are_identical(v in v_strategy(), seed in 0u64..1000) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let eval = SCurvature::new(&m, &PhiSpec::randers_square(), None).unwrap();
        let ys = finsler_core::sampling::alpha_unit_directions(&m, 32, seed).unwrap();
        let a = eval.sweep(&ys, Execution::Sequential).unwrap();
        let b = eval.sweep(&ys, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn riemannian_s_is_zero(v in v_strategy(), y in direction()) {
        let Some(m) = solvable3_with(v) else { return Ok(()) };
        let eval = SCurvature::new(&m, &PhiSpec::riemannian(), None).unwrap();
        let s = eval.general(&KVector::new(y.to_vec())).unwrap();
        prop_assert!(s.abs() < 1e-13);
    }
}
