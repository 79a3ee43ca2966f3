use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dyadic::{DyadicGrid, GridFunction, GridShape};
use crate::exponents::{rat, Exponent};
use crate::weights::{log_uniform, CubeFamily, Weight};

fn e(s: &str) -> Exponent {
    s.parse().unwrap()
}

fn grid(d: usize, l: u32, code: u64) -> DyadicGrid {
    DyadicGrid::from_code(GridShape::new(d, l).unwrap(), code)
}

fn exps(p: &str, r: &str, p0: &str, r0: &str, q0: &str) -> CaseExponents {
    CaseExponents::new(&e(p), &e(r), &e(p0), &e(r0), &e(q0)).unwrap()
}

fn dyadic_setup(g: &DyadicGrid) -> CaseSetup {
    CaseSetup::new(CubeFamily::dyadic(g), BoundMode::Buckley)
}

#[test]
fn buckley_constant_at_two() {
    assert!((buckley_constant(2.0) - 4.0).abs() < 1e-15);
    let g = grid(1, 3, 0);
    let op = RdfOperator::plain(CubeFamily::dyadic(&g), e("2"), Weight::one(g.shape)).unwrap();
    let b = maximal_norm_bound(&op, BoundMode::Buckley).unwrap();
    assert!((b.b - 4.0).abs() < 1e-12 && b.certified);
}

#[test]
fn empirical_bound_at_least_one() {
    let s = GridShape::new(1, 2).unwrap();
    let op = RdfOperator::plain(CubeFamily::all_discrete(s), e("2"), Weight::one(s)).unwrap();
    let b = maximal_norm_bound(&op, BoundMode::empirical(3)).unwrap();
    assert!(b.max_observed.unwrap() >= 1.0 - 1e-15);
    assert!(b.b >= 1.0);
    let again = maximal_norm_bound(&op, BoundMode::empirical(3)).unwrap();
    assert_eq!(b, again);
}

#[test]
fn buckley_needs_dyadic_family_and_range() {
    let s = GridShape::new(1, 2).unwrap();
    let op = RdfOperator::plain(CubeFamily::all_discrete(s), e("2"), Weight::one(s)).unwrap();
    assert!(maximal_norm_bound(&op, BoundMode::Buckley).is_err());
    assert!(matches!(
        RdfOperator::plain(CubeFamily::all_discrete(s), e("1"), Weight::one(s)),
        Err(RubioError::Range(_))
    ));
}

#[test]
fn constant_input_geometric_sum() {
    let g = grid(1, 3, 5);
    let op = RdfOperator::plain(CubeFamily::dyadic(&g), e("2"), Weight::one(g.shape)).unwrap();
    let h = GridFunction::constant(g.shape, 3.0);
    for k in [0usize, 1, 5, 16] {
        let res = rdf_iterate(&h, &op, 1.0, k).unwrap();
        let want = 3.0 * (2.0 - 2f64.powi(-(k as i32)));
        assert!(res.majorant.values().iter().all(|v| (v - want).abs() < 1e-12));
        assert!(res.certs.domination);
        assert!(res.certs.a1_pointwise_ratio <= 1.0 + 1e-12);
    }
    let res = rdf_iterate(&h, &op, 1.0, 0).unwrap();
    assert_eq!(res.majorant, h);
}

#[test]
fn rejects_negative_input() {
    let g = grid(1, 2, 0);
    let op = RdfOperator::plain(CubeFamily::dyadic(&g), e("2"), Weight::one(g.shape)).unwrap();
    let h = GridFunction::new(g.shape, vec![1.0, -0.5, 0.0, 2.0]).unwrap();
    assert_eq!(rdf_iterate(&h, &op, 1.0, 3).unwrap_err(), RubioError::Negative { cell: 1, value: -0.5 });
}

#[test]
fn iteration_certificates_on_random_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20u64 {
        let g = grid(2, 2, trial);
        let w = log_uniform(g.shape, 1.5, &mut rng);
        let h = log_uniform(g.shape, 2.0, &mut rng).into_function();
        for op in [
            RdfOperator::plain(CubeFamily::dyadic(&g), e("3/2"), w.clone()).unwrap(),
            RdfOperator::conjugated(CubeFamily::dyadic(&g), e("3"), w.clone()).unwrap(),
        ] {
            let b = maximal_norm_bound(&op, BoundMode::Buckley).unwrap();
            let res = rdf_iterate(&h, &op, b.b, DEFAULT_K).unwrap();
            assert!(res.certs.domination);
            assert!(res.certs.a1_pointwise_ratio <= 1.0 + 1e-12);
            assert!(res.norm_within(res.tail_bound));
            // [𝓡h·u]_{A₁} ≤ 2B·step for the conjugated variant
            if let MaximalVariant::Conjugated(u) = op.variant() {
                let v = Weight::new(res.majorant.mul(u)).unwrap();
                let leb = crate::weights::BaseMeasure::lebesgue(g.shape);
                let a1 = crate::weights::ap_constant(&v, &Exponent::one(), &leb, op.family()).unwrap().constant;
                assert!(a1 <= 2.0 * b.b * res.certs.step_ratio * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn case_exponent_bookkeeping() {
    let ex = exps("2", "2", "4", "4", "4");
    assert_eq!(ex.regime, Regime::Case1);
    assert_eq!(ex.s_inv, rat(1, 4));
    assert_eq!(ex.q, e("2"));
    assert!(ex.identities.iter().any(|s| s.starts_with("1 − p/s = p/p₀")));

    let ex = exps("3/2", "6", "1", "2", "2");
    assert_eq!(ex.regime, Regime::Case2);
    assert_eq!(ex.q, e("6"));
    assert!(ex.identities.iter().any(|s| s.starts_with("(p′+q)/(p′γ) = r₀q/q₀")));

    let ex = exps("3/2", "6", "1", "2", "3");
    assert_eq!(ex.regime, Regime::Case3);
    assert!(ex.identities.iter().any(|s| s.starts_with("r₀/q₀ = 1/(p′γ)")));

    let ex = exps("inf", "2", "2", "1", "2");
    assert_eq!(ex.regime, Regime::Case3);

    assert!(matches!(
        CaseExponents::new(&e("2"), &e("3"), &e("4"), &e("4"), &e("4")),
        Err(RubioError::Regime(_))
    ));
    assert!(matches!(
        CaseExponents::new(&e("2"), &e("2"), &e("2"), &e("2"), &e("2")),
        Err(RubioError::Regime(_))
    ));
}

#[test]
fn constants_give_constant_weights() {
    let g = grid(1, 3, 0);
    let setup = dyadic_setup(&g);
    let one = Weight::one(g.shape);
    let c1 = GridFunction::constant(g.shape, 1.0);
    let r1 = construct_case1(&one, &c1, &exps("2", "2", "4", "4", "4"), &setup).unwrap();
    let r2 = construct_case2(&one, &c1, &exps("4", "4", "2", "2", "2"), &setup).unwrap();
    let r3 = construct_case3(&one, 3, 0.2, None, &exps("4", "4", "2", "2", "4"), &setup).unwrap();
    for (i, r) in [r1, r2].iter().enumerate() {
        assert!(r.all_hold(), "case {}: {:?}", i + 1, r.failures());
        let w = r.big_w.as_ref().unwrap();
        assert!(w.values().iter().all(|x| (x / w.values()[0] - 1.0).abs() < 1e-12));
        assert!((r.w_class.as_ref().unwrap().constant - 1.0).abs() < 1e-12);
    }
    assert!(r3.all_hold(), "{:?}", r3.failures());
}

#[test]
fn zero_input_short_circuits_case1() {
    let g = grid(1, 2, 0);
    let r = construct_case1(&Weight::one(g.shape), &GridFunction::zeros(g.shape), &exps("2", "2", "4", "4", "4"), &dyadic_setup(&g))
        .unwrap();
    assert!(r.trivial && r.big_w.is_none());
}

#[test]
fn wrong_regime_rejected() {
    let g = grid(1, 2, 0);
    let one = Weight::one(g.shape);
    let c1 = GridFunction::constant(g.shape, 1.0);
    let err = construct_case1(&one, &c1, &exps("4", "4", "2", "2", "2"), &dyadic_setup(&g)).unwrap_err();
    assert!(matches!(err, RubioError::Regime(_)));
}

#[test]
fn random_instances_all_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = [
        exps("2", "2", "4", "4", "4"),
        exps("2", "4", "3", "12", "3"),
        exps("2", "4", "4", "inf", "4"),
        exps("4", "4", "2", "2", "2"),
        exps("3/2", "6", "1", "2", "2"),
        exps("4", "4", "2", "2", "4"),
        exps("3/2", "6", "1", "2", "3"),
        exps("inf", "2", "2", "1", "2"),
    ];
    for trial in 0..6u64 {
        let g = grid(1, 4, trial);
        let w = log_uniform(g.shape, 1.0, &mut rng);
        let f = log_uniform(g.shape, 2.0, &mut rng).into_function();
        let setups = [dyadic_setup(&g), CaseSetup::new(CubeFamily::all_discrete(g.shape), BoundMode::empirical(trial))];
        for (ex, setup) in cases.iter().flat_map(|ex| setups.iter().map(move |s| (ex, s))) {
            let rep = match ex.regime {
                Regime::Case1 => construct_case1(&w, &f, ex, setup),
                Regime::Case2 => construct_case2(&w, &case2_dual_witness(&f, ex), ex, setup),
                Regime::Case3 => construct_case3(&w, (trial * 5) as usize % 16, 0.1, Some(&f), ex, setup),
            }
            .unwrap();
            assert!(rep.all_hold(), "trial {trial}, case {:?}: {:?}", ex.regime, rep.failures());
        }
    }
}

#[test]
fn ball_cube_sizes() {
    let s = GridShape::new(1, 3).unwrap();
    assert_eq!(ball_cube(s, 4, 0.01).side, 1);
    assert_eq!(ball_cube(s, 0, 0.2), crate::dyadic::DiscreteCube { origin: vec![6], side: 5 });
    assert_eq!(ball_cube(s, 2, 0.6).side, 8);
    let g = grid(1, 3, 0);
    let r = construct_case3(&Weight::one(s), 0, 0.2, None, &exps("4", "4", "2", "2", "4"), &dyadic_setup(&g)).unwrap();
    assert!((r.h.unwrap().integral() - 1.0).abs() < 1e-15);
}
