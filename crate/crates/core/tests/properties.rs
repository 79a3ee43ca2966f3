use multiweight::dyadic::{telescope, Cube, DyadicGrid, GridFunction, GridShape, ProductFunction, ProductShape};
use multiweight::exponents::{derived_scales, dual, preceq_star, rat, Exponent, ExponentVector, Rational};
use multiweight::norms::{lp, mixed_norm};
use multiweight::operators::hl_maximal;
use multiweight::rubio::{maximal_norm_bound, rdf_iterate, BoundMode, RdfOperator};
use multiweight::weights::{ap_constant, apr_constant, BaseMeasure, CubeFamily, Weight};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn twelfths(a: i64) -> Exponent {
    Exponent::from_inv(rat(a, 12)).unwrap()
}

fn shape() -> impl Strategy<Value = GridShape> {
    prop_oneof![Just((1usize, 2u32)), Just((1, 3)), Just((1, 4)), Just((2, 2))].prop_map(|(d, l)| GridShape::new(d, l).unwrap())
}

fn positive(s: GridShape) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, s.cells()).prop_map(|v| v.into_iter().map(f64::exp).collect())
}

fn signed(s: GridShape) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, s.cells())
}

fn shape_and<F, S>(f: F) -> impl Strategy<Value = (GridShape, S::Value)>
where
    F: Fn(GridShape) -> S + Clone + 'static,
    S: Strategy,
{
    shape().prop_flat_map(move |s| (Just(s), f(s)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn delta_sum_and_cone(p in prop::collection::vec(0i64..=12, 2), r in prop::collection::vec(1i64..=12, 3)) {
        let pv = ExponentVector::p_vector(p.iter().map(|&a| twelfths(a)).collect()).unwrap();
        let rv = ExponentVector::r_vector(r.iter().map(|&a| twelfths(a)).collect()).unwrap();
        // oracle straight from the twelfths
        let psum: i64 = p.iter().sum();
        let d = [r[0] - p[0], r[1] - p[1], r[2] - (12 - psum)];
        let star = d.iter().all(|&x| x >= 0);
        prop_assert_eq!(preceq_star(&rv, &pv).unwrap(), star);
        if let Ok(ds) = derived_scales(&pv, &rv) {
            prop_assert!(star);
            let sum: Rational = ds.deltas.iter().fold(Rational::zero(), |a, x| a + &x.inv);
            prop_assert_eq!(sum, rat(r.iter().sum::<i64>() - 12, 12));
            for (x, want) in ds.deltas.iter().zip(d) {
                prop_assert_eq!(&x.inv, &rat(want, 12));
            }
        }
    }

    #[test]
    fn dual_is_an_involution(a in 1i64..=12) {
        let p = twelfths(a);
        let pd = dual(&p);
        prop_assert_eq!(&pd.inv + p.inv(), Rational::one());
    }

    #[test]
    fn apr_rescaling_at_two((s, v) in shape_and(positive), c in 0.1f64..10.0) {
        let fam = CubeFamily::all_discrete(s);
        let leb = BaseMeasure::lebesgue(s);
        let w = Weight::new(GridFunction::new(s, v.clone()).unwrap()).unwrap();
        let two = Exponent::int(2);
        let a = apr_constant(&w, &two, &two, &leb, &fam).unwrap().constant;
        let b = ap_constant(&w.pow(2.0), &two, &leb, &fam).unwrap().constant.sqrt();
        prop_assert!(rel(a, b) < 1e-12);
        prop_assert!(a >= 1.0 - 1e-12);
        // scale invariance
        let wc = Weight::new(GridFunction::new(s, v.iter().map(|x| c * x).collect()).unwrap()).unwrap();
        prop_assert!(rel(ap_constant(&wc, &two, &leb, &fam).unwrap().constant, ap_constant(&w, &two, &leb, &fam).unwrap().constant) < 1e-12);
    }

    #[test]
    fn telescoping_reproduces((s, f) in shape_and(signed), seed in any::<u64>()) {
        let grid = DyadicGrid::random(s, &mut ChaCha8Rng::seed_from_u64(seed));
        let f = GridFunction::new(s, f).unwrap();
        let t = telescope(&f, &grid, &Cube::top(s.d)).unwrap();
        prop_assert!(t.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn maximal_matches_interval_enumeration(f in prop::collection::vec(-1.0f64..1.0, 8)) {
        let s = GridShape::new(1, 3).unwrap();
        let g = GridFunction::new(s, f.clone()).unwrap();
        let m = hl_maximal(&g, &BaseMeasure::lebesgue(s), &CubeFamily::all_discrete(s));
        for x in 0..8 {
            let mut best: f64 = 0.0;
            for a in 0..=x {
                for b in x + 1..=8 {
                    let avg = f[a..b].iter().map(|v| v.abs()).sum::<f64>() / (b - a) as f64;
                    best = best.max(avg);
                }
            }
            prop_assert!((m.values()[x] - best).abs() < 1e-14);
        }
    }

    #[test]
    fn mixed_norm_diagonal_is_flat(
        f in prop::collection::vec(-1.0f64..1.0, 32),
        p in prop_oneof![Just("1"), Just("3/2"), Just("2"), Just("5"), Just("inf")],
    ) {
        let ps = ProductShape::new(GridShape::new(1, 2).unwrap(), GridShape::new(1, 3).unwrap());
        let f = ProductFunction::new(ps, f).unwrap();
        let p: Exponent = p.parse().unwrap();
        let flat = if p.is_infinite() {
            f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            let pf = p.to_f64();
            (f.values().iter().map(|v| v.abs().powf(pf)).sum::<f64>() / 32.0).powf(1.0 / pf)
        };
        prop_assert!(rel(mixed_norm(&f, &p, &p), flat) < 1e-12);
    }

    #[test]
    fn lp_triangle((s, pair) in shape_and(|s| (signed(s), signed(s))), p in 1.0f64..6.0) {
        let f = GridFunction::new(s, pair.0).unwrap();
        let g = GridFunction::new(s, pair.1).unwrap();
        let sum = GridFunction::new(s, f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).unwrap();
        prop_assert!(lp(&sum, p) <= (lp(&f, p) + lp(&g, p)) * (1.0 + 1e-12));
    }

    #[test]
    fn rdf_certificates_hold_for_any_b((s, pair) in shape_and(|s| (positive(s), positive(s))), b in 1.0f64..8.0, k in 0usize..20) {
        let grid = DyadicGrid::standard(s);
        let w = Weight::new(GridFunction::new(s, pair.0).unwrap()).unwrap();
        let h = GridFunction::new(s, pair.1).unwrap();
        let op = RdfOperator::plain(CubeFamily::dyadic(&grid), Exponent::int(2), w).unwrap();
        let res = rdf_iterate(&h, &op, b, k).unwrap();
        prop_assert!(res.certs.domination);
        prop_assert!(res.certs.a1_pointwise_ratio <= 1.0 + 1e-12);
        let bb = maximal_norm_bound(&op, BoundMode::Buckley).unwrap();
        prop_assert!(bb.certified);
    }
}
