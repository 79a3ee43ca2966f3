use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dyadic::{DyadicGrid, GridFunction, GridShape, ProductFunction};
use crate::exponents::{Exponent, ExponentVector, VectorKind};

fn shape(d: usize, l: u32) -> GridShape {
    GridShape::new(d, l).unwrap()
}

fn pv(items: &[&str]) -> ExponentVector {
    ExponentVector::parse(VectorKind::P, items).unwrap()
}

fn rv(items: &[&str]) -> ExponentVector {
    ExponentVector::parse(VectorKind::R, items).unwrap()
}

fn random_weight(s: GridShape, rng: &mut ChaCha8Rng) -> Weight {
    log_uniform(s, 1.5, rng)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn constant_weight_has_unit_constants() {
    let s = shape(1, 3);
    let fam = CubeFamily::all_discrete(s);
    let leb = BaseMeasure::lebesgue(s);
    let v = Weight::from_values(s, vec![3.0; 8]).unwrap();
    for p in ["1", "3/2", "2", "7"] {
        let c = ap_constant(&v, &p.parse().unwrap(), &leb, &fam).unwrap().constant;
        assert!(close(c, 1.0, 1e-12), "p={p}: {c}");
    }
    let c = apr_constant(&v, &Exponent::int(3), &Exponent::int(2), &leb, &fam).unwrap();
    assert!(close(c.constant, 1.0, 1e-12));
}

#[test]
fn ap_matches_brute_force_over_intervals() {
    let s = shape(1, 2);
    let vals = [1.0, 1.0, 1.0, 8.0];
    let fam = CubeFamily::all_discrete(s);
    assert_eq!(fam.len(), 10);
    let v = Weight::from_values(s, vals.to_vec()).unwrap();
    let got = ap_constant(&v, &Exponent::int(2), &BaseMeasure::lebesgue(s), &fam).unwrap();
    let mut brute: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..=4 {
            let n = (b - a) as f64;
            let avg: f64 = vals[a..b].iter().sum::<f64>() / n;
            let inv: f64 = vals[a..b].iter().map(|x| 1.0 / x).sum::<f64>() / n;
            brute = brute.max(avg * inv);
        }
    }
    assert!(close(got.constant, brute, 1e-12), "{} vs {brute}", got.constant);
    assert_eq!(got.cube_family, "all_discrete_cubes");
}

#[test]
fn ap_duality_exponent() {
    let s = shape(1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fam = CubeFamily::all_discrete(s);
    let leb = BaseMeasure::lebesgue(s);
    for _ in 0..20 {
        let v = random_weight(s, &mut rng);
        let p = Exponent::int(3);
        let pd = crate::exponents::dual(&p).value_f64();
        let a = ap_constant(&v, &p, &leb, &fam).unwrap().constant;
        let b = ap_constant(&v.pow(1.0 - pd), &Exponent::ratio(3, 2), &leb, &fam).unwrap().constant;
        assert!(close(b, a.powf(pd - 1.0), 1e-9));
    }
}

#[test]
fn ap_is_monotone_in_p() {
    let s = shape(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fam = CubeFamily::all_discrete(s);
    let leb = BaseMeasure::lebesgue(s);
    for _ in 0..20 {
        let v = random_weight(s, &mut rng);
        let cs: Vec<f64> = A_INFINITY_GRID
            .iter()
            .map(|&(n, d)| ap_constant(&v, &Exponent::ratio(n, d), &leb, &fam).unwrap().constant)
            .collect();
        assert!(cs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{cs:?}");
        assert!(cs.iter().all(|&c| c >= 1.0 - 1e-12));
        let (best, _) = a_infinity_report(&v, &leb, &fam).unwrap();
        assert!(close(best, *cs.last().unwrap(), 1e-12));
    }
}

#[test]
fn apr_two_cell_example() {
    let s = shape(1, 1);
    let v = Weight::from_values(s, vec![1.0, 2.0]).unwrap();
    let fam = CubeFamily::all_discrete(s);
    assert_eq!(fam.len(), 3);
    let c = apr_constant(&v, &Exponent::int(2), &Exponent::int(2), &BaseMeasure::lebesgue(s), &fam).unwrap();
    assert!(close(c.constant, 1.25, 1e-12), "{}", c.constant);
    assert!(close(c.constant, (2.5f64 * 0.625).sqrt(), 1e-12));
}

#[test]
fn apr_trivial_class_is_rejected() {
    let s = shape(1, 1);
    let v = Weight::one(s);
    let err = apr_constant(&v, &Exponent::one(), &Exponent::infinity(), &BaseMeasure::lebesgue(s), &CubeFamily::all_discrete(s))
        .unwrap_err();
    assert_eq!(err, WeightError::TrivialClass);
    assert!(err.to_string().contains("v ≈ 1"));
}

#[test]
fn apr_rescaling_identities() {
    let s = shape(1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fam = CubeFamily::all_discrete(s);
    let leb = BaseMeasure::lebesgue(s);
    let (p, r) = (Exponent::int(3), Exponent::int(2));
    // γ = 1/2 + 2/3 = 7/6
    let (rg, pdg) = (Exponent::ratio(7, 3), Exponent::ratio(7, 4));
    for _ in 0..20 {
        let v = random_weight(s, &mut rng);
        let c = apr_constant(&v, &p, &r, &leb, &fam).unwrap().constant;
        let a = ap_constant(&v.pow(2.0), &rg, &leb, &fam).unwrap().constant.powf(0.5);
        let b = ap_constant(&v.pow(-1.5), &pdg, &leb, &fam).unwrap().constant.powf(1.0 / 1.5);
        assert!(close(c, a, 1e-9) && close(c, b, 1e-9), "{c} {a} {b}");
        let p1 = apr_constant(&v, &Exponent::one(), &r, &leb, &fam).unwrap().constant;
        let a1 = ap_constant(&v.pow(2.0), &Exponent::one(), &leb, &fam).unwrap().constant.sqrt();
        assert!(close(p1, a1, 1e-9));
        let scaled = Weight::new(v.as_function().scale(17.0)).unwrap();
        assert!(close(apr_constant(&scaled, &p, &r, &leb, &fam).unwrap().constant, c, 1e-12));
    }
}

#[test]
fn multilinear_unit_and_display_forms() {
    let s = shape(1, 3);
    let fam = CubeFamily::all_discrete(s);
    let ones = vec![Weight::one(s), Weight::one(s)];
    let c = multilinear_constant(&ones, &pv(&["4", "4"]), &rv(&["1", "1", "1"]), &fam).unwrap();
    assert!(close(c.constant, 1.0, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
        let p = pv(&["2", "2"]);
        let a = multilinear_constant(&ws, &p, &rv(&["1", "1", "1"]), &fam).unwrap().constant;
        let b = multilinear_ap_constant(&ws, &p, &fam).unwrap().constant;
        // direct: p = 1, so sup (⨍w)(⨍w₁^{−2})^{1/2}(⨍w₂^{−2})^{1/2}
        let w = product(&ws);
        let mut direct: f64 = 0.0;
        for q in fam.cubes() {
            let cells = q.cells(&s);
            let n = cells.len() as f64;
            let avg = |f: &dyn Fn(usize) -> f64| cells.iter().map(|&c| f(c)).sum::<f64>() / n;
            let t = avg(&|c| w.values()[c])
                * avg(&|c| ws[0].values()[c].powi(-2)).sqrt()
                * avg(&|c| ws[1].values()[c].powi(-2)).sqrt();
            direct = direct.max(t);
        }
        assert!(close(a, b, 1e-9) && close(a, direct, 1e-9), "{a} {b} {direct}");
    }
}

#[test]
fn multilinear_delta_and_case_forms_agree() {
    let s = shape(1, 3);
    let fam = CubeFamily::all_discrete(s);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (p, r) = (pv(&["4", "4"]), rv(&["1", "1", "1"]));
    for _ in 0..20 {
        let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
        let d = multilinear_delta_form(&ws, &p, &r, &fam).unwrap();
        let c = multilinear_case_form(&ws, &p, &r, &fam).unwrap();
        for (x, y) in d.iter().zip(&c) {
            assert!(close(*x, *y, 1e-9));
        }
        let cert = multilinear_constant(&ws, &p, &r, &fam).unwrap();
        assert_eq!(cert.formula_variant, "delta-form");
        assert!(cert.constant >= 1.0 - 1e-12);
    }
}

#[test]
fn multilinear_boundary_uses_case_form() {
    let s = shape(1, 3);
    let fam = CubeFamily::all_discrete(s);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
    // p = r′₃ = 2: the w-term becomes max w
    let cert = multilinear_constant(&ws, &pv(&["4", "4"]), &rv(&["4", "4", "2"]), &fam).unwrap();
    assert_eq!(cert.formula_variant, "case-form");
    let w = product(&ws);
    let mut direct: f64 = 0.0;
    for q in fam.cubes() {
        let cells = q.cells(&s);
        let t = cells.iter().map(|&c| w.values()[c]).fold(0.0, f64::max)
            * cells.iter().map(|&c| 1.0 / ws[0].values()[c]).fold(0.0, f64::max)
            * cells.iter().map(|&c| 1.0 / ws[1].values()[c]).fold(0.0, f64::max);
        direct = direct.max(t);
    }
    assert!(close(cert.constant, direct, 1e-12));
    let err = multilinear_constant(&ws, &pv(&["2", "2"]), &rv(&["1", "4", "1"]), &fam).unwrap_err();
    assert!(matches!(err, WeightError::Exponents(_)));
}

#[test]
fn lemma_forward_trivial_and_random() {
    let s = shape(1, 4);
    let fam = CubeFamily::all_discrete(s);
    let (p, r) = (pv(&["4", "4"]), rv(&["1", "1", "1"]));
    let ones = vec![Weight::one(s), Weight::one(s)];
    let fw = lemma_main_forward(&ones, &p, &r, &fam).unwrap();
    assert!(fw.what.values().iter().all(|&v| close(v, 1.0, 1e-12)));
    assert!(fw.big_w.values().iter().all(|&v| close(v, 1.0, 1e-12)));
    assert!(fw.checks.iter().all(|c| close(c.lhs, 1.0, 1e-12)));

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
        let fw = lemma_main_forward(&ws, &p, &r, &fam).unwrap();
        assert!(fw.all_hold(), "{:?}", fw.checks);
        let labels: Vec<&str> = fw.checks.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["i.1[1]", "i.2", "i.3"]);
    }
}

#[test]
fn lemma_inverse_round_trip() {
    let s = shape(1, 3);
    let fam = CubeFamily::all_discrete(s);
    let (p, r) = (pv(&["4", "4"]), rv(&["1", "1", "1"]));
    let ones = [Weight::one(s), Weight::one(s)];
    let inv = lemma_main_inverse(&ones[..1], &Weight::one(s), &p, &r, &fam).unwrap();
    assert!(inv.w_m.values().iter().all(|&v| close(v, 1.0, 1e-12)));
    assert!(inv.check.holds && close(inv.check.bound, 1.0, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
        let fw = lemma_main_forward(&ws, &p, &r, &fam).unwrap();
        let inv = lemma_main_inverse(&ws[..1], &fw.big_w, &p, &r, &fam).unwrap();
        for (a, b) in inv.w_m.values().iter().zip(ws[1].values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!(inv.check.holds, "{:?}", inv.check);
    }
}

#[test]
fn lemma_rejects_degenerate_scales() {
    let s = shape(1, 2);
    let fam = CubeFamily::all_discrete(s);
    let ones = vec![Weight::one(s), Weight::one(s)];
    assert!(lemma_main_forward(&ones, &pv(&["4", "4"]), &rv(&["4", "4", "2"]), &fam).is_err());
}

#[test]
fn norm_rewrites() {
    let s = shape(1, 4);
    let (p, r) = (pv(&["4", "4"]), rv(&["1", "1", "1"]));
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
    let zero = norm_rewrite_check(&GridFunction::zeros(s), &ws, &p, &r).unwrap();
    assert_eq!((zero.lhs, zero.rhs, zero.lhs2, zero.rhs2), (0.0, 0.0, 0.0, 0.0));
    for _ in 0..20 {
        let ws = vec![random_weight(s, &mut rng), random_weight(s, &mut rng)];
        let f = GridFunction::from_fn(s, |_| rng.gen_range(-2.0..2.0));
        let nr = norm_rewrite_check(&f, &ws, &p, &r).unwrap();
        assert!(nr.max_rel_gap() < 1e-9, "{nr:?}");
    }
    let ones = vec![Weight::one(s), Weight::one(s)];
    let f = GridFunction::from_fn(s, |c| c as f64 - 3.0);
    let nr = norm_rewrite_check(&f, &ones, &p, &r).unwrap();
    assert!(close(nr.lhs, crate::norms::lp(&f, 2.0), 1e-12));
}

#[test]
fn mixed_class_of_tensor_weights() {
    let (s1, s2) = (shape(1, 2), shape(1, 2));
    let fam1 = CubeFamily::all_discrete(s1);
    let fam2 = CubeFamily::all_discrete(s2);
    let p = pv(&["2", "3"]);
    let one = ProductFunction::constant(crate::dyadic::ProductShape::new(s1, s2), 1.0);
    let c = mixed_class_constants(&one, &one, &p, &fam1, &fam2).unwrap();
    assert!(close(c.max(), 1.0, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let u = random_weight(s1, &mut rng);
    let v = random_weight(s1, &mut rng);
    let w1 = tensor_weight(&u, &Weight::one(s2));
    let w2 = tensor_weight(&v, &Weight::one(s2));
    let c = mixed_class_constants(&w1, &w2, &p, &fam1, &fam2).unwrap();
    let base = multilinear_ap_constant(&[u, v], &p, &fam1).unwrap().constant;
    assert!(close(c.bilinear_first, base, 1e-12));
    assert!(close(c.power_second_1, 1.0, 1e-12) && close(c.power_second_2, 1.0, 1e-12));
    assert!(mixed_class_constants(&w1, &w2, &pv(&["1", "3"]), &fam1, &fam2).is_err());
}

#[test]
fn generators() {
    let s = shape(2, 3);
    let grid = DyadicGrid::standard(s);
    let w = generate_weight(&WeightGen::Power { a: 0.0 }, &grid).unwrap();
    assert!(w.weight.values().iter().all(|&v| v == 1.0));
    assert!(generate_weight(&WeightGen::RandomA1 { delta: 1.0, seed: 1 }, &grid).is_err());
    let fam = CubeFamily::dyadic(&grid);
    let leb = BaseMeasure::lebesgue(s);
    for seed in 0..10 {
        let delta = 0.3 + 0.06 * seed as f64;
        let g = generate_weight(&WeightGen::RandomA1 { delta, seed }, &grid).unwrap();
        let a1 = ap_constant(&g.weight, &Exponent::one(), &leb, &fam).unwrap().constant;
        assert!(a1 <= g.a1_bound.unwrap() * (1.0 + 1e-12), "{a1} > {:?}", g.a1_bound);
        let again = generate_weight(&g.params, &grid).unwrap();
        assert_eq!(again.weight, g.weight);
    }
    let json = serde_json::to_string(&WeightGen::Power { a: -0.5 }).unwrap();
    assert_eq!(json, r#"{"kind":"power","a":-0.5}"#);
}

#[test]
fn doubling_constant_of_lebesgue_and_weighted_measures() {
    let s = shape(1, 4);
    assert_eq!(BaseMeasure::lebesgue(s).doubling_constant(), 2.0);
    let w = power_weight(s, 1.0).unwrap();
    let mu = BaseMeasure::from_weight(&w);
    assert!(mu.doubling_constant() >= 2.0);
}
