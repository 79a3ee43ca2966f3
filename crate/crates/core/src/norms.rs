//! Weighted Lebesgue norms, mixed norms and sequence-valued norms.
//!
//! Weights multiply the function (`‖f w‖_{L^p}`); a base measure, when given,
//! replaces Lebesgue measure.

use crate::dyadic::{GridFunction, ProductFunction};
use crate::exponents::Exponent;
use crate::weights::{BaseMeasure, Weight};

#[derive(Clone, Debug)]
pub struct NormSpec<'a> {
    pub p: Exponent,
    pub weight: Option<&'a Weight>,
    pub measure: Option<&'a BaseMeasure>,
}

impl<'a> NormSpec<'a> {
    pub fn plain(p: Exponent) -> Self {
        Self { p, weight: None, measure: None }
    }

    pub fn weighted(p: Exponent, w: &'a Weight) -> Self {
        Self { p, weight: Some(w), measure: None }
    }

    pub fn with_measure(p: Exponent, mu: &'a BaseMeasure) -> Self {
        Self { p, weight: None, measure: Some(mu) }
    }
}

/// `(Σ |vᵢ|^p mᵢ)^{1/p}` with uniform mass `unit` when `masses` is absent.
pub fn power_sum_norm(values: &[f64], p: f64, masses: Option<&[f64]>, unit: f64) -> f64 {
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if p == f64::INFINITY || top == 0.0 {
        return top;
    }
    let s: f64 = match masses {
        Some(m) => values.iter().zip(m).map(|(v, w)| (v.abs() / top).powf(p) * w).sum(),
        None => values.iter().map(|v| (v.abs() / top).powf(p)).sum::<f64>() * unit,
    };
    top * s.powf(1.0 / p)
}

/// `‖f w‖_{L^p(μ)}`; a quasi-norm for `p < 1`.
pub fn lp_norm(f: &GridFunction, spec: &NormSpec<'_>) -> f64 {
    let vals: Vec<f64> = match spec.weight {
        Some(w) => f.values().iter().zip(w.values()).map(|(a, b)| a * b).collect(),
        None => f.values().to_vec(),
    };
    power_sum_norm(&vals, spec.p.to_f64(), spec.measure.map(|m| m.masses()), f.shape().cell_volume())
}

/// `‖f‖_{L^p}` for a float exponent (`f64::INFINITY` allowed).
pub fn lp(f: &GridFunction, p: f64) -> f64 {
    power_sum_norm(f.values(), p, None, f.shape().cell_volume())
}

/// `(∫ |f|^p σ)^{1/p}`: the norm of `L^p(σ dx)`.
pub fn lp_measure(f: &GridFunction, p: f64, sigma: &GridFunction) -> f64 {
    let vol = f.shape().cell_volume();
    let masses: Vec<f64> = sigma.values().iter().map(|s| s * vol).collect();
    power_sum_norm(f.values(), p, Some(&masses), vol)
}

/// `x₁ ↦ ‖f(x₁,·)‖_{L^q}`.
pub fn slice_norms(f: &ProductFunction, q: &Exponent) -> GridFunction {
    let qf = q.to_f64();
    GridFunction::from_fn(f.shape().first, |i| lp(&f.slice(i), qf))
}

/// `‖ ‖f(x₁,x₂)‖_{L^q_{x₂}} ‖_{L^p_{x₁}}`.
pub fn mixed_norm(f: &ProductFunction, p: &Exponent, q: &Exponent) -> f64 {
    lp(&slice_norms(f, q), p.to_f64())
}

/// `‖ (Σⱼ |fⱼ v|^s)^{1/s} ‖_{L^q}`, with `s = ∞` as the sup over `j`.
pub fn vv_norm(fj: &[GridFunction], q: &Exponent, s: &Exponent, weight: Option<&Weight>) -> f64 {
    let shape = fj[0].shape();
    let sf = s.to_f64();
    let inner = GridFunction::from_fn(shape, |c| {
        let col: Vec<f64> = fj
            .iter()
            .map(|f| f.values()[c] * weight.map_or(1.0, |w| w.values()[c]))
            .collect();
        power_sum_norm(&col, sf, None, 1.0)
    });
    lp(&inner, q.to_f64())
}

/// `‖{a_{i,j}}‖_{ℓ^p_j(ℓ^q_i)}` with `rows[j][i] = a_{i,j}`.
pub fn nested_seq_norm(rows: &[Vec<f64>], p: &Exponent, q: &Exponent) -> f64 {
    let inner: Vec<f64> = rows.iter().map(|r| power_sum_norm(r, q.to_f64(), None, 1.0)).collect();
    power_sum_norm(&inner, p.to_f64(), None, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::GridShape;

    fn shape(d: usize, l: u32) -> GridShape {
        GridShape::new(d, l).unwrap()
    }

    #[test]
    fn lp_examples() {
        let s = shape(1, 2);
        let one = GridFunction::constant(s, 1.0);
        for p in ["1/2", "1", "3", "inf"] {
            let e: Exponent = p.parse().unwrap();
            assert!((lp_norm(&one, &NormSpec::plain(e)) - 1.0).abs() < 1e-15);
        }
        let f = GridFunction::new(s, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let v = lp_norm(&f, &NormSpec::plain(Exponent::int(2)));
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        let g = GridFunction::new(s, vec![0.3, -2.0, 1.5, 0.0]).unwrap();
        let lhs = lp(&g.abs().powf(1.5), 3.0 / 1.5);
        assert!((lhs - lp(&g, 3.0).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn nested_examples() {
        let a = vec![vec![1.0, -3.0], vec![2.0, 0.5]];
        assert_eq!(nested_seq_norm(&a, &Exponent::one(), &Exponent::infinity()), 5.0);
        assert_eq!(nested_seq_norm(&[vec![-2.5]], &Exponent::int(3), &Exponent::int(7)), 2.5);
        let flat = nested_seq_norm(&a, &Exponent::int(3), &Exponent::int(3));
        let direct = (1.0f64 + 27.0 + 8.0 + 0.125).powf(1.0 / 3.0);
        assert!((flat - direct).abs() < 1e-12);
    }

    #[test]
    fn vv_examples() {
        let s = shape(1, 2);
        let f = GridFunction::new(s, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let q = Exponent::int(3);
        let single = vv_norm(std::slice::from_ref(&f), &q, &Exponent::int(2), None);
        assert!((single - lp(&f, 3.0)).abs() < 1e-12);
        let four = vv_norm(&vec![f.clone(); 4], &q, &Exponent::int(2), None);
        assert!((four - 2.0 * single).abs() < 1e-12);
    }

    #[test]
    fn mixed_examples() {
        let (s1, s2) = (shape(1, 2), shape(1, 3));
        let g = GridFunction::new(s1, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let h = GridFunction::from_fn(s2, |i| (i as f64 - 3.5).abs() + 0.25);
        let f = ProductFunction::tensor(&g, &h);
        let (p, q) = (Exponent::int(3), Exponent::ratio(3, 2));
        let expect = lp(&g, 3.0) * lp(&h, 1.5);
        assert!((mixed_norm(&f, &p, &q) - expect).abs() < 1e-12);
        let sn = slice_norms(&f, &q);
        let direct = g.abs().scale(lp(&h, 1.5));
        assert!(sn.max_abs_diff(&direct) < 1e-12);
        let c = ProductFunction::constant(f.shape(), -2.0);
        assert!((mixed_norm(&c, &p, &q) - 2.0).abs() < 1e-12);
    }
}
