use serde::{Deserialize, Serialize};

use super::family::CubeFamily;
use super::measure::{product, BaseMeasure, Weight};
use super::WeightError;
use crate::dyadic::DiscreteCube;
use crate::exponents::{derived_scales, dual, rat, Exponent, ExponentVector};

/// A supremum over a cube family together with the cube attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub constant: f64,
    pub cube_family: String,
    pub argmax_cube: DiscreteCube,
    pub formula_variant: String,
}

pub(crate) fn sup_certificate(fam: &CubeFamily, per_cube: &[f64], variant: &str) -> Certificate {
    let (idx, constant) = per_cube
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Certificate {
        constant,
        cube_family: fam.mode().name().to_string(),
        argmax_cube: fam.cubes()[idx].clone(),
        formula_variant: variant.to_string(),
    }
}

/// `M_a(v)_Q = (⨍_Q v^a dμ)^{1/a}` per cube, with `a = ±∞` giving max/min.
///
/// `mu = None` means Lebesgue measure.
pub fn power_means(fam: &CubeFamily, v: &[f64], a: f64, mu: Option<&BaseMeasure>) -> Vec<f64> {
    if a == f64::INFINITY {
        return fam.maxes(v);
    }
    if a == f64::NEG_INFINITY {
        return fam.mins(v);
    }
    assert!(a != 0.0 && a.is_finite(), "power mean exponent {a}");
    let scale = if a > 0.0 {
        v.iter().copied().fold(0.0, f64::max)
    } else {
        v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let integrand: Vec<f64> = match mu {
        Some(m) => v.iter().zip(m.masses()).map(|(x, w)| (x / scale).powf(a) * w).collect(),
        None => v.iter().map(|x| (x / scale).powf(a)).collect(),
    };
    let num = fam.sums(&integrand);
    let den = match mu {
        Some(m) => fam.sums(m.masses()),
        None => fam.cubes().iter().map(|q| q.side.pow(fam.shape().d as u32) as f64).collect(),
    };
    num.iter().zip(&den).map(|(s, m)| (s / m).powf(1.0 / a) * scale).collect()
}

/// `[v]_{A_p(μ)}`.
pub fn ap_constant(v: &Weight, p: &Exponent, mu: &BaseMeasure, fam: &CubeFamily) -> Result<Certificate, WeightError> {
    if p.is_infinite() || p.to_f64() < 1.0 {
        return Err(WeightError::Exponent(format!("A_p needs 1 ≤ p < ∞, got p = {p}")));
    }
    let avg = power_means(fam, v.values(), 1.0, Some(mu));
    if p.inv() == &rat(1, 1) {
        let mins = fam.mins(v.values());
        let per: Vec<f64> = avg.iter().zip(&mins).map(|(a, m)| a / m).collect();
        return Ok(sup_certificate(fam, &per, "A_1: avg(v)·max(1/v)"));
    }
    let pf = p.to_f64();
    let dual_mean = power_means(fam, v.values(), -1.0 / (pf - 1.0), Some(mu));
    let per: Vec<f64> = avg.iter().zip(&dual_mean).map(|(a, m)| a / m).collect();
    Ok(sup_certificate(fam, &per, "A_p: avg(v)·avg(v^(1-p'))^(p-1)"))
}

/// `[v]_{A_{p,r}(μ)} = sup (⨍v^r)^{1/r} (⨍v^{−p′})^{1/p′}` with the endpoint replacements.
pub fn apr_constant(
    v: &Weight,
    p: &Exponent,
    r: &Exponent,
    mu: &BaseMeasure,
    fam: &CubeFamily,
) -> Result<Certificate, WeightError> {
    if p.to_f64() < 1.0 {
        return Err(WeightError::Exponent(format!("A_(p,r) needs p ≥ 1, got p = {p}")));
    }
    let p_is_one = p.inv() == &rat(1, 1);
    if p_is_one && r.is_infinite() {
        return Err(WeightError::TrivialClass);
    }
    let first = if r.is_infinite() {
        fam.maxes(v.values())
    } else {
        power_means(fam, v.values(), r.to_f64(), Some(mu))
    };
    let second = if p_is_one {
        fam.mins(v.values())
    } else {
        power_means(fam, v.values(), -dual(p).value_f64(), Some(mu))
    };
    let per: Vec<f64> = first.iter().zip(&second).map(|(a, b)| a / b).collect();
    let variant = match (r.is_infinite(), p_is_one, p.is_infinite()) {
        (true, _, _) => "A_(p,r), r=inf: max(v)·avg(v^-p')^(1/p')",
        (_, true, _) => "A_(p,r), p=1: avg(v^r)^(1/r)·max(1/v)",
        (_, _, true) => "A_(p,r), p=inf: avg(v^r)^(1/r)·avg(1/v)",
        _ => "A_(p,r): avg(v^r)^(1/r)·avg(v^-p')^(1/p')",
    };
    Ok(sup_certificate(fam, &per, variant))
}

/// The exponents probed for `A_∞` membership.
pub const A_INFINITY_GRID: [(i64, i64); 6] = [(1, 1), (5, 4), (3, 2), (2, 1), (4, 1), (8, 1)];

/// `min_p [v]_{A_p}` over [`A_INFINITY_GRID`] and the minimizing `p`.
pub fn a_infinity_report(v: &Weight, mu: &BaseMeasure, fam: &CubeFamily) -> Result<(f64, Exponent), WeightError> {
    let mut best: Option<(f64, Exponent)> = None;
    for (n, d) in A_INFINITY_GRID {
        let p = Exponent::ratio(n, d);
        let c = ap_constant(v, &p, mu, fam)?.constant;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, p));
        }
    }
    Ok(best.expect("nonempty grid"))
}

fn check_weights(wvec: &[Weight], p: &ExponentVector) -> Result<(), WeightError> {
    if wvec.len() != p.len() {
        return Err(WeightError::Exponent(format!("{} weights for {} exponents", wvec.len(), p.len())));
    }
    Ok(())
}

/// `sup_Q M_{δ_{m+1}}(w) ∏ 1/M_{−δᵢ}(wᵢ)`.
pub fn multilinear_delta_form(
    wvec: &[Weight],
    p: &ExponentVector,
    r: &ExponentVector,
    fam: &CubeFamily,
) -> Result<Vec<f64>, WeightError> {
    check_weights(wvec, p)?;
    let ds = derived_scales(p, r)?;
    let m = p.len();
    let w = product(wvec);
    let mut per = power_means(fam, w.values(), ds.deltas[m].value_f64(), None);
    for (wi, di) in wvec.iter().zip(&ds.deltas) {
        let neg = power_means(fam, wi.values(), -di.value_f64(), None);
        per.iter_mut().zip(&neg).for_each(|(x, n)| *x /= n);
    }
    Ok(per)
}

fn literal_average(fam: &CubeFamily, v: &[f64], a: f64) -> Vec<f64> {
    let pw: Vec<f64> = v.iter().map(|x| x.powf(a)).collect();
    fam.sums(&pw)
        .iter()
        .zip(fam.cubes())
        .map(|(s, q)| s / q.side.pow(fam.shape().d as u32) as f64)
        .collect()
}

/// The defining expression term by term, with the endpoint replacement table:
/// `p = r′_{m+1}` or `p = ∞` gives `max w`; `r_{m+1} = 1` gives `(⨍w^p)^{1/p}`;
/// `pᵢ = rᵢ` gives `max wᵢ^{−1}`; `pᵢ = ∞` gives `(⨍wᵢ^{−rᵢ})^{1/rᵢ}`.
pub fn multilinear_case_form(
    wvec: &[Weight],
    p: &ExponentVector,
    r: &ExponentVector,
    fam: &CubeFamily,
) -> Result<Vec<f64>, WeightError> {
    check_weights(wvec, p)?;
    derived_scales(p, r)?;
    let m = p.len();
    let w = product(wvec);
    let p_all = crate::exponents::reciprocal_sum(p.iter());
    let r_last = r.get(m);
    let r_last_dual = dual(r_last);
    let mut per = if p_all.is_infinite() || *p_all.inv() == r_last_dual.inv {
        fam.maxes(w.values())
    } else if r_last.inv() == &rat(1, 1) {
        let pf = p_all.to_f64();
        literal_average(fam, w.values(), pf).iter().map(|s| s.powf(1.0 / pf)).collect()
    } else {
        let pf = p_all.to_f64();
        let rd = r_last_dual.value_f64();
        let a = rd * pf / (rd - pf);
        literal_average(fam, w.values(), a).iter().map(|s| s.powf(1.0 / pf - 1.0 / rd)).collect()
    };
    for i in 0..m {
        let (pi, ri) = (p.get(i), r.get(i));
        let term: Vec<f64> = if pi == ri {
            fam.mins(wvec[i].values()).iter().map(|x| 1.0 / x).collect()
        } else if pi.is_infinite() {
            let rf = ri.to_f64();
            literal_average(fam, wvec[i].values(), -rf).iter().map(|s| s.powf(1.0 / rf)).collect()
        } else {
            let (pf, rf) = (pi.to_f64(), ri.to_f64());
            let a = rf * pf / (rf - pf);
            literal_average(fam, wvec[i].values(), a)
                .iter()
                .map(|s| s.powf(1.0 / rf - 1.0 / pf))
                .collect()
        };
        per.iter_mut().zip(&term).for_each(|(x, t)| *x *= t);
    }
    Ok(per)
}

/// Relative tolerance for two evaluation paths of the same constant.
pub const FORM_TOLERANCE: f64 = 1e-9;

/// `[w⃗]_{A_{p⃗,r⃗}}`: δ-form inside the cone, case form on its boundary.
pub fn multilinear_constant(
    wvec: &[Weight],
    p: &ExponentVector,
    r: &ExponentVector,
    fam: &CubeFamily,
) -> Result<Certificate, WeightError> {
    let ds = derived_scales(p, r)?;
    let case = multilinear_case_form(wvec, p, r, fam)?;
    if ds.deltas.iter().all(|d| d.is_positive()) {
        let delta = multilinear_delta_form(wvec, p, r, fam)?;
        let a = sup_certificate(fam, &delta, "delta-form");
        let b = sup_certificate(fam, &case, "case-form");
        if (a.constant - b.constant).abs() > FORM_TOLERANCE * a.constant.abs().max(1.0) {
            return Err(WeightError::FormMismatch { delta: a.constant, case: b.constant });
        }
        Ok(a)
    } else {
        Ok(sup_certificate(fam, &case, "case-form"))
    }
}

/// `sup_Q (⨍w^p)^{1/p} ∏ (⨍wᵢ^{−pᵢ′})^{1/pᵢ′}`, the class with `r⃗ = (1,…,1)`.
pub fn multilinear_ap_constant(wvec: &[Weight], p: &ExponentVector, fam: &CubeFamily) -> Result<Certificate, WeightError> {
    check_weights(wvec, p)?;
    let w = product(wvec);
    let p_all = crate::exponents::reciprocal_sum(p.iter());
    let mut per = if p_all.is_infinite() {
        fam.maxes(w.values())
    } else {
        let pf = p_all.to_f64();
        literal_average(fam, w.values(), pf).iter().map(|s| s.powf(1.0 / pf)).collect()
    };
    for (wi, pi) in wvec.iter().zip(p.iter()) {
        let term: Vec<f64> = if pi.inv() == &rat(1, 1) {
            fam.mins(wi.values()).iter().map(|x| 1.0 / x).collect()
        } else {
            let pd = dual(pi).value_f64();
            literal_average(fam, wi.values(), -pd).iter().map(|s| s.powf(1.0 / pd)).collect()
        };
        per.iter_mut().zip(&term).for_each(|(x, t)| *x *= t);
    }
    Ok(sup_certificate(fam, &per, "A_p-vector display"))
}
