use serde::{Deserialize, Serialize};

use super::constants::{ap_constant, apr_constant, multilinear_constant, Certificate};
use super::family::CubeFamily;
use super::measure::{product, BaseMeasure, Weight};
use super::WeightError;
use crate::dyadic::GridFunction;
use crate::exponents::{derived_scales, lemma_scales, reciprocal_sum, Exponent, ExponentVector, Rational};
use crate::norms::power_sum_norm;
use num_traits::One;

/// Relative slack allowed when a computed constant is compared with a bound.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(label: impl Into<String>, lhs: f64, bound: f64) -> Self {
        Self::with_slack(label, lhs, bound, 0.0)
    }

    /// `lhs ≤ bound·(1 + CERT_TOL) + slack`.
    pub fn with_slack(label: impl Into<String>, lhs: f64, bound: f64, slack: f64) -> Self {
        let holds = lhs <= bound * (1.0 + CERT_TOL) + slack + CERT_TOL;
        Self { label: label.into(), lhs, bound, holds }
    }

    /// `bound / lhs`, how much room was left.
    pub fn slack_ratio(&self) -> f64 {
        self.bound / self.lhs
    }
}

struct Scales {
    rho: f64,
    thetas: Vec<f64>,
    /// `1/r − 1`.
    excess: Rational,
    rho_inv: Rational,
    theta_invs: Vec<Rational>,
    delta_m: f64,
    delta_last: f64,
    r_m: f64,
    /// `p_m/r_m` and `δ_{m+1}/r_m`.
    big_p: Exponent,
    big_r: Exponent,
}

fn scales(p: &ExponentVector, r: &ExponentVector) -> Result<Scales, WeightError> {
    let ls = lemma_scales(p, r)?;
    let ds = derived_scales(p, r)?;
    let m = p.len();
    let rm_inv = r.get(m - 1).inv().clone();
    let big_p = Exponent::from_inv(p.get(m - 1).inv() / &rm_inv)?;
    let big_r = Exponent::from_inv(&ds.deltas[m].inv / &rm_inv)?;
    Ok(Scales {
        rho: ls.rho.value_f64(),
        thetas: ls.thetas.iter().map(|t| t.value_f64()).collect(),
        excess: ds.r.inv() - Rational::one(),
        rho_inv: ls.rho.inv.clone(),
        theta_invs: ls.thetas.iter().map(|t| t.inv.clone()).collect(),
        delta_m: ds.deltas[m - 1].value_f64(),
        delta_last: ds.deltas[m].value_f64(),
        r_m: r.get(m - 1).to_f64(),
        big_p,
        big_r,
    })
}

/// `(∏_{i<m} wᵢ)^ϱ`.
fn what_of(head: &[Weight], rho: f64, shape: crate::dyadic::GridShape) -> Weight {
    if head.is_empty() {
        Weight::one(shape)
    } else {
        product(head).pow(rho)
    }
}

fn inv_pow(w: &Weight, inv_exp: f64) -> Weight {
    // w^{1/δ}-type powers with 1/δ possibly zero
    if inv_exp == 0.0 {
        Weight::one(w.shape())
    } else {
        w.pow(inv_exp)
    }
}

fn class_exponent(excess: &Rational, inv: &Rational) -> Result<Exponent, WeightError> {
    // q = (1/r − 1)·x where 1/x = inv
    Ok(Exponent::from_value(excess / inv)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaForward {
    pub what: Weight,
    pub big_w: Weight,
    pub multilinear: Certificate,
    pub checks: Vec<BoundCheck>,
}

impl LemmaForward {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn assert_close(a: &GridFunction, b: &GridFunction, tol: f64, what: &str) -> Result<(), WeightError> {
    for (x, y) in a.values().iter().zip(b.values()) {
        if (x - y).abs() > tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE) {
            return Err(WeightError::Identity(format!("{what}: {x} vs {y}")));
        }
    }
    Ok(())
}

/// Builds `ŵ` and `W` from `w⃗` and certifies their classes.
pub fn lemma_main_forward(
    wvec: &[Weight],
    p: &ExponentVector,
    r: &ExponentVector,
    fam: &CubeFamily,
) -> Result<LemmaForward, WeightError> {
    let sc = scales(p, r)?;
    let m = p.len();
    let shape = wvec[0].shape();
    let what = what_of(&wvec[..m - 1], sc.rho, shape);
    let w = product(wvec);
    let rm = sc.r_m;
    let big_w = w.pow(rm).mul_w(&inv_pow(&what, -rm / sc.delta_last));
    let alt = wvec[m - 1].pow(rm).mul_w(&inv_pow(&what, rm / sc.delta_m));
    assert_close(&big_w, &alt, 1e-9, "two expressions for W")?;

    let multilinear = multilinear_constant(wvec, p, r, fam)?;
    let a = multilinear.constant;
    let leb = BaseMeasure::lebesgue(shape);
    let mut checks = Vec::new();
    for i in 0..m - 1 {
        let q = class_exponent(&sc.excess, &sc.theta_invs[i])?;
        let c = ap_constant(&wvec[i].pow(sc.thetas[i]), &q, &leb, fam)?.constant;
        checks.push(BoundCheck::new(format!("i.1[{}]", i + 1), c, a.powf(sc.thetas[i])));
    }
    let q = class_exponent(&sc.excess, &sc.rho_inv)?;
    let c = ap_constant(&what, &q, &leb, fam)?.constant;
    checks.push(BoundCheck::new("i.2", c, a.powf(sc.rho)));
    let mu_hat = BaseMeasure::from_weight(&what);
    let c = apr_constant(&big_w, &sc.big_p, &sc.big_r, &mu_hat, fam)?.constant;
    checks.push(BoundCheck::new("i.3", c, a.powf(rm)));
    Ok(LemmaForward { what, big_w, multilinear, checks })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaInverse {
    pub w_m: Weight,
    pub what: Weight,
    pub multilinear: f64,
    /// `[W]^{1/r_m}`, `[ŵ]^{1/ϱ}` and each `[wᵢ^{θᵢ}]^{1/θᵢ}`.
    pub factors: Vec<f64>,
    pub check: BoundCheck,
}

/// Recovers `w_m = W^{1/r_m} ŵ^{−1/δ_m}` and certifies the product bound.
pub fn lemma_main_inverse(
    head: &[Weight],
    big_w: &Weight,
    p: &ExponentVector,
    r: &ExponentVector,
    fam: &CubeFamily,
) -> Result<LemmaInverse, WeightError> {
    let sc = scales(p, r)?;
    let m = p.len();
    if head.len() + 1 != m {
        return Err(WeightError::Exponent(format!("{} leading weights for m = {m}", head.len())));
    }
    let shape = big_w.shape();
    let what = what_of(head, sc.rho, shape);
    let w_m = big_w.pow(1.0 / sc.r_m).mul_w(&inv_pow(&what, -1.0 / sc.delta_m));
    let mut wvec = head.to_vec();
    wvec.push(w_m.clone());
    let lhs = multilinear_constant(&wvec, p, r, fam)?.constant;

    let leb = BaseMeasure::lebesgue(shape);
    let mu_hat = BaseMeasure::from_weight(&what);
    let mut factors = Vec::new();
    let cw = apr_constant(big_w, &sc.big_p, &sc.big_r, &mu_hat, fam)?.constant;
    factors.push(cw.powf(1.0 / sc.r_m));
    let q = class_exponent(&sc.excess, &sc.rho_inv)?;
    factors.push(ap_constant(&what, &q, &leb, fam)?.constant.powf(1.0 / sc.rho));
    for i in 0..m - 1 {
        let q = class_exponent(&sc.excess, &sc.theta_invs[i])?;
        let c = ap_constant(&head[i].pow(sc.thetas[i]), &q, &leb, fam)?.constant;
        factors.push(c.powf(1.0 / sc.thetas[i]));
    }
    let bound: f64 = factors.iter().product();
    Ok(LemmaInverse { w_m, what, multilinear: lhs, factors, check: BoundCheck::new("ii", lhs, bound) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRewrite {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs2: f64,
    pub rhs2: f64,
}

impl NormRewrite {
    pub fn max_rel_gap(&self) -> f64 {
        let gap = |a: f64, b: f64| {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        };
        gap(self.lhs, self.rhs).max(gap(self.lhs2, self.rhs2))
    }
}

/// Both sides of the two norm identities carried by the factorization.
pub fn norm_rewrite_check(
    f: &GridFunction,
    wvec: &[Weight],
    p: &ExponentVector,
    r: &ExponentVector,
) -> Result<NormRewrite, WeightError> {
    let sc = scales(p, r)?;
    let m = p.len();
    let shape = f.shape();
    let what = what_of(&wvec[..m - 1], sc.rho, shape);
    let w = product(wvec);
    let rm = sc.r_m;
    let big_w = w.pow(rm).mul_w(&inv_pow(&what, -rm / sc.delta_last));
    let vol = shape.cell_volume();
    let hat_mass: Vec<f64> = what.values().iter().map(|v| v * vol).collect();
    let p_all = reciprocal_sum(p.iter());
    let pf = p_all.to_f64();
    let pm = p.get(m - 1).to_f64();
    let r_last_dual_inv = Rational::one() - r.get(m).inv();
    let rd_inv = crate::exponents::SignedRecip::new(r_last_dual_inv).inv_f64();

    let lhs = power_sum_norm(f.mul(&w).values(), pf, None, vol);
    let lhs2 = power_sum_norm(f.mul(&wvec[m - 1]).values(), pm, None, vol);
    let rewrite = |hat_exp: f64, outer: f64| {
        let g: Vec<f64> = f
            .values()
            .iter()
            .zip(what.values())
            .zip(big_w.values())
            .map(|((x, h), bw)| (x.abs() * h.powf(hat_exp)).powf(rm) * bw)
            .collect();
        power_sum_norm(&g, outer / rm, Some(&hat_mass), vol).powf(1.0 / rm)
    };
    let rhs = rewrite(-rd_inv, pf);
    let rhs2 = rewrite(-1.0 / rm, pm);
    Ok(NormRewrite { lhs, rhs, lhs2, rhs2 })
}
