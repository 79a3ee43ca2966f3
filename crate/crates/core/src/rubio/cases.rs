use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::iterate::{maximal_norm_bound, rdf_iterate, to_f64, BoundMode, NormBound, RdfCerts, RdfOperator, DEFAULT_K};
use super::RubioError;
use crate::dyadic::{DiscreteCube, GridFunction, GridShape};
use crate::exponents::{offdiag_targets, rational_str, Exponent, Rational};
use crate::norms::{lp, lp_measure};
use crate::weights::{ap_constant, apr_constant, BaseMeasure, BoundCheck, Certificate, CubeFamily, Weight};

/// Relative tolerance for cellwise identities between two expressions of one weight.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `1/p > 1/p₀`: the target exponent is smaller.
    Case1,
    /// `1/p < 1/p₀` and `q < ∞`.
    Case2,
    /// `1/p < 1/p₀` and `q = ∞`.
    Case3,
}

impl Regime {
    pub fn number(&self) -> u8 {
        match self {
            Regime::Case1 => 1,
            Regime::Case2 => 2,
            Regime::Case3 => 3,
        }
    }
}

/// Exact exponent bookkeeping for one extrapolation instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseExponents {
    pub regime: Regime,
    pub p: Exponent,
    pub r: Exponent,
    pub p0: Exponent,
    pub r0: Exponent,
    pub q0: Exponent,
    pub q: Exponent,
    /// `1/s > 0`.
    #[serde(with = "rational_str")]
    pub s_inv: Rational,
    /// `γ = 1/r + 1/p′`.
    #[serde(with = "rational_str")]
    pub gamma: Rational,
    /// Exponent of the space the iteration runs on: `rγ` in Case 1, `p′γ` otherwise.
    #[serde(with = "rational_str")]
    pub t: Rational,
    /// Identities verified exactly.
    pub identities: Vec<String>,
}

fn dual_inv(inv: &Rational) -> Rational {
    Rational::one() - inv
}

struct Ledger(Vec<String>);

impl Ledger {
    fn eq(&mut self, label: &str, a: Rational, b: Rational) -> Result<(), RubioError> {
        if a != b {
            return Err(RubioError::Identity(format!("{label}: {a} ≠ {b}")));
        }
        self.0.push(format!("{label} [{a}]"));
        Ok(())
    }

    fn open_unit(&mut self, label: &str, a: Rational) -> Result<(), RubioError> {
        if !(a.is_positive() && a < Rational::one()) {
            return Err(RubioError::Identity(format!("{label}: {a} ∉ (0,1)")));
        }
        self.0.push(format!("{label} ∈ (0,1) [{a}]"));
        Ok(())
    }
}

impl CaseExponents {
    /// Classifies `(p, r)` against `(p₀, r₀, q₀)` and checks every side condition exactly.
    pub fn new(p: &Exponent, r: &Exponent, p0: &Exponent, r0: &Exponent, q0: &Exponent) -> Result<Self, RubioError> {
        let tg = offdiag_targets(p0, r0, q0, p)?;
        if &tg.r != r {
            return Err(RubioError::Regime(format!(
                "1/r − 1/r₀ must equal 1/p − 1/p₀; r = {r} but the shift gives r = {}",
                tg.r
            )));
        }
        let q = tg.q;
        let (a, b, c, c0, e, e0) = (p.inv(), p0.inv(), r.inv(), r0.inv(), q.inv(), q0.inv());
        let gamma = c + dual_inv(a);
        let mut led = Ledger(Vec::new());
        let regime = if tg.shift.is_positive() {
            Regime::Case1
        } else if tg.shift.is_negative() && e.is_positive() {
            Regime::Case2
        } else if tg.shift.is_negative() {
            Regime::Case3
        } else {
            return Err(RubioError::Regime("p = p₀: nothing to extrapolate".into()));
        };
        let s_inv = tg.shift.abs();
        let pd = dual_inv(a);
        let p0d = dual_inv(b);
        let t = match regime {
            Regime::Case1 => {
                led.eq("1/s = 1/q − 1/q₀", s_inv.clone(), e - e0)?;
                led.eq("1/s = 1/r − 1/r₀", s_inv.clone(), c - c0)?;
                let rg = &gamma / c;
                // (p′γ)′ = rγ
                led.eq("1/(p′γ) + 1/(rγ) = 1", &pd / &gamma + c / &gamma, Rational::one())?;
                led.eq("1 − p/s = p/p₀", Rational::one() - &s_inv / a, b / a)?;
                let theta = &p0d.recip() * &rg * &s_inv;
                led.eq("1 − p₀′rγ/s = rp₀′/(r₀p′)", Rational::one() - &theta, c0 / (c * &p0d) * &pd)?;
                if c0.is_zero() {
                    led.eq("r = s", c.clone(), s_inv.clone())?;
                    led.eq("γ = 1/p₀′", gamma.clone(), p0d.clone())?;
                } else {
                    led.open_unit("p₀′rγ/s", theta)?;
                }
                rg
            }
            Regime::Case2 | Regime::Case3 => {
                led.eq("1/s = 1/r₀ − 1/r", s_inv.clone(), c0 - c)?;
                if regime == Regime::Case2 {
                    led.eq("1/s = 1/q₀ − 1/q", s_inv.clone(), e0 - e)?;
                } else {
                    led.eq("1/s = 1/q₀", s_inv.clone(), e0.clone())?;
                }
                let theta = (&gamma / &pd) / c0 * &s_inv;
                if b.is_one() {
                    led.eq("p′ = s", pd.clone(), s_inv.clone())?;
                    led.eq("γ = 1/r₀", gamma.clone(), c0.clone())?;
                    if regime == Regime::Case2 {
                        let lhs = (pd.recip() + e.recip()) * &pd / &gamma;
                        led.eq("(p′+q)/(p′γ) = r₀q/q₀", lhs, e0 / (c0 * e))?;
                    } else {
                        led.eq("r₀/q₀ = 1/(p′γ)", e0 / c0, &pd / &gamma)?;
                    }
                } else {
                    let rhs = c * &p0d / (c0 * &pd);
                    led.eq("1 − r₀p′γ/s = r₀p′/(rp₀′)", Rational::one() - &theta, rhs)?;
                    led.open_unit("r₀p′γ/s", theta)?;
                }
                &gamma / &pd
            }
        };
        if t <= Rational::one() {
            return Err(RubioError::Range(format!("iteration exponent {t} must exceed 1")));
        }
        Ok(Self {
            regime,
            p: p.clone(),
            r: r.clone(),
            p0: p0.clone(),
            r0: r0.clone(),
            q0: q0.clone(),
            q,
            s_inv,
            gamma,
            t,
            identities: led.0,
        })
    }

    pub fn s(&self) -> f64 {
        1.0 / to_f64(&self.s_inv)
    }

    pub fn gamma_f64(&self) -> f64 {
        to_f64(&self.gamma)
    }

    pub fn t_exponent(&self) -> Exponent {
        Exponent::from_value(self.t.clone()).expect("t > 1")
    }

    /// `p′`, finite since `p > 1`.
    pub fn p_dual(&self) -> f64 {
        1.0 / to_f64(&dual_inv(self.p.inv()))
    }

    /// `p₀′`, with `p₀ = 1` giving `∞`.
    pub fn p0_dual(&self) -> f64 {
        let inv = dual_inv(self.p0.inv());
        if inv.is_zero() {
            f64::INFINITY
        } else {
            1.0 / to_f64(&inv)
        }
    }
}

/// Cube family, bound mode and truncation depth shared by the constructions.
#[derive(Clone, Debug)]
pub struct CaseSetup {
    pub family: CubeFamily,
    pub mode: BoundMode,
    pub k: usize,
}

impl CaseSetup {
    pub fn new(family: CubeFamily, mode: BoundMode) -> Self {
        Self { family, mode, k: DEFAULT_K }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub exponents: CaseExponents,
    pub bound: NormBound,
    #[serde(rename = "K")]
    pub k: usize,
    pub tail_bound: f64,
    pub rdf: Option<RdfCerts>,
    /// `[W]_{A_{p₀,r₀}}`.
    pub w_class: Option<Certificate>,
    pub checks: Vec<BoundCheck>,
    /// Reported quantities that do not gate.
    pub info: BTreeMap<String, f64>,
    pub local_avg: Option<f64>,
    /// `‖gw‖ = 0`: nothing to construct.
    pub trivial: bool,
    #[serde(skip)]
    pub big_w: Option<Weight>,
    #[serde(skip)]
    pub h: Option<GridFunction>,
    #[serde(skip)]
    pub big_h: Option<GridFunction>,
}

impl CaseReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&BoundCheck> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    /// `[W]_{A_{p₀,r₀}}` divided by the proof's bound.
    pub fn class_ratio(&self) -> Option<f64> {
        self.checks.iter().find(|c| c.label.starts_with("[W]")).map(|c| c.lhs / c.bound)
    }
}

fn check_regime(ex: &CaseExponents, want: Regime) -> Result<(), RubioError> {
    if ex.regime != want {
        return Err(RubioError::Regime(format!(
            "construction for case {} called with case-{} exponents",
            want.number(),
            ex.regime.number()
        )));
    }
    Ok(())
}

fn check_shape(setup: &CaseSetup, shape: GridShape) -> Result<(), RubioError> {
    if setup.family.shape() != shape {
        return Err(RubioError::Shape("cube family and weight live on different grids".into()));
    }
    Ok(())
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

fn domination_ratio(h: &GridFunction, big_h: &GridFunction) -> f64 {
    h.values()
        .iter()
        .zip(big_h.values())
        .map(|(a, b)| if *a == 0.0 { 0.0 } else { a / b })
        .fold(0.0, f64::max)
}

fn weight_of(f: GridFunction) -> Result<Weight, RubioError> {
    Ok(Weight::new(f)?)
}

struct Classes {
    a1: f64,
    w_class: Certificate,
    w_apr: f64,
}

fn classes(v: &Weight, big_w: &Weight, w: &Weight, ex: &CaseExponents, fam: &CubeFamily) -> Result<Classes, RubioError> {
    let leb = BaseMeasure::lebesgue(w.shape());
    Ok(Classes {
        a1: ap_constant(v, &Exponent::one(), &leb, fam)?.constant,
        w_class: apr_constant(big_w, &ex.p0, &ex.r0, &leb, fam)?,
        w_apr: apr_constant(w, &ex.p, &ex.r, &leb, fam)?.constant,
    })
}

/// Case 1: `W = H^{−p/s} w^{1+p′/s}` with `H = 𝓡′(h^{p/(rγ)})^{rγ/p}`.
pub fn construct_case1(w: &Weight, g: &GridFunction, ex: &CaseExponents, setup: &CaseSetup) -> Result<CaseReport, RubioError> {
    check_regime(ex, Regime::Case1)?;
    check_shape(setup, w.shape())?;
    if g.values().iter().any(|x| !x.is_finite()) {
        return Err(RubioError::Degenerate("‖gw‖_{L^p} = ∞".into()));
    }
    let pf = ex.p.to_f64();
    let pd = ex.p_dual();
    let s = ex.s();
    let t = to_f64(&ex.t);
    let r = ex.r.to_f64();
    let u = w.pow(-pd);
    let op = RdfOperator::conjugated(setup.family.clone(), ex.t_exponent(), u.clone())?;
    let bound = maximal_norm_bound(&op, setup.mode)?;
    let gw = lp(&g.abs().mul(w), pf);
    let mut info = BTreeMap::new();
    info.insert("norm_gw".to_string(), gw);
    if gw == 0.0 {
        return Ok(CaseReport {
            exponents: ex.clone(),
            bound,
            k: setup.k,
            tail_bound: 0.0,
            rdf: None,
            w_class: None,
            checks: Vec::new(),
            info,
            local_avg: None,
            trivial: true,
            big_w: None,
            h: None,
            big_h: None,
        });
    }
    let h = g.abs().mul(&w.pow(pd)).scale(1.0 / gw);
    let res = rdf_iterate(&h.powf(pf / t), &op, bound.b, setup.k)?;
    let big_h = res.majorant.powf(t / pf);
    let v = weight_of(res.majorant.mul(&u))?;
    let big_w = weight_of(big_h.powf(-pf / s).mul(&w.pow(1.0 + pd / s)))?;
    let cl = classes(&v, &big_w, w, ex, &setup.family)?;

    let two_b = 2.0 * bound.b * res.certs.step_ratio;
    let r_over_r0 = r * ex.r0.inv_f64();
    let mut checks = vec![
        BoundCheck::new("h ≤ H", domination_ratio(&h, &big_h), 1.0),
        BoundCheck::new("‖H‖_{L^p(w^{−p′})} ≤ 2^{rγ/p}", lp_measure(&big_h, pf, u.as_function()), 2f64.powf(t / pf)),
        BoundCheck::new("[H^{p/(rγ)} w^{−p′}]_{A₁} ≤ 2B·step", cl.a1, two_b),
        BoundCheck::new(
            "[W]_{A_{p₀,r₀}} ≤ [H^{p/(rγ)} w^{−p′}]_{A₁}^{rγ/s} [w]_{A_{p,r}}^{r/r₀}",
            cl.w_class.constant,
            cl.a1.powf(t / s) * cl.w_apr.powf(r_over_r0),
        ),
        BoundCheck::new(
            "[W]_{A_{p₀,r₀}} ≤ (2B·step)^{rγ/s} [w]_{A_{p,r}}^{r/r₀}",
            cl.w_class.constant,
            two_b.powf(t / s) * cl.w_apr.powf(r_over_r0),
        ),
    ];
    if ex.r0.is_infinite() {
        let p0d = ex.p0_dual();
        let lhs = big_w.pow(-p0d);
        checks.push(BoundCheck::new("W^{−p₀′} = H^{p/(rγ)} w^{−p′}", max_rel_diff(lhs.values(), v.values()), IDENTITY_TOL));
        let leb = BaseMeasure::lebesgue(w.shape());
        let c = ap_constant(&lhs, &Exponent::one(), &leb, &setup.family)?.constant;
        checks.push(BoundCheck::new("[W^{−p₀′}]_{A₁} ≤ 2B·step", c, two_b));
    }
    info.insert("a1".into(), cl.a1);
    info.insert("w_apr".into(), cl.w_apr);
    info.insert("norm_ratio".into(), res.certs.norm_ratio);
    Ok(CaseReport {
        exponents: ex.clone(),
        bound,
        k: setup.k,
        tail_bound: res.tail_bound,
        rdf: Some(res.certs),
        w_class: Some(cl.w_class),
        checks,
        info,
        local_avg: None,
        trivial: false,
        big_w: Some(big_w),
        h: Some(h),
        big_h: Some(big_h),
    })
}

/// The extremal `h` for `‖f^{q₀}‖_{L^{q/q₀}(w^q)}`: `f^{q−q₀}` up to normalization.
pub fn case2_dual_witness(f: &GridFunction, ex: &CaseExponents) -> GridFunction {
    let (q, q0) = (ex.q.to_f64(), ex.q0.to_f64());
    f.abs().map(|x| if x == 0.0 { 0.0 } else { x.powf(q - q0) })
}

/// Shared tail of Cases 2 and 3: `W = v^{p′γ/s} w^{1−p′/s}` with `v ∈ A₁`.
#[allow(clippy::too_many_arguments)]
fn finish_upper(
    ex: &CaseExponents,
    setup: &CaseSetup,
    w: &Weight,
    h: GridFunction,
    big_h: GridFunction,
    big_w: Weight,
    v: Weight,
    bound: NormBound,
    tail_bound: f64,
    certs: RdfCerts,
    norm_check: BoundCheck,
    mut info: BTreeMap<String, f64>,
) -> Result<CaseReport, RubioError> {
    let pd = ex.p_dual();
    let s = ex.s();
    let gamma = ex.gamma_f64();
    let cl = classes(&v, &big_w, w, ex, &setup.family)?;
    let alt = v.pow(pd * gamma / s).mul_w(&w.pow(1.0 - pd / s));
    let p0d = ex.p0_dual();
    let w_exp = if p0d.is_infinite() { 0.0 } else { pd / p0d };
    let two_b = 2.0 * bound.b * certs.step_ratio;
    let mut checks = vec![
        BoundCheck::new("h ≤ H", domination_ratio(&h, &big_h), 1.0),
        norm_check,
        BoundCheck::new("[𝓡 input]_{A₁} ≤ 2B·step", cl.a1, two_b),
        BoundCheck::new("W = v^{p′γ/s} w^{1−p′/s}", max_rel_diff(big_w.values(), alt.values()), IDENTITY_TOL),
        BoundCheck::new(
            "[W]_{A_{p₀,r₀}} ≤ [v]_{A₁}^{p′γ/s} [w]_{A_{p,r}}^{p′/p₀′}",
            cl.w_class.constant,
            cl.a1.powf(pd * gamma / s) * cl.w_apr.powf(w_exp),
        ),
        BoundCheck::new(
            "[W]_{A_{p₀,r₀}} ≤ (2B·step)^{p′γ/s} [w]_{A_{p,r}}^{p′/p₀′}",
            cl.w_class.constant,
            two_b.powf(pd * gamma / s) * cl.w_apr.powf(w_exp),
        ),
    ];
    if ex.p0.inv().is_one() {
        let lhs = big_w.pow(ex.r0.to_f64());
        checks.push(BoundCheck::new("W^{r₀} = v", max_rel_diff(lhs.values(), v.values()), IDENTITY_TOL));
    } else {
        // the A_{∞,r} form of the last factor, reported only
        let leb = BaseMeasure::lebesgue(w.shape());
        let a_inf = apr_constant(w, &Exponent::infinity(), &ex.r, &leb, &setup.family)?.constant;
        info.insert("w_a_inf_r".into(), a_inf);
        info.insert("bound_with_a_inf_r".into(), cl.a1.powf(pd * gamma / s) * a_inf.powf(w_exp));
    }
    info.insert("a1".into(), cl.a1);
    info.insert("w_apr".into(), cl.w_apr);
    info.insert("norm_ratio".into(), certs.norm_ratio);
    Ok(CaseReport {
        exponents: ex.clone(),
        bound,
        k: setup.k,
        tail_bound,
        rdf: Some(certs),
        w_class: Some(cl.w_class),
        checks,
        info,
        local_avg: None,
        trivial: false,
        big_w: Some(big_w),
        h: Some(h),
        big_h: Some(big_h),
    })
}

/// Case 2: `W = H^{1/q₀} w^{q/q₀}` with `H` built from the dual witness `h`.
pub fn construct_case2(w: &Weight, h: &GridFunction, ex: &CaseExponents, setup: &CaseSetup) -> Result<CaseReport, RubioError> {
    check_regime(ex, Regime::Case2)?;
    check_shape(setup, w.shape())?;
    if let Some((cell, &value)) = h.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(RubioError::Negative { cell, value });
    }
    let pd = ex.p_dual();
    let s = ex.s();
    let gamma = ex.gamma_f64();
    let (q, q0) = (ex.q.to_f64(), ex.q0.to_f64());
    let wq = w.pow(q);
    let nh = lp_measure(h, s / q0, wq.as_function());
    if nh == 0.0 {
        return Err(RubioError::Degenerate("dual witness h vanishes".into()));
    }
    let h = h.scale(1.0 / nh);
    let u = w.pow(-pd);
    let op = RdfOperator::plain(setup.family.clone(), ex.t_exponent(), u)?;
    let bound = maximal_norm_bound(&op, setup.mode)?;
    let a = s / (pd * q0 * gamma);
    let bexp = (pd + q) / (pd * gamma);
    let input = h.powf(a).mul(&w.pow(bexp));
    let res = rdf_iterate(&input, &op, bound.b, setup.k)?;
    let big_h = res.majorant.powf(1.0 / a).mul(&w.pow(-(pd + q) * q0 / s));
    let v = weight_of(res.majorant.clone())?;
    let big_w = weight_of(big_h.powf(1.0 / q0).mul(&w.pow(q / q0)))?;
    let t = to_f64(&ex.t);
    let norm_check = BoundCheck::new(
        "‖H‖_{L^{s/q₀}(w^q)} ≤ 2^{p′γq₀/s}",
        lp_measure(&big_h, s / q0, wq.as_function()),
        2f64.powf(t * q0 / s),
    );
    finish_upper(ex, setup, w, h, big_h, big_w, v, bound, res.tail_bound, res.certs, norm_check, BTreeMap::new())
}

/// The smallest cell cube centred at `x0` reaching distance `tau0`; the whole torus when too large.
pub fn ball_cube(shape: GridShape, x0: usize, tau0: f64) -> DiscreteCube {
    let n = shape.n();
    let k = (tau0 * n as f64 - 0.5).ceil().max(0.0) as usize;
    let side = 2 * k + 1;
    if side >= n {
        return DiscreteCube { origin: vec![0; shape.d], side: n };
    }
    let origin = shape.coords(x0).iter().map(|&x| (x + n - k % n) % n).collect();
    DiscreteCube { origin, side }
}

/// Case 3: `W = H^{1/q₀} w` with `h` the normalized indicator of the ball around `x0`.
pub fn construct_case3(
    w: &Weight,
    x0: usize,
    tau0: f64,
    probe: Option<&GridFunction>,
    ex: &CaseExponents,
    setup: &CaseSetup,
) -> Result<CaseReport, RubioError> {
    check_regime(ex, Regime::Case3)?;
    let shape = w.shape();
    check_shape(setup, shape)?;
    if x0 >= shape.cells() || !(tau0 > 0.0) {
        return Err(RubioError::Degenerate(format!("ball centre {x0} or radius {tau0} invalid")));
    }
    let pd = ex.p_dual();
    let gamma = ex.gamma_f64();
    let q0 = ex.q0.to_f64();
    let t = to_f64(&ex.t);
    let ball = ball_cube(shape, x0, tau0);
    let ind = GridFunction::indicator(shape, &ball);
    let h = ind.scale(1.0 / ind.integral());
    let u = w.pow(-pd);
    let op = RdfOperator::plain(setup.family.clone(), ex.t_exponent(), u)?;
    let bound = maximal_norm_bound(&op, setup.mode)?;
    let input = h.powf(1.0 / t).mul(&w.pow(1.0 / gamma));
    let res = rdf_iterate(&input, &op, bound.b, setup.k)?;
    let big_h = res.majorant.powf(t).mul(&w.pow(-pd));
    let v = weight_of(res.majorant.clone())?;
    let big_w = weight_of(big_h.powf(1.0 / q0).mul(w))?;
    let norm_check = BoundCheck::new("‖H‖_{L¹} ≤ 2^{p′γ}", lp(&big_h, 1.0), 2f64.powf(t));

    let one = GridFunction::constant(shape, 1.0);
    let f = probe.unwrap_or(&one);
    let fw = f.abs().mul(w);
    let local = fw.powf(q0).mul(&h).integral().powf(1.0 / q0);
    let global = lp(&f.abs().mul(&big_w), q0);
    let mut info = BTreeMap::new();
    info.insert("ball_side".into(), ball.side as f64);
    info.insert("norm_fW".into(), global);
    let mut rep = finish_upper(ex, setup, w, h, big_h, big_w, v, bound, res.tail_bound, res.certs, norm_check, info)?;
    rep.checks.push(BoundCheck::new("(⨍_B (fw)^{q₀})^{1/q₀} ≤ ‖fW‖_{L^{q₀}}", local, global));
    rep.local_avg = Some(local);
    Ok(rep)
}
