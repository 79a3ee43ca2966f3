use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind, ExperimentOptions, GridConfig, LemmaChoice};
use super::experiments::run_experiment;
use crate::dyadic::{
    cancellative_etas, haar, martingale_diff, telescope, Cube, DyadicGrid, GridFunction, GridShape, ProductFunction,
    ProductShape,
};
use crate::exponents::{
    derived_scales, dual, gamma, lemma_scales, offdiag_targets, preceq_star, rat, Exponent, ExponentVector, Rational,
};
use crate::norms::{lp, mixed_norm, slice_norms};
use crate::operators::{
    bilinear_maximal, carleson_norm, hl_maximal, random_paraproduct, random_shift, sparse_generate, sparse_stopping,
    tensor_apply, OperatorError, ParaForm, ParaproductSpec, ShiftForm, ShiftSpec,
};
use crate::rubio::{
    case2_dual_witness, construct_case1, construct_case2, construct_case3, maximal_norm_bound, rdf_iterate, BoundMode,
    CaseExponents, CaseSetup, MaximalVariant, RdfOperator, Regime,
};
use crate::weights::{
    ap_constant, apr_constant, lemma_main_forward, lemma_main_inverse, log_uniform, norm_rewrite_check, BaseMeasure,
    CubeFamily, Weight,
};

/// Failure records kept per battery; the count is always exact.
const KEPT_FAILURES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Rdf,
    LemmaMain,
    Sparse,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identities" => Ok(Suite::Identities),
            "rdf" => Ok(Suite::Rdf),
            "lemma_main" | "lemma-main" => Ok(Suite::LemmaMain),
            "sparse" => Ok(Suite::Sparse),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?}; expected identities, rdf, lemma_main, sparse or all")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Every battery uses this grid instead of its default mix.
    pub grid: Option<GridShape>,
    pub k: usize,
    /// Plants an oversized coefficient in one shift table of the `sparse` suite.
    pub inject_violation: bool,
    /// Multiplies the instance counts.
    pub scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, grid: None, k: crate::rubio::DEFAULT_K, inject_violation: false, scale: 1.0 }
    }
}

impl VerifyOptions {
    fn count(&self, n: usize) -> usize {
        ((n as f64 * self.scale).ceil() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub name: String,
    pub instances: usize,
    pub failed: usize,
    /// Replayable descriptions of the first failures.
    pub failures: Vec<Value>,
    /// Largest observed error of the battery's toleranced comparisons.
    pub max_error: f64,
    pub notes: Vec<String>,
}

impl BatteryResult {
    fn new(name: &str) -> Self {
        Self { name: name.into(), instances: 0, failed: 0, failures: Vec::new(), max_error: 0.0, notes: Vec::new() }
    }

    fn fail(&mut self, v: Value) {
        self.failed += 1;
        if self.failures.len() < KEPT_FAILURES {
            self.failures.push(v);
        }
    }

    fn err(&mut self, e: f64) {
        if e.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(e);
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        format!("{status} {} ({} instances, {} failed, max error {:.3e})", self.name, self.instances, self.failed, self.max_error)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub batteries: Vec<BatteryResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.batteries.iter().all(BatteryResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Value> {
        self.batteries.iter().flat_map(|b| b.failures.iter())
    }
}

fn rng_for(seed: u64, battery: u64, i: usize) -> (u64, ChaCha8Rng) {
    let s = seed.wrapping_mul(0x100_0000_01B3).wrapping_add(battery << 40).wrapping_add(i as u64);
    (s, ChaCha8Rng::seed_from_u64(s))
}

const DEFAULT_SHAPES: [(usize, u32); 3] = [(1, 3), (1, 4), (2, 2)];

fn pick_shape(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> GridShape {
    opts.grid.unwrap_or_else(|| {
        let (d, l) = DEFAULT_SHAPES[rng.gen_range(0..DEFAULT_SHAPES.len())];
        GridShape::new(d, l).expect("valid default shape")
    })
}

fn grid_json(s: GridShape) -> Value {
    json!({ "d": s.d, "L": s.depth })
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn signed(s: GridShape, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::from_fn(s, |_| rng.gen_range(-1.0..1.0))
}

fn twelfths(a: i64) -> Exponent {
    Exponent::from_inv(rat(a, 12)).expect("nonnegative reciprocal")
}

/// Random `(p⃗, r⃗)`: `1/pᵢ, 1/rᵢ ∈ {0, 1/12, …, 1}` with `rᵢ` finite; about half fail `⪯⋆`.
fn random_pr(m: usize, rng: &mut ChaCha8Rng) -> (ExponentVector, ExponentVector) {
    let p: Vec<Exponent> = (0..m).map(|_| twelfths(rng.gen_range(0..=12))).collect();
    let r: Vec<Exponent> = (0..=m).map(|_| twelfths(rng.gen_range(1..=12))).collect();
    (ExponentVector::p_vector(p).expect("p ≥ 1"), ExponentVector::r_vector(r).expect("1 ≤ r < ∞"))
}

/// `Σ 1/δᵢ = 1/r − 1`, `⪯⋆ ⇔ min 1/δᵢ ≥ 0` and the off-diagonal compatibility equalities, all in exact rationals.
pub fn exponent_identities(n: usize, opts: &VerifyOptions) -> BatteryResult {
    let mut out = BatteryResult::new("exponent identities");
    let mut admissible = 0;
    let mut offdiag = 0;
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 1, i);
        let m = rng.gen_range(1..=3);
        let (p, r) = random_pr(m, &mut rng);
        // oracle: the reciprocals directly
        let p_sum: Rational = p.iter().fold(Rational::zero(), |a, e| a + e.inv());
        let mut deltas: Vec<Rational> = (0..m).map(|k| r.get(k).inv() - p.get(k).inv()).collect();
        deltas.push(r.get(m).inv() - (Rational::one() - &p_sum));
        let oracle_star = deltas.iter().all(|d| !d.is_negative_r());
        let replay = || json!({ "battery": "exponent identities", "instance": i, "seed": seed, "p": p.to_string(), "r": r.to_string() });
        match preceq_star(&r, &p) {
            Ok(star) if star == oracle_star => {}
            other => {
                out.fail(json!({ "replay": replay(), "error": format!("preceq_star = {other:?}, min 1/δ ≥ 0 is {oracle_star}") }));
                continue;
            }
        }
        match derived_scales(&p, &r) {
            Ok(ds) => {
                admissible += 1;
                let r_sum: Rational = r.iter().fold(Rational::zero(), |a, e| a + e.inv());
                let sum: Rational = ds.deltas.iter().fold(Rational::zero(), |a, d| a + &d.inv);
                let same = ds.deltas.iter().zip(&deltas).all(|(a, b)| &a.inv == b);
                if !oracle_star || !same || sum != r_sum - Rational::one() {
                    out.fail(json!({ "replay": replay(), "error": format!("Σ1/δ = {sum}, deltas match: {same}") }));
                }
            }
            Err(e) if oracle_star => out.fail(json!({ "replay": replay(), "error": e.to_string() })),
            Err(_) => {}
        }

        let p0 = twelfths(rng.gen_range(0..=12));
        let r0 = twelfths(rng.gen_range(1..=12));
        let q0 = twelfths(rng.gen_range(0..=12));
        let pp = twelfths(rng.gen_range(1..=11));
        if let Ok(t) = offdiag_targets(&p0, &r0, &q0, &pp) {
            offdiag += 1;
            let a = t.q.inv() - q0.inv();
            let b = t.r.inv() - r0.inv();
            let c = pp.inv() - p0.inv();
            if a != b || b != c {
                out.fail(json!({
                    "battery": "exponent identities", "instance": i, "seed": seed,
                    "p0": p0.to_string(), "r0": r0.to_string(), "q0": q0.to_string(), "p": pp.to_string(),
                    "error": format!("1/q−1/q₀ = {a}, 1/r−1/r₀ = {b}, 1/p−1/p₀ = {c}"),
                }));
            }
        }
    }
    out.instances = n;
    out.notes.push(format!("{admissible} admissible (p, r), {offdiag} solvable off-diagonal targets"));
    out
}

trait NegativeRational {
    fn is_negative_r(&self) -> bool;
}

impl NegativeRational for Rational {
    fn is_negative_r(&self) -> bool {
        *self < Rational::zero()
    }
}

/// The `(p, r)` pairs of the rescaling battery.
pub const RESCALING_PAIRS: [(&str, &str); 5] = [("2", "1"), ("3", "2"), ("inf", "2"), ("1", "3"), ("3/2", "4")];

/// `[v]_{A_{p,r}} = [v^r]_{A_{rγ}}^{1/r} = [v^{−p′}]_{A_{p′γ}}^{1/p′}` and `A_p` duality, to `1e−9` relative.
pub fn rescaling_identities(n_weights: usize, opts: &VerifyOptions) -> BatteryResult {
    const TOL: f64 = 1e-9;
    let mut out = BatteryResult::new("rescaling identities");
    for i in 0..n_weights {
        let (seed, mut rng) = rng_for(opts.seed, 2, i);
        let s = pick_shape(opts, &mut rng);
        let grid = DyadicGrid::random(s, &mut rng);
        let fam = if i % 2 == 0 { CubeFamily::all_discrete(s) } else { CubeFamily::dyadic(&grid) };
        let leb = BaseMeasure::lebesgue(s);
        let v = log_uniform(s, 1.0, &mut rng);
        let check = |label: String, a: f64, b: f64, out: &mut BatteryResult| {
            let e = rel(a, b);
            out.err(e);
            if !(e <= TOL) {
                out.fail(json!({
                    "battery": "rescaling identities", "instance": i, "seed": seed, "grid": grid_json(s),
                    "family": fam.mode().name(), "identity": label, "lhs": a, "rhs": b,
                }));
            }
        };
        for (ps, rs) in RESCALING_PAIRS {
            let (p, r): (Exponent, Exponent) = (ps.parse().expect("literal"), rs.parse().expect("literal"));
            let g = gamma(&p, &r).expect("p ≥ 1").value;
            let res = (|| -> Result<(), crate::weights::WeightError> {
                let a = apr_constant(&v, &p, &r, &leb, &fam)?.constant;
                let rv = r.value().expect("finite r");
                let t1 = Exponent::from_value(&rv * &g)?;
                let b = ap_constant(&v.pow(r.to_f64()), &t1, &leb, &fam)?.constant.powf(1.0 / r.to_f64());
                check(format!("A_({ps},{rs}) vs [v^r]_A_(rγ)^(1/r)"), a, b, &mut out);
                let pd = dual(&p);
                if pd.is_positive() {
                    // p′γ with 1/p′ = 1 − 1/p
                    let t2 = Exponent::from_inv(&pd.inv / &g)?;
                    let pdf = pd.value_f64();
                    let c = ap_constant(&v.pow(-pdf), &t2, &leb, &fam)?.constant.powf(1.0 / pdf);
                    check(format!("A_({ps},{rs}) vs [v^-p']_A_(p'γ)^(1/p')"), a, c, &mut out);
                }
                Ok(())
            })();
            if let Err(e) = res {
                out.fail(json!({ "battery": "rescaling identities", "instance": i, "seed": seed, "pair": [ps, rs], "error": e.to_string() }));
            }
        }
        for ps in ["2", "3", "3/2"] {
            let p: Exponent = ps.parse().expect("literal");
            let pd = dual(&p).value_f64();
            let a = ap_constant(&v.pow(1.0 - pd), &Exponent::from_value(dual(&p).to_primal().expect("finite").value().expect("finite")).expect("≥1"), &leb, &fam);
            let b = ap_constant(&v, &p, &leb, &fam);
            match (a, b) {
                (Ok(a), Ok(b)) => check(format!("[v^(1-p')]_A_p' = [v]_A_{ps}^(p'-1)"), a.constant, b.constant.powf(pd - 1.0), &mut out),
                (a, b) => out.fail(json!({ "battery": "rescaling identities", "instance": i, "error": format!("{a:?} {b:?}") })),
            }
        }
    }
    out.instances = n_weights;
    out
}

/// Random `m = 2` exponents satisfying the factorization hypotheses.
fn lemma_exponents(rng: &mut ChaCha8Rng) -> (ExponentVector, ExponentVector) {
    loop {
        let p = ExponentVector::p_vector((0..2).map(|_| twelfths(rng.gen_range(1..=11))).collect()).expect("p > 1");
        let r = ExponentVector::r_vector((0..3).map(|_| twelfths(rng.gen_range(1..=12))).collect()).expect("r ≥ 1");
        if preceq_star(&r, &p).unwrap_or(false) && lemma_scales(&p, &r).is_ok() {
            return (p, r);
        }
    }
}

/// Forward certificates, the inverse product bound and round trip (`1e−12`), and both norm rewrites (`1e−9`).
pub fn lemma_main_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    const ROUND_TRIP: f64 = 1e-12;
    const REWRITE: f64 = 1e-9;
    let mut out = BatteryResult::new("factorization lemma");
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 3, i);
        let s = pick_shape(opts, &mut rng);
        let (p, r) = lemma_exponents(&mut rng);
        let fam = CubeFamily::all_discrete(s);
        let ws = vec![log_uniform(s, 1.0, &mut rng), log_uniform(s, 1.0, &mut rng)];
        let f = signed(s, &mut rng);
        let replay = |msg: String| {
            json!({ "battery": "factorization lemma", "instance": i, "seed": seed, "grid": grid_json(s),
                    "p": p.to_string(), "r": r.to_string(), "error": msg })
        };
        let fw = match lemma_main_forward(&ws, &p, &r, &fam) {
            Ok(fw) => fw,
            Err(e) => {
                out.fail(replay(e.to_string()));
                continue;
            }
        };
        for c in fw.checks.iter().filter(|c| !c.holds) {
            out.fail(replay(format!("{} : {} > {}", c.label, c.lhs, c.bound)));
        }
        match lemma_main_inverse(&ws[..1], &fw.big_w, &p, &r, &fam) {
            Ok(inv) => {
                let e = inv.w_m.values().iter().zip(ws[1].values()).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
                out.err(e);
                if !(e <= ROUND_TRIP) {
                    out.fail(replay(format!("round trip error {e:.3e}")));
                }
                if !inv.check.holds {
                    out.fail(replay(format!("inverse product bound: {} > {}", inv.check.lhs, inv.check.bound)));
                }
            }
            Err(e) => out.fail(replay(e.to_string())),
        }
        match norm_rewrite_check(&f, &ws, &p, &r) {
            Ok(nr) => {
                let e = nr.max_rel_gap();
                out.err(e);
                if !(e <= REWRITE) {
                    out.fail(replay(format!("norm rewrite gap {e:.3e}: {nr:?}")));
                }
            }
            Err(e) => out.fail(replay(e.to_string())),
        }
    }
    out.instances = n;
    out
}

/// Above this relative size the truncation tail, not `2‖h‖`, dominates the norm certificate.
const TAIL_LIMITED: f64 = 1e-6;

/// Domination, the pointwise `A₁` certificate and the truncated `A₁` class for any `B`;
/// the norm bound with certified `B` on dyadic families.
pub fn rdf_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    let mut out = BatteryResult::new(&format!("rubio de francia iteration (K = {})", opts.k));
    let ts = ["3/2", "2", "3", "4"];
    let mut tail_limited = 0;
    let mut max_norm_ratio: f64 = 0.0;
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 4, i);
        let s = pick_shape(opts, &mut rng);
        let grid = DyadicGrid::random(s, &mut rng);
        let t: Exponent = ts[rng.gen_range(0..ts.len())].parse().expect("literal");
        let w = log_uniform(s, 1.0, &mut rng);
        let h = log_uniform(s, 2.0, &mut rng).into_function();
        let conjugated = i % 2 == 1;
        let certified = i % 4 != 3;
        let (fam, mode) = if certified {
            (CubeFamily::dyadic(&grid), BoundMode::Buckley)
        } else {
            (CubeFamily::all_discrete(s), BoundMode::empirical(seed))
        };
        let replay = |msg: String| {
            json!({ "battery": "rdf", "instance": i, "seed": seed, "grid": grid_json(s), "t": t.to_string(),
                    "conjugated": conjugated, "mode": format!("{mode:?}"), "K": opts.k, "error": msg })
        };
        let run = || -> Result<_, crate::rubio::RubioError> {
            let op = if conjugated {
                RdfOperator::conjugated(fam.clone(), t.clone(), w.clone())?
            } else {
                RdfOperator::plain(fam.clone(), t.clone(), w.clone())?
            };
            let b = maximal_norm_bound(&op, mode)?;
            let res = rdf_iterate(&h, &op, b.b, opts.k)?;
            Ok((op, b, res))
        };
        let (op, b, res) = match run() {
            Ok(x) => x,
            Err(e) => {
                out.fail(replay(e.to_string()));
                continue;
            }
        };
        if !res.certs.domination {
            out.fail(replay("h ≤ R_K h fails".into()));
        }
        if !(res.certs.a1_pointwise_ratio <= 1.0 + 1e-12) {
            out.fail(replay(format!("op(R_K h) / (2B R_(K+1) h) = {}", res.certs.a1_pointwise_ratio)));
        }
        let v = match op.variant() {
            MaximalVariant::Conjugated(u) => res.majorant.mul(u),
            MaximalVariant::Plain => res.majorant.clone(),
        };
        if let Ok(v) = Weight::new(v) {
            let leb = BaseMeasure::lebesgue(s);
            if let Ok(c) = ap_constant(&v, &Exponent::one(), &leb, &fam) {
                let bound = 2.0 * b.b * res.certs.step_ratio;
                if !(c.constant <= bound * (1.0 + 1e-12)) {
                    out.fail(replay(format!("[v]_A1 = {} > 2B·step = {bound}", c.constant)));
                }
            }
        }
        if b.certified {
            let sigma_total = op.effective_weight().integral();
            let hn = op.norm(&h);
            let tol = res.tail_bound * sigma_total.powf(1.0 / t.to_f64()) / hn;
            max_norm_ratio = max_norm_ratio.max(res.certs.norm_ratio);
            if tol > TAIL_LIMITED {
                tail_limited += 1;
            }
            if !res.norm_within(tol) {
                out.fail(replay(format!("‖R_K h‖/‖h‖ = {} > 2 + {tol}", res.certs.norm_ratio)));
            }
        }
    }
    out.instances = n;
    out.notes.push(format!("max certified norm ratio {max_norm_ratio:.6}"));
    if tail_limited > 0 {
        out.notes.push(format!("{tail_limited} instances tail-limited (tail bound > {TAIL_LIMITED:e}·‖h‖)"));
    }
    out
}

/// Exponent sets covering the three regimes.
pub const CASE_EXPONENTS: [(&str, &str, &str, &str, &str); 8] = [
    ("2", "2", "4", "4", "4"),
    ("2", "4", "3", "12", "3"),
    ("2", "4", "4", "inf", "4"),
    ("4", "4", "2", "2", "2"),
    ("3/2", "6", "1", "2", "2"),
    ("4", "4", "2", "2", "4"),
    ("3/2", "6", "1", "2", "3"),
    ("inf", "2", "2", "1", "2"),
];

fn case_exponents() -> Vec<CaseExponents> {
    CASE_EXPONENTS
        .iter()
        .map(|(p, r, p0, r0, q0)| {
            let e = |s: &str| s.parse::<Exponent>().expect("literal");
            CaseExponents::new(&e(p), &e(r), &e(p0), &e(r0), &e(q0)).expect("listed sets are admissible")
        })
        .collect()
}

/// Each construction on `n` seeded instances per regime: every certified bound must hold.
pub fn case_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    let mut out = BatteryResult::new("off-diagonal constructions");
    let all = case_exponents();
    let mut worst = [0.0f64; 3];
    for regime in [Regime::Case1, Regime::Case2, Regime::Case3] {
        let sets: Vec<&CaseExponents> = all.iter().filter(|e| e.regime == regime).collect();
        for i in 0..n {
            let (seed, mut rng) = rng_for(opts.seed, 5 + regime.number() as u64, i);
            let ex = sets[i % sets.len()];
            let s = opts.grid.unwrap_or_else(|| GridShape::new(1 + i % 2, if i % 2 == 0 { 4 } else { 2 }).expect("shape"));
            let grid = DyadicGrid::random(s, &mut rng);
            let w = log_uniform(s, 1.0, &mut rng);
            let f = log_uniform(s, 2.0, &mut rng).into_function();
            let mut setup = if i % 2 == 0 {
                CaseSetup::new(CubeFamily::dyadic(&grid), BoundMode::Buckley)
            } else {
                CaseSetup::new(CubeFamily::all_discrete(s), BoundMode::empirical(seed))
            };
            setup.k = opts.k;
            let rep = match regime {
                Regime::Case1 => construct_case1(&w, &f, ex, &setup),
                Regime::Case2 => construct_case2(&w, &case2_dual_witness(&f, ex), ex, &setup),
                Regime::Case3 => {
                    let x0 = rng.gen_range(0..s.cells());
                    let tau0 = rng.gen_range(0.05..0.5);
                    construct_case3(&w, x0, tau0, Some(&f), ex, &setup)
                }
            };
            let replay = |msg: String| {
                json!({ "battery": "off-diagonal constructions", "case": regime.number(), "instance": i, "seed": seed,
                        "grid": grid_json(s), "exponents": [ex.p.to_string(), ex.r.to_string(), ex.p0.to_string(), ex.r0.to_string(), ex.q0.to_string()],
                        "error": msg })
            };
            match rep {
                Ok(rep) => {
                    if let Some(c) = rep.class_ratio() {
                        let slot = &mut worst[regime.number() as usize - 1];
                        *slot = slot.max(c);
                    }
                    for c in rep.failures() {
                        out.fail(replay(format!("{}: {} > {}", c.label, c.lhs, c.bound)));
                    }
                }
                Err(e) => out.fail(replay(e.to_string())),
            }
        }
    }
    out.instances = 3 * n;
    out.notes.push(format!("largest [W]/bound per case: {:.6} {:.6} {:.6}", worst[0], worst[1], worst[2]));
    out
}

/// Telescoping and Haar-vs-martingale on random functions, Haar orthonormality per lattice; all to `1e−12`.
pub fn dyadic_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    const TOL: f64 = 1e-12;
    let mut out = BatteryResult::new("dyadic calculus");
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 9, i);
        let s = pick_shape(opts, &mut rng);
        let grid = DyadicGrid::random(s, &mut rng);
        let f = signed(s, &mut rng);
        let replay = |what: &str, e: f64| {
            json!({ "battery": "dyadic calculus", "instance": i, "seed": seed, "grid": grid_json(s),
                    "omega": grid.omega, "check": what, "error": e })
        };
        let top = Cube::top(s.d);
        let e = telescope(&f, &grid, &top).map_or(f64::INFINITY, |t| t.max_abs_diff(&f));
        out.err(e);
        if !(e <= TOL) {
            out.fail(replay("telescoping", e));
        }
        let level = rng.gen_range(0..s.depth);
        let idx = rng.gen_range(0..1usize << (s.d as u32 * level));
        let q = Cube::from_linear(level, s.d, idx);
        let mut sum = GridFunction::zeros(s);
        for eta in cancellative_etas(s.d) {
            let h = haar(&grid, &q, &eta).expect("level < depth");
            sum.axpy(f.inner(&h), &h);
        }
        let e = martingale_diff(&f, &grid, &q).map_or(f64::INFINITY, |d| d.max_abs_diff(&sum));
        out.err(e);
        if !(e <= TOL) {
            out.fail(replay("haar expansion of Δ_Q", e));
        }
        if i % 50 == 0 {
            let hs: Vec<GridFunction> = grid
                .all_cubes()
                .filter(|c| c.level < s.depth)
                .flat_map(|c| cancellative_etas(s.d).map(move |eta| (c.clone(), eta)))
                .map(|(c, eta)| haar(&grid, &c, &eta).expect("level < depth"))
                .chain(std::iter::once(haar(&grid, &top, &vec![0; s.d]).expect("top")))
                .collect();
            let mut e: f64 = 0.0;
            for (a, ha) in hs.iter().enumerate() {
                for (b, hb) in hs.iter().enumerate().skip(a) {
                    let want = if a == b { 1.0 } else { 0.0 };
                    e = e.max((ha.inner(hb) - want).abs());
                }
            }
            out.err(e);
            if !(e <= TOL) {
                out.fail(replay("haar orthonormality", e));
            }
        }
    }
    out.instances = n;
    out
}

fn brute_maximal(f: &GridFunction, fam: &CubeFamily) -> Vec<f64> {
    let s = f.shape();
    (0..s.cells())
        .map(|x| {
            fam.cubes()
                .iter()
                .filter(|q| q.contains(&s, x))
                .map(|q| {
                    let cells = q.cells(&s);
                    cells.iter().map(|&c| f.values()[c].abs()).sum::<f64>() / cells.len() as f64
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

fn shift_oracle(spec: &ShiftSpec, f1: &GridFunction, f2: &GridFunction) -> GridFunction {
    let grid = spec.grid();
    let mut out = GridFunction::zeros(grid.shape);
    for c in spec.coeffs() {
        let h = |k: usize| haar(grid, &c.cubes[k], &c.etas[k]).expect("validated cube");
        out.axpy(c.a * f1.inner(&h(0)) * f2.inner(&h(1)), &h(2));
    }
    out
}

/// Tolerance for sums evaluated in a different order.
const ORACLE_TOL: f64 = 1e-12;

/// Constructor rejection of injected violations, tensor factorization, and brute-force oracles.
pub fn operator_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    let mut out = BatteryResult::new("model operators");
    let (mut injected, mut rejected) = (0usize, 0usize);
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 10, i);
        let s = pick_shape(opts, &mut rng);
        let grid = DyadicGrid::random(s, &mut rng);
        let replay = |check: &str, e: Value| {
            json!({ "battery": "model operators", "instance": i, "seed": seed, "grid": grid_json(s), "check": check, "error": e })
        };
        let kappa = [0, 1, 2].map(|_| rng.gen_range(0..s.depth));
        let form = ShiftForm::ALL[i % 3];
        let spec = match random_shift(&grid, kappa, form, 1.0, 0.5, &mut rng) {
            Ok(spec) => spec,
            Err(e) => {
                out.fail(replay("random shift", json!(e.to_string())));
                continue;
            }
        };
        if !spec.coeffs().is_empty() {
            let mut coeffs = spec.coeffs().to_vec();
            let j = rng.gen_range(0..coeffs.len());
            coeffs[j].a *= 1.0 + 1e-9 + rng.gen_range(0.0..1.0);
            injected += 1;
            match ShiftSpec::new(grid.clone(), kappa, form, coeffs) {
                Err(OperatorError::Normalization { index, .. }) if index == j => rejected += 1,
                other => out.fail(replay("shift normalization", json!(format!("accepted or misreported: {:?}", other.err())))),
            }
        }
        let para = random_paraproduct(&grid, ParaForm::ALL[i % 3], 1.0, &mut rng).expect("fill 1 is admissible");
        if !para.coeffs().is_empty() {
            let mut coeffs = para.coeffs().to_vec();
            let j = rng.gen_range(0..coeffs.len());
            coeffs[j].a = coeffs[j].k.volume().sqrt() * (1.0 + 1e-9 + rng.gen_range(0.0..1.0));
            injected += 1;
            match ParaproductSpec::new(grid.clone(), para.form(), coeffs) {
                Err(OperatorError::Carleson { .. }) => rejected += 1,
                other => out.fail(replay("carleson", json!(format!("accepted: {:?}", other.map(|p| carleson_norm(p.grid(), p.coeffs()).0))))),
            }
        }

        let (f, g) = (signed(s, &mut rng), signed(s, &mut rng));
        let e = spec.apply(&f, &g).max_abs_diff(&shift_oracle(&spec, &f, &g));
        out.err(e);
        if !(e <= ORACLE_TOL) {
            out.fail(replay("shift oracle", json!(e)));
        }
        let fam = match i % 3 {
            0 => CubeFamily::all_discrete(s),
            1 => CubeFamily::all_discrete_periodic(s),
            _ => CubeFamily::dyadic(&grid),
        };
        let m = hl_maximal(&f, &BaseMeasure::lebesgue(s), &fam);
        let e = m.values().iter().zip(brute_maximal(&f, &fam)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.err(e);
        if !(e <= ORACLE_TOL) {
            out.fail(replay("maximal oracle", json!(e)));
        }
        let bm = bilinear_maximal(&f, &GridFunction::constant(s, 1.0), &fam);
        let e = bm.max_abs_diff(&m);
        out.err(e);
        if !(e <= ORACLE_TOL) {
            out.fail(replay("bilinear maximal with g ≡ 1", json!(e)));
        }

        if i % 5 == 0 {
            let (s1, s2) = (GridShape::new(1, 2).expect("shape"), GridShape::new(1 + i % 2, 2).expect("shape"));
            let (g1, g2) = (DyadicGrid::random(s1, &mut rng), DyadicGrid::random(s2, &mut rng));
            let a = random_shift(&g1, [0, 1, 0], ShiftForm::ALL[i % 3], 1.0, 1.0, &mut rng).expect("valid").operator();
            let b = random_paraproduct(&g2, ParaForm::ALL[(i + 1) % 3], 1.0, &mut rng).expect("valid").operator();
            let (u1, u2) = (signed(s1, &mut rng), signed(s1, &mut rng));
            let (v1, v2) = (signed(s2, &mut rng), signed(s2, &mut rng));
            let t = tensor_apply(&a, &b, &ProductFunction::tensor(&u1, &v1), &ProductFunction::tensor(&u2, &v2));
            let want = ProductFunction::tensor(&a.apply(&u1, &u2), &b.apply(&v1, &v2));
            let e = t.map_or(f64::INFINITY, |t| t.max_abs_diff(&want));
            out.err(e);
            if !(e <= ORACLE_TOL) {
                out.fail(replay("tensor factorization", json!(e)));
            }
        }
    }
    out.instances = n;
    out.notes.push(format!("{rejected}/{injected} injected violations rejected"));
    out
}

/// Mixed-norm identities and Hölder on random product functions.
pub fn norms_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    const TOL: f64 = 1e-12;
    let mut out = BatteryResult::new("norms");
    let pool = ["1/2", "1", "3/2", "2", "3", "4", "inf"];
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 11, i);
        let s1 = GridShape::new(1, rng.gen_range(1..=3)).expect("shape");
        let s2 = GridShape::new(1 + i % 2, rng.gen_range(1..=2)).expect("shape");
        let ps = ProductShape::new(s1, s2);
        let f = ProductFunction::from_fn(ps, |_, _| rng.gen_range(-1.0..1.0));
        let g = ProductFunction::from_fn(ps, |_, _| rng.gen_range(-1.0..1.0));
        let pick = |rng: &mut ChaCha8Rng| -> Exponent { pool[rng.gen_range(0..pool.len())].parse().expect("literal") };
        let (p, q) = (pick(&mut rng), pick(&mut rng));
        let replay = |check: &str, e: Value| {
            json!({ "battery": "norms", "instance": i, "seed": seed, "p": p.to_string(), "q": q.to_string(), "check": check, "error": e })
        };
        let a = mixed_norm(&f, &p, &q);
        let b = lp(&slice_norms(&f, &q), p.to_f64());
        if a != b {
            out.fail(replay("mixed = lp ∘ slice", json!([a, b])));
        }
        // p = q against a direct full-grid sum
        let pf = p.to_f64();
        let flat = if p.is_infinite() {
            f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            (f.values().iter().map(|v| v.abs().powf(pf)).sum::<f64>() * ps.cell_volume()).powf(1.0 / pf)
        };
        let e = rel(mixed_norm(&f, &p, &p), flat);
        out.err(e);
        if !(e <= TOL) {
            out.fail(replay("p = q flat norm", json!(e)));
        }
        // Hölder: 1/p = 1/p₁ + 1/p₂, 1/q = 1/q₁ + 1/q₂
        let split = |e: &Exponent, rng: &mut ChaCha8Rng| -> (Exponent, Exponent) {
            let k = rng.gen_range(0..=4);
            let a = e.inv() * rat(k, 4);
            let b = e.inv() - &a;
            (Exponent::from_inv(a).expect("≥ 0"), Exponent::from_inv(b).expect("≥ 0"))
        };
        let (p1, p2) = split(&p, &mut rng);
        let (q1, q2) = split(&q, &mut rng);
        let lhs = mixed_norm(&f.mul(&g), &p, &q);
        let rhs = mixed_norm(&f, &p1, &q1) * mixed_norm(&g, &p2, &q2);
        if !(lhs <= rhs * (1.0 + TOL)) {
            out.fail(replay("mixed Hölder", json!({ "lhs": lhs, "rhs": rhs, "p1": p1.to_string(), "q1": q1.to_string() })));
        }
    }
    out.instances = n;
    out
}

/// Stopping and generated sparse families verify; every shift coefficient table passes the
/// constructor's checks. With `inject_violation`, one table gets an oversized coefficient.
pub fn sparse_battery(n: usize, opts: &VerifyOptions) -> BatteryResult {
    let mut out = BatteryResult::new("sparse families and coefficient tables");
    let victim = opts.inject_violation.then_some(n / 2);
    for i in 0..n {
        let (seed, mut rng) = rng_for(opts.seed, 12, i);
        let s = pick_shape(opts, &mut rng);
        let grid = DyadicGrid::random(s, &mut rng);
        let replay = |check: &str, e: Value| {
            json!({ "battery": "sparse", "instance": i, "seed": seed, "grid": grid_json(s), "omega": grid.omega, "check": check, "error": e })
        };
        let fs = [signed(s, &mut rng), signed(s, &mut rng), signed(s, &mut rng)];
        match sparse_stopping(&grid, &fs).map(|f| f.verify()) {
            Ok(Ok(())) => {}
            other => out.fail(replay("stopping family", json!(format!("{other:?}")))),
        }
        let zeta = rng.gen_range(0.05..0.95);
        match sparse_generate(&grid, zeta, rng.gen_range(0.1..1.0), seed).map(|f| f.verify()) {
            Ok(Ok(())) => {}
            other => out.fail(replay("generated family", json!(format!("{other:?}")))),
        }
        let kappa = [0, 1, 2].map(|_| rng.gen_range(0..s.depth));
        let form = ShiftForm::ALL[i % 3];
        let spec = match random_shift(&grid, kappa, form, rng.gen_range(0.1..=1.0), 0.7, &mut rng) {
            Ok(spec) => spec,
            Err(e) => {
                out.fail(replay("random shift", json!(e.to_string())));
                continue;
            }
        };
        let mut coeffs = spec.coeffs().to_vec();
        if victim == Some(i) && !coeffs.is_empty() {
            let j = rng.gen_range(0..coeffs.len());
            coeffs[j].a = coeffs[j].a.signum().max(0.0).mul_add(2.0, -1.0) * 1.5 * crate::operators::shift_coeff_bound(&coeffs[j].k, &coeffs[j].cubes);
        }
        if let Err(e) = ShiftSpec::new(grid.clone(), kappa, form, coeffs) {
            let cube = match &e {
                OperatorError::Normalization { cube, .. } => json!(cube),
                _ => Value::Null,
            };
            out.fail(json!({ "battery": "sparse", "instance": i, "seed": seed, "grid": grid_json(s), "omega": grid.omega,
                             "check": "shift coefficient table", "cube": cube, "error": e.to_string() }));
        }
    }
    out.instances = n;
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorPoint {
    pub experiment: String,
    #[serde(rename = "L")]
    pub l: u32,
    pub max_ratio: f64,
    pub median_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub points: Vec<MonitorPoint>,
    /// Growth above 2× between consecutive depths; report-only.
    pub warnings: Vec<String>,
}

/// Sparse-domination and lemma-ratio envelopes for `L = 3..=6` at fixed exponents.
pub fn monitor_envelopes(seed: u64, trials: usize) -> Result<MonitorReport, super::HarnessError> {
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    let runs: [(&str, ExperimentKind, Option<LemmaChoice>); 4] = [
        ("sparse-domination", ExperimentKind::SparseDomination, None),
        ("lemma-ratio/block-sf", ExperimentKind::LemmaRatio, Some(LemmaChoice::BlockSf)),
        ("lemma-ratio/paraproduct", ExperimentKind::LemmaRatio, Some(LemmaChoice::Paraproduct)),
        ("lemma-ratio/lower-sf", ExperimentKind::LemmaRatio, Some(LemmaChoice::LowerSf)),
    ];
    for (name, kind, lemma) in runs {
        let mut prev: Option<f64> = None;
        for l in 3..=6u32 {
            let mut options = ExperimentOptions { family: Some(crate::weights::FamilyMode::Dyadic), ..Default::default() };
            if let Some(c) = lemma {
                options.lemma = c;
            }
            let cfg = ExperimentConfig {
                experiment: kind,
                grid: GridConfig { d: 1, l, n: None, m: None },
                exponents: [("p".to_string(), "2".to_string())].into_iter().collect(),
                weight_gen: crate::weights::WeightGen::LogUniform { spread: 0.5, seed: 0 },
                trials,
                seed,
                k: crate::rubio::DEFAULT_K,
                output: None,
                options,
            };
            let rep = run_experiment(&cfg)?;
            let max = rep.summary.max_ratio.unwrap_or(0.0);
            if let Some(p) = prev {
                if p > 0.0 && max > 2.0 * p {
                    warnings.push(format!("{name}: max ratio grew {p:.4} → {max:.4} from L = {} to L = {l}", l - 1));
                }
            }
            prev = Some(max);
            points.push(MonitorPoint {
                experiment: name.to_string(),
                l,
                max_ratio: max,
                median_ratio: rep.summary.median_ratio.unwrap_or(0.0),
            });
        }
    }
    Ok(MonitorReport { points, warnings })
}

/// Runs the batteries of `suite`.
pub fn verify_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let mut batteries = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Identities) {
        batteries.push(exponent_identities(opts.count(10_000), opts));
        batteries.push(rescaling_identities(opts.count(200), opts));
        batteries.push(dyadic_battery(opts.count(1000), opts));
        batteries.push(norms_battery(opts.count(1000), opts));
    }
    if want(Suite::Rdf) {
        batteries.push(rdf_battery(opts.count(1000), opts));
        batteries.push(case_battery(opts.count(100), opts));
    }
    if want(Suite::LemmaMain) {
        batteries.push(lemma_main_battery(opts.count(1000), opts));
    }
    if want(Suite::Sparse) {
        batteries.push(sparse_battery(opts.count(200), opts));
        batteries.push(operator_battery(opts.count(100), opts));
    }
    SuiteReport { suite, seed: opts.seed, batteries }
}
