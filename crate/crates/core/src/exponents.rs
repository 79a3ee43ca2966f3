//! Lebesgue exponents stored as exact reciprocals.
//!
//! Every exponent `p` is kept as the rational `1/p`, so `p = ∞` is `inv = 0`
//! and the orderings used by the weight classes become affine comparisons.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("cannot parse exponent {0:?}")]
    Parse(String),
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("ordering r ⪯⋆ p fails at index {index}: {reason}")]
    Ordering { index: usize, reason: String },
    #[error("gamma_(p0,r0) = 0: nothing to prove")]
    NothingToProve,
    #[error("factorization hypothesis fails: {0}")]
    LemmaHypothesis(String),
    #[error("path hypothesis fails: {0}")]
    PathHypothesis(String),
    #[error("no admissible step from {0}")]
    PathStuck(String),
}

/// A primal exponent `p ∈ (0, ∞]`, held as `1/p ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent {
    inv: Rational,
}

/// A reciprocal that may be zero or negative (duals of `p ≤ 1`, the `δᵢ`, ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedRecip {
    #[serde(with = "rational_str")]
    pub inv: Rational,
}

impl Exponent {
    pub fn from_inv(inv: Rational) -> Result<Self, ExponentError> {
        if inv.is_negative() {
            return Err(ExponentError::OutOfRange {
                what: "primal reciprocal",
                detail: format!("1/p = {inv} < 0"),
            });
        }
        Ok(Self { inv })
    }

    pub fn from_value(p: Rational) -> Result<Self, ExponentError> {
        if !p.is_positive() {
            return Err(ExponentError::OutOfRange {
                what: "exponent",
                detail: format!("p = {p} ≤ 0"),
            });
        }
        Ok(Self { inv: p.recip() })
    }

    pub fn infinity() -> Self {
        Self { inv: Rational::zero() }
    }

    pub fn one() -> Self {
        Self { inv: Rational::one() }
    }

    /// `p = n/d`; panics if not positive. Meant for literals.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_value(rat(n, d)).expect("positive literal exponent")
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    pub fn inv(&self) -> &Rational {
        &self.inv
    }

    pub fn is_infinite(&self) -> bool {
        self.inv.is_zero()
    }

    /// `Some(p)` for finite exponents.
    pub fn value(&self) -> Option<Rational> {
        (!self.is_infinite()).then(|| self.inv.recip())
    }

    pub fn inv_f64(&self) -> f64 {
        rat_f64(&self.inv)
    }

    /// `p` as a float, `f64::INFINITY` for `p = ∞`.
    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            1.0 / self.inv_f64()
        }
    }

    /// `1/p' = 1 − 1/p`.
    pub fn dual(&self) -> SignedRecip {
        dual(self)
    }

    pub fn signed(&self) -> SignedRecip {
        SignedRecip { inv: self.inv.clone() }
    }
}

impl SignedRecip {
    pub fn new(inv: Rational) -> Self {
        Self { inv }
    }

    pub fn is_zero(&self) -> bool {
        self.inv.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.inv.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.inv.is_negative()
    }

    pub fn inv_f64(&self) -> f64 {
        rat_f64(&self.inv)
    }

    /// The exponent itself as a float (`±∞` for a zero reciprocal is `+∞`).
    pub fn value_f64(&self) -> f64 {
        if self.inv.is_zero() {
            f64::INFINITY
        } else {
            1.0 / self.inv_f64()
        }
    }

    /// Reinterprets a nonnegative reciprocal as a primal exponent.
    pub fn to_primal(&self) -> Result<Exponent, ExponentError> {
        Exponent::from_inv(self.inv.clone())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "inf"),
            Some(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for SignedRecip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/p={}", self.inv)
    }
}

/// Parses `"3/2"`, `"2"`, `"1.5"` and `"-1/2"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, ExponentError> {
    let s = s.trim();
    let err = || ExponentError::Parse(s.to_string());
    if let Some((int, frac)) = s.split_once('.') {
        if s.contains('/') {
            return Err(err());
        }
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    Rational::from_str(s).map_err(|_| err())
}

impl FromStr for Exponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "∞" | "infinity" | "Inf") {
            return Ok(Self::infinity());
        }
        if let Some(rest) = t.strip_prefix("1/p=") {
            return Self::from_inv(parse_rational(rest)?);
        }
        Self::from_value(parse_rational(t)?)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) mod rational_str {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorKind {
    P,
    R,
}

/// An ordered tuple of exponents tagged as a `p⃗`-type or `r⃗`-type vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVector {
    entries: Vec<Exponent>,
    kind: VectorKind,
}

impl ExponentVector {
    /// `1 ≤ pᵢ ≤ ∞`.
    pub fn p_vector(entries: Vec<Exponent>) -> Result<Self, ExponentError> {
        for (i, e) in entries.iter().enumerate() {
            if *e.inv() > Rational::one() {
                return Err(ExponentError::OutOfRange {
                    what: "P-vector entry",
                    detail: format!("p_{} = {e} < 1", i + 1),
                });
            }
        }
        Ok(Self { entries, kind: VectorKind::P })
    }

    /// `1 ≤ rᵢ < ∞`.
    pub fn r_vector(entries: Vec<Exponent>) -> Result<Self, ExponentError> {
        for (i, e) in entries.iter().enumerate() {
            if e.is_infinite() || *e.inv() > Rational::one() {
                return Err(ExponentError::OutOfRange {
                    what: "R-vector entry",
                    detail: format!("r_{} = {e} outside [1, ∞)", i + 1),
                });
            }
        }
        Ok(Self { entries, kind: VectorKind::R })
    }

    pub fn parse(kind: VectorKind, items: &[&str]) -> Result<Self, ExponentError> {
        let entries = items
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Exponent>, _>>()?;
        match kind {
            VectorKind::P => Self::p_vector(entries),
            VectorKind::R => Self::r_vector(entries),
        }
    }

    pub fn kind(&self) -> VectorKind {
        self.kind
    }

    pub fn entries(&self) -> &[Exponent] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &Exponent {
        &self.entries[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Exponent> {
        self.entries.iter()
    }

    /// Returns a copy with entry `i` replaced.
    pub fn with(&self, i: usize, e: Exponent) -> Self {
        let mut entries = self.entries.clone();
        entries[i] = e;
        Self { entries, kind: self.kind }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Exponent::to_f64).collect()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// `1/p = Σ 1/pᵢ`.
pub fn reciprocal_sum<'a, I>(exps: I) -> Exponent
where
    I: IntoIterator<Item = &'a Exponent>,
{
    let inv = exps
        .into_iter()
        .fold(Rational::zero(), |acc, e| acc + e.inv());
    Exponent { inv }
}

pub fn dual(e: &Exponent) -> SignedRecip {
    SignedRecip { inv: Rational::one() - e.inv() }
}

fn check_lengths(r: &ExponentVector, p: &ExponentVector) -> Result<(), ExponentError> {
    if r.len() != p.len() + 1 {
        return Err(ExponentError::LengthMismatch {
            expected: p.len() + 1,
            found: r.len(),
        });
    }
    Ok(())
}

/// `1 − 1/r_{m+1}`, the reciprocal of `r′_{m+1}`.
fn last_dual_inv(r: &ExponentVector) -> Rational {
    Rational::one() - r.entries.last().expect("nonempty r").inv()
}

/// `rᵢ ≤ pᵢ` for `i ≤ m` and `r′_{m+1} ≥ p`.
pub fn preceq_star(r: &ExponentVector, p: &ExponentVector) -> Result<bool, ExponentError> {
    check_lengths(r, p)?;
    let head = r.entries.iter().zip(&p.entries).all(|(ri, pi)| ri.inv() >= pi.inv());
    Ok(head && last_dual_inv(r) <= *reciprocal_sum(p.iter()).inv())
}

/// Strict version of [`preceq_star`].
pub fn prec(r: &ExponentVector, p: &ExponentVector) -> Result<bool, ExponentError> {
    check_lengths(r, p)?;
    let head = r.entries.iter().zip(&p.entries).all(|(ri, pi)| ri.inv() > pi.inv());
    Ok(head && last_dual_inv(r) < *reciprocal_sum(p.iter()).inv())
}

/// `⪯⋆` plus the restriction `r′_{m+1} > p`.
pub fn preceq(r: &ExponentVector, p: &ExponentVector) -> Result<bool, ExponentError> {
    Ok(preceq_star(r, p)? && last_dual_inv(r) < *reciprocal_sum(p.iter()).inv())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// `1/r = Σ 1/rᵢ` over all `m+1` entries.
    pub r: Exponent,
    /// `1/p = Σ 1/pᵢ` over the `m` primal entries.
    pub p: Exponent,
    /// `1/p_{m+1} = 1 − 1/p`.
    pub p_next: SignedRecip,
    /// `1/δᵢ = 1/rᵢ − 1/pᵢ`, `i = 1..m+1`.
    pub deltas: Vec<SignedRecip>,
    /// `1/ϱ = 1/δ_m + 1/δ_{m+1}`.
    pub rho: SignedRecip,
    /// `1/θᵢ = 1/r − 1 − 1/δᵢ`, `i = 1..m−1`.
    pub thetas: Vec<SignedRecip>,
}

pub fn derived_scales(p: &ExponentVector, r: &ExponentVector) -> Result<DerivedScales, ExponentError> {
    check_lengths(r, p)?;
    let m = p.len();
    if m == 0 {
        return Err(ExponentError::LengthMismatch { expected: 1, found: 0 });
    }
    let p_sum = reciprocal_sum(p.iter());
    let r_sum = reciprocal_sum(r.iter());
    let p_next = SignedRecip { inv: Rational::one() - p_sum.inv() };
    let mut deltas = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let pi = if i < m { p.get(i).inv().clone() } else { p_next.inv.clone() };
        let d = r.get(i).inv() - pi;
        if d.is_negative() {
            let reason = if i < m {
                format!("r_{} = {} > p_{} = {}", i + 1, r.get(i), i + 1, p.get(i))
            } else {
                format!("r′_{} < p = {}", m + 1, p_sum)
            };
            return Err(ExponentError::Ordering { index: i + 1, reason });
        }
        deltas.push(SignedRecip { inv: d });
    }
    let delta_sum = deltas.iter().fold(Rational::zero(), |a, d| a + &d.inv);
    assert_eq!(delta_sum, r_sum.inv() - Rational::one(), "Σ1/δᵢ = 1/r − 1");
    let p_total = p_sum.inv() + &p_next.inv;
    assert!(p_total.is_one(), "Σ1/pᵢ over m+1 entries = 1");

    let rho = SignedRecip { inv: &deltas[m - 1].inv + &deltas[m].inv };
    let base = r_sum.inv() - Rational::one();
    let thetas = deltas[..m - 1]
        .iter()
        .map(|d| SignedRecip { inv: &base - &d.inv })
        .collect();
    Ok(DerivedScales { r: r_sum, p: p_sum, p_next, deltas, rho, thetas })
}

/// `γ_{p,r} = 1/r + 1/p′`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gamma {
    #[serde(with = "rational_str")]
    pub value: Rational,
}

impl Gamma {
    /// `γ = 0` happens only for `p = 1, r = ∞`, the class of weights `v ≈ 1`.
    pub fn is_trivial(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        rat_f64(&self.value)
    }
}

pub fn gamma(p: &Exponent, r: &Exponent) -> Result<Gamma, ExponentError> {
    if *p.inv() > Rational::one() {
        return Err(ExponentError::OutOfRange { what: "p", detail: format!("p = {p} < 1") });
    }
    Ok(Gamma { value: r.inv() + dual(p).inv })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagTargets {
    pub r: Exponent,
    pub q: Exponent,
    /// The common value `1/p − 1/p₀`.
    #[serde(with = "rational_str")]
    pub shift: Rational,
}

/// Solves `1/q − 1/q₀ = 1/r − 1/r₀ = 1/p − 1/p₀` for `(r, q)`.
pub fn offdiag_targets(
    p0: &Exponent,
    r0: &Exponent,
    q0: &Exponent,
    p: &Exponent,
) -> Result<OffDiagTargets, ExponentError> {
    if *p0.inv() > Rational::one() {
        return Err(ExponentError::OutOfRange { what: "p0", detail: format!("p0 = {p0} < 1") });
    }
    if *p.inv() >= Rational::one() {
        return Err(ExponentError::OutOfRange { what: "p", detail: format!("p = {p} ≤ 1") });
    }
    if gamma(p0, r0)?.is_trivial() {
        return Err(ExponentError::NothingToProve);
    }
    let shift = p.inv() - p0.inv();
    let r_inv = r0.inv() + &shift;
    let q_inv = q0.inv() + &shift;
    if !r_inv.is_positive() {
        return Err(ExponentError::OutOfRange {
            what: "r",
            detail: format!("1/r = {r_inv}; need 0 < r < ∞"),
        });
    }
    if q_inv.is_negative() {
        return Err(ExponentError::OutOfRange {
            what: "q",
            detail: format!("1/q = {q_inv}; need 0 < q ≤ ∞"),
        });
    }
    Ok(OffDiagTargets { r: Exponent { inv: r_inv }, q: Exponent { inv: q_inv }, shift })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaScales {
    pub rho: SignedRecip,
    pub thetas: Vec<SignedRecip>,
}

impl LemmaScales {
    pub fn rho_f64(&self) -> f64 {
        self.rho.value_f64()
    }

    pub fn theta_f64(&self, i: usize) -> f64 {
        self.thetas[i].value_f64()
    }
}

pub fn lemma_scales(p: &ExponentVector, r: &ExponentVector) -> Result<LemmaScales, ExponentError> {
    let ds = derived_scales(p, r)?;
    let m = p.len();
    let tail: Rational = p.entries[..m - 1].iter().fold(Rational::zero(), |a, e| a + e.inv());
    let direct = r.get(m - 1).inv() - last_dual_inv(r) + tail;
    assert_eq!(direct, ds.rho.inv, "two expressions for 1/ϱ");
    if !ds.rho.is_positive() {
        return Err(ExponentError::LemmaHypothesis(format!("1/ϱ = {} must be > 0", ds.rho.inv)));
    }
    for (i, t) in ds.thetas.iter().enumerate() {
        if !t.is_positive() {
            return Err(ExponentError::LemmaHypothesis(format!(
                "1/θ_{} = {} must be > 0",
                i + 1,
                t.inv
            )));
        }
    }
    Ok(LemmaScales { rho: ds.rho, thetas: ds.thetas })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// Zero-based coordinate changed in this step.
    pub index: usize,
    pub vector: ExponentVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationPath {
    pub start: ExponentVector,
    pub steps: Vec<PathStep>,
}

impl ExtrapolationPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Start vector followed by every step.
    pub fn vectors(&self) -> impl Iterator<Item = &ExponentVector> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.vector))
    }
}

/// Plans a one-coordinate-at-a-time path from `p_start` to `q_target`.
///
/// Greedy: each step moves the coordinate whose change raises `1/t` the most
/// among those keeping `r′_{m+1} > t`; ties go to the lowest index.
pub fn extrapolation_path(
    p_start: &ExponentVector,
    q_target: &ExponentVector,
    r: &ExponentVector,
) -> Result<ExtrapolationPath, ExponentError> {
    if !preceq_star(r, p_start)? {
        return Err(ExponentError::PathHypothesis(format!("r = {r} not ⪯⋆ p = {p_start}")));
    }
    if !prec(r, q_target)? {
        return Err(ExponentError::PathHypothesis(format!("r = {r} not ≺ q = {q_target}")));
    }
    let mut t = p_start.clone();
    let mut steps = Vec::new();
    while t != *q_target {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..t.len() {
            if t.get(i) == q_target.get(i) {
                continue;
            }
            let cand = t.with(i, q_target.get(i).clone());
            if !preceq(r, &cand)? {
                continue;
            }
            let gain = q_target.get(i).inv() - t.get(i).inv();
            if best.as_ref().is_none_or(|(_, g)| gain > *g) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.ok_or_else(|| ExponentError::PathStuck(t.to_string()))?;
        t = t.with(i, q_target.get(i).clone());
        steps.push(PathStep { index: i, vector: t.clone() });
    }
    Ok(ExtrapolationPath { start: p_start.clone(), steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(items: &[&str]) -> ExponentVector {
        ExponentVector::parse(VectorKind::P, items).unwrap()
    }

    fn rv(items: &[&str]) -> ExponentVector {
        ExponentVector::parse(VectorKind::R, items).unwrap()
    }

    #[test]
    fn reciprocal_sums() {
        let e = |s: &str| s.parse::<Exponent>().unwrap();
        assert_eq!(reciprocal_sum(&[e("2"), e("2")]), Exponent::one());
        assert_eq!(reciprocal_sum(&[e("inf"), e("3")]), Exponent::int(3));
        assert_eq!(reciprocal_sum(&[e("4"), e("4"), e("2")]), Exponent::one());
    }

    #[test]
    fn duals() {
        assert_eq!(dual(&Exponent::int(2)).inv, rat(1, 2));
        assert!(dual(&Exponent::one()).is_zero());
        assert_eq!(dual(&Exponent::ratio(2, 3)).inv, rat(-1, 2));
    }

    #[test]
    fn parsing_round_trips() {
        for s in ["inf", "3/2", "7", "1/p=0", "1/p=5/4", "1.25"] {
            let e: Exponent = s.parse().unwrap();
            let back: Exponent = e.to_string().parse().unwrap();
            assert_eq!(e, back);
        }
        assert_eq!("1/p=5/4".parse::<Exponent>().unwrap(), Exponent::ratio(4, 5));
        assert_eq!("1.25".parse::<Exponent>().unwrap(), Exponent::ratio(5, 4));
        assert!("0".parse::<Exponent>().is_err());
        assert!("1/p=-1".parse::<Exponent>().is_err());
        let json = serde_json::to_string(&Exponent::ratio(3, 2)).unwrap();
        assert_eq!(json, "\"3/2\"");
    }

    #[test]
    fn orderings() {
        assert!(preceq_star(&rv(&["1", "1", "1"]), &pv(&["2", "2"])).unwrap());
        let r = rv(&["1", "1", "1"]);
        let p = pv(&["inf", "inf"]);
        assert!(preceq_star(&r, &p).unwrap());
        assert!(!prec(&r, &p).unwrap());
        let r = rv(&["2", "2", "2"]);
        let p = pv(&["2", "4"]);
        assert!(preceq_star(&r, &p).unwrap());
        assert!(!prec(&r, &p).unwrap());
        assert!(preceq_star(&rv(&["1", "1"]), &pv(&["2", "2"])).is_err());
    }

    #[test]
    fn derived_scales_examples() {
        let ds = derived_scales(&pv(&["4", "4"]), &rv(&["1", "1", "1"])).unwrap();
        let deltas: Vec<_> = ds.deltas.iter().map(|d| d.inv.clone()).collect();
        assert_eq!(deltas, vec![rat(3, 4), rat(3, 4), rat(1, 2)]);
        assert_eq!(*ds.r.inv(), rat(3, 1));

        let ds = derived_scales(&pv(&["2", "2"]), &rv(&["1", "1", "1"])).unwrap();
        assert_eq!(ds.deltas[2].inv, rat(1, 1));

        // p = r with r′₃ = p: every reciprocal vanishes
        let ds = derived_scales(&pv(&["4", "4"]), &rv(&["4", "4", "2"])).unwrap();
        assert!(ds.deltas.iter().all(SignedRecip::is_zero));

        let err = derived_scales(&pv(&["2", "2"]), &rv(&["1", "4", "1"])).unwrap_err();
        assert!(matches!(err, ExponentError::Ordering { index: 2, .. }));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&Exponent::int(2), &Exponent::int(2)).unwrap().value, rat(1, 1));
        assert!(gamma(&Exponent::one(), &Exponent::infinity()).unwrap().is_trivial());
        assert_eq!(gamma(&Exponent::infinity(), &Exponent::one()).unwrap().value, rat(2, 1));
    }

    #[test]
    fn offdiag_examples() {
        let e = Exponent::int;
        let t = offdiag_targets(&e(2), &e(2), &e(2), &e(4)).unwrap();
        assert_eq!((t.r, t.q), (e(4), e(4)));
        let err = offdiag_targets(&e(2), &e(2), &e(2), &Exponent::infinity()).unwrap_err();
        assert!(matches!(err, ExponentError::OutOfRange { what: "r", .. }));
        let err = offdiag_targets(&e(1), &e(2), &e(1), &e(2)).unwrap_err();
        assert!(matches!(err, ExponentError::OutOfRange { what: "r", .. }));
        let err = offdiag_targets(&e(1), &Exponent::infinity(), &e(1), &e(2)).unwrap_err();
        assert_eq!(err, ExponentError::NothingToProve);
    }

    #[test]
    fn lemma_scales_examples() {
        let ls = lemma_scales(&pv(&["4", "4"]), &rv(&["1", "1", "1"])).unwrap();
        assert_eq!(ls.rho.inv, rat(5, 4));
        assert_eq!(ls.thetas[0].inv, rat(5, 4));
        let ls = lemma_scales(&pv(&["2", "2"]), &rv(&["1", "1", "1"])).unwrap();
        assert_eq!(ls.rho.inv, rat(3, 2));
        assert_eq!(ls.thetas[0].inv, rat(3, 2));
        let err = lemma_scales(&pv(&["4", "4"]), &rv(&["4", "4", "2"])).unwrap_err();
        assert!(matches!(err, ExponentError::LemmaHypothesis(_)));
    }

    #[test]
    fn path_examples() {
        let r = rv(&["1", "1", "1"]);
        let path = extrapolation_path(&pv(&["2", "2"]), &pv(&["2", "2"]), &r).unwrap();
        assert!(path.is_empty());

        let path = extrapolation_path(&pv(&["2", "2"]), &pv(&["4", "4"]), &r).unwrap();
        let vs: Vec<String> = path.vectors().map(|v| v.to_string()).collect();
        assert_eq!(vs, ["(2,2)", "(4,2)", "(4,4)"]);

        let path = extrapolation_path(&pv(&["inf", "inf"]), &pv(&["2", "4"]), &r).unwrap();
        let vs: Vec<String> = path.vectors().map(|v| v.to_string()).collect();
        assert_eq!(vs, ["(inf,inf)", "(2,inf)", "(2,4)"]);
        assert_eq!(path.steps[0].index, 0);
    }
}
