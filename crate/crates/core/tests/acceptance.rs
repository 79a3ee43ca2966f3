//! Acceptance gates 1–8 and the non-gating resolution monitor (9).
//!
//! Run with `cargo test --release -p multiweight --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use multiweight::harness::{
    case_battery, dyadic_battery, exponent_identities, lemma_main_battery, monitor_envelopes, norms_battery,
    operator_battery, rdf_battery, rescaling_identities, BatteryResult, VerifyOptions,
};

const SEED: u64 = 20_240_601;

/// Exact rational identities.
const TOL_EXACT: f64 = 0.0;
const TOL_RESCALING: f64 = 1e-9;
/// Round trip and rewrites share the battery's larger bound; the round trip alone is checked to 1e-12 inside.
const TOL_LEMMA: f64 = 1e-9;
const TOL_DYADIC: f64 = 1e-12;
/// Brute-force oracles sum in a different order than the operators.
const TOL_ORACLE: f64 = 1e-12;
const TOL_NORMS: f64 = 1e-12;
const MONITOR_GROWTH: f64 = 2.0;

struct Gate {
    id: u8,
    title: &'static str,
    batteries: Vec<BatteryResult>,
    tol: f64,
}

impl Gate {
    fn passed(&self) -> bool {
        self.batteries.iter().all(|b| b.passed() && b.max_error <= self.tol)
    }

    fn line(&self) -> String {
        let n: usize = self.batteries.iter().map(|b| b.instances).sum();
        let failed: usize = self.batteries.iter().map(|b| b.failed).sum();
        let err = self.batteries.iter().map(|b| b.max_error).fold(0.0, f64::max);
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let notes: Vec<&str> = self.batteries.iter().flat_map(|b| b.notes.iter().map(String::as_str)).collect();
        format!(
            "[{status}] criterion {}: {} | {n} instances, {failed} failed, max error {err:.2e} (tol {:.0e}){}",
            self.id,
            self.title,
            self.tol,
            if notes.is_empty() { String::new() } else { format!(" | {}", notes.join("; ")) }
        )
    }
}

fn report(gate: Gate) {
    println!("{}", gate.line());
    for b in &gate.batteries {
        for f in &b.failures {
            println!("    {f}");
        }
    }
    assert!(gate.passed(), "criterion {} failed", gate.id);
}

fn opts() -> VerifyOptions {
    VerifyOptions { seed: SEED, ..Default::default() }
}

#[test]
fn criterion_1_exponent_identities() {
    report(Gate {
        id: 1,
        title: "Σ1/δ = 1/r − 1, compatibility equalities, ⪯⋆ ⇔ min 1/δ ≥ 0",
        batteries: vec![exponent_identities(10_000, &opts())],
        tol: TOL_EXACT,
    });
}

#[test]
fn criterion_2_rescaling_identities() {
    report(Gate {
        id: 2,
        title: "A_(p,r) rescalings on 200 weights × 5 pairs, A_p duality",
        batteries: vec![rescaling_identities(200, &opts())],
        tol: TOL_RESCALING,
    });
}

#[test]
fn criterion_3_factorization_lemma() {
    report(Gate {
        id: 3,
        title: "lemma certificates, round trip, norm rewrites on 1000 instances",
        batteries: vec![lemma_main_battery(1000, &opts())],
        tol: TOL_LEMMA,
    });
}

#[test]
fn criterion_4_rubio_de_francia() {
    let o = VerifyOptions { k: 16, ..opts() };
    report(Gate {
        id: 4,
        title: "domination, M(R_K h) ≤ 2B R_(K+1) h, ‖R_K h‖ ≤ 2‖h‖ + tail at K = 16",
        batteries: vec![rdf_battery(1000, &o)],
        tol: TOL_EXACT,
    });
}

#[test]
fn criterion_5_offdiagonal_constructions() {
    report(Gate {
        id: 5,
        title: "cases 1–3, 100 instances each, [W] within the displayed bounds",
        batteries: vec![case_battery(100, &opts())],
        tol: TOL_EXACT,
    });
}

#[test]
fn criterion_6_dyadic_calculus() {
    report(Gate {
        id: 6,
        title: "telescoping, Haar vs martingale differences, Haar orthonormality",
        batteries: vec![dyadic_battery(1000, &opts())],
        tol: TOL_DYADIC,
    });
}

#[test]
fn criterion_7_operators() {
    let b = operator_battery(300, &opts());
    let note = b.notes.iter().find(|n| n.contains("injected")).cloned().unwrap_or_default();
    let (rejected, injected) = note
        .split_whitespace()
        .next()
        .and_then(|s| s.split_once('/'))
        .map(|(a, b)| (a.parse::<usize>().unwrap(), b.parse::<usize>().unwrap()))
        .expect("injection count note");
    assert!(injected > 0 && rejected == injected, "{note}");
    report(Gate {
        id: 7,
        title: "100% rejection of injected violations, tensor factorization, brute-force oracles",
        batteries: vec![b],
        tol: TOL_ORACLE,
    });
}

#[test]
fn criterion_8_norms() {
    report(Gate {
        id: 8,
        title: "mixed = lp ∘ slice, mixed Hölder, p = q flat norm",
        batteries: vec![norms_battery(1000, &opts())],
        tol: TOL_NORMS,
    });
}

#[test]
fn criterion_9_monitoring() {
    // report-only: growth beyond MONITOR_GROWTH between depths warns, never fails
    let m = match monitor_envelopes(SEED, 20) {
        Ok(m) => m,
        Err(e) => {
            println!("[MONITOR] criterion 9: could not run: {e}");
            return;
        }
    };
    for p in &m.points {
        println!("    {} L={} max {:.4} median {:.4}", p.experiment, p.l, p.max_ratio, p.median_ratio);
    }
    let status = if m.warnings.is_empty() { "OK" } else { "WARN" };
    println!(
        "[MONITOR {status}] criterion 9: sparse-domination and lemma-ratio envelopes, L = 3..6, growth threshold {MONITOR_GROWTH}× | {} warnings",
        m.warnings.len()
    );
    for w in &m.warnings {
        println!("    warning: {w}");
    }
}
