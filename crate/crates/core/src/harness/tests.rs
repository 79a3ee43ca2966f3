use super::*;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

const OFFDIAG: &str = r#"{
    "experiment": "offdiag-ratio",
    "grid": {"d": 1, "L": 3},
    "exponents": {"p0": "2", "r0": "2", "q0": "2", "p": "2"},
    "trials": 6,
    "seed": 11,
    "options": {"operator": "identity"}
}"#;

#[test]
fn zero_trials_gives_header_only() {
    let mut c = cfg(OFFDIAG);
    c.trials = 0;
    let rep = run_experiment(&c).unwrap();
    assert_eq!(rep.csv().unwrap().trim_end(), CSV_HEADER);
    assert!(rep.summary.max_ratio.is_none());
    assert!(rep.summary.envelope_by_constant_decile.is_empty());
    let v: serde_json::Value = serde_json::from_str(&rep.json().unwrap()).unwrap();
    assert!(v.get("max_ratio").is_some() && v.get("median_ratio").is_some());
}

#[test]
fn same_seed_same_bytes() {
    for kind in ExperimentKind::ALL {
        let text = match kind {
            ExperimentKind::OffdiagRatio => OFFDIAG.to_string(),
            ExperimentKind::MultilinearExtrapolate => r#"{"experiment":"multilinear-extrapolate","grid":{"d":1,"L":3},
                "exponents":{"p":"2,2","r":"1,1,1"},"trials":4,"seed":5}"#
                .to_string(),
            ExperimentKind::TensorMixedNorm => r#"{"experiment":"tensor-mixed-norm","grid":{"d":1,"L":2},
                "exponents":{"p":"2,2"},"trials":3,"seed":5,"options":{"complexities":[[0,0,0],[1,0,0]]}}"#
                .to_string(),
            _ => format!(r#"{{"experiment":"{}","grid":{{"d":1,"L":3}},"trials":4,"seed":5}}"#, kind.name()),
        };
        let c = cfg(&text);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.csv().unwrap(), b.csv().unwrap(), "{}", kind.name());
        assert_eq!(a.json().unwrap(), b.json().unwrap(), "{}", kind.name());
        assert_eq!(a.rows.len(), c.trials);
    }
}

#[test]
fn identity_operator_on_diagonal_has_ratio_one() {
    let mut c = cfg(OFFDIAG);
    c.options.f_equals_g = true;
    let rep = run_experiment(&c).unwrap();
    for r in &rep.rows {
        assert!((r.ratio - 1.0).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn bad_regime_rejected_before_numerics() {
    let c = cfg(r#"{"experiment":"multilinear-extrapolate","grid":{"d":1,"L":3},
        "exponents":{"p":"2,2","r":"4,4,1"},"trials":100000000,"seed":0}"#);
    let e = validate(&c).unwrap_err();
    assert!(e.is_config(), "{e}");
    let msg = e.to_string();
    assert!(msg.starts_with("config error"), "{msg}");

    let c = cfg(r#"{"experiment":"offdiag-ratio","grid":{"d":1,"L":3},
        "exponents":{"p0":"2","r0":"2","q0":"2"},"trials":1,"seed":0}"#);
    assert!(validate(&c).unwrap_err().to_string().contains("\"p\""));

    assert!(ExperimentConfig::from_json(r#"{"experiment":"nope","grid":{"d":1,"L":3},"trials":1,"seed":0}"#).is_err());
    let mut c = cfg(OFFDIAG);
    c.options.complexities = vec![[3, 0, 0]];
    c.options.operator = OperatorChoice::Shift;
    assert!(validate(&c).unwrap_err().is_config());
}

#[test]
fn suite_names_parse() {
    assert_eq!("lemma_main".parse::<Suite>().unwrap(), Suite::LemmaMain);
    assert!("bogus".parse::<Suite>().is_err());
}

#[test]
fn injected_violation_names_cube() {
    let opts = VerifyOptions { inject_violation: true, scale: 0.05, ..Default::default() };
    let b = sparse_battery(20, &opts);
    assert_eq!(b.failed, 1, "{:?}", b.failures);
    assert!(!b.failures[0]["cube"].is_null());
    let clean = sparse_battery(20, &VerifyOptions::default());
    assert!(clean.passed(), "{:?}", clean.failures);
}

#[test]
fn rdf_with_zero_iterations_is_tail_limited() {
    let opts = VerifyOptions { k: 0, ..Default::default() };
    let b = rdf_battery(8, &opts);
    assert!(b.passed(), "{:?}", b.failures);
    assert!(b.notes.iter().any(|n| n.contains("tail-limited")), "{:?}", b.notes);
}
