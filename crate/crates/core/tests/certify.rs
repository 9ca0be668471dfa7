use cofibered::certify::{reverify, run_dihedral, run_quaternionic, run_sl2z, Bundle, Recheck, RunConfig, Verdict};
use serde_json::Value;

fn cfg(text: &str) -> RunConfig {
    let c = RunConfig::parse(text).unwrap();
    c.validate().unwrap();
    c
}

fn verdict(b: &Bundle, claim: &str) -> Verdict {
    b.certificate(claim).unwrap_or_else(|| panic!("missing {claim}")).verdict
}

fn assert_rechecks(b: &Bundle) {
    for (claim, r) in reverify(b) {
        assert!(!matches!(r, Recheck::Failed(_)), "{claim}: {r:?}");
    }
}

/// Each dependency names an earlier certificate that is verified or assumed.
fn assert_dependencies(b: &Bundle) {
    for (i, c) in b.certificates.iter().enumerate() {
        for d in &c.depends_on {
            let pos = b.certificates.iter().position(|e| &e.claim == d).unwrap_or_else(|| panic!("{d} missing"));
            assert!(pos < i, "{} depends on later {d}", c.claim);
            assert!(matches!(b.certificates[pos].verdict, Verdict::Verified | Verdict::Assumption));
        }
        assert_eq!(c.config_hash, b.config_hash);
    }
}

#[test]
fn dihedral_pipeline_and_control() {
    let b = run_dihedral(&cfg("")).unwrap();
    assert!(b.certificates.iter().all(|c| c.verdict == Verdict::Verified && !c.control));
    assert_eq!(
        b.certificate("dihedral.commutator").unwrap().witness["matrix"],
        serde_json::json!([["1/1", "0/1"], ["0/1", "4/1"]])
    );
    assert_rechecks(&b);
    assert_dependencies(&b);
    assert_eq!(b.exit_code(), 0);

    let c = run_dihedral(&cfg("a = 1")).unwrap();
    assert_eq!(verdict(&c, "dihedral.finite-group"), Verdict::Verified);
    assert_eq!(verdict(&c, "dihedral.control-nontrivial-intersection"), Verdict::Verified);
    assert!(c.certificate("dihedral.trivial-intersection").is_none());
    assert_rechecks(&c);
    assert_eq!(c.exit_code(), 0);
    assert_ne!(b.config_hash, c.config_hash);
}

#[test]
fn runs_are_byte_identical() {
    for (run, text) in [(run_dihedral as fn(&RunConfig) -> _, "a = 3"), (run_sl2z, "")] {
        let x = run(&cfg(text)).unwrap().to_canonical_json();
        let y = run(&cfg(text)).unwrap().to_canonical_json();
        assert_eq!(x, y);
        assert_eq!(Bundle::from_json(&x).unwrap().to_canonical_json(), x);
    }
}

#[test]
fn sl2z_pipeline() {
    let b = run_sl2z(&cfg("")).unwrap();
    assert_eq!(verdict(&b, "sl2z.finite-index"), Verdict::Verified);
    let w = &b.certificate("sl2z.finite-index").unwrap().witness;
    assert_eq!((w["index_in_gamma"].as_u64(), w["index_in_gamma_h"].as_u64()), (Some(3), Some(3)));
    assert_eq!(verdict(&b, "sl2z.nondiscrete"), Verdict::Verified);
    assert_eq!(verdict(&b, "sl2z.jorgensen"), Verdict::Verified);
    assert_eq!(verdict(&b, "sl2z.cusps"), Verdict::Assumption);
    assert_rechecks(&b);
    assert_dependencies(&b);
    assert_eq!(b.exit_code(), 0);

    let c = run_sl2z(&cfg("h = matrix:1,1,0,1")).unwrap();
    assert_eq!(verdict(&c, "sl2z.control-index1"), Verdict::Verified);
    assert_eq!(verdict(&c, "sl2z.control-discrete"), Verdict::NotFound);
    assert_eq!(c.exit_code(), 0);
}

#[test]
fn tampered_witnesses_fail_recheck() {
    let b = run_sl2z(&cfg("")).unwrap();
    let mut doc: Value = serde_json::from_str(&b.to_canonical_json()).unwrap();
    let certs = doc["certificates"].as_array_mut().unwrap();
    let nd = certs.iter_mut().find(|c| c["claim"] == "sl2z.nondiscrete").unwrap();
    nd["witness"]["word"] = serde_json::json!([[1, false]]);
    let idx = certs.iter_mut().find(|c| c["claim"] == "sl2z.finite-index").unwrap();
    idx["witness"]["index_in_gamma"] = serde_json::json!(4);
    let tampered = Bundle::from_json(&doc.to_string()).unwrap();
    let failed: Vec<String> =
        reverify(&tampered).into_iter().filter(|(_, r)| matches!(r, Recheck::Failed(_))).map(|(c, _)| c).collect();
    assert_eq!(failed, ["sl2z.finite-index", "sl2z.nondiscrete"]);
}

#[test]
fn quaternionic_pipeline() {
    let b = run_quaternionic(&cfg("")).unwrap();
    for claim in [
        "quaternionic.d-two-adic-square",
        "quaternionic.example-algebra",
        "quaternionic.torsion-free",
        "quaternionic.unramified-covers",
        "quaternionic.surjective.k1",
        "quaternionic.surjective.k2",
        "quaternionic.surjective.k3",
        "quaternionic.nondiscrete",
    ] {
        assert_eq!(verdict(&b, claim), Verdict::Verified, "{claim}");
    }
    assert_eq!(verdict(&b, "quaternionic.cocompact"), Verdict::Assumption);
    let idx = b.certificate("quaternionic.index3").unwrap();
    assert_eq!(idx.verdict, Verdict::RefutedAtThisLevel);
    assert_eq!(idx.witness["computed_index"], serde_json::json!([6, 6]));
    assert_eq!(idx.witness["paper_index"], 3);
    assert_eq!(idx.witness["agrees_with_paper"], false);
    assert_eq!(b.certificate("quaternionic.example-algebra").unwrap().witness["b"], 7);
    assert_rechecks(&b);
    assert_dependencies(&b);
    assert_eq!(b.exit_code(), 1);
}

#[test]
fn quaternionic_identity_control() {
    let b = run_quaternionic(&cfg("h = quaternion:1,0,0,0\nk_max = 2")).unwrap();
    let idx = b.certificate("quaternionic.control-index1").unwrap();
    assert!(idx.control);
    assert_eq!(idx.verdict, Verdict::Verified);
    assert_eq!(idx.witness["computed_index"], serde_json::json!([1, 1]));
    assert_eq!(verdict(&b, "quaternionic.control-discrete"), Verdict::NotFound);
    assert_rechecks(&b);
    assert_eq!(b.exit_code(), 0);
}

#[test]
fn bad_d_halts() {
    let b = run_quaternionic(&cfg("d = 3")).unwrap();
    assert_eq!(verdict(&b, "quaternionic.d-two-adic-square"), Verdict::RefutedAtThisLevel);
    assert!(b.halted.is_some());
    assert_eq!(b.certificates.len(), 1);
    assert_eq!(b.exit_code(), 1);
}

#[test]
fn config_errors() {
    assert!(RunConfig::parse("nonsense = 1").is_err());
    assert!(RunConfig::parse("d = 17\nd = 17").is_err());
    assert!(RunConfig::parse("k_min = 3\nk_max = 2").and_then(|c| c.validate()).is_err());
    assert!(RunConfig::parse("h = matrix:1,0,0").is_err());
}
