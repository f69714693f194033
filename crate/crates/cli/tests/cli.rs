use std::process::Command;

use prismatic_cli::{render, run_source, strip_trailer, Emit, Outcome};

const BIN: &str = env!("CARGO_BIN_EXE_prismatic");

fn report(text: &str) -> prismatic_cli::Report {
    match run_source(text, 0) {
        Outcome::Ran(r) => r,
        Outcome::InputError(e) => panic!("{e}"),
    }
}

#[test]
fn zero_theta_gives_hodge_tate_table() {
    let r = report("prism p=5 N=1 mode=crystalline\nring T cap 3\nhiggs rank=1\ntask dr\n");
    let text = r.text();
    assert!(r.passed());
    assert!(text.contains("H^0 = (Z/5^1) ⊕ (Z/5^1) ⊕ (Z/5^1)\n"), "{text}");
    assert!(text.contains("H^1 = (Z/5^1) ⊕ (Z/5^1) ⊕ (Z/5^1)\n"), "{text}");
}

#[test]
fn theta_t_pipeline_passes() {
    let r = report(
        "prism p=5 N=1 mode=crystalline\nring T cap 3\nhiggs rank=1\ntheta 1 [1,1] = T\n\
         caps W=5 imax=2 jmax=1 nilbound=64\ntask dr\ntask ca-compare\ntask duality\n",
    );
    let names: Vec<_> = r.sections.iter().map(|s| (s.task.as_str(), s.verdict.to_string())).collect();
    assert_eq!(
        names,
        [("dr", "PASS".to_string()), ("ca-compare", "PASS".into()), ("duality", "PASS".into())]
    );
    assert!(r.text().contains("H^1 = (Z/5^1)\n"));
}

#[test]
fn commutator_violation_fails_with_witness() {
    let r = report(
        "prism p=3 N=1 mode=crystalline\nring T1 cap 2\nring T2 cap 2\nhiggs rank=2\n\
         theta 1 [1,2] = 1\ntheta 2 [2,1] = T1\ntask check\n",
    );
    assert!(!r.passed());
    let text = r.text();
    assert!(text.contains("[check] FAIL"));
    assert!(text.contains("witness = [theta_1, theta_2][1,1] = T1"), "{text}");
}

#[test]
fn sections_follow_declaration_order() {
    let r = report(
        "prism p=2 N=2 mode=crystalline\nring T cap 3\nhiggs rank=1\ntheta 1 [1,1]=T+2\n\
         caps W=6 imax=2 jmax=1 nilbound=64\ntask duality\ntask cocycle\ntask check\n",
    );
    let names: Vec<_> = r.sections.iter().map(|s| s.task.as_str()).collect();
    assert_eq!(names, ["duality", "cocycle", "check"]);
}

#[test]
fn small_weight_cap_is_refused() {
    let r = report(
        "prism p=5 N=1 mode=crystalline\nring T cap 3\nhiggs rank=1\ntheta 1 [1,1] = T\n\
         caps W=2 imax=2 jmax=1 nilbound=64\ntask stratify\n",
    );
    assert!(!r.passed());
    assert!(r.text().contains("would truncate"));
}

#[test]
fn exit_codes_and_trailer() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.prism");
    std::fs::write(&good, "prism p=5 N=1 mode=crystalline\nring T cap 3\nhiggs rank=1\ntask dr\n").unwrap();
    let out = Command::new(BIN).arg("run").arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().last().unwrap().starts_with("# elapsed"));
    assert!(strip_trailer(&stdout).ends_with("(Z/5^1)\n"));

    let bad = dir.path().join("bad.prism");
    std::fs::write(&bad, "prism p=5 N=1 mode=crystalline\nring T cap 3\nhiggs rank=1\ntheta 1 [1,1] = T +\n").unwrap();
    let out = Command::new(BIN).arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("line 4, column 20"));

    let fail = dir.path().join("fail.prism");
    std::fs::write(
        &fail,
        "prism p=3 N=1 mode=crystalline\nring T1 cap 2\nring T2 cap 2\nhiggs rank=2\n\
         theta 1 [1,2] = 1\ntheta 2 [2,1] = T1\ntask check\n",
    )
    .unwrap();
    let out = Command::new(BIN).arg("run").arg(&fail).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = Command::new(BIN)
        .args(["run", "--emit", "structured", "--corpus"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[1]["file"], "fail.prism");
    assert_eq!(v[1]["report"]["sections"][0]["verdict"], "FAIL");
}

#[test]
fn seed_changes_only_the_seed_line() {
    let text = "prism p=3 N=2 mode=crystalline\nring T cap 3\nhiggs rank=1\ntask check\n";
    let a = render(&[(String::new(), run_source(text, 1))], Emit::Text);
    let b = render(&[(String::new(), run_source(text, 2))], Emit::Text);
    assert!(a.contains("seed 1") && b.contains("seed 2"));
    assert_eq!(a.replace("seed 1", "seed 2"), b);
}
