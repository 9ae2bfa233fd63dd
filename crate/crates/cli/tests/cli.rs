use std::path::PathBuf;
use std::process::{Command, Output};

use ctl_evidence::evidence::is_natural;
use ctl_evidence::model::load_model;
use ctl_evidence::parse_formula;

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(name).to_string_lossy().into_owned()
}

fn ctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctl"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_exit_codes() {
    let chain = fixture("chain.json");
    let o = ctl(&["check", &chain, "-f", "E[p U q]", "--state", "a"]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    let row = table.lines().find(|l| l.starts_with("a ")).unwrap();
    assert!(row.split_whitespace().nth(1) == Some("tt"), "{table}");

    let o = ctl(&["check", &chain, "-f", "EG p", "--state", "a"]);
    assert_eq!(o.status.code(), Some(1));

    let o = ctl(&["check", "/nonexistent/model.json", "-f", "p"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ctl(&["check", &chain, "-f", "E[p U"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ctl(&["check", &chain]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_several_formulas_and_ast() {
    let o = ctl(&[
        "check",
        &fixture("chain.json"),
        "-f",
        "EX q",
        "-f",
        "AG p",
        "--state",
        "b",
        "--show-ast",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let first = out.find("formula: EX q").unwrap();
    let second = out.find("formula: AG p").unwrap();
    assert!(first < second);
    assert!(out.contains("  [0] EX q\n  [1] q\n"));
    assert!(out.contains("b: tt") && out.contains("b: ff"));
}

#[test]
fn missing_labels_need_permission() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        r#"{"version": "ctl-model/1", "states": [{"id": "s"}], "transitions": [["s", "s"]], "labels": {"p": {"s": true}}}"#,
    )
    .unwrap();
    let path = path.to_string_lossy();
    let o = ctl(&["check", &path, "-f", "EX q"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ctl(&["--permissive-labels", "check", &path, "-f", "EX q"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn golden_ex_evidence() {
    let o = ctl(&[
        "evidence",
        &fixture("chain.json"),
        "-f",
        "EX q",
        "--state",
        "b",
        "--format",
        "dot",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let golden = include_str!("golden/chain_ex_q_at_b.dot");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn natural_locally_closed_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let args = [
        "evidence",
        &fixture("chain.json"),
        "-f",
        "E[p U q]",
        "--state",
        "a",
        "--natural",
        "--local-closure",
        "-o",
        out.to_str().unwrap(),
    ];
    assert_eq!(ctl(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&out).unwrap();
    let e = load_model(&first).unwrap();
    let f = parse_formula("E[p U q]").unwrap();
    assert!(is_natural(&e, &f));
    for s in ["a", "b"] {
        assert!(e.label(s, &parse_formula("p").unwrap()).is_some());
        assert!(e.label(s, &parse_formula("q").unwrap()).is_some());
    }
    assert_eq!(ctl(&args).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn evidence_selection_errors() {
    let chain = fixture("chain.json");
    let o = ctl(&["evidence", &chain, "-f", "EX q", "--assert-formula", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ctl(&["evidence", &chain, "-f", "EX q", "--assert-formula", "p"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ctl(&["evidence", &chain, "-f", "EX q", "--state", "zz"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ctl(&[
        "evidence",
        &chain,
        "-f",
        "EX q && p",
        "--assert-formula",
        "EX q",
        "--state",
        "b",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn strict_reading_is_reported() {
    let o = ctl(&[
        "--strict-table2",
        "evidence",
        &fixture("game.json"),
        "-f",
        "E[!d1 U win]",
        "--state",
        "s0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("resolved reading matches, literal reading does not match"),
        "{err}"
    );
}

#[test]
fn proof_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let out_s = out.to_str().unwrap();
    let chain = fixture("chain.json");
    let o = ctl(&[
        "proof",
        &chain,
        "-f",
        "EG (!q && EF q)",
        "-o",
        out_s,
        "--validate",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["version"], "ctl-evidence/1");
    assert_eq!(v["combined"].as_array().unwrap().len(), 2);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        [
            "ast",
            "combined",
            "localClosure",
            "model",
            "provenance",
            "version"
        ]
    );

    assert_eq!(ctl(&["proof", "--bundle", out_s]).status.code(), Some(0));

    // drop the witness transitions of the first block
    let mut bad = v.clone();
    bad["combined"][0]["minimal"]["transitions"] = serde_json::json!([]);
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, bad.to_string()).unwrap();
    let o = ctl(&["proof", "--bundle", bad_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("table1-condition-fails"));

    let mut dangling = v;
    dangling["combined"][0]["natural"]["states"][0]["id"] = "zz".into();
    std::fs::write(&bad_path, dangling.to_string()).unwrap();
    assert_eq!(
        ctl(&["proof", "--bundle", bad_path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn proof_output_is_deterministic() {
    let game = fixture("game.json");
    let a = ctl(&["proof", &game, "-f", "EG (!win && EF win)"]);
    let b = ctl(&["proof", &game, "-f", "EG (!win && EF win)"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_commands() {
    let o = ctl(&[
        "oracle",
        "sat",
        &fixture("game.json"),
        "-f",
        "EG (!win && EF win)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("MISMATCH"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.json");
    std::fs::write(
        &path,
        r#"{"version": "ctl-model/1", "states": [{"id": "s", "closed": true}], "transitions": []}"#,
    )
    .unwrap();
    let path = path.to_string_lossy();
    let run = |v: &str| {
        ctl(&[
            "oracle", "evidence", &path, "-f", "EX true", "--state", "s", "--value", v,
        ])
    };
    assert_eq!(run("ff").status.code(), Some(0));
    assert_eq!(run("tt").status.code(), Some(1));

    let o = ctl(&["oracle", "constrained", "-f", "true", "--max-states", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ctl(&["oracle", "constrained", "-f", "p", "-f", "!q"]);
    assert_eq!(o.status.code(), Some(0));
}
