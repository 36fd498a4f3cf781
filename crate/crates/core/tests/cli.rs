use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn epiobs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epiobs"))
        .current_dir(dir)
        .env_remove("EPIOBS_WORKSPACE")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = epiobs(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn read(dir: &Path, f: &str) -> String {
    std::fs::read_to_string(dir.join(f)).unwrap()
}

/// Builds `name.json` as the product update of the generated action model.
fn model(dir: &Path, name: &str, gen: &[&str]) {
    let action = format!("{name}.act.json");
    let mut args = vec!["gen"];
    args.extend_from_slice(gen);
    args.extend_from_slice(&["-o", &action]);
    ok(dir, &args);
    ok(
        dir,
        &["update", "--action", &action, "-o", &format!("{name}.json")],
    );
}

#[test]
fn consensus_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    model(
        d,
        "iis",
        &["is", "--rounds", "1", "--agents", "2", "--values", "2"],
    );
    model(
        d,
        "sa1",
        &["sa", "--k", "1", "--agents", "2", "--values", "2"],
    );

    let out = epiobs(
        d,
        &[
            "obstruct",
            "--protocol",
            "iis.json",
            "--task",
            "sa1.json",
            "--mode",
            "K",
            "--phi-out",
            "phi.sexp",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let verdict = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(verdict["exists"], true);
    assert_eq!(verdict["verified"]["task_models_phi"], true);
    let witness = verdict["witness"].as_u64().unwrap();

    let on_task = json(&ok(
        d,
        &[
            "check",
            "formula",
            "--model",
            "sa1.json",
            "--formula-file",
            "phi.sexp",
        ],
    ));
    assert_eq!(on_task["holds_everywhere"], true);
    assert_eq!(on_task["class"], "L_K+");
    let on_protocol = json(&ok(
        d,
        &[
            "check",
            "formula",
            "--model",
            "iis.json",
            "--formula-file",
            "phi.sexp",
        ],
    ));
    assert!(on_protocol["refuted_at"]
        .as_array()
        .unwrap()
        .contains(&Value::from(witness)));

    let m = json(&ok(
        d,
        &["morphism", "--from", "iis.json", "--to", "sa1.json"],
    ));
    assert_eq!(m["found"], false);

    // the expanded form parses to a formula with the same truth values
    let out = epiobs(
        d,
        &[
            "obstruct",
            "--protocol",
            "iis.json",
            "--task",
            "sa1.json",
            "--phi-out",
            "tree.sexp",
            "--expand",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let tree = json(&ok(
        d,
        &[
            "check",
            "formula",
            "--model",
            "iis.json",
            "--formula-file",
            "tree.sexp",
        ],
    ));
    assert_eq!(tree["refuted_at"], on_protocol["refuted_at"]);
}

#[test]
fn two_set_agreement_has_no_obstruction() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    model(d, "iis", &["is", "--agents", "2", "--values", "2"]);
    model(
        d,
        "sa2",
        &["sa", "--k", "2", "--agents", "2", "--values", "2"],
    );
    let out = epiobs(
        d,
        &["obstruct", "--protocol", "iis.json", "--task", "sa2.json"],
    );
    assert_eq!(out.status.code(), Some(0));

    let summary = json(&ok(
        d,
        &[
            "simulate",
            "--protocol",
            "iis.json",
            "--task",
            "sa2.json",
            "--mode",
            "D",
            "-o",
            "s.json",
        ],
    ));
    assert_eq!(summary["total"], true);
    let report = json(&ok(
        d,
        &[
            "check",
            "relation",
            "--protocol",
            "iis.json",
            "--task",
            "sa2.json",
            "--mode",
            "D",
            "--relation",
            "s.json",
        ],
    ));
    assert_eq!(report["forth_ok"], true);
    assert_eq!(report["total"], true);

    let m = json(&ok(
        d,
        &["morphism", "--from", "iis.json", "--to", "sa2.json"],
    ));
    assert_eq!(m["found"], true);
    assert_eq!(m["graph_is_k_simulation"], true);
    assert_eq!(m["graph_is_d_simulation"], true);
}

#[test]
fn know_all_self_loops_obstruct_two_set_agreement() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    model(
        d,
        "knowall_selfloops_r1",
        &[
            "knowall",
            "--agents",
            "3",
            "--values",
            "3",
            "--rounds",
            "1",
            "--self-loops-only",
        ],
    );
    model(
        d,
        "isa2",
        &["sa", "--k", "2", "--agents", "3", "--values", "3"],
    );
    let out = epiobs(
        d,
        &[
            "obstruct",
            "--protocol",
            "knowall_selfloops_r1.json",
            "--task",
            "isa2.json",
            "--mode",
            "D",
            "--phi-out",
            "phi.sexp",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let verdict = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(verdict["verified"]["protocol_refutes_phi"], true);
    assert!(read(d, "phi.sexp").contains("(D "));
}

#[test]
fn graph_files_get_self_loops() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("g.json"), r#"{"edges": [[0, 1], [1, 2]]}"#).unwrap();
    let out = epiobs(
        d,
        &[
            "gen", "knowall", "--agents", "3", "--values", "2", "--graphs", "g.json", "-o",
            "k.json",
        ],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("added self-loops at nodes [0, 1, 2]"));
}

#[test]
fn outputs_are_reproducible_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = ok(
        d,
        &[
            "gen", "is", "--rounds", "2", "--agents", "2", "--values", "2",
        ],
    );
    let b = ok(
        d,
        &[
            "gen", "is", "--rounds", "2", "--agents", "2", "--values", "2",
        ],
    );
    assert_eq!(a, b);
    std::fs::write(d.join("is.act.json"), &a).unwrap();
    ok(
        d,
        &[
            "update",
            "--action",
            "is.act.json",
            "-o",
            "m.json",
            "--provenance",
            "prov.json",
        ],
    );
    let m = epiobs::io::load_model(&d.join("m.json")).unwrap();
    assert_eq!(epiobs::io::model_to_json(&m), read(d, "m.json"));
    let prov = json(&read(d, "prov.json"));
    assert_eq!(prov.as_array().unwrap().len(), m.facet_count());

    model(
        d,
        "sa",
        &["sa", "--k", "1", "--agents", "2", "--values", "2"],
    );
    let args = [
        "simulate",
        "--protocol",
        "m.json",
        "--task",
        "sa.json",
        "--mode",
        "D",
    ];
    let serial = ok(d, &[&["--jobs", "1"][..], &args].concat());
    assert_eq!(serial, ok(d, &args));
}

#[test]
fn workspace_directory_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let elsewhere = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_epiobs"))
        .current_dir(elsewhere.path())
        .env("EPIOBS_WORKSPACE", tmp.path())
        .args([
            "gen",
            "input",
            "--agents",
            "2",
            "--values",
            "3",
            "-o",
            "input.json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("input.json").exists());
    assert!(!elsewhere.path().join("input.json").exists());
}

#[test]
fn bad_input_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("bad.json"),
        "{\n  \"agents\": [\"a\"],\n  \"vertices\": 3\n}\n",
    )
    .unwrap();
    let out = epiobs(
        d,
        &["simulate", "--protocol", "bad.json", "--task", "bad.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3"), "{err}");

    assert_eq!(
        epiobs(
            d,
            &["obstruct", "--protocol", "missing.json", "--task", "x"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        epiobs(d, &["simulate", "--mode", "Q"]).status.code(),
        Some(2)
    );
    let formula = epiobs(
        d,
        &["check", "formula", "--model", "bad.json", "--formula", "(K"],
    );
    assert_eq!(formula.status.code(), Some(2));
}

#[test]
fn case_study_single_input() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let summary = json(&ok(d, &["case-is2", "--single-input", "--out-dir", "out"]));
    assert_eq!(summary["all_checks_pass"], true);
    assert_eq!(summary["obstruction_exists"], false);
    let rpq = json(&read(d, "out/rpq_0_1.json"));
    assert_eq!(rpq["p"], 0);
    assert!(rpq["layers"].as_array().unwrap().len() >= 2);
    assert!(rpq["final"].is_array());
}

#[test]
fn staircase_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "gen", "input", "--agents", "2", "--values", "2", "-o", "in.json",
        ],
    );
    ok(d, &["gen", "staircase", "--protocol", "-o", "p.act.json"]);
    ok(
        d,
        &[
            "gen",
            "staircase",
            "--max-decision",
            "4",
            "-o",
            "t.act.json",
        ],
    );
    ok(
        d,
        &[
            "update",
            "--action",
            "p.act.json",
            "--input",
            "in.json",
            "-o",
            "p.json",
        ],
    );
    ok(
        d,
        &[
            "update",
            "--action",
            "t.act.json",
            "--input",
            "in.json",
            "-o",
            "t.json",
        ],
    );
    let out = epiobs(
        d,
        &[
            "obstruct",
            "--protocol",
            "p.json",
            "--task",
            "t.json",
            "--mode",
            "K",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}
