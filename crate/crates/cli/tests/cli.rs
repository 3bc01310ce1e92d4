use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/fixtures/{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaygame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture_arg(name: &str) -> String {
    fixture(name).to_str().unwrap().to_owned()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stderr_line(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(
        text.trim_end().lines().count(),
        1,
        "one-line diagnostic, got {text:?}"
    );
    text
}

#[test]
fn approx_on_universal_automaton() {
    let v = json(&run(&["approx", &fixture_arg("d_univ"), "--json"]));
    assert_eq!(v["result"]["outcome"]["kind"], "win");
    assert_eq!(v["result"]["outcome"]["reported"], 1);
    assert!(v["meta"]["elapsed_ms"].is_u64());
}

#[test]
fn approx_on_empty_automaton_reports_no_win() {
    let v = json(&run(&["approx", &fixture_arg("d_empty"), "--json"]));
    assert_eq!(v["result"]["outcome"]["kind"], "no_win");
}

#[test]
fn approx_binary_search_and_cap() {
    let v = json(&run(&[
        "approx",
        &fixture_arg("d_pred2"),
        "--binary-search",
        "--json",
    ]));
    assert_eq!(v["result"]["scan"], "binary");
    assert_eq!(v["result"]["outcome"]["reported"], 3);
    let capped = json(&run(&[
        "approx",
        &fixture_arg("d_pred2"),
        "--cap",
        "1",
        "--json",
    ]));
    assert_eq!(capped["result"]["outcome"]["kind"], "no_win");
    assert_eq!(capped["result"]["effective_bound"], 1);
}

#[test]
fn exact_on_prediction_automaton() {
    let v = json(&run(&[
        "exact",
        &fixture_arg("d_pred1"),
        "--max-k",
        "3",
        "--json",
    ]));
    assert_eq!(v["result"]["outcome"]["kind"], "exact");
    assert_eq!(v["result"]["outcome"]["k_opt"], 1);
    let text = run(&["exact", &fixture_arg("d_pred1"), "--max-k", "3"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("minimal lookahead: 1"));
}

#[test]
fn compare_reports_sandwich() {
    let v = json(&run(&[
        "compare",
        &fixture_arg("d_pred2"),
        "--max-k",
        "3",
        "--json",
    ]));
    assert_eq!(v["result"]["k_opt"], 2);
    assert_eq!(v["result"]["reported"], 3);
    assert_eq!(v["result"]["sandwich_holds"], "holds");
}

#[test]
fn json_results_are_deterministic() {
    for args in [
        vec!["approx", "d_pred2", "--json"],
        vec!["exact", "d_pred2", "--max-k", "3", "--json"],
        vec![
            "compare",
            "d_pred1",
            "--max-k",
            "2",
            "--json",
            "--parallelism",
            "3",
        ],
    ] {
        let mut args: Vec<String> = args.into_iter().map(str::to_owned).collect();
        args[1] = fixture_arg(&args[1]);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = json(&run(&args));
        let b = json(&run(&args));
        assert_eq!(
            serde_json::to_string(&a["result"]).unwrap(),
            serde_json::to_string(&b["result"]).unwrap()
        );
    }
}

#[test]
fn solve_gk_accepts_huge_k() {
    let huge = "1".repeat(60);
    let v = json(&run(&[
        "solve-gk",
        &fixture_arg("d_pred1"),
        "--k",
        &huge,
        "--json",
    ]));
    assert_eq!(v["result"]["k"], huge.as_str());
    assert_eq!(v["result"]["solution"]["initial_winner"], "O");
    let zero = run(&["solve-gk", &fixture_arg("d_pred1"), "--k", "0"]);
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn solve_queue_matches_exact() {
    let lose = json(&run(&[
        "solve-queue",
        &fixture_arg("d_pred2"),
        "--k",
        "1",
        "--json",
    ]));
    let win = json(&run(&[
        "solve-queue",
        &fixture_arg("d_pred2"),
        "--k",
        "2",
        "--json",
    ]));
    assert_eq!(lose["result"]["solution"]["initial_winner"], "I");
    assert_eq!(win["result"]["solution"]["initial_winner"], "O");
}

#[test]
fn layers_dump() {
    let v = json(&run(&["layers", &fixture_arg("d_pred1")]));
    let sizes = v["layer_sizes"].as_array().unwrap();
    let stored = v["preperiod"].as_u64().unwrap() + v["period"].as_u64().unwrap();
    assert_eq!(sizes.len() as u64, stored);
    assert_eq!(sizes[0], 1);
}

#[test]
fn generators_produce_loadable_automata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.json");
    let out = run(&[
        "gen", "random", "--states", "3", "--colors", "2", "--in", "2", "--out", "2", "--seed", "7",
    ]);
    assert!(out.status.success());
    let again = run(&[
        "gen", "random", "--states", "3", "--colors", "2", "--in", "2", "--out", "2", "--seed", "7",
    ]);
    assert_eq!(out.stdout, again.stdout);
    std::fs::write(&path, &out.stdout).unwrap();
    json(&run(&["approx", path.to_str().unwrap(), "--json"]));

    let pred = run(&["gen", "prediction", "--d", "1"]);
    let fixture_text = std::fs::read(fixture("d_pred1")).unwrap();
    assert_eq!(pred.stdout, fixture_text);
}

#[test]
fn export_pg_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("game.pg");
    let out = run(&[
        "export-pg",
        &fixture_arg("d_univ"),
        "--gk",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "parity 2;\n0 0 1 1 \"init\";\n1 0 0 2 \"r0\";\n2 0 1 1 \"r0@(0,0)\";\n"
    );

    let queue = run(&["export-pg", &fixture_arg("d_pred1"), "--queue", "1"]);
    let text = String::from_utf8(queue.stdout).unwrap();
    let header: usize = text.lines().next().unwrap()["parity ".len()..]
        .trim_end_matches(';')
        .parse()
        .unwrap();
    assert_eq!(text.lines().count(), header + 2);
}

#[test]
fn missing_file_exits_with_2() {
    let out = run(&["approx", "/nonexistent/automaton.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("cannot read"));
}

#[test]
fn invalid_automaton_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"sigma_i": ["a"], "sigma_o": ["b"], "states": 1}"#,
    )
    .unwrap();
    let out = run(&["approx", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);
}

#[test]
fn resource_limits_exit_with_3() {
    let out = run(&["approx", &fixture_arg("d_pred2"), "--layer-cap", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).contains("resource limit"));
    let out = run(&[
        "exact",
        &fixture_arg("d_pred2"),
        "--max-k",
        "6",
        "--vertex-budget",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(3));
    stderr_line(&out);
}

#[test]
fn usage_errors_exit_with_1() {
    for args in [
        vec!["frobnicate"],
        vec!["exact", "x.json"],
        vec!["approx", "x.json", "--cap", "many"],
        vec!["export-pg", "x.json"],
        vec!["export-pg", "x.json", "--gk", "1", "--queue", "1"],
        vec!["approx", "x.json", "--parallelism", "0"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        stderr_line(&out);
    }
}

#[test]
fn help_exits_with_0() {
    assert!(run(&["--help"]).status.success());
}
