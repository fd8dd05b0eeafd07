use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn opineq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opineq"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPINEQ_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn no_arguments_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = opineq(&[], dir.path());
    assert_eq!(code(&o), 2);
    let text = stdout(&o) + &stderr(&o);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn default_suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let o = opineq(&["verify", "--suite", "default", "--seed", "7", "--out", "report.json"], dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("0 failed"));
    let first = fs::read(dir.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let reports = v.as_array().unwrap();
    assert!(reports.len() > 10_000);
    assert!(reports.iter().all(|r| r["passed"] == true));

    let o = Command::new(env!("CARGO_BIN_EXE_opineq"))
        .args(["verify", "--suite", "default", "--seed", "7", "--out", "again.json"])
        .current_dir(dir.path())
        .env("OPINEQ_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(first, fs::read(dir.path().join("again.json")).unwrap());
}

#[test]
fn tg_on_repeated_term_prints_trace_twice() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ops.json"), r#"{"dim":2,"terms":[[2,1,1,2],[2,1,1,2]]}"#).unwrap();
    let o = opineq(&["tg", "--input", "ops.json", "--out", "tg.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("TG limit  4.000000000000000e0"), "{out}");
    assert!(out.contains("TG logexp 4.000000000000000e0"), "{out}");
    let csv = fs::read_to_string(dir.path().join("tg.csv")).unwrap();
    assert!(csv.starts_with("p,trace_mp\n"));
}

#[test]
fn tg_reports_singular_logexp_and_keeps_limit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ops.json"), r#"{"dim":2,"terms":[[1,0,0,0],[1,0,0,1]]}"#).unwrap();
    let o = opineq(&["tg", "--input", "ops.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("TG limit"));
    assert!(out.contains("TG logexp undefined"), "{out}");
}

#[test]
fn failing_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = opineq(&["verify", "--suite", "fubini", "--trials", "10", "--tol", "1e-18"], dir.path());
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn malformed_config_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\n  \"seed\": 3,\n  \"trails\": 4\n}").unwrap();
    let o = opineq(&["verify", "--config", "bad.json"], dir.path());
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("trails"), "{err}");

    fs::write(dir.path().join("trunc.json"), "{\"seed\": ").unwrap();
    let o = opineq(&["verify", "--config", "trunc.json"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"command": "verify", "suite": "discrete_hardy", "trials": 5, "dims": [2], "p_grid": [1.5],
            "output": {"path": "r.csv", "format": "csv"}}"#,
    )
    .unwrap();
    let o = opineq(&["verify", "--trials", "50", "--config", "run.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "name,p,dim,N,M,seed,gap,ratio,passed");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.starts_with("discrete_hardy,1.5000000000000000e0,2,")));
}

#[test]
fn inadmissible_p_and_unknown_suite_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = opineq(&["verify", "--suite", "discrete_hardy", "--p", "3"], dir.path());
    assert_eq!(code(&o), 2);
    let o = opineq(&["verify", "--suite", "nonsense"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("discrete_hardy"));
    let o = opineq(&["verify", "--trials", "-1"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_input_sequence_names_term() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("neg.json"), r#"{"dim":2,"terms":[[1,0,0,1],[1,0,0,-1e-3]]}"#).unwrap();
    let o = opineq(&["verify", "--input", "neg.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("term 1"), "{}", stderr(&o));
}

#[test]
fn input_sequence_checks() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.json"), r#"{"dim":1,"terms":[[1],[0]]}"#).unwrap();
    let o = opineq(&["verify", "--input", "a.json", "--p", "1.5,2,4", "--out", "r.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names.iter().filter(|n| **n == "discrete_hardy").count(), 2);
    assert_eq!(names.iter().filter(|n| **n == "tracial_hardy").count(), 3);
    assert!(names.contains(&"carleman_limit"));
    // the zero term makes the log-exp mode undefined
    assert!(!names.contains(&"carleman_logexp"));
}

#[test]
fn lemma_on_step_function_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("g.json"),
        r#"{"breakpoints":[1,2,3.5],"values":[[[2,1],[1,2]],[[1,0],[0,0]]]}"#,
    )
    .unwrap();
    let o = opineq(&["lemma", "--input", "g.json", "--p", "1.5,4"], dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("theorem_continuous_tracial"));
}

#[test]
fn probes_complete_and_carry_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = opineq(&["probe", "--kind", "extremal", "--N", "100,1000", "--out", "x.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("x.json")).unwrap()).unwrap();
    assert_eq!(v[0]["trace"].as_array().unwrap().len(), 2);

    let o = opineq(&["probe", "--kind", "optimize", "--N", "8", "--budget", "64", "--dims", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = opineq(&["probe", "--kind", "violation", "--p", "2"], dir.path());
    assert_eq!(code(&o), 2);
    let o = opineq(&["probe", "--kind", "violation", "--trials", "0"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("no violation in 0 samples"));
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_opineq"))
        .args(["verify", "--suite", "empty"])
        .current_dir(dir.path())
        .env("OPINEQ_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
