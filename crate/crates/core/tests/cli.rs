use std::process::{Command, Output};

fn thresnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thresnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn generate_complete_graph() {
    let out = thresnet(&[
        "generate",
        "--law",
        "bernoulli:1",
        "--theta",
        "0.5",
        "-n",
        "5",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    let pairs: Vec<(u32, u32)> = text
        .lines()
        .map(|l| {
            let mut it = l.split(' ').map(|t| t.parse().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    let expected: Vec<(u32, u32)> = (1..=5)
        .flat_map(|i| (i + 1..=5).map(move |j| (i, j)))
        .collect();
    assert_eq!(pairs, expected);
}

#[test]
fn missing_seed_is_a_validation_error() {
    let out = thresnet(&[
        "generate",
        "--law",
        "bernoulli:1",
        "--theta",
        "0.5",
        "-n",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(thresnet(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(thresnet(&["census", "--n", "abc"]).status.code(), Some(1));
    assert_eq!(thresnet(&["--help"]).status.code(), Some(0));
}

#[test]
fn degree_law_exponential_atom() {
    let out = thresnet(&["degree-law", "--law", "exponential:1", "--theta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let atoms = v["report"]["law"]["atoms"].as_array().unwrap();
    assert_eq!(atoms[0]["at"].as_f64(), Some(1.0));
    assert!((atoms[0]["mass"].as_f64().unwrap() - 0.36787944117144233).abs() < 1e-12);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"], "degree-law");
}

#[test]
fn validate_lists_every_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"law":{"kind":"bernoulli","p":1.3},"w":2.0}"#).unwrap();
    let out = thresnet(&[
        "validate",
        "--for",
        "cluster",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let fields: Vec<&str> = v["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["field"].as_str().unwrap())
        .collect();
    assert_eq!(fields, ["law.p", "rule", "seed", "n", "w"]);
}

#[test]
fn validate_flags_zero_zeta_for_clt() {
    let rule = r#"{"clauses":[{"connector":"sum","set":[{"lo":"-inf","hi":"inf"}]}]}"#;
    let out = thresnet(&[
        "validate",
        "--for",
        "clt",
        "--law",
        "bernoulli:0.5",
        "--rule",
        rule,
        "-n",
        "100",
        "-s",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(
        v["diagnostics"][0]["message"],
        "zeta is zero; CLT inapplicable"
    );

    let ok = thresnet(&[
        "validate",
        "--for",
        "clt",
        "--law",
        "bernoulli:0.5",
        "--theta",
        "0.5",
        "-n",
        "100",
        "-s",
        "1",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["diagnostics"].as_array().unwrap().len(), 0);
}

#[test]
fn validate_prints_to_stdout_even_with_an_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = thresnet(&[
        "validate",
        "--for",
        "generate",
        "--law",
        "uniform01",
        "--theta",
        "1",
        "-n",
        "10",
        "-s",
        "1",
        "-o",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["for"], "generate");
    assert!(!report.exists());
}

#[test]
fn schema_violation_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"law":{"kind":"exponential","lambda":1},"n_grid":[100,"x"]}"#,
    )
    .unwrap();
    let out = thresnet(&["slln", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("n_grid[1]"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"law":{"kind":"uniform01"},
            "rule":{"clauses":[{"connector":"sum","set":[{"lo":1.0,"lo_open":true,"hi":"inf"}]}]},
            "n":50,"seed":1,"replications":2}"#,
    )
    .unwrap();
    let out = thresnet(&[
        "cluster",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--w",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["n"], 50);
    assert_eq!(v["config"]["w"], 0.5);
    assert_eq!(v["report"]["summaries"].as_array().unwrap().len(), 2);
}

#[test]
fn output_files_and_threads_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("raw.csv");
    let run = |threads: &str| {
        let out = thresnet(&[
            "--threads",
            threads,
            "slln",
            "--law",
            "exponential:1",
            "--theta",
            "1",
            "--family",
            "triangle",
            "--n-grid",
            "20,40",
            "-r",
            "5",
            "-s",
            "11",
            "--tolerance",
            "1",
            "-o",
            json_path.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        (
            std::fs::read(&json_path).unwrap(),
            std::fs::read_to_string(&csv_path).unwrap(),
        )
    };
    let (a_json, a_csv) = run("1");
    let (b_json, b_csv) = run("3");
    assert_eq!(a_json, b_json);
    assert_eq!(a_csv, b_csv);
    assert_eq!(a_csv.lines().count(), 1 + 2 * 5);
}

#[test]
fn statistical_failure_exits_two() {
    // A tolerance no finite simulation can meet.
    let out = thresnet(&[
        "slln",
        "--law",
        "bernoulli:0.5",
        "--theta",
        "0.5",
        "--n-grid",
        "10,20",
        "-r",
        "3",
        "-s",
        "1",
        "--tolerance",
        "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn cluster_limit_bernoulli_half() {
    let out = thresnet(&[
        "cluster-limit",
        "--law",
        "bernoulli:0.5",
        "--theta",
        "0.5",
        "--n-grid",
        "100,400,1600",
        "-r",
        "50",
        "-s",
        "42",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    let last = v["report"]["global"]["means"][2].as_f64().unwrap();
    assert!((last - 0.875).abs() <= 0.01, "{last}");
}
