//! End-to-end runs of the `lexshift` binary: output formats and exit codes.

use std::process::{Command, Output};

fn lexshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexshift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("UTF-8 output")
}

#[test]
fn sturmian_prints_the_word_pair() {
    let o = lexshift(&["--json", "sturmian", "2/5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{\"omega\":\"01010\",\"nu\":\"10010\"}\n");
}

#[test]
fn exit_codes() {
    assert_eq!(lexshift(&["analyze", "2/5", "3/5"]).status.code(), Some(0));
    let rejected = lexshift(&["analyze", "1/5", "3/5"]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("TrivialExceptional"));
    assert_eq!(lexshift(&["analyze", "1/x", "3/5"]).status.code(), Some(2));
    assert_eq!(lexshift(&["entropy", "|110", "001"]).status.code(), Some(2));
    assert_eq!(lexshift(&["renorm", "|1", "|0"]).status.code(), Some(3));
    assert_eq!(
        lexshift(&["--cap", "3", "renorm", "|110", "|001"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(lexshift(&["bogus"]).status.code(), Some(2));
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["--json", "analyze", "13/30", "17/30"];
    let (a, b) = (lexshift(&args), lexshift(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "hole",
            "raw_pair",
            "class",
            "normalized_pair",
            "sft",
            "entropy",
            "renorm",
            "transitivity",
            "spec",
            "bad_periods",
            "s_membership"
        ]
    );
    assert_eq!(v["spec"]["spec_number"], 2);
}

#[test]
fn staircase_writes_a_monotone_csv_file() {
    let dir = std::env::temp_dir().join(format!("lexshift-staircase-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("staircase.csv");
    let o = lexshift(&["staircase", "31", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let ys: Vec<lexshift::Rational> = text
        .lines()
        .skip(1)
        .map(|l| lexshift::circle::parse_rational(l.split(',').nth(1).unwrap()).unwrap())
        .collect();
    assert_eq!(ys.len(), 31);
    assert!(ys.windows(2).all(|w| w[0] <= w[1]));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_file_sets_caps_and_flags_override() {
    let dir = std::env::temp_dir().join(format!("lexshift-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("caps.conf");
    std::fs::write(&path, "# search caps\nnmax = 3\n").unwrap();
    let cfg = path.to_str().unwrap();
    let v = |args: &[&str]| -> serde_json::Value {
        serde_json::from_slice(&lexshift(args).stdout).unwrap()
    };
    let from_file = v(&["--json", "--config", cfg, "badperiods", "1/3", "2/3"]);
    let overridden = v(&[
        "--json",
        "--config",
        cfg,
        "--nmax",
        "5",
        "badperiods",
        "1/3",
        "2/3",
    ]);
    assert_eq!(from_file["bad_periods"], serde_json::json!([3]));
    assert_eq!(overridden["bad_periods"], serde_json::json!([3, 4, 5]));
    std::fs::write(&path, "nmax = many\n").unwrap();
    assert_eq!(
        lexshift(&["--config", cfg, "badperiods", "1/3", "2/3"])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn pair_literals_round_trip_through_the_cli() {
    let o = lexshift(&["--json", "transitive", "|1101000", "|0001101"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["transitivity"]["verdict"], "NotTransitive");
    let (a, b) = (
        v["pair"]["alpha"].as_str().unwrap(),
        v["pair"]["beta"].as_str().unwrap(),
    );
    let again = lexshift(&["--json", "transitive", a, b]);
    assert_eq!(again.stdout, o.stdout);
}
