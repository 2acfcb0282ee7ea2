use std::path::Path;
use std::process::{Command, Output};

fn tagmetrics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagmetrics"))
        .args(args)
        .output()
        .unwrap()
}

fn write_rules(dir: &Path, text: &str) -> String {
    let path = dir.join("rules.txt");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    assert_eq!(
        tagmetrics(&["predict", "--rules", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let bad = write_rules(dir.path(), "aa -> ab\nab -> ba\nba -> aa\n");
    let out = tagmetrics(&["predict", "--rules", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bb"));
    assert_eq!(tagmetrics(&["predict"]).status.code(), Some(1));
    assert_eq!(tagmetrics(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_epoch_zero_only() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write_rules(dir.path(), "aa -> aaa\nab -> b\nba -> a\nbb -> b\n");
    let out = tagmetrics(&["simulate", "--rules", &rules, "--length", "100", "--epochs", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Epoch 0\nLength: 100\n"));
    assert!(!text.contains("Epoch 1"));
}

#[test]
fn simulate_writes_trace_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write_rules(dir.path(), "aa -> bbb\nab -> ab\nba -> bb\nbb -> a\n");
    let csv = dir.path().join("run.csv");
    let trace = dir.path().join("trace.csv");
    let out = tagmetrics(&[
        "simulate",
        "--rules",
        &rules,
        "--length",
        "200",
        "--epochs",
        "4",
        "--stride",
        "10",
        "--format",
        "csv",
        "--out",
        csv.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let run = std::fs::read_to_string(csv).unwrap();
    assert_eq!(run.lines().count(), 5);
    let trace = std::fs::read_to_string(trace).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("step,length"));
    assert_eq!(lines.next(), Some("0,200"));
    assert_eq!(lines.next().unwrap().split(',').next(), Some("10"));
}

#[test]
fn compare_csv_is_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write_rules(dir.path(), "aa -> aaa\nab -> b\nba -> a\nbb -> b\n");
    let out = tagmetrics(&[
        "compare", "--rules", &rules, "--length", "300", "--trials", "20", "--epochs", "2", "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("epoch,survivors,quantity,predicted,measured,measured_stderr,error")
    );
    // 3 epochs × (2 densities + growth + length)
    assert_eq!(lines.count(), 12);
}

#[test]
fn empty_production_conventions_differ() {
    let dir = tempfile::tempdir().unwrap();
    let rules = write_rules(dir.path(), "aa -> aa\nab -> ba\nba ->\nbb -> ab\n");
    let growth_at_1 = |extra: &[&str]| -> f64 {
        let mut args = vec!["predict", "--rules", &rules, "--epochs", "2", "--format", "csv"];
        args.extend_from_slice(extra);
        let out = tagmetrics(&args);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        text.lines().nth(2).unwrap().split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!((growth_at_1(&[]) + 5.0 / 9.0).abs() < 1e-12);
    assert!((growth_at_1(&["--break-on-empty"]) + 4.0 / 7.0).abs() < 1e-12);
}
