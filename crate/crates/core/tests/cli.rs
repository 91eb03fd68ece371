use std::process::{Command, Output};

use robcons::model::JobSet;
use robcons::scheduling::{parse_trace, simulate, two_stage_policy};
use robcons::ski_lp::min_consistency;
use robcons::tradeoff_curves::{dominance_violations, parse_csv, CSV_HEADER};
use robcons::Rational;

fn robcons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robcons"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn two_stage_pair() {
    let o = robcons(&["sched", "--policy", "two-stage", "--lambda", "1/5", "--x", "1,1", "--y", "1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "alg"), "18/5");
    assert_eq!(value(&text, "opt"), "3");
    assert_eq!(value(&text, "ratio"), "6/5");
}

#[test]
fn decimal_lambda_is_exact() {
    let a = robcons(&["sched", "--policy", "two-stage", "--lambda", "0.2", "--x", "1,1", "--y", "1,1"]);
    let b = robcons(&["sched", "--policy", "two-stage", "--lambda", "1/5", "--x", "1,1", "--y", "1,1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["ski-det", "--budget", "10", "--lambda", "0"][..],
        &["ski-det", "--budget", "10", "--lambda", "1"],
        &["ski-rand", "--budget", "10", "--lambda", "1/3."],
        &["ski-det", "--budget", "10", "--lambda", "1/2", "--bogus"],
        &["sched", "--policy", "two-stage", "--x", "1,1", "--y", "1,1"],
        &["sched", "--policy", "rr", "--x", "1,0", "--y", "1,1"],
        &["sched", "--policy", "rr", "--x", "1,1", "--y", "1"],
        &["ski-lp", "--budget", "10", "--gamma", "2"],
        &["ski-lp", "--budget", "10", "--gamma", "2", "--beta", "3"],
        &["frobnicate"],
    ] {
        let o = robcons(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn lp_bisection_brackets_closed_form() {
    let o = robcons(&["ski-lp", "--budget", "10", "--gamma", "2", "--bisect", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let beta: Rational = value(&text, "beta_min").parse().unwrap();
    assert_eq!(beta, min_consistency(10, &Rational::integer(2)).unwrap());
    let lo: Rational = value(&text, "infeasible_below").parse().unwrap();
    let hi: Rational = value(&text, "feasible_above").parse().unwrap();
    assert!(lo < beta && beta <= hi);
}

#[test]
fn infeasible_lp_exits_one() {
    let o = robcons(&["ski-lp", "--budget", "10", "--gamma", "2", "--beta", "6/5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&stdout(&o), "feasible"), "false");
    let o = robcons(&["ski-lp", "--budget", "10", "--gamma", "2", "--beta", "7/5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn trace_lines_parse_back() {
    let o = robcons(&["sched", "--policy", "two-stage", "--lambda", "1/5", "--x", "2,1,3", "--y", "1,1,2", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let trace: String = text.lines().filter(|l| l.starts_with("t=")).map(|l| format!("{l}\n")).collect();
    let events = parse_trace(&trace).unwrap();
    let ints = |v: &[i64]| v.iter().map(|&x| Rational::integer(x)).collect::<Vec<_>>();
    let jobs = JobSet::new(ints(&[2, 1, 3]), ints(&[1, 1, 2])).unwrap();
    let s = simulate(&two_stage_policy(Rational::new(1, 5)).unwrap(), &jobs).unwrap();
    assert_eq!(events, s.events);
}

#[test]
fn ski_subcommands() {
    let o = robcons(&["ski-det", "--budget", "10", "--lambda", "1/2", "--x", "4", "--y", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "buy_day"), "5");
    assert_eq!(value(&text, "alg"), "4");
    let o = robcons(&["ski-rand", "--budget", "20", "--lambda", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "verdict"), "ok");
}

#[test]
fn adversary_subcommand() {
    let o = robcons(&["sched-adversary", "--policy", "two-stage", "--n", "2", "--lambda", "1/5", "--epsilon", "1/10000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "x"), "1,6001/10000");
    assert_eq!(value(&text, "bound"), "16/11");
}

#[test]
fn sched2_curve_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tradeoff.csv");
    let svg = dir.path().join("tradeoff.svg");
    let args = [
        "curve",
        "--which",
        "sched2",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ];
    let first = robcons(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(&CSV_HEADER.join(",")));
    let rows = parse_csv(&text).unwrap();
    assert!(rows.iter().any(|r| r.series == "sched2"));
    assert!(rows.iter().any(|r| r.series == "sched2-lower"));
    assert!(dominance_violations(&rows).is_empty());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));

    let second = robcons(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(text, std::fs::read_to_string(&csv).unwrap());
}

#[test]
fn unwritable_output_is_reported() {
    let o = robcons(&["curve", "--which", "schedN", "--n", "4", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/out.csv"));
}
