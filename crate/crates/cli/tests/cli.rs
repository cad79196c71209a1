use std::process::{Command, Output};

use l1exact_cli::commands::{column_f64, prob_error};
use l1exact_cli::output::Table;
use l1exact_cli::{CliError, EXIT_BAD_INPUT, EXIT_BREACH, EXIT_OK, EXIT_QUADRATURE, EXIT_ROOT};
use l1exact::angles::AngleError;
use l1exact::exactprob::ProbError;
use l1exact::quadrature::QuadratureError;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1exact")).args(args).env_remove("L1EXACT_THREADS").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn csv(args: &[&str]) -> Table {
    let o = run(args);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    Table::from_csv(std::str::from_utf8(&o.stdout).unwrap()).unwrap()
}

#[test]
fn exact_reproduces_first_table() {
    let t = csv(&["exact", "--variant", "pos", "--k", "12", "--n", "36", "--m", "17..22", "--format", "csv"]);
    assert_eq!(t.columns, ["variant", "k", "m", "n", "p_err", "err_bound"]);
    let p = column_f64(&t, "p_err").unwrap();
    let want = [0.8235, 0.6815, 0.5113, 0.3427, 0.2029, 0.1053];
    for (a, b) in p.iter().zip(want) {
        assert!((a - b).abs() < 1.5e-3, "{a} vs {b}");
    }
}

#[test]
fn full_measurement_gives_zero() {
    let t = csv(&["exact", "--variant", "pos", "--k", "5", "--n", "10", "--m", "10", "--format", "csv"]);
    assert_eq!(column_f64(&t, "p_err").unwrap(), vec![0.0]);
}

#[test]
fn emitted_csv_round_trips() {
    for args in [
        &["exact", "--variant", "std", "--k", "6", "--n", "40", "--m", "14..=19", "--format", "csv"][..],
        &["asym", "--variant", "pos", "--beta", "0.1..0.4:0.1", "--alpha", "auto", "--format", "csv"][..],
        &["simulate", "--variant", "pos-simplex", "--k", "3", "--m", "5", "--n", "8", "--trials", "50", "--format", "csv"][..],
    ] {
        let o = run(args);
        let text = String::from_utf8(o.stdout).unwrap();
        assert_eq!(Table::from_csv(&text).unwrap().to_csv(), text);
    }
}

#[test]
fn json_output_parses() {
    let o = run(&["asym", "--variant", "pos", "--beta", "0.2", "--alpha", "0.7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["table"]["columns"][3], "rate");
    let rate = v["table"]["rows"][0][3].as_f64().unwrap();
    assert!((rate + 0.2234517226737).abs() < 1e-9);
    assert!(v.get("wall_time_s").is_none());
}

#[test]
fn single_trial_record_is_valid() {
    let t = csv(&["simulate", "--variant", "std", "--k", "2", "--m", "4", "--n", "8", "--trials", "1", "--format", "csv"]);
    let p = column_f64(&t, "p_err").unwrap()[0];
    let lo = column_f64(&t, "ci_low").unwrap()[0];
    let hi = column_f64(&t, "ci_high").unwrap()[0];
    assert!(p == 0.0 || p == 1.0);
    assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
}

#[test]
fn echoed_command_reproduces_output() {
    let first = run(&["exact", "--variant", "pos-simplex", "--k", "3", "--n", "9", "--m", "4..6", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let echo = v["command"].as_str().unwrap();
    let mut args: Vec<&str> = echo.split_whitespace().skip(1).collect();
    args.extend(["--format", "json"]);
    assert_eq!(run(&args).stdout, first.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["exact", "--variant", "pos", "--k", "12", "--n", "10", "--m", "5"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["exact", "--variant", "pos", "--k", "1", "--n", "10", "--m", "7..3"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["exact", "--variant", "nope", "--k", "1", "--n", "10", "--m", "3"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["asym", "--variant", "pos", "--beta", "0", "--alpha", "0.5"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["asym", "--variant", "pos", "--beta", "0.5", "--alpha", "0.3"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["asym", "--variant", "std", "--beta", "0.9999", "--alpha", "auto"])), EXIT_ROOT);
    assert_eq!(code(&run(&["simulate", "--variant", "pos", "--k", "1", "--m", "2", "--n", "3", "--trials", "0"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["simulate", "--variant", "pos", "--k", "1", "--m", "2", "--n", "3", "--threads", "0"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["exact", "--variant", "pos", "--k", "1", "--n", "3", "--m", "2", "--emit-plot-script", "x.gp"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["exact", "--variant", "pos", "--k", "1", "--n", "3", "--m", "2", "--out", "/nonexistent/dir/x"])), EXIT_BAD_INPUT);
    assert_eq!(code(&run(&["--help"])), EXIT_OK);
}

#[test]
fn quadrature_errors_map_to_three() {
    let e = prob_error(ProbError::Angle(AngleError::Quadrature(QuadratureError::NonConvergence {
        subdivisions: 1,
        value: 0.0,
        error: 1.0,
    })));
    assert_eq!(e.exit_code(), EXIT_QUADRATURE);
    assert_eq!(prob_error(ProbError::OutOfRange { value: 2.0 }).exit_code(), EXIT_QUADRATURE);
    assert_eq!(CliError::Breach(String::new()).exit_code(), EXIT_BREACH);
}

#[test]
fn verify_quick_is_green() {
    let o = run(&["verify", "--format", "csv"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stdout));
    let t = Table::from_csv(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert!(t.rows.len() >= 7);
}

#[test]
fn verify_catches_printed_prefactor() {
    let o = run(&["verify", "--external-prefactor", "printed", "--format", "csv"]);
    assert_eq!(code(&o), EXIT_BREACH);
    let t = Table::from_csv(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    let row = t.rows.iter().find(|r| r[0].to_string() == "table1_golden").unwrap();
    assert_eq!(row[1].to_string(), "FAIL");
}

#[test]
fn files_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let gp = dir.path().join("curve.gp");
    let o = run(&[
        "exact", "--variant", "std", "--k", "2", "--n", "12", "--m", "3..11", "--format", "csv", "--breakdown",
        "--out", out.to_str().unwrap(), "--emit-plot-script", gp.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), EXIT_OK);
    assert!(o.stdout.is_empty());
    let t = Table::from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 9);
    let terms = Table::from_csv(&std::fs::read_to_string(dir.path().join("curve.terms.csv")).unwrap()).unwrap();
    assert!(terms.column("family").is_some() && !terms.rows.is_empty());
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains("curve.csv") && script.contains("'m':'p_err'"));
}

#[test]
fn threads_do_not_change_output() {
    let args = ["simulate", "--variant", "std", "--k", "3", "--m", "8", "--n", "16", "--trials", "300", "--seed", "11", "--format", "json"];
    let a = run(&[&args[..], &["--threads", "1"]].concat());
    let b = run(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(code(&a), EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
}
