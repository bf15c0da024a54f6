//! End-to-end runs of the `silver` binary and round trips through the
//! output readers.

use std::path::Path;
use std::process::{Command, Output};

use silver::cli::{
    read_certify_file, read_rate_csv, read_run_reports, read_schedule_file, read_twostep_file,
    EXIT_OK, EXIT_VALIDATION,
};

fn silver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_silver"))
        .args(args)
        .env_remove("SILVER_PRECISION")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_owned();
    full.extend(["--output", &p]);
    let o = silver(&full);
    assert_eq!(code(&o), EXIT_OK, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn schedule_kappa4_n2() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_to(dir.path(), "s.json", &["schedule", "--kappa", "4", "--n", "2"]);
    let f = read_schedule_file(&p).unwrap();
    assert_eq!(f.n, 2);
    assert!((f.steps[0] - 4.0 / 3.0).abs() < 1e-15);
    assert!((f.steps[1] - 2.0).abs() < 1e-15);
    assert!((f.tau.unwrap() - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn schedule_rejects_non_power_of_two() {
    let o = silver(&["schedule", "--kappa", "4", "--n", "3"]);
    assert_eq!(code(&o), EXIT_VALIDATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n must be a power of 2"));
}

#[test]
fn bad_kappa_and_missing_args_are_validation_errors() {
    assert_eq!(code(&silver(&["schedule", "--kappa", "1", "--n", "2"])), EXIT_VALIDATION);
    assert_eq!(code(&silver(&["schedule", "--kappa", "nan", "--n", "2"])), EXIT_VALIDATION);
    assert_eq!(code(&silver(&["schedule", "--kappa", "4"])), EXIT_VALIDATION);
    assert_eq!(code(&silver(&["frobnicate"])), EXIT_VALIDATION);
    assert_eq!(
        code(&silver(&["simulate", "--kappa", "4", "--n", "2", "--oracle", "cubic:x"])),
        EXIT_VALIDATION
    );
}

#[test]
fn schedule_normalized_and_csv() {
    let o = silver(&["schedule", "--kappa", "4", "--n", "4", "--normalized"]);
    assert_eq!(code(&o), EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["symbols"].as_array().unwrap().len(), 4);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
    let o = silver(&["schedule", "--kappa", "4", "--n", "2", "--format", "csv"]);
    assert_eq!(stdout(&o), "t,step\n0,1.3333333333333333\n1,2\n");
}

#[test]
fn schedule_infinite_prefix_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_to(
        dir.path(),
        "inf.json",
        &["schedule", "--kappa", "10", "--infinite", "--count", "8"],
    );
    let f = read_schedule_file(&p).unwrap();
    assert_eq!(f.infinite, Some(true));
    assert_eq!(f.tau, None);
    let finite = silver::schedule::build_schedule(&10.0, 8).unwrap();
    // Shared prefix: every step except the last one of the finite schedule.
    for t in 0..7 {
        assert!((f.steps[t] - finite.steps[t]).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn precision_flag_and_env_agree() {
    let a = silver(&["schedule", "--kappa", "100", "--n", "16", "--precision", "200"]);
    let b = Command::new(env!("CARGO_BIN_EXE_silver"))
        .args(["schedule", "--kappa", "100", "--n", "16"])
        .env("SILVER_PRECISION", "200")
        .output()
        .unwrap();
    assert_eq!(code(&a), EXIT_OK);
    assert_eq!(stdout(&a), String::from_utf8(b.stdout).unwrap());
    assert!(stdout(&a).contains("\"precision_bits\": 200"));
}

#[test]
fn long_horizon_escalates_precision() {
    let o = silver(&["schedule", "--kappa", "4", "--n", "4096"]);
    assert_eq!(code(&o), EXIT_OK);
    assert!(stdout(&o).contains("\"precision_bits\": 128"));
}

#[test]
fn certify_rejects_kappa_two() {
    let o = silver(&["certify", "--kappa", "2", "--n", "4"]);
    assert_eq!(code(&o), EXIT_VALIDATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa=2"));
}

#[test]
fn certify_small_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_to(dir.path(), "c.json", &["certify", "--kappa", "4", "--n", "8"]);
    let f = read_certify_file(&p).unwrap();
    assert!(f.report.passed);
    assert_eq!(f.report.identity.len(), 2);
    assert_eq!(f.report.esl.len(), 3);
    let lambda = f.certificate.to_multipliers().unwrap();
    let direct = silver::certificate::build_certificate(&4.0, 8).unwrap();
    assert_eq!(lambda.nnz(), direct.nnz());
    for (k, v) in &direct.entries {
        assert!((lambda.entries[k] - v).abs() <= 1e-15 * v.abs().max(1.0));
    }
}

#[test]
fn certify_kappa10_n1024_at_256_bits() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_to(
        dir.path(),
        "c.json",
        &["certify", "--kappa", "10", "--n", "1024", "--precision", "256", "--trials", "2"],
    );
    let f = read_certify_file(&p).unwrap();
    assert!(f.report.passed);
    assert_eq!(f.precision_bits, 256);
    assert!(f.report.identities.unwrap().max_rel_error() < 1e-20);
}

#[test]
fn simulate_third_hard_function() {
    let o = silver(&["simulate", "--kappa", "4", "--n", "2", "--oracle", "switch:third"]);
    assert_eq!(code(&o), EXIT_OK);
    let r = read_run_reports(&stdout(&o)).unwrap();
    assert_eq!(r.len(), 1);
    assert!((r[0].contraction - 1.0 / 36.0).abs() < 1e-15);
    assert!((r[0].tau_n - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn simulate_from_schedule_file_with_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_to(dir.path(), "s.json", &["schedule", "--kappa", "10", "--n", "8"]);
    let traj = dir.path().join("traj.csv");
    let p = run_to(
        dir.path(),
        "r.jsonl",
        &[
            "simulate",
            "--schedule-file",
            s.to_str().unwrap(),
            "--oracle",
            "quad:lambda=0.5",
            "--oracle",
            "quad:d=6",
            "--oracle",
            "switch:breaks=-inf:m;0.3:M",
            "--x0",
            "-2",
            "--trajectory",
            traj.to_str().unwrap(),
        ],
    );
    let runs = read_run_reports(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(runs.len(), 3);
    for r in &runs {
        assert!(r.contraction <= r.tau_n * (1.0 + 1e-9), "{r:?}");
    }
    let csv = std::fs::read_to_string(traj).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn twostep_degenerate_and_valid() {
    assert_eq!(code(&silver(&["twostep", "--m", "1", "--M", "1"])), EXIT_VALIDATION);
    let dir = tempfile::tempdir().unwrap();
    let contour = dir.path().join("grid.csv");
    let p = run_to(
        dir.path(),
        "t.json",
        &[
            "twostep",
            "--m",
            "0.25",
            "--M",
            "1",
            "--contour",
            "5",
            "--contour-file",
            contour.to_str().unwrap(),
        ],
    );
    let f = read_twostep_file(&p).unwrap();
    assert!((f.solution.alpha_star - 4.0 / 3.0).abs() < 1e-14);
    assert!((f.solution.beta_star - 2.0).abs() < 1e-14);
    assert!((f.floor - 1.0 / 3.0).abs() < 1e-14);
    assert!(f.floor_reversed > f.floor);
    assert_eq!(std::fs::read_to_string(contour).unwrap().lines().count(), 1 + 25);
}

#[test]
fn rate_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_to(dir.path(), "r.csv", &["rate", "--kappa", "100", "--max-level", "10"]);
    let rows = read_rate_csv(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(rows.len(), 11);
    let direct = silver::cli::rate_rows(100.0, 10).unwrap();
    for (a, b) in rows.iter().zip(&direct) {
        assert_eq!(a, b);
    }
    for r in &rows {
        assert!(r.lower <= r.tau && r.tau <= r.upper, "{r:?}");
    }
}

#[test]
fn cobweb_csv_and_json() {
    let o = silver(&["cobweb", "--kappa", "10", "--iters", "4"]);
    assert_eq!(code(&o), EXIT_OK);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("i,h,h_next,gap"));
    assert_eq!(text.lines().count(), 5);
    let o = silver(&["cobweb", "--kappa", "10", "--iters", "4", "--format", "json"]);
    let t: silver::dynamics::HTrace = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t.kappa, 10.0);
}

#[test]
fn output_is_written_atomically_over_existing_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    std::fs::write(&p, "stale").unwrap();
    run_to(dir.path(), "s.json", &["schedule", "--kappa", "4", "--n", "2"]);
    assert!(read_schedule_file(&p).is_ok());
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn json_floats_round_trip_exactly() {
    let f = silver::cli::rate_rows(7.5, 6).unwrap();
    let text = silver::cli::to_json_g17(&f).unwrap();
    let back: Vec<silver::cli::RateRow> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, f);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--kappa", "10", "--n", "4", "--oracle", "quad:d=5", "--adversarial", "--budget", "300", "--seed", "9"];
    let a = std::fs::read(run_to(dir.path(), "a.jsonl", &args)).unwrap();
    let b = std::fs::read(run_to(dir.path(), "b.jsonl", &args)).unwrap();
    assert_eq!(a, b);
    let c = ["certify", "--kappa", "3", "--n", "16", "--seed", "4"];
    let a = std::fs::read(run_to(dir.path(), "a.json", &c)).unwrap();
    let b = std::fs::read(run_to(dir.path(), "b.json", &c)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn contour_argmin_cell_at_two_step_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let contour = dir.path().join("c.csv");
    run_to(
        dir.path(),
        "t.json",
        &["twostep", "--m", "0.25", "--M", "1", "--contour", "200", "--contour-file", contour.to_str().unwrap()],
    );
    let text = std::fs::read_to_string(contour).unwrap();
    assert_eq!(text.lines().count(), 1 + 200 * 200);
    let best = text
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap();
    let cell = 3.0 / 199.0;
    assert!((best.0 - 4.0 / 3.0).abs() <= cell && (best.1 - 2.0).abs() <= cell, "{best:?}");
}
