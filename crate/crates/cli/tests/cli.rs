use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_loopbundle"));
    c.env_remove("LOOPBUNDLE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("loopbundle-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report_without_time(path: &PathBuf) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("wall_time");
    v
}

#[test]
fn passing_suite_exits_zero() {
    let out = run(&["verify", "--loop", "qc", "--suite", "axioms", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS left_division_round_trip"));
}

#[test]
fn failing_case_exits_one() {
    // no reconstruction at 2 steps reaches 1e-15
    let out = run(&["verify", "--loop", "qc", "--suite", "reconstruct", "--samples", "5", "--steps", "2", "--tol.reconstruct=1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL reconstruct_product"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "--loop", "octonions"],
        vec!["verify", "--suite", "everything"],
        vec!["verify", "--samples", "0"],
        vec!["verify", "--tol.unknown=1"],
        vec!["verify", "--tol.jacobi=-1"],
        vec!["bundle-check", "--atlas", "torus"],
        vec!["reconstruct", "--a", "0.1,0.2"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reports_repeat_byte_for_byte() {
    let (p1, p2) = (scratch("r1.json"), scratch("r2.json"));
    for p in [&p1, &p2] {
        let out = run(&["verify", "--loop", "qh2", "--suite", "tangent", "--samples", "20", "--seed", "9", "--report", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(report_without_time(&p1), report_without_time(&p2));
    let v = report_without_time(&p1);
    assert_eq!(v["suite"], "tangent");
    // residuals are decimal strings
    assert!(v["cases"][0]["max_residual"].is_string());
}

#[test]
fn seed_from_environment_and_flag_precedence() {
    let (env_path, flag_path, other) = (scratch("env.json"), scratch("flag.json"), scratch("other.json"));
    let base = ["verify", "--loop", "qsu2", "--suite", "axioms", "--samples", "10", "--json"];
    let env_run = bin().args(base).env("LOOPBUNDLE_SEED", "77").output().unwrap();
    let flag_run = bin().args(base).args(["--seed", "77"]).env("LOOPBUNDLE_SEED", "5").output().unwrap();
    let other_run = run(&base);
    for (o, p) in [(&env_run, &env_path), (&flag_run, &flag_path), (&other_run, &other)] {
        std::fs::write(p, &o.stdout).unwrap();
    }
    assert_eq!(report_without_time(&env_path), report_without_time(&flag_path));
    assert_ne!(report_without_time(&env_path), report_without_time(&other));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("run.conf");
    std::fs::write(&cfg, "loop = qsu2\nsuite = axioms\nsamples = 3\ntol.axioms = 1e-300\n").unwrap();
    let from_file = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(1));
    assert!(String::from_utf8(from_file.stdout).unwrap().contains("n = 3"));
    let overridden = run(&["verify", "--config", cfg.to_str().unwrap(), "--tol.axioms=1e-11"]);
    assert_eq!(overridden.status.code(), Some(0));
}

#[test]
fn single_reconstruction_prints_error() {
    let out = run(&["reconstruct", "--loop", "qc", "--a", "0.3,-0.2", "--b", "-0.1,0.4", "--steps", "128"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("error"));
}

#[test]
fn named_atlas_check() {
    for atlas in ["s3-over-s1", "qs2-over-s2:n=4"] {
        let out = run(&["bundle-check", "--atlas", atlas, "--samples", "30"]);
        assert_eq!(out.status.code(), Some(0), "{atlas}");
    }
}
