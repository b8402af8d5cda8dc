//! Acceptance criteria at full sample counts. Each test prints one
//! `criterion N: PASS|FAIL` line; run with `--nocapture` to see them.
//! Tests are serialized so the wall-clock limits are not shared.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use loopbundle_core::harness::{run_suite, RunConfig, Suite};
use loopbundle_core::zoo::catalog;
use loopbundle_core::{SmoothLoop, VerificationReport};

static SERIAL: Mutex<()> = Mutex::new(());

struct Outcome {
    lines: Vec<String>,
    pass: bool,
}

impl Outcome {
    fn new() -> Self {
        Outcome { lines: Vec::new(), pass: true }
    }

    fn cases(&mut self, loop_name: &str, report: &VerificationReport, names: &[&str]) {
        for name in names {
            match report.case(name) {
                Some(c) => {
                    self.pass &= c.pass;
                    self.lines.push(format!(
                        "  {loop_name} {name}: {:.3e} (tol {:.0e}, n = {}) {}",
                        c.max_residual,
                        c.tolerance,
                        c.samples,
                        if c.pass { "ok" } else { "FAILED" }
                    ));
                }
                None => {
                    self.pass = false;
                    self.lines.push(format!("  {loop_name} {name}: missing"));
                }
            }
        }
    }

    fn time(&mut self, what: &str, took: Duration, limit: Duration) {
        let ok = took <= limit;
        self.pass &= ok;
        self.lines.push(format!("  {what}: {:.2} s (limit {} s) {}", took.as_secs_f64(), limit.as_secs(), if ok { "ok" } else { "FAILED" }));
    }

    fn finish(self, id: u32, title: &str) {
        println!("criterion {id}: {} {title}", if self.pass { "PASS" } else { "FAIL" });
        for l in &self.lines {
            println!("{l}");
        }
        assert!(self.pass, "criterion {id} failed");
    }
}

fn config(loop_name: &str, samples: usize) -> RunConfig {
    RunConfig { loop_name: loop_name.to_string(), samples, ..RunConfig::default() }
}

fn run(loop_name: &str, samples: usize, suite: Suite) -> (VerificationReport, Duration) {
    let start = Instant::now();
    let report = run_suite(&config(loop_name, samples), suite).expect("suite runs");
    (report, start.elapsed())
}

#[test]
fn criterion_1_loop_axioms() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    for l in catalog() {
        let name = l.name();
        let (r, took) = run(&name, 10_000, Suite::Axioms);
        let names: Vec<&str> = r.cases.iter().filter(|c| c.name != "qsu2_representation").map(|c| c.name.as_str()).collect();
        out.cases(&name, &r, &names);
        out.time(&format!("{name} runtime"), took, Duration::from_secs(5));
    }
    out.finish(1, "loop axioms");
}

#[test]
fn criterion_2_structure_function_oracle() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    let start = Instant::now();
    for name in ["qc", "qh2"] {
        let (r, _) = run(name, 1_000, Suite::Tangent);
        out.cases(name, &r, &["structure_closed_form", "structure_antisymmetry", "frame_at_identity"]);
    }
    out.time("runtime", start.elapsed(), Duration::from_secs(10));
    out.finish(2, "structure-function oracle");
}

#[test]
fn criterion_3_modified_jacobi() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    let start = Instant::now();
    for l in catalog() {
        let (r, _) = run(&l.name(), 100, Suite::Jacobi);
        out.cases(&l.name(), &r, &["modified_jacobi"]);
    }
    out.time("runtime", start.elapsed(), Duration::from_secs(30));
    out.finish(3, "modified Jacobi identity");
}

#[test]
fn criterion_4_transformation_laws() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    for l in catalog() {
        let (r, _) = run(&l.name(), 1_000, Suite::Tangent);
        out.cases(&l.name(), &r, &["ad_form_left_translation", "ad_form_right_translation", "adjoint_associator_law"]);
    }
    out.finish(4, "tangent transformation laws");
}

#[test]
fn criterion_5_reconstruction() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    let start = Instant::now();
    for name in ["qc", "qh2"] {
        let (r, _) = run(name, 1_000, Suite::Reconstruct);
        out.cases(name, &r, &["reconstruct_product", "convergence_order"]);
        if let Some(d) = r.diagnostics.iter().find(|d| d.name == "observed_order") {
            out.lines.push(format!("  {name} observed order {:.3}", d.value));
        }
    }
    out.time("runtime", start.elapsed(), Duration::from_secs(30));
    out.finish(5, "product reconstruction");
}

#[test]
fn criterion_6_qsu2_representation() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    let (r, _) = run("qsu2", 1_000, Suite::Axioms);
    out.cases("qsu2", &r, &["qsu2_representation"]);
    out.finish(6, "QSU(2) representation");
}

#[test]
fn criterion_7_bundle_checks() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    let (r, _) = run("qc", 1_000, Suite::Bundle);
    out.cases("qc", &r, &["s3_norm_preservation", "s3_projection_equivariance", "winding_closed_form"]);
    out.finish(7, "bundle checks");
}

#[test]
fn criterion_8_gauge_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut out = Outcome::new();
    let start = Instant::now();
    for l in catalog() {
        let (r, _) = run(&l.name(), 100, Suite::Gauge);
        out.cases(
            &l.name(),
            &r,
            &[
                "commutator",
                "omega_annihilates_d",
                "gauge_two_route",
                "structure_equation_horizontal",
                "structure_equation_vertical",
                "structure_equation_mixed",
                "bianchi",
                "abelian_curl",
            ],
        );
    }
    out.time("runtime", start.elapsed(), Duration::from_secs(120));
    out.finish(8, "gauge suite");
}
