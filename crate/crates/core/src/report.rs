//! Verification reports: named cases with a residual, a tolerance and a verdict.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
}

impl Case {
    /// A case passes iff its residual is finite and at most the tolerance.
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64, samples: usize) -> Self {
        Case {
            name: name.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            samples,
        }
    }
}

/// An informational value that does not affect the verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: Vec<Case>,
    pub diagnostics: Vec<Diagnostic>,
    pub wall_time: f64,
}

/// 15 significant digits, `inf`/`nan` spelled out.
pub fn format_residual(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.14e}")
    } else {
        format!("{v}")
    }
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        VerificationReport { suite: suite.into(), ..Default::default() }
    }

    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
    }

    pub fn diagnostic(&mut self, name: impl Into<String>, value: f64) {
        self.diagnostics.push(Diagnostic { name: name.into(), value });
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn case(&self, name: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Case> {
        self.cases.iter().filter(|c| !c.pass).collect()
    }

    /// Appends another report's cases, prefixing names with its suite.
    pub fn absorb(&mut self, other: VerificationReport) {
        for mut c in other.cases {
            c.name = format!("{}.{}", other.suite, c.name);
            self.cases.push(c);
        }
        for mut d in other.diagnostics {
            d.name = format!("{}.{}", other.suite, d.name);
            self.diagnostics.push(d);
        }
        self.wall_time += other.wall_time;
    }

    /// Report body; `wall_time` is the only field that varies between
    /// runs with the same seed.
    pub fn to_json(&self) -> Value {
        let cases: Vec<Value> = self
            .cases
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "max_residual": format_residual(c.max_residual),
                    "tolerance": format_residual(c.tolerance),
                    "pass": c.pass,
                    "samples": c.samples,
                })
            })
            .collect();
        let diagnostics: Vec<Value> = self
            .diagnostics
            .iter()
            .map(|d| json!({ "name": d.name, "value": format_residual(d.value) }))
            .collect();
        json!({
            "suite": self.suite,
            "pass": self.passed(),
            "cases": cases,
            "diagnostics": diagnostics,
            "wall_time": self.wall_time,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report values are always serializable")
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")
            .map_err(|e| Error::ReportWriteFailure(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_tolerance() {
        assert!(Case::new("a", 1e-12, 1e-11, 1).pass);
        assert!(!Case::new("b", 2e-11, 1e-11, 1).pass);
        assert!(!Case::new("c", f64::NAN, 1.0, 1).pass);
        assert!(!Case::new("d", f64::INFINITY, 1.0, 1).pass);
    }

    #[test]
    fn residuals_have_fifteen_digits() {
        assert_eq!(format_residual(1.0 / 3.0), "3.33333333333333e-1");
        assert_eq!(format_residual(f64::INFINITY), "inf");
    }

    #[test]
    fn absorb_prefixes_names() {
        let mut all = VerificationReport::new("all");
        let mut sub = VerificationReport::new("axioms");
        sub.push(Case::new("identity", 0.0, 1e-11, 10));
        all.absorb(sub);
        assert_eq!(all.cases[0].name, "axioms.identity");
    }
}
