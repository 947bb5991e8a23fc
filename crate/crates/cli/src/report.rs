//! Structured check reports shared by every subcommand: one pass/fail/warn
//! line per check, optional measured value and tolerance, an input digest,
//! and wall time. The same data renders as text or as versioned JSON
//! (`schema: 1`).

use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warning,
}

#[derive(Serialize, Debug)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub file: String,
    pub inputs_digest: String,
    pub passed: bool,
    pub wall_ms: f64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.passed
    }

    /// Print the report to stdout, as pretty JSON or as one line per check
    /// with indented detail.
    pub fn emit(&self, json: bool) {
        if json {
            println!(
                "{}",
                serde_json::to_string_pretty(self).expect("report serializes")
            );
            return;
        }
        println!("liefund {} — {}", self.command, self.file);
        println!("input {}", self.inputs_digest);
        let mut passed = 0usize;
        let mut failed = 0usize;
        let mut warned = 0usize;
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => {
                    passed += 1;
                    "PASS"
                }
                Status::Fail => {
                    failed += 1;
                    "FAIL"
                }
                Status::Warning => {
                    warned += 1;
                    "WARN"
                }
            };
            println!("{tag}  {}", c.name);
            for line in c.detail.lines() {
                println!("      {line}");
            }
            if let (Some(v), Some(t)) = (c.value, c.tolerance) {
                println!("      measured {v:.12e}, tolerance {t:.1e}");
            }
        }
        let mut summary = format!("{passed} passed, {failed} failed");
        if warned > 0 {
            summary.push_str(&format!(", {warned} warnings"));
        }
        println!("{summary} ({:.2} s)", self.wall_ms / 1000.0);
    }
}

pub struct ReportBuilder {
    command: String,
    file: String,
    digest: String,
    checks: Vec<Check>,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(command: &str, file: String, input_bytes: &[u8]) -> ReportBuilder {
        let digest = format!("sha256:{:x}", Sha256::digest(input_bytes));
        ReportBuilder {
            command: command.to_string(),
            file,
            digest,
            checks: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn pass(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(Status::Pass, name, detail, None, None);
    }

    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(Status::Fail, name, detail, None, None);
    }

    pub fn warn(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(Status::Warning, name, detail, None, None);
    }

    /// Record a boolean outcome with a measured value against a tolerance.
    pub fn metric(
        &mut self,
        ok: bool,
        name: impl Into<String>,
        detail: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(status, name, detail, Some(value), Some(tolerance));
    }

    fn push(
        &mut self,
        status: Status,
        name: impl Into<String>,
        detail: impl Into<String>,
        value: Option<f64>,
        tolerance: Option<f64>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            status,
            detail: detail.into(),
            value,
            tolerance,
        });
    }

    pub fn finish(self) -> Report {
        let passed = self.checks.iter().all(|c| c.status != Status::Fail);
        Report {
            schema: 1,
            command: self.command,
            file: self.file,
            inputs_digest: self.digest,
            passed,
            wall_ms: self.start.elapsed().as_secs_f64() * 1000.0,
            checks: self.checks,
        }
    }
}
