//! Verification reports: the list of checks run on a scenario.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::check::{all_pass, Check};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// sha256 of the canonical scenario serialization.
    pub digest: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Wall-clock time; only recorded on request so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(
        command: &str,
        scenario: Option<String>,
        digest: String,
        checks: Vec<Check>,
        notes: Vec<String>,
    ) -> Self {
        Self { command: command.into(), scenario, digest, pass: all_pass(&checks), checks, notes, timing_ms: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self.scenario.as_deref().unwrap_or("<unnamed>");
        let _ = writeln!(out, "{} {name} [{}]", self.command, &self.digest[..self.digest.len().min(12)]);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {} {:<40} residual {:>10.3e}  threshold {:.1e}  {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_residual,
                c.threshold,
                c.item
            );
            for note in &c.notes {
                let _ = writeln!(out, "       note: {note}");
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "  note: {note}");
        }
        if let Some(ms) = self.timing_ms {
            let _ = writeln!(out, "  time: {ms:.1} ms");
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ =
            writeln!(out, "{}: {} checks, {failed} failed", if self.pass { "PASS" } else { "FAIL" }, self.checks.len());
        out
    }
}
