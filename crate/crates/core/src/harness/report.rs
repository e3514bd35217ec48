use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::CheckId;
use crate::error::Result;

/// Result of one check on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// The quantity compared against the tolerance (its meaning is per check).
    pub worst_value: f64,
    pub tolerance: f64,
    /// How far past the tolerance the path went; larger is worse.
    pub excess: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckOutcome {
    /// Pass iff `value <= tolerance`.
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Self {
            passed: value <= tolerance,
            worst_value: value,
            tolerance,
            excess: value - tolerance,
            note: None,
        }
    }

    /// Pass iff `value >= -tolerance`.
    pub fn at_least_minus(value: f64, tolerance: f64) -> Self {
        Self {
            passed: value >= -tolerance,
            worst_value: value,
            tolerance,
            excess: -value - tolerance,
            note: None,
        }
    }

    /// A numerical abort, recorded as a failure.
    pub fn aborted(message: String) -> Self {
        Self {
            passed: false,
            worst_value: f64::NAN,
            tolerance: f64::NAN,
            excess: f64::INFINITY,
            note: Some(message),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn and(mut self, ok: bool, why: &str) -> Self {
        if !ok && self.passed {
            self.passed = false;
            self.note = Some(why.to_string());
        }
        self
    }
}

/// Aggregate of one check over all paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub description: String,
    pub pass: bool,
    pub pass_count: u64,
    pub fail_count: u64,
    /// Number of failures tolerated before the check fails.
    pub allowed_failures: u64,
    /// Value and tolerance of the worst path (largest excess).
    pub worst_value: Option<f64>,
    pub tolerance: Option<f64>,
    pub worst_path: Option<u64>,
    /// Number of paths evaluated.
    pub seeds: u64,
    pub failed_paths: Vec<u64>,
    /// Notes from failing paths, by path index.
    pub notes: BTreeMap<u64, String>,
    /// Campaign-level statistics some checks add (e.g. seed means).
    pub summary: BTreeMap<String, f64>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub master_seed: u64,
    pub paths: u64,
    pub zero_noise: bool,
    pub checks: BTreeMap<CheckId, CheckRecord>,
    pub passed_checks: u64,
    pub failed_checks: u64,
    pub runtime_seconds: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failed_checks == 0
    }

    /// Copy with every timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.runtime_seconds = 0.0;
        for c in r.checks.values_mut() {
            c.runtime_seconds = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fixed-width text table, one row per check.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "version {}  config {}  master_seed {}  paths {}{}",
            self.environment.version,
            &self.environment.config_hash[..self.environment.config_hash.len().min(12)],
            self.master_seed,
            self.paths,
            if self.zero_noise {
                "  (zero noise)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:>6} {:>6} {:>14} {:>14} {:>9}",
            "check", "result", "pass", "fail", "worst", "tolerance", "time[s]"
        );
        for (id, c) in &self.checks {
            let num = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<20} {:>6} {:>6} {:>6} {:>14} {:>14} {:>9.3}",
                id.as_str(),
                if c.pass { "PASS" } else { "FAIL" },
                c.pass_count,
                c.fail_count,
                num(c.worst_value),
                num(c.tolerance),
                c.runtime_seconds
            );
        }
        let _ = writeln!(
            out,
            "{} passed, {} failed, {:.3} s",
            self.passed_checks, self.failed_checks, self.runtime_seconds
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_directions() {
        assert!(CheckOutcome::at_most(1.0, 1.0).passed);
        assert!(!CheckOutcome::at_most(1.1, 1.0).passed);
        assert!(CheckOutcome::at_least_minus(-0.5, 1.0).passed);
        let o = CheckOutcome::at_least_minus(-2.0, 1.0);
        assert!(!o.passed);
        assert_eq!(o.excess, 1.0);
        assert!(!CheckOutcome::at_most(0.0, 1.0).and(false, "why").passed);
    }
}
