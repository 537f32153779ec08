//! Structured pass/fail reports emitted by the inequality checks.

use serde::{Deserialize, Serialize};

/// Outcome of a single inequality `lhs <= rhs + slack`.
///
/// `precondition_met = false` means the hypothesis of the underlying
/// statement did not hold on this field, so no claim is made either way;
/// such a check never counts as a violation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub precondition_met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn evaluate(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs + slack,
            precondition_met: true,
            note: None,
        }
    }

    pub fn gated_out(name: &str, note: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            lhs: 0.0,
            rhs: 0.0,
            slack: 0.0,
            pass: true,
            precondition_met: false,
            note: Some(note.to_string()),
        }
    }

    pub fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    /// A violation is a failed check whose precondition held.
    pub fn is_violation(&self) -> bool {
        self.precondition_met && !self.pass
    }
}

/// A named batch of checks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CheckSet {
    pub checks: Vec<CheckReport>,
}

impl CheckSet {
    pub fn push(&mut self, c: CheckReport) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: CheckSet) {
        self.checks.extend(other.checks);
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| c.is_violation()).count()
    }

    pub fn all_pass(&self) -> bool {
        self.violations() == 0
    }
}
