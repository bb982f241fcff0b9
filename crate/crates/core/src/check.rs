//! Named pass/fail measurements shared by the verification suites.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }

    /// Boolean condition, recorded as measured 0 (holds) or 1 (fails).
    pub fn holds(name: impl Into<String>, condition: bool) -> Self {
        Self::at_most(name, if condition { 0.0 } else { 1.0 }, 0.0)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
