//! Machine-readable certification reports.

use serde::{Deserialize, Serialize};

use crate::adversary::TailDerivativeCheck;
use crate::saddle::SensitivityReport;

/// One named check: `passed` iff `value <= bound` (or an explicit flag
/// for structural checks). Residuals and witnesses ride along in `detail`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

impl CheckResult {
    /// Check of the form `value <= bound`.
    pub fn le(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: value <= bound && value.is_finite(),
            value,
            bound,
            detail: detail.into(),
        }
    }

    /// Check with an externally decided outcome.
    pub fn flag(name: &str, passed: bool, value: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            value,
            bound: f64::NAN,
            detail: detail.into(),
        }
    }
}

/// Full saddle certificate for one solved instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaddleReport {
    /// "moment" or "domain".
    pub kind: String,
    pub guarantee: f64,
    /// Best revenue any swept seller deviation achieved under the worst
    /// case (must not exceed the guarantee).
    pub seller_best_deviation_value: f64,
    /// Smallest revenue of the optimal menu across nature's deviations
    /// (must not fall below the guarantee).
    pub nature_worst_value_found: f64,
    pub checks: Vec<CheckResult>,
    /// Per-bundle derivative cross-checks (moment variant only).
    pub sensitivity: Vec<SensitivityReport>,
    /// Derivative cross-check of the flattened-tail perturbation, when the
    /// instance admits one.
    pub tail_derivative: Option<TailDerivativeCheck>,
    pub passed: bool,
}

impl SaddleReport {
    pub fn failed_checks(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}
