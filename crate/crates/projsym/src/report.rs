//! Report types: per-check outcomes plus the configuration echo that
//! makes a run reproducible from its output alone.

use serde::{Deserialize, Serialize};

use crate::stats::StatTestResult;

/// Outcome of one exact identity checked over a number of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCheckResult {
    pub check_name: String,
    pub trials: usize,
    /// Worst scale-normalized residual observed across the trials.
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ExactCheckResult {
    pub fn new(check_name: &str, trials: usize, max_residual: f64, tol: f64) -> Self {
        Self {
            check_name: check_name.to_owned(),
            trials,
            max_residual,
            tol,
            pass: max_residual <= tol,
        }
    }
}

/// The suite configuration a report was produced under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub transform: String,
}

/// Combined outcome of the exact tier and the statistical battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub config: ReportConfig,
    pub exact_checks: Vec<ExactCheckResult>,
    pub stat_tests: Vec<StatTestResult>,
    pub overall_pass: bool,
}

impl TestReport {
    /// Folds several reports into one. Exact checks with a name seen
    /// before are dropped (reruns of the same tier produce identical
    /// entries); statistical tests are concatenated in order; the merge
    /// passes only if every part passed.
    pub fn merged(reports: Vec<TestReport>) -> Option<TestReport> {
        let mut iter = reports.into_iter();
        let mut merged = iter.next()?;
        for report in iter {
            for check in report.exact_checks {
                if !merged
                    .exact_checks
                    .iter()
                    .any(|c| c.check_name == check.check_name)
                {
                    merged.exact_checks.push(check);
                }
            }
            merged.stat_tests.extend(report.stat_tests);
            merged.overall_pass &= report.overall_pass;
            if merged.config.transform != report.config.transform {
                merged.config.transform =
                    format!("{}+{}", merged.config.transform, report.config.transform);
            }
        }
        Some(merged)
    }
}
