//! Check results, run reports, tolerances, golden fixtures and matrix export.

pub mod export;
pub mod fixture;
pub mod tolerance;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use tolerance::{Scaling, Tolerance, ToleranceRegistry};

pub const REPORT_SCHEMA: &str = "mml-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome of one numerical check at one order `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub n: usize,
    /// `null` in JSON when the check could not be evaluated.
    #[serde(deserialize_with = "nan_from_null")]
    pub max_abs_err: f64,
    pub tol: f64,
    pub pass: bool,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl CheckResult {
    /// `pass` is `max_abs_err <= tol`; a NaN error never passes.
    pub fn new(name: impl Into<String>, n: usize, max_abs_err: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            n,
            max_abs_err,
            tol,
            pass: max_abs_err <= tol,
            runtime_ms: 0.0,
            error: None,
        }
    }

    /// A check whose computation itself failed; it counts as a failure.
    pub fn errored(name: impl Into<String>, n: usize, tol: f64, error: impl ToString) -> Self {
        Self {
            error: Some(error.to_string()),
            ..Self::new(name, n, f64::NAN, tol)
        }
    }

    pub fn with_runtime(mut self, runtime_ms: f64) -> Self {
        self.runtime_ms = runtime_ms;
        self
    }
}

/// Runs `f` and returns its value with the elapsed wall time in milliseconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// One per-order value of a swept metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub metric: String,
    pub value: f64,
    pub runtime_ms: f64,
    /// Observed decay exponent against the previous row, where one is defined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<SweepRow>,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    /// Sorts checks by `(name, n)` and tallies the summary.
    pub fn new(config: serde_json::Value, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name).then(a.n.cmp(&b.n)));
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
        };
        Self {
            schema: REPORT_SCHEMA.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: None,
            config,
            rows: Vec::new(),
            checks,
            summary,
        }
    }

    pub fn with_rows(mut self, rows: Vec<SweepRow>) -> Self {
        self.rows = rows;
        self
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Zeroes every timing field so identical runs serialize identically.
    pub fn strip_timing(&mut self) {
        self.timestamp = None;
        for c in &mut self.checks {
            c.runtime_ms = 0.0;
        }
        for r in &mut self.rows {
            r.runtime_ms = 0.0;
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,n,max_abs_err,tol,pass,runtime_ms\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{},{:.3}\n",
                c.name, c.n, c.max_abs_err, c.tol, c.pass, c.runtime_ms
            ));
        }
        out
    }

    /// The sweep table: `n,metric,value,runtime_ms`.
    pub fn rows_to_csv(&self) -> String {
        let mut out = String::from("n,metric,value,runtime_ms\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:.16e},{:.3}\n", r.n, r.metric, r.value, r.runtime_ms));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!("{:<16} n={:<5} value={:<12.6e}", r.metric, r.n, r.value));
            if let Some(rate) = r.rate {
                out.push_str(&format!(" rate={rate:.3}"));
            }
            out.push('\n');
        }
        for c in &self.checks {
            out.push_str(&format!(
                "{:<4} {:<28} n={:<5} err={:<12.3e} tol={:<10.3e} {:.1} ms\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.n,
                c.max_abs_err,
                c.tol,
                c.runtime_ms
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!("     {e}\n"));
            }
        }
        out.push_str(&format!(
            "{} checks: {} passed, {} failed\n",
            self.summary.total, self.summary.passed, self.summary.failed
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_tolerance() {
        assert!(CheckResult::new("x", 1, 1e-10, 1e-10).pass);
        assert!(!CheckResult::new("x", 1, 2e-10, 1e-10).pass);
        assert!(!CheckResult::new("x", 1, f64::NAN, 1.0).pass);
    }

    #[test]
    fn report_orders_and_counts() {
        let checks = vec![
            CheckResult::new("b", 2, 0.0, 1.0),
            CheckResult::new("a", 5, 2.0, 1.0),
            CheckResult::new("b", 1, 0.0, 1.0),
        ];
        let r = Report::new(serde_json::Value::Null, checks);
        let keys: Vec<_> = r.checks.iter().map(|c| (c.name.as_str(), c.n)).collect();
        assert_eq!(keys, vec![("a", 5), ("b", 1), ("b", 2)]);
        assert_eq!(r.summary, Summary { total: 3, passed: 2, failed: 1 });
        assert!(!r.all_passed());
    }
}
