//! Golden N = 3 matrices stored in exact form.
//!
//! Exact numbers are written as `p`, `p/q`, `sqrt(p/q)` or `sqrt(p)` with an
//! optional leading `-`, and realized to doubles on load.

use serde::Deserialize;

use super::export::MatrixDoc;
use super::{timed, CheckResult};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};

const FIXTURES: &[(&str, &str)] = &[
    ("Q3", include_str!("../../fixtures/Q3.json")),
    ("P3", include_str!("../../fixtures/P3.json")),
    ("H3", include_str!("../../fixtures/H3.json")),
    ("D3", include_str!("../../fixtures/D3.json")),
    ("Dq3", include_str!("../../fixtures/Dq3.json")),
];

pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(name, _)| *name)
}

#[derive(Debug, Deserialize)]
struct FixtureFile {
    #[serde(flatten)]
    doc: MatrixDoc,
    exact: ExactLayer,
}

#[derive(Debug, Deserialize)]
struct ExactLayer {
    #[serde(default)]
    entries: Option<Vec<Vec<[String; 2]>>>,
    #[serde(default)]
    diag: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenFixture {
    pub name: String,
    pub kind: String,
    pub n: usize,
    pub entries: ComplexMatrix,
}

/// Parses one exact number.
pub fn parse_exact(s: &str) -> Option<f64> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (is_sqrt, body) = match body.strip_prefix("sqrt(").and_then(|b| b.strip_suffix(')')) {
        Some(inner) => (true, inner),
        None => (false, body),
    };
    let (p, q) = match body.split_once('/') {
        Some((p, q)) => (p.parse::<u64>().ok()?, q.parse::<u64>().ok()?),
        None => (body.parse::<u64>().ok()?, 1),
    };
    if q == 0 {
        return None;
    }
    let ratio = p as f64 / q as f64;
    let magnitude = if is_sqrt { ratio.sqrt() } else { ratio };
    Some(if negative { -magnitude } else { magnitude })
}

pub fn load_fixture(name: &str) -> Result<GoldenFixture> {
    let text = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    let bad = |reason: String| Error::Fixture {
        name: name.to_string(),
        reason,
    };
    let file: FixtureFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let dim = file.doc.dim;
    let num = |s: &str| parse_exact(s).ok_or_else(|| bad(format!("cannot parse `{s}`")));

    let entries = match (&file.exact.entries, &file.exact.diag) {
        (Some(rows), None) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(bad("entry shape does not match dim".into()));
            }
            let mut flat = Vec::with_capacity(dim * dim);
            for [re, im] in rows.iter().flatten() {
                flat.push(C64::new(num(re)?, num(im)?));
            }
            ComplexMatrix::from_row_major(dim, flat)?
        }
        (None, Some(diag)) => {
            if diag.len() != dim {
                return Err(bad("diagonal length does not match dim".into()));
            }
            let values = diag.iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
            ComplexMatrix::from_fn(dim, |j, k| if j == k { C64::from(values[j]) } else { ZERO })
        }
        _ => return Err(bad("exactly one of `entries` or `diag` is required".into())),
    };

    Ok(GoldenFixture {
        name: name.to_string(),
        kind: file.doc.kind,
        n: file.doc.n,
        entries,
    })
}

/// Result is named `golden_<fixture>`.
pub fn compare_to_fixture(actual: &ComplexMatrix, fixture: &GoldenFixture, tol: f64) -> Result<CheckResult> {
    let (err, ms) = timed(|| actual.max_abs_diff(&fixture.entries));
    Ok(CheckResult::new(format!("golden_{}", fixture.name), fixture.n, err?, tol).with_runtime(ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actiondiff::action_difference_in_position_basis;
    use crate::matrix::LinearOperator;
    use crate::modal::PositionBasis;
    use crate::operators::{build_action_difference, build_position};

    #[test]
    fn exact_grammar() {
        assert_eq!(parse_exact("0"), Some(0.0));
        assert_eq!(parse_exact("-3"), Some(-3.0));
        assert_eq!(parse_exact("5/2"), Some(2.5));
        assert_eq!(parse_exact("sqrt(3/2)"), Some(1.5f64.sqrt()));
        assert_eq!(parse_exact("-sqrt(2)"), Some(-(2f64.sqrt())));
        assert_eq!(parse_exact("1,5"), None);
        assert_eq!(parse_exact("1/0"), None);
        assert_eq!(parse_exact("sqrt(2"), None);
    }

    #[test]
    fn fixtures_load() {
        for name in fixture_names() {
            let f = load_fixture(name).unwrap();
            assert_eq!(f.n, 3);
            assert_eq!(f.entries.dim(), 4);
        }
        let d3 = load_fixture("D3").unwrap();
        assert_eq!(d3.entries.diagonal().iter().map(|c| c.re).collect::<Vec<_>>(), vec![1.0, 1.0, 1.0, -3.0]);
        let h3 = load_fixture("H3").unwrap();
        assert_eq!(h3.entries.diagonal().iter().map(|c| c.re).collect::<Vec<_>>(), vec![0.5, 1.5, 2.5, 1.5]);
        let dq = load_fixture("Dq3").unwrap();
        assert_eq!(dq.entries[(0, 0)], ZERO);
        assert_eq!(dq.entries[(2, 1)], C64::from(-1.0));
        assert!(matches!(load_fixture("Q4"), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn comparisons() {
        let d = build_action_difference(3).unwrap().to_dense();
        let c = compare_to_fixture(&d, &load_fixture("D3").unwrap(), 1e-12).unwrap();
        assert_eq!(c.max_abs_err, 0.0);
        assert_eq!(c.name, "golden_D3");

        let basis = PositionBasis::new(3).unwrap();
        let dq = action_difference_in_position_basis(&basis).unwrap();
        assert!(compare_to_fixture(&dq, &load_fixture("Dq3").unwrap(), 1e-12).unwrap().pass);

        let q = build_position(3).unwrap().to_dense();
        let c = compare_to_fixture(&q, &load_fixture("Q3").unwrap(), 1e-12).unwrap();
        assert!(c.max_abs_err <= f64::EPSILON * 1.5f64.sqrt());

        let small = build_position(2).unwrap().to_dense();
        assert!(compare_to_fixture(&small, &load_fixture("Q3").unwrap(), 1e-12).is_err());
    }
}
