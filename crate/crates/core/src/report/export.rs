//! `mml-matrix/1` documents: JSON (bit-exact round trip) and CSV (17
//! significant digits, lossy).

use serde::{Deserialize, Serialize};

use crate::actiondiff::{action_difference_in_position_basis, cauchy_hilbert_kernel, momentum_in_basis};
use crate::eig::Spectrum;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::modal::PositionBasis;
use crate::operators::{
    build_action_difference, build_hamiltonian, build_momentum, build_position, DiagonalMatrix,
    SymTridiag,
};

pub const MATRIX_SCHEMA: &str = "mml-matrix/1";

/// Kinds written by [`export_bundle`], in order.
pub const EXPORT_KINDS: &[&str] = &["Q", "P", "H", "D", "Dq", "Pq", "kernel", "spectrum"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub schema: String,
    pub kind: String,
    pub n: usize,
    pub dim: usize,
    /// Row-major, each entry `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offdiag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
}

impl MatrixDoc {
    fn empty(kind: &str, dim: usize) -> Self {
        Self {
            schema: MATRIX_SCHEMA.to_string(),
            kind: kind.to_string(),
            n: dim - 1,
            dim,
            entries: None,
            diag: None,
            offdiag: None,
            nodes: None,
        }
    }

    pub fn from_dense(kind: &str, m: &ComplexMatrix) -> Self {
        let rows = (0..m.dim())
            .map(|j| m.row(j).iter().map(|c| [c.re, c.im]).collect())
            .collect();
        Self {
            entries: Some(rows),
            ..Self::empty(kind, m.dim())
        }
    }

    pub fn from_tridiag(kind: &str, t: &SymTridiag) -> Self {
        Self {
            diag: Some(t.diag().to_vec()),
            offdiag: Some(t.offdiag().to_vec()),
            ..Self::empty(kind, t.dim())
        }
    }

    pub fn from_diagonal(kind: &str, d: &DiagonalMatrix) -> Self {
        Self {
            diag: Some(d.diag().to_vec()),
            ..Self::empty(kind, d.dim())
        }
    }

    pub fn from_spectrum(kind: &str, s: &Spectrum) -> Self {
        Self {
            nodes: Some(s.values().to_vec()),
            ..Self::empty(kind, s.len())
        }
    }

    pub fn with_nodes(mut self, s: &Spectrum) -> Self {
        self.nodes = Some(s.values().to_vec());
        self
    }

    /// Dense realization; `None` for a pure node list.
    pub fn to_dense(&self) -> Result<Option<ComplexMatrix>> {
        let dim = self.dim;
        if let Some(rows) = &self.entries {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rows.len(),
                });
            }
            let flat = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
            return ComplexMatrix::from_row_major(dim, flat).map(Some);
        }
        if let Some(diag) = &self.diag {
            if diag.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: diag.len(),
                });
            }
            let off = self.offdiag.clone().unwrap_or_else(|| vec![0.0; dim.saturating_sub(1)]);
            if off.len() + 1 != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim - 1,
                    found: off.len(),
                });
            }
            let m = ComplexMatrix::from_fn(dim, |j, k| {
                if j == k {
                    C64::from(diag[j])
                } else if j == k + 1 {
                    C64::from(off[k])
                } else if k == j + 1 {
                    C64::from(off[j])
                } else {
                    ZERO
                }
            });
            return Ok(Some(m));
        }
        Ok(None)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        if doc.schema != MATRIX_SCHEMA {
            return Err(Error::InvalidArgument(format!("unsupported schema `{}`", doc.schema)));
        }
        Ok(doc)
    }

    /// `row,col,re,im` triplets of the dense form, or `index,value` for nodes.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        match self.to_dense()? {
            Some(m) => {
                out.push_str("row,col,re,im\n");
                for j in 0..m.dim() {
                    for k in 0..m.dim() {
                        let v = m[(j, k)];
                        out.push_str(&format!("{j},{k},{:.16e},{:.16e}\n", v.re, v.im));
                    }
                }
            }
            None => {
                out.push_str("index,value\n");
                for (i, v) in self.nodes.iter().flatten().enumerate() {
                    out.push_str(&format!("{i},{v:.16e}\n"));
                }
            }
        }
        Ok(out)
    }
}

/// Every exported structure at order `n`, in [`EXPORT_KINDS`] order.
pub fn export_bundle(n: usize) -> Result<Vec<MatrixDoc>> {
    let basis = PositionBasis::new(n)?;
    let pq = momentum_in_basis(&basis)?;
    let kernel = cauchy_hilbert_kernel(&basis.spectrum)?;
    Ok(vec![
        MatrixDoc::from_tridiag("Q", &build_position(n)?),
        MatrixDoc::from_dense("P", &build_momentum(n)?),
        MatrixDoc::from_diagonal("H", &build_hamiltonian(n)?),
        MatrixDoc::from_diagonal("D", &build_action_difference(n)?),
        MatrixDoc::from_dense("Dq", &action_difference_in_position_basis(&basis)?),
        MatrixDoc::from_dense("Pq", &pq),
        MatrixDoc::from_dense("kernel", &kernel.entries).with_nodes(&kernel.nodes),
        MatrixDoc::from_spectrum("spectrum", &basis.spectrum),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_has_every_kind() {
        let docs = export_bundle(3).unwrap();
        let kinds: Vec<&str> = docs.iter().map(|d| d.kind.as_str()).collect();
        assert_eq!(kinds, EXPORT_KINDS);
        let dq = docs[4].to_dense().unwrap().unwrap();
        assert!((dq[(0, 1)].re + 1.0).abs() < 1e-12);
        assert!(dq[(0, 0)].re.abs() < 1e-12);
    }

    #[test]
    fn one_by_one_bundle() {
        for doc in export_bundle(0).unwrap() {
            assert_eq!(doc.dim, 1);
            if let Some(m) = doc.to_dense().unwrap() {
                assert_eq!(m.dim(), 1);
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        for doc in export_bundle(20).unwrap() {
            let back = MatrixDoc::from_json(&doc.to_json().unwrap()).unwrap();
            let (a, b) = (doc.to_dense().unwrap(), back.to_dense().unwrap());
            if let (Some(a), Some(b)) = (a, b) {
                for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                    assert_eq!(x.re.to_bits(), y.re.to_bits());
                    assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
            assert_eq!(doc, back);
        }
    }

    #[test]
    fn wrong_schema_rejected() {
        let mut doc = export_bundle(1).unwrap().remove(0);
        doc.schema = "mml-matrix/0".into();
        assert!(MatrixDoc::from_json(&doc.to_json().unwrap()).is_err());
    }

    #[test]
    fn csv_layout() {
        let doc = export_bundle(1).unwrap().remove(1);
        let csv = doc.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("row,col,re,im\n"));
    }
}
