//! Dense square matrices used throughout the crate.
//!
//! Storage is row-major. The types are deliberately small: the crate only needs
//! products, adjoints and entrywise comparisons, never a general factorization.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Anything that can be applied to a complex coefficient vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[C64]) -> Vec<C64>;

    /// Whether the operator is Hermitian by construction.
    fn is_hermitian(&self) -> bool;

    fn to_dense(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        let mut e = vec![ZERO; n];
        for k in 0..n {
            e[k] = ONE;
            let col = self.apply(&e);
            e[k] = ZERO;
            for (j, v) in col.into_iter().enumerate() {
                out[(j, k)] = v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |j, k| if j == k { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries.push(f(j, k));
            }
        }
        Self { dim, entries }
    }

    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, j: usize) -> &[C64] {
        &self.entries[j * self.dim..(j + 1) * self.dim]
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.dim).map(|j| self[(j, k)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|j| self[(j, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.expect_dim(rhs.dim)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for j in 0..n {
            let out_row = &mut out[j * n..(j + 1) * n];
            for (m, &a) in self.row(j).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(m)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: n, entries: out })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.expect_dim(rhs.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.expect_dim(rhs.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        self.expect_dim(rhs.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest modulus of `self - self†`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            for k in j..self.dim {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    fn expect_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        &self.entries[j * self.dim + k]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        &mut self.entries[j * self.dim + k]
    }
}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "operand length");
        (0..self.dim)
            .map(|j| self.row(j).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn is_hermitian(&self) -> bool {
        self.hermitian_defect() == 0.0
    }

    fn to_dense(&self) -> ComplexMatrix {
        self.clone()
    }
}

/// `A·B − B·A`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// Computes `M†·A·M` by applying `A` to the columns of `M`.
pub fn conjugate_by(op: &impl LinearOperator, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if op.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: op.dim(),
        });
    }
    let n = m.dim();
    // Row k of `am_t` holds A·(column k of M).
    let mut am_t = Vec::with_capacity(n * n);
    for k in 0..n {
        am_t.extend(op.apply(&m.column(k)));
    }
    let m_t: Vec<C64> = m.transpose().entries;
    let mut out = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mj = &m_t[j * n..(j + 1) * n];
        for k in 0..n {
            let amk = &am_t[k * n..(k + 1) * n];
            out[(j, k)] = mj.iter().zip(amk).map(|(a, b)| a.conj() * b).sum();
        }
    }
    Ok(out)
}

pub(crate) fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_with_itself_vanishes() {
        let a = ComplexMatrix::from_fn(4, |j, k| C64::new((j * 3 + k) as f64, (j as f64) - (k as f64)));
        let c = commutator(&a, &a).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn product_dimension_mismatch() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(commutator(&a, &b).is_err());
    }

    #[test]
    fn conjugate_by_matches_explicit_products() {
        let a = ComplexMatrix::from_fn(3, |j, k| C64::new((j + 2 * k) as f64, (j * k) as f64));
        let m = ComplexMatrix::from_fn(3, |j, k| C64::new((j as f64) - 1.0, (k as f64) * 0.5));
        let direct = m.adjoint().mul(&a).unwrap().mul(&m).unwrap();
        let fast = conjugate_by(&a, &m).unwrap();
        assert!(direct.max_abs_diff(&fast).unwrap() < 1e-12);
    }
}
