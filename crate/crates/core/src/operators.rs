//! Fock-basis matrices of the truncated oscillator: position `Q_N`, momentum
//! `P_N`, Hamiltonian `H_N` and the action difference `D_N = [Q_N, P_N]/i`.
//!
//! Everything here is a direct formula evaluation. Basis labels run `0..=N`
//! and every matrix has dimension `N + 1`; units have ħ = 1.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, LinearOperator, C64, I, ZERO};
use crate::report::tolerance::{names, tol};

pub const DEFAULT_DIM_CAP: usize = 4096;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "MML_DIM_CAP";

/// Largest admissible order `N`.
pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

pub fn check_order(n: usize) -> Result<()> {
    let cap = dim_cap();
    if n > cap {
        return Err(Error::SizeExceeded { n, cap });
    }
    Ok(())
}

/// Ladder coefficient `ω_k = sqrt((k + 1) / 2)`, the `(k+1, k)` element of `Q_N`.
pub fn ladder_coefficient(k: usize) -> f64 {
    ((k + 1) as f64 / 2.0).sqrt()
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiag {
    /// `offdiag[k]` is the `(k+1, k)` element.
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("tridiagonal matrix needs dim >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                found: offdiag.len(),
            });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn max_abs_offdiag(&self) -> f64 {
        self.offdiag.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diag(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `T·x` for a real vector.
    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut acc = self.diag[j] * x[j];
                if j > 0 {
                    acc += self.offdiag[j - 1] * x[j - 1];
                }
                if j + 1 < n {
                    acc += self.offdiag[j] * x[j + 1];
                }
                acc
            })
            .collect()
    }
}

impl LinearOperator for SymTridiag {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim(), "operand length");
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut acc = x[j] * self.diag[j];
                if j > 0 {
                    acc += x[j - 1] * self.offdiag[j - 1];
                }
                if j + 1 < n {
                    acc += x[j + 1] * self.offdiag[j];
                }
                acc
            })
            .collect()
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// Real diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    diag: Vec<f64>,
}

impl DiagonalMatrix {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }

    pub fn identity(dim: usize) -> Self {
        Self { diag: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

impl LinearOperator for DiagonalMatrix {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim(), "operand length");
        x.iter().zip(&self.diag).map(|(v, d)| v * d).collect()
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// `P_N` applied in `O(N)` without forming the dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumOperator {
    dim: usize,
    omega: Vec<f64>,
}

impl MomentumOperator {
    pub fn new(n: usize) -> Result<Self> {
        check_order(n)?;
        Ok(Self {
            dim: n + 1,
            omega: (0..n).map(ladder_coefficient).collect(),
        })
    }

    /// Element `(j, k)` of `P_N`.
    pub fn entry(&self, j: usize, k: usize) -> C64 {
        if j == k + 1 {
            I * self.omega[k]
        } else if k == j + 1 {
            -I * self.omega[j]
        } else {
            ZERO
        }
    }
}

impl LinearOperator for MomentumOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "operand length");
        let n = self.dim;
        (0..n)
            .map(|j| {
                let mut acc = ZERO;
                if j > 0 {
                    acc += x[j - 1] * self.omega[j - 1];
                }
                if j + 1 < n {
                    acc -= x[j + 1] * self.omega[j];
                }
                acc * I
            })
            .collect()
    }

    fn is_hermitian(&self) -> bool {
        true
    }

    fn to_dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |j, k| self.entry(j, k))
    }
}

/// Banded complex matrix; row `j` stores columns `j - w ..= j + w`.
#[derive(Debug, Clone)]
struct Band {
    dim: usize,
    half_width: usize,
    rows: Vec<Vec<C64>>,
}

impl Band {
    fn zeros(dim: usize, half_width: usize) -> Self {
        Self {
            dim,
            half_width,
            rows: vec![vec![ZERO; 2 * half_width + 1]; dim],
        }
    }

    fn from_fn(dim: usize, half_width: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut b = Self::zeros(dim, half_width);
        for j in 0..dim {
            for k in b.columns(j) {
                b.set(j, k, f(j, k));
            }
        }
        b
    }

    fn columns(&self, j: usize) -> std::ops::Range<usize> {
        j.saturating_sub(self.half_width)..(j + self.half_width + 1).min(self.dim)
    }

    fn get(&self, j: usize, k: usize) -> C64 {
        let offset = k + self.half_width;
        if offset < j || offset - j > 2 * self.half_width {
            return ZERO;
        }
        self.rows[j][offset - j]
    }

    fn set(&mut self, j: usize, k: usize, v: C64) {
        self.rows[j][k + self.half_width - j] = v;
    }

    fn mul(&self, rhs: &Band) -> Band {
        let mut out = Band::zeros(self.dim, self.half_width + rhs.half_width);
        for j in 0..self.dim {
            for m in self.columns(j) {
                let a = self.get(j, m);
                for k in rhs.columns(m) {
                    let v = out.get(j, k) + a * rhs.get(m, k);
                    out.set(j, k, v);
                }
            }
        }
        out
    }

    fn combine(&self, rhs: &Band, f: impl Fn(C64, C64) -> C64) -> Band {
        let w = self.half_width.max(rhs.half_width);
        Band::from_fn(self.dim, w, |j, k| f(self.get(j, k), rhs.get(j, k)))
    }

    /// Largest modulus off the main diagonal.
    fn max_offdiag(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            for k in self.columns(j) {
                if k != j {
                    worst = worst.max(self.get(j, k).norm());
                }
            }
        }
        worst
    }
}

fn position_band(n: usize) -> Band {
    Band::from_fn(n + 1, 1, |j, k| {
        if j == k + 1 {
            C64::from(ladder_coefficient(k))
        } else if k == j + 1 {
            C64::from(ladder_coefficient(j))
        } else {
            ZERO
        }
    })
}

fn momentum_band(n: usize) -> Result<Band> {
    let p = MomentumOperator::new(n)?;
    Ok(Band::from_fn(n + 1, 1, |j, k| p.entry(j, k)))
}

/// `Q_N`: zero diagonal, off-diagonal `ω_k = sqrt((k+1)/2)`.
pub fn build_position(n: usize) -> Result<SymTridiag> {
    check_order(n)?;
    SymTridiag::new(vec![0.0; n + 1], (0..n).map(ladder_coefficient).collect())
}

/// Dense `P_N`, Hermitian and equal to `i` times a real antisymmetric matrix.
pub fn build_momentum(n: usize) -> Result<ComplexMatrix> {
    Ok(MomentumOperator::new(n)?.to_dense())
}

/// Exact diagonal of `H_N`: `k + 1/2` for `k < N`, then `N/2`.
pub fn hamiltonian_diagonal(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| if k < n { k as f64 + 0.5 } else { n as f64 / 2.0 })
        .collect()
}

/// Exact diagonal of `D_N`: `(1, …, 1, −N)`.
pub fn action_difference_diagonal(n: usize) -> Vec<f64> {
    (0..=n).map(|k| if k < n { 1.0 } else { -(n as f64) }).collect()
}

/// `H_N = (Q_N² + P_N²)/2`.
///
/// The product is formed explicitly in banded arithmetic; the result must be
/// diagonal and agree with the closed form, which is what gets returned.
pub fn build_hamiltonian(n: usize) -> Result<DiagonalMatrix> {
    check_order(n)?;
    let q = position_band(n);
    let p = momentum_band(n)?;
    let h = q.mul(&q).combine(&p.mul(&p), |a, b| (a + b) * 0.5);
    let exact = hamiltonian_diagonal(n);
    let limit = tol(names::HAMILTONIAN_DIAGONAL, n);

    let offdiag = h.max_offdiag();
    if offdiag > limit {
        return Err(Error::Structural {
            what: "hamiltonian off-diagonal".into(),
            err: offdiag,
            tol: limit,
        });
    }
    let diag_err = exact
        .iter()
        .enumerate()
        .map(|(j, e)| (h.get(j, j) - e).norm())
        .fold(0.0, f64::max);
    if diag_err > limit {
        return Err(Error::Structural {
            what: "hamiltonian diagonal".into(),
            err: diag_err,
            tol: limit,
        });
    }
    Ok(DiagonalMatrix::new(exact))
}

/// `D_N = diag(1, …, 1, −N)`, cross-checked against `[Q_N, P_N]/i` computed
/// in banded arithmetic.
pub fn build_action_difference(n: usize) -> Result<DiagonalMatrix> {
    check_order(n)?;
    let q = position_band(n);
    let p = momentum_band(n)?;
    let comm = q.mul(&p).combine(&p.mul(&q), |a, b| (a - b) * (-I));
    let exact = action_difference_diagonal(n);
    let limit = tol(names::COMMUTATOR_DIAGONAL, n);

    let mut err = comm.max_offdiag();
    for (j, e) in exact.iter().enumerate() {
        err = err.max((comm.get(j, j) - e).norm());
    }
    if err > limit {
        return Err(Error::Structural {
            what: "action difference vs commutator".into(),
            err,
            tol: limit,
        });
    }
    Ok(DiagonalMatrix::new(exact))
}

/// Largest entry of `D_N − I + (N+1)·e_N e_Nᵀ`; zero when the rank-one form holds.
pub fn rank_one_defect(d: &DiagonalMatrix) -> f64 {
    let n = d.dim() - 1;
    d.diag()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let rank_one = if k == n { (n + 1) as f64 } else { 0.0 };
            (v - 1.0 + rank_one).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::commutator;

    #[test]
    fn position_n3_matches_displayed_matrix() {
        let q = build_position(3).unwrap();
        assert_eq!(q.diag(), &[0.0; 4]);
        let expected = [(0.5f64).sqrt(), 1.0, (1.5f64).sqrt()];
        for (a, b) in q.offdiag().iter().zip(expected) {
            assert!((a - b).abs() <= f64::EPSILON * b);
        }
    }

    #[test]
    fn position_edge_cases() {
        let q0 = build_position(0).unwrap();
        assert_eq!(q0.dim(), 1);
        assert!(q0.offdiag().is_empty());
        let q5 = build_position(5).unwrap();
        assert!((q5.offdiag()[4] - 1.5811388300841898).abs() < 1e-15);
    }

    #[test]
    fn oversized_order_is_rejected() {
        assert!(matches!(
            build_position(DEFAULT_DIM_CAP + 1),
            Err(Error::SizeExceeded { .. })
        ));
        assert!(build_momentum(DEFAULT_DIM_CAP + 1).is_err());
    }

    #[test]
    fn momentum_n1_closed_form() {
        let p = build_momentum(1).unwrap();
        let s = (0.5f64).sqrt();
        assert_eq!(p[(0, 1)], C64::new(0.0, -s));
        assert_eq!(p[(1, 0)], C64::new(0.0, s));
        assert_eq!(p[(0, 0)], ZERO);
    }

    #[test]
    fn momentum_is_exactly_hermitian_and_imaginary_antisymmetric() {
        for n in [0, 1, 7, 40] {
            let p = build_momentum(n).unwrap();
            assert_eq!(p.sub(&p.adjoint()).unwrap().max_abs(), 0.0);
            let a = p.scale(-I);
            assert_eq!(a.max_imag(), 0.0);
            assert_eq!(a.add(&a.transpose()).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(build_hamiltonian(3).unwrap().diag(), &[0.5, 1.5, 2.5, 1.5]);
        assert_eq!(build_hamiltonian(0).unwrap().diag(), &[0.0]);
        let h10 = build_hamiltonian(10).unwrap();
        let mut expected: Vec<f64> = (0..10).map(|k| k as f64 + 0.5).collect();
        expected.push(5.0);
        assert_eq!(h10.diag(), expected.as_slice());
    }

    #[test]
    fn hamiltonian_agrees_with_dense_product() {
        // Dense oracle, independent of the banded product.
        let n = 10;
        let q = build_position(n).unwrap().to_dense();
        let p = build_momentum(n).unwrap();
        let h = q.mul(&q).unwrap().add(&p.mul(&p).unwrap()).unwrap().scale(C64::from(0.5));
        let built = build_hamiltonian(n).unwrap().to_dense();
        assert!(h.max_abs_diff(&built).unwrap() < 1e-14 * n as f64);
    }

    #[test]
    fn action_difference_examples() {
        assert_eq!(build_action_difference(3).unwrap().diag(), &[1.0, 1.0, 1.0, -3.0]);
        assert_eq!(build_action_difference(1).unwrap().diag(), &[1.0, -1.0]);
        for n in [0, 1, 2, 17, 300] {
            let d = build_action_difference(n).unwrap();
            assert_eq!(d.trace(), 0.0);
            assert_eq!(rank_one_defect(&d), 0.0);
        }
    }

    #[test]
    fn commutator_n1_by_hand() {
        let q = build_position(1).unwrap().to_dense();
        let p = build_momentum(1).unwrap();
        let c = commutator(&q, &p).unwrap();
        let expected = ComplexMatrix::from_fn(2, |j, k| match (j, k) {
            (0, 0) => I,
            (1, 1) => -I,
            _ => ZERO,
        });
        assert!(c.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn commutator_n3_is_displayed_action_difference() {
        let q = build_position(3).unwrap().to_dense();
        let p = build_momentum(3).unwrap();
        let d = commutator(&q, &p).unwrap().scale(-I);
        let expected = build_action_difference(3).unwrap().to_dense();
        assert!(d.max_abs_diff(&expected).unwrap() < 1e-13);
    }

    #[test]
    fn operator_views_agree_with_dense() {
        let n = 6;
        let p = MomentumOperator::new(n).unwrap();
        let dense = build_momentum(n).unwrap();
        let x: Vec<C64> = (0..=n).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let a = p.apply(&x);
        let b = dense.apply(&x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_anomaly_appears_once() {
        for n in 2..30usize {
            let h = build_hamiltonian(n).unwrap();
            let half = n as f64 / 2.0;
            // For odd N the value N/2 is already a half-integer level.
            let hits: Vec<usize> = h
                .diag()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == half)
                .map(|(k, _)| k)
                .collect();
            if n % 2 == 0 {
                assert_eq!(hits, vec![n]);
            } else {
                assert_eq!(hits, vec![(n - 1) / 2, n]);
            }
            assert_eq!(&h.diag()[..n], &hamiltonian_diagonal(n)[..n]);
        }
    }
}
