//! The action difference in the position and momentum bases and the discrete
//! Cauchy–Hilbert kernel `i/(x_k − x_j)`.

use crate::eig::Spectrum;
use crate::error::{Error, Result};
use crate::matrix::{conjugate_by, ComplexMatrix, LinearOperator, C64, I, ONE, ZERO};
use crate::modal::{momentum_modal_from, ModalMatrix, PositionBasis};
use crate::operators::{build_action_difference, MomentumOperator};
use crate::report::tolerance::{names, tol, ToleranceRegistry};
use crate::report::{timed, CheckResult};

/// `M†·A·M`.
pub fn transform(op: &impl LinearOperator, m: &ModalMatrix) -> Result<ComplexMatrix> {
    conjugate_by(op, m.matrix())
}

/// `I − J` where `J` is the all-ones matrix.
pub fn identity_minus_allones(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |j, k| if j == k { ZERO } else { -ONE })
}

pub fn check_identity_minus_allones(dq: &ComplexMatrix, reg: &ToleranceRegistry) -> CheckResult {
    let n = dq.dim() - 1;
    let (err, ms) = timed(|| {
        dq.max_abs_diff(&identity_minus_allones(dq.dim()))
            .expect("same dimension")
    });
    CheckResult::new(
        names::IDENTITY_MINUS_ALLONES,
        n,
        err,
        reg.tol(names::IDENTITY_MINUS_ALLONES, n),
    )
    .with_runtime(ms)
}

/// `D_N^(q) = U†·D_N·U`.
pub fn action_difference_in_position_basis(basis: &PositionBasis) -> Result<ComplexMatrix> {
    transform(&build_action_difference(basis.n)?, &basis.modal)
}

/// `P_N^(q) = U†·P_N·U` for an already computed basis.
pub fn momentum_in_basis(basis: &PositionBasis) -> Result<ComplexMatrix> {
    transform(&MomentumOperator::new(basis.n)?, &basis.modal)
}

/// `P_N^(q) = U_N†·P_N·U_N`.
pub fn momentum_in_position_basis(n: usize) -> Result<ComplexMatrix> {
    momentum_in_basis(&PositionBasis::new(n)?)
}

/// Purely imaginary antisymmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub nodes: Spectrum,
    pub entries: ComplexMatrix,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.entries.dim()
    }
}

/// `K_{jk} = i/(x_k − x_j)` off the diagonal, `0` on it.
pub fn cauchy_hilbert_kernel(nodes: &Spectrum) -> Result<KernelMatrix> {
    let x = nodes.values();
    let limit = tol(names::NODE_SPACING, x.len().saturating_sub(1));
    if let Some((index, gap)) = nodes.min_gap() {
        if gap < limit {
            return Err(Error::NodeSpacing { index, gap });
        }
    }
    let entries = ComplexMatrix::from_fn(x.len(), |j, k| {
        if j == k {
            ZERO
        } else {
            C64::new(0.0, 1.0 / (x[k] - x[j]))
        }
    });
    Ok(KernelMatrix {
        nodes: nodes.clone(),
        entries,
    })
}

/// Solves `(i·Dq)_{jk} = (x_j − x_k)·P_{jk}` for `P` entrywise.
///
/// Diagonal entries are `0/0` when `Dq` has a zero diagonal and are set to
/// zero; a non-zero diagonal (for instance `Dq = I`) has no finite solution
/// and is rejected.
pub fn solve_elementwise(dq: &ComplexMatrix, nodes: &Spectrum) -> Result<ComplexMatrix> {
    let x = nodes.values();
    if dq.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: dq.dim(),
            found: x.len(),
        });
    }
    let n = dq.dim() - 1;
    let limit = reg_tol_diag(n);
    for j in 0..dq.dim() {
        let numerator = (I * dq[(j, j)]).norm();
        if numerator > limit {
            return Err(Error::Singular { index: j, numerator });
        }
    }
    let mut out = ComplexMatrix::zeros(dq.dim());
    for j in 0..dq.dim() {
        for k in 0..dq.dim() {
            if j != k {
                out[(j, k)] = I * dq[(j, k)] / (x[j] - x[k]);
            }
        }
    }
    Ok(out)
}

fn reg_tol_diag(n: usize) -> f64 {
    tol(names::IDENTITY_MINUS_ALLONES, n)
}

/// `max |U†P_N U − K(x)|` at order `n`.
pub fn kernel_match(n: usize, reg: &ToleranceRegistry) -> Result<CheckResult> {
    let basis = PositionBasis::new(n)?;
    let pq = momentum_in_basis(&basis)?;
    kernel_match_from(&basis, &pq, reg)
}

pub fn kernel_match_from(
    basis: &PositionBasis,
    pq: &ComplexMatrix,
    reg: &ToleranceRegistry,
) -> Result<CheckResult> {
    let n = basis.n;
    let (err, ms) = timed(|| -> Result<f64> {
        let kernel = cauchy_hilbert_kernel(&basis.spectrum)?;
        pq.max_abs_diff(&kernel.entries)
    });
    Ok(CheckResult::new(names::KERNEL_MATCH, n, err?, reg.tol(names::KERNEL_MATCH, n)).with_runtime(ms))
}

/// The diagonal of `U†P_N U`, which must vanish rather than be assumed zero.
pub fn kernel_zero_diagonal(pq: &ComplexMatrix, reg: &ToleranceRegistry) -> CheckResult {
    let n = pq.dim() - 1;
    let (err, ms) = timed(|| pq.diagonal().iter().map(|v| v.norm()).fold(0.0, f64::max));
    CheckResult::new(
        names::KERNEL_ZERO_DIAGONAL,
        n,
        err,
        reg.tol(names::KERNEL_ZERO_DIAGONAL, n),
    )
    .with_runtime(ms)
}

/// `Λ·P^(q) − P^(q)·Λ` against `i·(I − J)`.
pub fn commutator_reconstruction(
    basis: &PositionBasis,
    pq: &ComplexMatrix,
    reg: &ToleranceRegistry,
) -> CheckResult {
    let n = basis.n;
    let x = basis.nodes();
    let (err, ms) = timed(|| {
        let mut worst = 0.0_f64;
        for j in 0..=n {
            for k in 0..=n {
                let lhs = pq[(j, k)] * (x[j] - x[k]);
                let rhs = if j == k { ZERO } else { -I };
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    });
    CheckResult::new(
        names::COMMUTATOR_RECONSTRUCTION,
        n,
        err,
        reg.tol(names::COMMUTATOR_RECONSTRUCTION, n),
    )
    .with_runtime(ms)
}

/// `V†·D_N·V = I − J` with `V = diag(i^k)·U`.
pub fn momentum_basis_structure(n: usize, reg: &ToleranceRegistry) -> Result<CheckResult> {
    momentum_basis_structure_from(&PositionBasis::new(n)?, reg)
}

pub fn momentum_basis_structure_from(
    basis: &PositionBasis,
    reg: &ToleranceRegistry,
) -> Result<CheckResult> {
    let n = basis.n;
    let (err, ms) = timed(|| -> Result<f64> {
        let v = momentum_modal_from(basis)?;
        let dp = transform(&build_action_difference(n)?, &v)?;
        dp.max_abs_diff(&identity_minus_allones(n + 1))
    });
    Ok(CheckResult::new(
        names::MOMENTUM_BASIS_STRUCTURE,
        n,
        err?,
        reg.tol(names::MOMENTUM_BASIS_STRUCTURE, n),
    )
    .with_runtime(ms))
}
