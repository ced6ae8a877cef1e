//! Modal matrices of `Q_N` and `P_N` with a fixed sign convention, the
//! constant-last-row property, and the Köcher rotation with the block
//! factorization `U_N = B_N · R_N`.

use crate::eig::{eigh_tridiagonal, phase_diagonal, residual_tolerance, Spectrum};
use crate::error::{Error, Result};
use crate::matrix::{norm2, ComplexMatrix, LinearOperator, C64, ONE, ZERO};
use crate::operators::{build_position, MomentumOperator};
use crate::report::tolerance::{names, tol, ToleranceRegistry};
use crate::report::{timed, CheckResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Signs as produced by the solver.
    Raw,
    /// Every column's last entry is positive.
    LastComponentPositive,
    /// `Φ·U` with `Φ = diag(i^k)`.
    PhaseDecorated,
    Rotation,
    BlockFactor,
}

/// Square matrix whose columns form an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalMatrix {
    convention: Convention,
    matrix: ComplexMatrix,
}

impl ModalMatrix {
    pub fn new(matrix: ComplexMatrix, convention: Convention) -> Self {
        Self { convention, matrix }
    }

    pub fn from_real_columns(columns: &[Vec<f64>], convention: Convention) -> Self {
        let n = columns.len();
        let matrix = ComplexMatrix::from_fn(n, |j, k| C64::from(columns[k][j]));
        Self { convention, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.matrix[(j, k)]
    }

    pub fn column(&self, l: usize) -> Vec<C64> {
        self.matrix.column(l)
    }

    pub fn real_column(&self, l: usize) -> Vec<f64> {
        self.matrix.column(l).iter().map(|c| c.re).collect()
    }

    /// `max |M†M − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let cols: Vec<Vec<C64>> = (0..n).map(|l| self.column(l)).collect();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in a..n {
                let g: C64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum();
                let target = if a == b { ONE } else { ZERO };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// `diag(phases) · M`.
    pub fn with_row_phases(&self, phases: &[C64], convention: Convention) -> Self {
        let matrix = ComplexMatrix::from_fn(self.dim(), |j, k| phases[j] * self.matrix[(j, k)]);
        Self { convention, matrix }
    }
}

/// Spectrum and oriented modal matrix of `Q_N`.
#[derive(Debug, Clone)]
pub struct PositionBasis {
    pub n: usize,
    pub spectrum: Spectrum,
    pub modal: ModalMatrix,
}

impl PositionBasis {
    pub fn new(n: usize) -> Result<Self> {
        let q = build_position(n)?;
        let eig = eigh_tridiagonal(&q)?;
        let modal = orient_last_positive(&eig.vectors)?;
        Ok(Self {
            n,
            spectrum: eig.spectrum,
            modal,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        self.spectrum.values()
    }
}

/// Flips column signs so each last entry is positive.
pub fn orient_last_positive(raw: &ModalMatrix) -> Result<ModalMatrix> {
    let n = raw.dim();
    let limit = tol(names::ORIENTATION, n - 1);
    let mut matrix = raw.matrix.clone();
    for l in 0..n {
        let last = matrix[(n - 1, l)].re;
        if last.abs() < limit {
            return Err(Error::Orientation { column: l, value: last });
        }
        if last < 0.0 {
            for j in 0..n {
                matrix[(j, l)] = -matrix[(j, l)];
            }
        }
    }
    Ok(ModalMatrix::new(matrix, Convention::LastComponentPositive))
}

/// `U_N`: eigenvectors of `Q_N`, ascending eigenvalues, last entries positive.
pub fn modal_position(n: usize) -> Result<ModalMatrix> {
    Ok(PositionBasis::new(n)?.modal)
}

/// `max_l |U[N, l] − 1/sqrt(N+1)|`.
pub fn check_constant_last_row(u: &ModalMatrix, reg: &ToleranceRegistry) -> CheckResult {
    let ((n, err), ms) = timed(|| {
        let dim = u.dim();
        let target = 1.0 / (dim as f64).sqrt();
        let err = (0..dim)
            .map(|l| (u.get(dim - 1, l) - target).norm())
            .fold(0.0, f64::max);
        (dim - 1, err)
    });
    CheckResult::new(names::CONSTANT_LAST_ROW, n, err, reg.tol(names::CONSTANT_LAST_ROW, n))
        .with_runtime(ms)
}

/// Largest violation of the row sums `Σ_l U[k,l] = 0` for `k < N` and
/// `Σ_l U[N,l] = sqrt(N+1)`.
pub fn row_sum_defect(u: &ModalMatrix) -> f64 {
    let dim = u.dim();
    (0..dim)
        .map(|k| {
            let s: C64 = u.matrix.row(k).iter().sum();
            let target = if k + 1 == dim { (dim as f64).sqrt() } else { 0.0 };
            (s - target).norm()
        })
        .fold(0.0, f64::max)
}

/// `R_N`, the orthogonal map taking `μ_N = (1,…,1)/sqrt(N+1)` to `e_N`.
pub fn kocher_rotation(n: usize) -> Result<ModalMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("Köcher rotation needs N >= 1".into()));
    }
    crate::operators::check_order(n)?;
    let inv = 1.0 / ((n + 1) as f64).sqrt();
    let block = (inv - 1.0) / n as f64;
    let matrix = ComplexMatrix::from_fn(n + 1, |j, k| {
        let v = match (j < n, k < n) {
            (true, true) if j == k => 1.0 + block,
            (true, true) => block,
            (true, false) => -inv,
            (false, true) => inv,
            (false, false) => inv,
        };
        C64::from(v)
    });
    let r = ModalMatrix::new(matrix, Convention::Rotation);

    let err = kocher_defect(&r);
    let limit = tol(names::KOCHER_ROTATION, n);
    if err > limit {
        return Err(Error::Structural {
            what: "Köcher rotation".into(),
            err,
            tol: limit,
        });
    }
    Ok(r)
}

/// Worst of orthogonality, `‖R μ − e_N‖₂` and the constant last row.
fn kocher_defect(r: &ModalMatrix) -> f64 {
    let dim = r.dim();
    let inv = 1.0 / (dim as f64).sqrt();
    let mu = vec![C64::from(inv); dim];
    let mut image = r.matrix.apply(&mu);
    image[dim - 1] -= ONE;
    let last_row = (0..dim)
        .map(|k| (r.get(dim - 1, k) - inv).norm())
        .fold(0.0, f64::max);
    r.orthonormality_defect().max(norm2(&image)).max(last_row)
}

pub fn check_kocher_rotation(r: &ModalMatrix, reg: &ToleranceRegistry) -> CheckResult {
    let n = r.dim() - 1;
    let (err, ms) = timed(|| kocher_defect(r));
    CheckResult::new(names::KOCHER_ROTATION, n, err, reg.tol(names::KOCHER_ROTATION, n))
        .with_runtime(ms)
}

/// `B = U·Rᵀ`, with a check that its last row and column are `e_N` and its
/// leading `N×N` block is orthogonal.
pub fn block_factor(
    u: &ModalMatrix,
    r: &ModalMatrix,
    reg: &ToleranceRegistry,
) -> Result<(ModalMatrix, CheckResult)> {
    if u.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: r.dim(),
        });
    }
    let dim = u.dim();
    let n = dim - 1;
    let (computed, ms) = timed(|| -> Result<(ComplexMatrix, f64)> {
        let b = u.matrix.mul(&r.matrix.transpose())?;
        let mut err = 0.0_f64;
        for k in 0..dim {
            let target = if k == n { ONE } else { ZERO };
            err = err.max((b[(n, k)] - target).norm());
            err = err.max((b[(k, n)] - target).norm());
        }
        let inner = ModalMatrix::new(
            ComplexMatrix::from_fn(n, |j, k| b[(j, k)]),
            Convention::BlockFactor,
        );
        err = err.max(inner.orthonormality_defect());
        Ok((b, err))
    });
    let (b, err) = computed?;
    let b = ModalMatrix::new(b, Convention::BlockFactor);
    let check = CheckResult::new(names::BLOCK_FACTOR, n, err, reg.tol(names::BLOCK_FACTOR, n))
        .with_runtime(ms);
    Ok((b, check))
}

/// `V_N = Φ·U_N`, `Φ = diag(i^k)`; columns verified as eigenvectors of `P_N`.
pub fn modal_momentum(n: usize) -> Result<ModalMatrix> {
    let basis = PositionBasis::new(n)?;
    momentum_modal_from(&basis)
}

pub fn momentum_modal_from(basis: &PositionBasis) -> Result<ModalMatrix> {
    let n = basis.n;
    let v = basis
        .modal
        .with_row_phases(&phase_diagonal(n), Convention::PhaseDecorated);
    let p = MomentumOperator::new(n)?;
    let mut residual = 0.0_f64;
    for (l, &lambda) in basis.nodes().iter().enumerate() {
        let col = v.column(l);
        let pv = p.apply(&col);
        let diff: Vec<C64> = pv.iter().zip(&col).map(|(a, b)| a - b * lambda).collect();
        residual = residual.max(norm2(&diff));
    }
    let limit = residual_tolerance(&build_position(n)?);
    if residual > limit {
        return Err(Error::Structural {
            what: "momentum eigen residual".into(),
            err: residual,
            tol: limit,
        });
    }
    Ok(v)
}

/// Worst deviation of `V† P_N V` from `diag(λ)`.
pub fn momentum_diagonalization_defect(basis: &PositionBasis, v: &ModalMatrix) -> Result<f64> {
    let p = MomentumOperator::new(basis.n)?;
    let pv = crate::matrix::conjugate_by(&p, v.matrix())?;
    let target = ComplexMatrix::from_fn(v.dim(), |j, k| {
        if j == k {
            C64::from(basis.nodes()[j])
        } else {
            ZERO
        }
    });
    pv.max_abs_diff(&target)
}
