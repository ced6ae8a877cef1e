//! Symmetric tridiagonal eigensolver.
//!
//! Implicit QL with Wilkinson shifts and accumulated Givens rotations (the
//! classical `tql2` scheme). Eigenvector signs are left as the rotations
//! produce them; orientation is the job of [`crate::modal`].

use crate::error::{Error, Result};
use crate::matrix::{norm2, LinearOperator, C64};
use crate::modal::{Convention, ModalMatrix};
use crate::operators::{build_position, check_order, MomentumOperator, SymTridiag};
use crate::report::tolerance::{names, tol};

/// QL sweeps allowed per eigenvalue.
pub const MAX_SWEEPS: usize = 60;

/// Ascending list of real eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("eigenvalue {bad} is not finite")));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument(format!(
                "spectrum not ascending at index {i}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest gap between neighbours, `None` for fewer than two values.
    pub fn min_gap(&self) -> Option<(usize, f64)> {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// `max_l |λ_l + λ_{N−l}|`.
    pub fn symmetry_defect(&self) -> f64 {
        let v = &self.values;
        v.iter()
            .zip(v.iter().rev())
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct EigResult {
    pub spectrum: Spectrum,
    pub vectors: ModalMatrix,
    /// `max_l ‖A u_l − λ_l u_l‖₂`.
    pub residual: f64,
}

/// Residual tolerance for a tridiagonal matrix of order `n`.
pub fn residual_tolerance(t: &SymTridiag) -> f64 {
    let scale = t.max_abs_offdiag().max(t.max_abs_diag());
    tol(names::EIG_RESIDUAL, t.dim() - 1) * scale
}

/// Full eigendecomposition of a real symmetric tridiagonal matrix.
///
/// Eigenvalues come back ascending with orthonormal eigenvectors as columns.
/// An unreduced matrix (all off-diagonals non-zero) has simple eigenvalues, so
/// a near-coincidence there is reported as [`Error::NearTie`].
pub fn eigh_tridiagonal(t: &SymTridiag) -> Result<EigResult> {
    let n = t.dim();
    check_order(n - 1)?;
    let (values, columns) = tql2(t)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let columns: Vec<Vec<f64>> = order.iter().map(|&i| columns[i].clone()).collect();

    let unreduced = t.offdiag().iter().all(|&e| e != 0.0);
    if unreduced {
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let limit = tol(names::EIG_NEAR_TIE, n - 1) * scale;
        if let Some((index, gap)) = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .enumerate()
            .find(|&(_, g)| g < limit)
        {
            return Err(Error::NearTie { index, gap });
        }
    }

    let residual = values
        .iter()
        .zip(&columns)
        .map(|(&lambda, u)| {
            let tu = t.apply_real(u);
            tu.iter()
                .zip(u)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let limit = residual_tolerance(t);
    if residual > limit {
        return Err(Error::Structural {
            what: "eigen residual".into(),
            err: residual,
            tol: limit,
        });
    }

    Ok(EigResult {
        spectrum: Spectrum::new(values)?,
        vectors: ModalMatrix::from_real_columns(&columns, Convention::Raw),
        residual,
    })
}

/// Eigendecomposition of `P_N` through the phase similarity
/// `P_N = Φ Q_N Φ†`, `Φ = diag(i^k)`.
pub fn eigh_momentum(n: usize) -> Result<EigResult> {
    let q = build_position(n)?;
    let base = eigh_tridiagonal(&q)?;
    let phases = phase_diagonal(n);
    let vectors = base.vectors.with_row_phases(&phases, Convention::PhaseDecorated);

    let p = MomentumOperator::new(n)?;
    let mut residual = 0.0_f64;
    for (l, &lambda) in base.spectrum.values().iter().enumerate() {
        let v = vectors.column(l);
        let pv = p.apply(&v);
        let diff: Vec<C64> = pv.iter().zip(&v).map(|(a, b)| a - b * lambda).collect();
        residual = residual.max(norm2(&diff));
    }
    let limit = residual_tolerance(&q);
    if residual > limit {
        return Err(Error::Structural {
            what: "momentum eigen residual".into(),
            err: residual,
            tol: limit,
        });
    }
    Ok(EigResult {
        spectrum: base.spectrum,
        vectors,
        residual,
    })
}

/// `diag(i^k)` for `k = 0..=N`, exact.
pub fn phase_diagonal(n: usize) -> Vec<C64> {
    const CYCLE: [C64; 4] = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    (0..=n).map(|k| CYCLE[k % 4]).collect()
}

/// Returns unsorted eigenvalues and eigenvector columns.
fn tql2(t: &SymTridiag) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = t.dim();
    let mut d = t.diag().to_vec();
    let mut e = t.offdiag().to_vec();
    e.push(0.0);
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut col = vec![0.0; n];
            col[i] = 1.0;
            col
        })
        .collect();

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m + 1 < n && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Convergence {
                        index: l,
                        iterations: MAX_SWEEPS,
                        residual: e[l].abs(),
                    });
                }

                // Wilkinson shift from the leading 2x2 block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = z.split_at_mut(i + 1);
                    let (zi, zi1) = (&mut lo[i], &mut hi[0]);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok((d, z))
}
