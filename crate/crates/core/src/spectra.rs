//! Spectral diagnostics: spacing of the Hermite zeros, the Hamiltonian edge
//! level, and a Cauchy-sequence test of resolvent convergence between growing
//! truncations.

use serde::Serialize;

use crate::eig::Spectrum;
use crate::error::{Error, Result};
use crate::matrix::{norm2, C64, ZERO};
use crate::operators::{build_hamiltonian, build_position, SymTridiag};
use crate::states::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStats {
    pub interval: (f64, f64),
    pub max_gap: f64,
    pub mean_gap: f64,
    pub count_inside: usize,
}

/// Nearest-neighbour gaps among the eigenvalues inside `[−a, a]`.
pub fn gap_statistics(spec: &Spectrum, a: f64) -> Result<GapStats> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidArgument(format!("interval half-width {a} must be positive")));
    }
    let inside: Vec<f64> = spec.values().iter().copied().filter(|x| x.abs() <= a).collect();
    if inside.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{} eigenvalue(s) inside [-{a}, {a}], need at least 2",
            inside.len()
        )));
    }
    let gaps: Vec<f64> = inside.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(GapStats {
        interval: (-a, a),
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
        count_inside: inside.len(),
    })
}

/// The displaced top level of `H_N` and its weight in the empirical spectral
/// measure: `(N/2, 1/(N+1))`.
pub fn hamiltonian_anomaly(n: usize) -> Result<(f64, f64)> {
    let value = n as f64 / 2.0;
    let h = build_hamiltonian(n)?;
    let top = h.diag()[n];
    if top != value {
        return Err(Error::Structural {
            what: "hamiltonian edge level".into(),
            err: (top - value).abs(),
            tol: 0.0,
        });
    }
    Ok((value, 1.0 / (n + 1) as f64))
}

/// Largest deviation of `H_N`'s first `N` levels from `k + 1/2`, plus the
/// deviation of the last from `N/2`. Zero when the bookkeeping is exact.
pub fn anomaly_bookkeeping_defect(n: usize) -> Result<f64> {
    let h = build_hamiltonian(n)?;
    let mut worst = (h.diag()[n] - n as f64 / 2.0).abs();
    for (k, &v) in h.diag()[..n].iter().enumerate() {
        worst = worst.max((v - (k as f64 + 0.5)).abs());
    }
    Ok(worst)
}

/// Solves `(T − z)x = b` by tridiagonal LU with partial pivoting.
pub fn shifted_solve(t: &SymTridiag, z: C64, b: &[C64]) -> Result<Vec<C64>> {
    let n = t.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut d: Vec<C64> = t.diag().iter().map(|&v| C64::from(v) - z).collect();
    let mut dl: Vec<C64> = t.offdiag().iter().map(|&v| C64::from(v)).collect();
    let mut du = dl.clone();
    let mut du2 = vec![ZERO; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];

    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            if d[i] == ZERO {
                return Err(Error::Singular { index: i, numerator: 0.0 });
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = true;
        }
    }
    if d[n - 1] == ZERO {
        return Err(Error::Singular { index: n - 1, numerator: 0.0 });
    }

    let mut x = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if swapped[i] {
            let temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - dl[i] * x[i];
        } else {
            let xi = x[i];
            x[i + 1] -= dl[i] * xi;
        }
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok(x)
}

/// `(Q_N − z)^{-1} v` for non-real `z`.
pub fn resolvent_apply(n: usize, z: C64, v: &[C64]) -> Result<Vec<C64>> {
    if z.im == 0.0 {
        return Err(Error::RealShift { re: z.re, im: z.im });
    }
    shifted_solve(&build_position(n)?, z, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventDiag {
    pub z: (f64, f64),
    pub n_small: usize,
    pub n_large: usize,
    /// `‖R_small ψ̂ − R_large ψ̂‖₂` after zero-padding the smaller result.
    pub diff_norm: f64,
}

pub fn resolvent_cauchy(
    z: C64,
    psi: &StateVector,
    n_small: usize,
    n_large: usize,
) -> Result<ResolventDiag> {
    if z.im == 0.0 {
        return Err(Error::RealShift { re: z.re, im: z.im });
    }
    if n_small > n_large {
        return Err(Error::InvalidArgument(format!(
            "n_small = {n_small} exceeds n_large = {n_large}"
        )));
    }
    let small = resolvent_apply(n_small, z, &psi.embed(n_small + 1)?)?;
    let large = resolvent_apply(n_large, z, &psi.embed(n_large + 1)?)?;
    let diff: Vec<C64> = large
        .iter()
        .enumerate()
        .map(|(k, &l)| l - small.get(k).copied().unwrap_or(ZERO))
        .collect();
    Ok(ResolventDiag {
        z: (z.re, z.im),
        n_small,
        n_large,
        diff_norm: norm2(&diff),
    })
}

/// Cauchy differences between consecutive orders of `ns`.
pub fn resolvent_chain(z: C64, psi: &StateVector, ns: &[usize]) -> Result<Vec<ResolventDiag>> {
    ns.windows(2)
        .map(|w| resolvent_cauchy(z, psi, w[0], w[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::eigh_tridiagonal;
    use crate::hermite::hermite_zeros_oracle;
    use crate::matrix::{LinearOperator, I};
    use crate::states::number_state;

    #[test]
    fn gap_examples() {
        let s3 = hermite_zeros_oracle(4).unwrap();
        let g = gap_statistics(&s3, 2.0).unwrap();
        assert_eq!(g.count_inside, 4);
        assert!((g.max_gap - 1.126_032_500_610_495_6).abs() < 1e-12);

        let s1 = hermite_zeros_oracle(2).unwrap();
        let g1 = gap_statistics(&s1, 1.0).unwrap();
        assert!((g1.max_gap - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g1.max_gap, g1.mean_gap);
    }

    #[test]
    fn gap_errors() {
        let s = hermite_zeros_oracle(2).unwrap();
        assert!(gap_statistics(&s, 0.5).is_err());
        assert!(gap_statistics(&s, -1.0).is_err());
    }

    #[test]
    fn gaps_shrink_with_order() {
        let gap = |n| {
            let spec = eigh_tridiagonal(&build_position(n).unwrap()).unwrap().spectrum;
            gap_statistics(&spec, 1.0).unwrap().max_gap
        };
        assert!(gap(400) < gap(100));
    }

    #[test]
    fn anomaly_examples() {
        assert_eq!(hamiltonian_anomaly(3).unwrap(), (1.5, 0.25));
        assert_eq!(hamiltonian_anomaly(10).unwrap(), (5.0, 1.0 / 11.0));
        let (v, w) = hamiltonian_anomaly(2).unwrap();
        assert_eq!((v, w), (1.0, 1.0 / 3.0));
        assert!(0.5 < v && v < 1.5);
        for n in 0..50 {
            assert_eq!(anomaly_bookkeeping_defect(n).unwrap(), 0.0);
        }
    }

    #[test]
    fn shifted_solve_has_small_residual() {
        let q = build_position(40).unwrap();
        let b: Vec<C64> = (0..41).map(|k| C64::new((k as f64).sin(), 0.3)).collect();
        for z in [I, C64::new(2.0, 0.01), C64::new(-7.0, -3.0)] {
            let x = shifted_solve(&q, z, &b).unwrap();
            let qx = q.apply(&x);
            let r: Vec<C64> = qx.iter().zip(&x).zip(&b).map(|((a, xi), bi)| a - z * xi - bi).collect();
            assert!(norm2(&r) < 1e-12 * norm2(&b));
            // ‖(Q − z)^{-1} b‖ ≤ ‖b‖/|Im z|
            assert!(norm2(&x) <= norm2(&b) / z.im.abs() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn real_shift_rejected() {
        let psi = number_state(0, 3).unwrap();
        assert!(matches!(
            resolvent_cauchy(C64::new(0.5, 0.0), &psi, 5, 10),
            Err(Error::RealShift { .. })
        ));
    }

    #[test]
    fn equal_orders_give_zero() {
        let psi = number_state(0, 0).unwrap();
        assert_eq!(resolvent_cauchy(I, &psi, 30, 30).unwrap().diff_norm, 0.0);
    }

    #[test]
    fn cauchy_norms_decrease() {
        let psi = number_state(0, 0).unwrap();
        let chain = resolvent_chain(I, &psi, &[25, 50, 100, 200]).unwrap();
        assert!(chain[0].diff_norm > chain[1].diff_norm);
        assert!(chain[1].diff_norm > chain[2].diff_norm);
        let a = resolvent_cauchy(I, &psi, 25, 50).unwrap().diff_norm;
        let b = resolvent_cauchy(C64::new(0.0, 2.0), &psi, 25, 50).unwrap().diff_norm;
        assert!(a.is_finite() && b.is_finite());
        assert!(a <= 2.0 && b <= 1.0);
    }
}
