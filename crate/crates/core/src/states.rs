//! Finite-energy states in the Fock basis, moments, the uncertainty relation
//! `ΔQ·ΔP ≥ ½|⟨D_N⟩|` and the approach `⟨D_N⟩ → 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{inner, norm2, ComplexMatrix, LinearOperator, C64, ONE, ZERO};
use crate::modal::PositionBasis;
use crate::operators::{
    action_difference_diagonal, build_position, check_order, hamiltonian_diagonal, DiagonalMatrix,
    MomentumOperator,
};
use crate::report::tolerance::{names, tol, ToleranceRegistry};
use crate::report::{timed, CheckResult};

/// Seed for the random-state suites.
pub const DEFAULT_SEED: u64 = 0x6d6d_6c5f_7374_6174;

/// Unit vector of Fock amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coeffs: Vec<C64>,
    /// Weight discarded by truncation; zero unless built from an infinite series.
    tail_weight: f64,
}

impl StateVector {
    /// Normalizes `coeffs`.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        Self::with_tail(coeffs, 0.0)
    }

    fn with_tail(mut coeffs: Vec<C64>, tail_weight: f64) -> Result<Self> {
        let norm = norm2(&coeffs);
        if coeffs.is_empty() || !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("state needs a finite non-zero norm".into()));
        }
        coeffs.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { coeffs, tail_weight })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn norm_deviation(&self) -> f64 {
        (norm2(&self.coeffs) - 1.0).abs()
    }

    /// The state padded with zeros to dimension `dim`.
    pub fn embed(&self, dim: usize) -> Result<Vec<C64>> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        let mut v = self.coeffs.clone();
        v.resize(dim, ZERO);
        Ok(v)
    }
}

/// `e_k` in dimension `N + 1`.
pub fn number_state(k: usize, n: usize) -> Result<StateVector> {
    check_order(n)?;
    if k > n {
        return Err(Error::OutOfRange { k, n });
    }
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[k] = ONE;
    StateVector::new(coeffs)
}

/// Poisson mass `Σ_{k>N} e^{−|α|²} |α|^{2k}/k!`, summed in log space.
pub fn coherent_tail_weight(alpha: C64, n: usize) -> f64 {
    let mean = alpha.norm_sqr();
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_fact: f64 = (1..=n + 1).map(|j| (j as f64).ln()).sum();
    let mut total = 0.0;
    let mut k = n + 1;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_fact).exp();
        total += term;
        if (k as f64 > mean && term <= 1e-20 * total) || (term == 0.0 && k as f64 > mean) {
            break;
        }
        k += 1;
        ln_fact += (k as f64).ln();
    }
    total
}

/// Coherent state `a_k ∝ α^k/sqrt(k!)` truncated to `k ≤ N`, without the
/// finite-energy guard.
pub fn truncated_coherent_state(alpha: C64, n: usize) -> Result<StateVector> {
    check_order(n)?;
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut c = ONE;
    coeffs.push(c);
    for k in 1..=n {
        c = c * alpha / (k as f64).sqrt();
        coeffs.push(c);
    }
    StateVector::with_tail(coeffs, coherent_tail_weight(alpha, n))
}

/// Coherent state at order `N`, rejected if the discarded tail exceeds the
/// finite-energy threshold.
pub fn coherent_state(alpha: C64, n: usize) -> Result<StateVector> {
    let state = truncated_coherent_state(alpha, n)?;
    let limit = tol(names::TAIL_WEIGHT, n);
    if state.tail_weight > limit {
        return Err(Error::TailWeight {
            tail: state.tail_weight,
            n,
            limit,
        });
    }
    Ok(state)
}

/// Normalized complex-Gaussian state of dimension `N + 1`.
pub fn random_state(n: usize, rng: &mut impl Rng) -> Result<StateVector> {
    let coeffs = (0..=n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::new(coeffs)
}

/// `ψ†·A·ψ`; for Hermitian `A` the imaginary part must vanish.
pub fn expectation(op: &impl LinearOperator, psi: &StateVector) -> Result<C64> {
    if op.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: psi.dim(),
        });
    }
    let value = inner(psi.coeffs(), &op.apply(psi.coeffs()));
    if op.is_hermitian() && value.im.abs() > tol(names::EXPECTATION_REAL, psi.dim() - 1) {
        return Err(Error::NonRealExpectation { imag: value.im });
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub n: usize,
    pub dq: f64,
    pub dp: f64,
    /// `½|⟨D_N⟩|`
    pub bound: f64,
    /// `ΔQ·ΔP − bound`
    pub margin: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub mean_d: f64,
    pub mean_h: f64,
}

fn spread(which: &'static str, op: &impl LinearOperator, psi: &StateVector) -> Result<(f64, f64)> {
    let mean = expectation(op, psi)?.re;
    // ⟨A²⟩ = ‖Aψ‖² for Hermitian A.
    let second = norm2(&op.apply(psi.coeffs())).powi(2);
    let var = second - mean * mean;
    if var < -tol(names::NEGATIVE_VARIANCE, psi.dim() - 1) {
        return Err(Error::NegativeVariance { which, value: var });
    }
    Ok((mean, var.max(0.0).sqrt()))
}

pub fn uncertainty_check(psi: &StateVector, n: usize) -> Result<UncertaintyReport> {
    if psi.dim() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: psi.dim(),
        });
    }
    let q = build_position(n)?;
    let p = MomentumOperator::new(n)?;
    let (mean_q, dq) = spread("Q", &q, psi)?;
    let (mean_p, dp) = spread("P", &p, psi)?;
    let mean_d = expectation(&DiagonalMatrix::new(action_difference_diagonal(n)), psi)?.re;
    let mean_h = expectation(&DiagonalMatrix::new(hamiltonian_diagonal(n)), psi)?.re;
    let bound = 0.5 * mean_d.abs();
    Ok(UncertaintyReport {
        n,
        dq,
        dp,
        bound,
        margin: dq * dp - bound,
        mean_q,
        mean_p,
        mean_d,
        mean_h,
    })
}

/// Worst violation `max(0, −margin)` over `count` seeded random states.
pub fn uncertainty_random(
    n: usize,
    count: usize,
    seed: u64,
    reg: &ToleranceRegistry,
) -> Result<CheckResult> {
    let (worst, ms) = timed(|| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let mut worst = 0.0_f64;
        for _ in 0..count {
            let psi = random_state(n, &mut rng)?;
            let violation = -uncertainty_check(&psi, n)?.margin;
            if violation > worst {
                worst = violation;
            }
        }
        Ok(worst)
    });
    Ok(CheckResult::new(
        names::UNCERTAINTY_MARGIN,
        n,
        worst?,
        reg.tol(names::UNCERTAINTY_MARGIN, n),
    )
    .with_runtime(ms))
}

/// `|⟨ψ|P_N|ψ⟩ − (U†ψ)†·P^(q)·(U†ψ)|`.
pub fn moment_basis_invariance(
    psi: &StateVector,
    basis: &PositionBasis,
    pq: &ComplexMatrix,
) -> Result<f64> {
    let p = MomentumOperator::new(basis.n)?;
    let fock = expectation(&p, psi)?;
    let u_adj = basis.modal.matrix().adjoint();
    let rotated = u_adj.apply(psi.coeffs());
    let position = inner(&rotated, &pq.apply(&rotated));
    Ok((fock - position).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionMeanRow {
    pub n: usize,
    pub mean_d: f64,
    /// `1 − ⟨D_N⟩ = (N+1)|a_N|²`, evaluated directly.
    pub deviation: f64,
    pub tail_weight: f64,
    pub converged: bool,
}

/// `⟨D_N⟩` for the coherent state `α` at each order. Orders whose truncated
/// tail exceeds the finite-energy threshold are kept but flagged.
pub fn action_mean_sweep(alpha: C64, n_list: &[usize]) -> Result<Vec<ActionMeanRow>> {
    n_list
        .iter()
        .map(|&n| {
            let psi = truncated_coherent_state(alpha, n)?;
            let mean_d = expectation(&DiagonalMatrix::new(action_difference_diagonal(n)), &psi)?.re;
            let deviation = (n + 1) as f64 * psi.coeffs()[n].norm_sqr();
            Ok(ActionMeanRow {
                n,
                mean_d,
                deviation,
                tail_weight: psi.tail_weight(),
                converged: psi.tail_weight() <= tol(names::TAIL_WEIGHT, n),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_hamiltonian;

    #[test]
    fn number_state_basics() {
        let s = number_state(0, 3).unwrap();
        assert_eq!(s.coeffs(), &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(number_state(4, 3), Err(Error::OutOfRange { k: 4, n: 3 })));

        let h = build_hamiltonian(3).unwrap();
        assert_eq!(expectation(&h, &number_state(1, 3).unwrap()).unwrap().re, 1.5);
        let d = DiagonalMatrix::new(action_difference_diagonal(7));
        assert_eq!(expectation(&d, &number_state(7, 7).unwrap()).unwrap().re, -7.0);
        let d3 = DiagonalMatrix::new(action_difference_diagonal(3));
        assert_eq!(expectation(&d3, &number_state(0, 3).unwrap()).unwrap().re, 1.0);
    }

    #[test]
    fn position_mean_vanishes_on_number_states() {
        let q = build_position(5).unwrap();
        for k in 0..=5 {
            assert_eq!(expectation(&q, &number_state(k, 5).unwrap()).unwrap(), ZERO);
        }
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let q = build_position(4).unwrap();
        assert!(matches!(
            expectation(&q, &number_state(0, 3).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let s = coherent_state(ZERO, 6).unwrap();
        assert_eq!(s, number_state(0, 6).unwrap());
        assert_eq!(s.tail_weight(), 0.0);
    }

    #[test]
    fn coherent_alpha_one_closed_forms() {
        let psi = coherent_state(ONE, 60).unwrap();
        assert!(psi.tail_weight() < 1e-80);
        let h = build_hamiltonian(60).unwrap();
        assert!((expectation(&h, &psi).unwrap().re - 1.5).abs() < 1e-10);
        let q = build_position(60).unwrap();
        assert!((expectation(&q, &psi).unwrap().re - 2f64.sqrt()).abs() < 1e-9);
        let d = DiagonalMatrix::new(action_difference_diagonal(60));
        let mean_d = expectation(&d, &psi).unwrap().re;
        let direct = 1.0 - 61.0 * psi.coeffs()[60].norm_sqr();
        assert!((mean_d - direct).abs() < 1e-12);
        assert!((mean_d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_weight_matches_poisson_complement() {
        // Small orders where 1 − Σ_{k≤N} is still accurate.
        let alpha = C64::new(1.2, -0.5);
        let mean = alpha.norm_sqr();
        for n in [0usize, 2, 5] {
            let mut head = 0.0;
            let mut term = (-mean).exp();
            for k in 0..=n {
                if k > 0 {
                    term *= mean / k as f64;
                }
                head += term;
            }
            let tail = coherent_tail_weight(alpha, n);
            assert!((tail - (1.0 - head)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn heavy_tail_is_rejected() {
        assert!(matches!(
            coherent_state(C64::new(3.0, 0.0), 20),
            Err(Error::TailWeight { .. })
        ));
    }

    #[test]
    fn ground_state_saturates() {
        for n in [1, 5, 30] {
            let r = uncertainty_check(&number_state(0, n).unwrap(), n).unwrap();
            let s = 0.5f64.sqrt();
            assert!((r.dq - s).abs() < 1e-15 && (r.dp - s).abs() < 1e-15);
            assert_eq!(r.bound, 0.5);
            assert!(r.margin.abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_state_saturates() {
        let r = uncertainty_check(&coherent_state(ONE, 60).unwrap(), 60).unwrap();
        assert!((r.dq * r.dp - 0.5).abs() < 1e-8);
        assert!((r.bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn edge_state_bound() {
        let n = 4;
        let r = uncertainty_check(&number_state(n, n).unwrap(), n).unwrap();
        assert_eq!(r.bound, 2.0);
        assert!(r.margin >= 0.0);
        // Brute force: ⟨N|Q²|N⟩ = ⟨N|P²|N⟩ = ω_{N−1}² = N/2.
        assert!((r.dq * r.dq - 2.0).abs() < 1e-14);
        assert!((r.dp * r.dp - 2.0).abs() < 1e-14);
    }

    #[test]
    fn uncertainty_dimension_checked() {
        assert!(uncertainty_check(&number_state(0, 3).unwrap(), 4).is_err());
    }

    #[test]
    fn action_mean_examples() {
        let rows = action_mean_sweep(ONE, &[20, 40, 60]).unwrap();
        assert!(rows.iter().all(|r| (r.mean_d - 1.0).abs() < 1e-12 && r.converged));
        assert!(rows[0].deviation > rows[1].deviation && rows[1].deviation > rows[2].deviation);

        for r in action_mean_sweep(ZERO, &[1, 2, 9]).unwrap() {
            assert_eq!(r.mean_d, 1.0);
        }

        let heavy = action_mean_sweep(C64::new(3.0, 0.0), &[20]).unwrap()[0];
        assert!(!heavy.converged);
        assert!(heavy.mean_d < 0.99);
    }

    #[test]
    fn random_states_satisfy_bound() {
        let c = uncertainty_random(5, 200, DEFAULT_SEED, ToleranceRegistry::standard()).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn moments_are_basis_invariant() {
        let n = 12;
        let basis = PositionBasis::new(n).unwrap();
        let pq = crate::actiondiff::momentum_in_basis(&basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let psi = random_state(n, &mut rng).unwrap();
            assert!(moment_basis_invariance(&psi, &basis, &pq).unwrap() <= 1e-9);
        }
    }
}
