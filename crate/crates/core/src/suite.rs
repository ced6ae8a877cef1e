//! Named verification checks, their groups, and a runner that evaluates a
//! selection at one order `N`.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::actiondiff::{
    action_difference_in_position_basis, check_identity_minus_allones, commutator_reconstruction,
    kernel_match_from, kernel_zero_diagonal, momentum_basis_structure_from, momentum_in_basis,
};
use crate::eig::phase_diagonal;
use crate::error::{Error, Result};
use crate::hermite::hermite_zeros_oracle;
use crate::matrix::{ComplexMatrix, LinearOperator, C64};
use crate::modal::{
    block_factor, check_constant_last_row, check_kocher_rotation, kocher_rotation,
    momentum_diagonalization_defect, momentum_modal_from, row_sum_defect, PositionBasis,
};
use crate::operators::{
    build_action_difference, build_hamiltonian, build_momentum, build_position, check_order,
    rank_one_defect, MomentumOperator,
};
use crate::report::fixture::{compare_to_fixture, load_fixture};
use crate::report::tolerance::names::*;
use crate::report::{timed, CheckResult, ToleranceRegistry};
use crate::spectra::anomaly_bookkeeping_defect;
use crate::states::{
    moment_basis_invariance, random_state, truncated_coherent_state, uncertainty_check,
    uncertainty_random, DEFAULT_SEED,
};

/// Every check the runner knows, in presentation order.
pub const CHECKS: &[&str] = &[
    TRACE_ZERO,
    RANK_ONE_IDENTITY,
    HAMILTONIAN_ANOMALY,
    EIGEN_ORACLE,
    SPECTRAL_SYMMETRY,
    PHASE_SIMILARITY,
    CONSTANT_LAST_ROW,
    ROW_SUM,
    KOCHER_ROTATION,
    BLOCK_FACTOR,
    MOMENTUM_DIAGONALIZATION,
    IDENTITY_MINUS_ALLONES,
    TRANSFORM_IMAGINARY,
    MOMENTUM_BASIS_STRUCTURE,
    KERNEL_MATCH,
    KERNEL_ZERO_DIAGONAL,
    HERMITICITY,
    COMMUTATOR_RECONSTRUCTION,
    GOLDEN_Q3,
    GOLDEN_P3,
    GOLDEN_H3,
    GOLDEN_D3,
    GOLDEN_DQ3,
    UNCERTAINTY_MARGIN,
    MOMENT_BASIS_INVARIANCE,
    COHERENT_SATURATION,
    ACTION_MEAN,
];

/// Named groups accepted by `--suite`. `all` covers every group except
/// `coherent`, whose outcome depends on `α` and on the truncation being long
/// enough for the state.
pub const GROUPS: &[(&str, &[&str])] = &[
    ("operators", &[TRACE_ZERO, RANK_ONE_IDENTITY, HAMILTONIAN_ANOMALY]),
    ("eigen", &[EIGEN_ORACLE, SPECTRAL_SYMMETRY, PHASE_SIMILARITY]),
    (
        "modal",
        &[CONSTANT_LAST_ROW, ROW_SUM, KOCHER_ROTATION, BLOCK_FACTOR, MOMENTUM_DIAGONALIZATION],
    ),
    (
        "actiondiff",
        &[IDENTITY_MINUS_ALLONES, TRANSFORM_IMAGINARY, MOMENTUM_BASIS_STRUCTURE],
    ),
    (
        "kernel",
        &[KERNEL_MATCH, KERNEL_ZERO_DIAGONAL, HERMITICITY, COMMUTATOR_RECONSTRUCTION],
    ),
    ("golden", &[GOLDEN_Q3, GOLDEN_P3, GOLDEN_H3, GOLDEN_D3, GOLDEN_DQ3]),
    ("uncertainty", &[UNCERTAINTY_MARGIN, MOMENT_BASIS_INVARIANCE]),
    ("coherent", &[COHERENT_SATURATION, ACTION_MEAN]),
];

/// Expands group and check names into a deduplicated selection in [`CHECKS`]
/// order. Unknown names are rejected.
pub fn resolve_suite<S: AsRef<str>>(items: &[S]) -> Result<Vec<&'static str>> {
    let mut selected = vec![false; CHECKS.len()];
    let mut mark = |name: &str| {
        let i = CHECKS.iter().position(|c| *c == name).expect("group members are checks");
        selected[i] = true;
    };
    for item in items {
        let item = item.as_ref().trim();
        if item == "all" {
            GROUPS
                .iter()
                .filter(|(g, _)| *g != "coherent")
                .flat_map(|(_, members)| members.iter())
                .for_each(|c| mark(c));
        } else if let Some((_, members)) = GROUPS.iter().find(|(g, _)| *g == item) {
            members.iter().for_each(|c| mark(c));
        } else if CHECKS.contains(&item) {
            mark(item);
        } else {
            return Err(Error::UnknownCheck(item.to_string()));
        }
    }
    Ok(CHECKS
        .iter()
        .zip(selected)
        .filter_map(|(c, s)| s.then_some(*c))
        .collect())
}

/// Whether `check` is defined at order `n`. Inapplicable checks are skipped.
pub fn applies(check: &str, n: usize) -> bool {
    match check {
        KOCHER_ROTATION | BLOCK_FACTOR => n >= 1,
        GOLDEN_Q3 | GOLDEN_P3 | GOLDEN_H3 | GOLDEN_D3 | GOLDEN_DQ3 => n == 3,
        _ => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random states drawn by `uncertainty_margin`.
    pub random_states: usize,
    /// Random states drawn by `moment_basis_invariance`.
    pub invariance_states: usize,
    /// Coherent amplitude for the `coherent` group.
    pub alpha: C64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            random_states: 1000,
            invariance_states: 16,
            alpha: C64::new(1.0, 0.0),
        }
    }
}

type Shared<T> = OnceLock<std::result::Result<T, String>>;

struct Context<'a> {
    n: usize,
    reg: &'a ToleranceRegistry,
    opts: &'a SuiteOptions,
    basis: Shared<PositionBasis>,
    pq: Shared<ComplexMatrix>,
    dq: Shared<ComplexMatrix>,
}

impl Context<'_> {
    fn basis(&self) -> Result<&PositionBasis> {
        shared(&self.basis, || PositionBasis::new(self.n))
    }

    fn pq(&self) -> Result<&ComplexMatrix> {
        shared(&self.pq, || momentum_in_basis(self.basis()?))
    }

    fn dq(&self) -> Result<&ComplexMatrix> {
        shared(&self.dq, || action_difference_in_position_basis(self.basis()?))
    }

    /// A check reduced to a bare error value, timed and compared to its tolerance.
    fn scalar(&self, name: &str, f: impl FnOnce() -> Result<f64>) -> Result<CheckResult> {
        let (err, ms) = timed(f);
        Ok(CheckResult::new(name, self.n, err?, self.reg.tol(name, self.n)).with_runtime(ms))
    }
}

fn shared<T>(cell: &Shared<T>, init: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(|| init().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::InvalidArgument(e.clone()))
}

/// Runs `checks` at order `n`, in parallel, skipping those that do not apply.
/// A check whose computation fails is reported as a failed result rather than
/// aborting the run. Output order follows the input order.
pub fn run_suite(
    n: usize,
    checks: &[&'static str],
    reg: &ToleranceRegistry,
    opts: &SuiteOptions,
) -> Result<Vec<CheckResult>> {
    check_order(n)?;
    if let Some(bad) = checks.iter().find(|c| !CHECKS.contains(c)) {
        return Err(Error::UnknownCheck(bad.to_string()));
    }
    let ctx = Context {
        n,
        reg,
        opts,
        basis: OnceLock::new(),
        pq: OnceLock::new(),
        dq: OnceLock::new(),
    };
    Ok(checks
        .par_iter()
        .filter(|c| applies(c, n))
        .map(|&name| {
            run_one(name, &ctx).unwrap_or_else(|e| CheckResult::errored(name, n, reg.tol(name, n), e))
        })
        .collect())
}

fn run_one(name: &'static str, ctx: &Context) -> Result<CheckResult> {
    let n = ctx.n;
    let reg = ctx.reg;
    match name {
        TRACE_ZERO => ctx.scalar(name, || Ok(build_action_difference(n)?.trace().abs())),
        RANK_ONE_IDENTITY => ctx.scalar(name, || Ok(rank_one_defect(&build_action_difference(n)?))),
        HAMILTONIAN_ANOMALY => ctx.scalar(name, || anomaly_bookkeeping_defect(n)),
        EIGEN_ORACLE => {
            let basis = ctx.basis()?;
            ctx.scalar(name, || {
                let oracle = hermite_zeros_oracle(n + 1)?;
                Ok(basis
                    .nodes()
                    .iter()
                    .zip(oracle.values())
                    .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                    .fold(0.0, f64::max))
            })
        }
        SPECTRAL_SYMMETRY => {
            let basis = ctx.basis()?;
            ctx.scalar(name, || Ok(basis.spectrum.symmetry_defect()))
        }
        PHASE_SIMILARITY => ctx.scalar(name, || phase_similarity_defect(n)),
        CONSTANT_LAST_ROW => Ok(check_constant_last_row(&ctx.basis()?.modal, reg)),
        ROW_SUM => {
            let basis = ctx.basis()?;
            ctx.scalar(name, || Ok(row_sum_defect(&basis.modal)))
        }
        KOCHER_ROTATION => Ok(check_kocher_rotation(&kocher_rotation(n)?, reg)),
        BLOCK_FACTOR => Ok(block_factor(&ctx.basis()?.modal, &kocher_rotation(n)?, reg)?.1),
        MOMENTUM_DIAGONALIZATION => {
            let basis = ctx.basis()?;
            ctx.scalar(name, || momentum_diagonalization_defect(basis, &momentum_modal_from(basis)?))
        }
        IDENTITY_MINUS_ALLONES => Ok(check_identity_minus_allones(ctx.dq()?, reg)),
        TRANSFORM_IMAGINARY => {
            let dq = ctx.dq()?;
            ctx.scalar(name, || Ok(dq.max_imag()))
        }
        MOMENTUM_BASIS_STRUCTURE => momentum_basis_structure_from(ctx.basis()?, reg),
        KERNEL_MATCH => kernel_match_from(ctx.basis()?, ctx.pq()?, reg),
        KERNEL_ZERO_DIAGONAL => Ok(kernel_zero_diagonal(ctx.pq()?, reg)),
        HERMITICITY => {
            let pq = ctx.pq()?;
            ctx.scalar(name, || Ok(pq.hermitian_defect()))
        }
        COMMUTATOR_RECONSTRUCTION => Ok(commutator_reconstruction(ctx.basis()?, ctx.pq()?, reg)),
        GOLDEN_Q3 => golden("Q3", build_position(n)?.to_dense(), reg),
        GOLDEN_P3 => golden("P3", build_momentum(n)?, reg),
        GOLDEN_H3 => golden("H3", build_hamiltonian(n)?.to_dense(), reg),
        GOLDEN_D3 => golden("D3", build_action_difference(n)?.to_dense(), reg),
        GOLDEN_DQ3 => golden("Dq3", ctx.dq()?.clone(), reg),
        UNCERTAINTY_MARGIN => uncertainty_random(n, ctx.opts.random_states, ctx.opts.seed, reg),
        MOMENT_BASIS_INVARIANCE => {
            let (basis, pq) = (ctx.basis()?, ctx.pq()?);
            ctx.scalar(name, || {
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed.rotate_left(32) ^ n as u64);
                let mut worst = 0.0_f64;
                for _ in 0..ctx.opts.invariance_states {
                    let psi = random_state(n, &mut rng)?;
                    worst = worst.max(moment_basis_invariance(&psi, basis, pq)?);
                }
                Ok(worst)
            })
        }
        COHERENT_SATURATION => ctx.scalar(name, || {
            let r = uncertainty_check(&truncated_coherent_state(ctx.opts.alpha, n)?, n)?;
            Ok((r.dq * r.dp - 0.5).abs())
        }),
        ACTION_MEAN => ctx.scalar(name, || {
            let r = uncertainty_check(&truncated_coherent_state(ctx.opts.alpha, n)?, n)?;
            Ok((r.mean_d - 1.0).abs())
        }),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

fn golden(fixture: &str, actual: ComplexMatrix, reg: &ToleranceRegistry) -> Result<CheckResult> {
    let fx = load_fixture(fixture)?;
    let (res, ms) = timed(|| compare_to_fixture(&actual, &fx, reg.tol(&format!("golden_{fixture}"), fx.n)));
    Ok(res?.with_runtime(ms))
}

/// `max |Φ†·P_N·Φ − Q_N|` over the band, `Φ = diag(i^k)`. Entries off the
/// band are zero on both sides.
fn phase_similarity_defect(n: usize) -> Result<f64> {
    let p = MomentumOperator::new(n)?;
    let q = build_position(n)?;
    let phi = phase_diagonal(n);
    let mut worst = 0.0_f64;
    for j in 0..=n {
        for k in j.saturating_sub(1)..=(j + 1).min(n) {
            let lhs = phi[j].conj() * p.entry(j, k) * phi[k];
            let rhs = match j.abs_diff(k) {
                0 => q.diag()[j],
                _ => q.offdiag()[j.min(k)],
            };
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}
