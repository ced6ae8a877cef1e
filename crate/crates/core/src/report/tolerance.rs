//! Named tolerances for every numerical check in the crate.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    Constant,
    /// Multiplied by the matrix dimension `N + 1`.
    LinearInDim,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub default_tol: f64,
    pub scaling: Scaling,
}

impl Tolerance {
    pub fn at(&self, n: usize) -> f64 {
        match self.scaling {
            Scaling::Constant => self.default_tol,
            Scaling::LinearInDim => self.default_tol * (n + 1) as f64,
        }
    }
}

pub mod names {
    pub const GOLDEN_Q3: &str = "golden_Q3";
    pub const GOLDEN_P3: &str = "golden_P3";
    pub const GOLDEN_H3: &str = "golden_H3";
    pub const GOLDEN_D3: &str = "golden_D3";
    pub const GOLDEN_DQ3: &str = "golden_Dq3";

    pub const TRACE_ZERO: &str = "trace_zero";
    pub const RANK_ONE_IDENTITY: &str = "rank_one_identity";
    pub const HAMILTONIAN_DIAGONAL: &str = "hamiltonian_diagonal";
    pub const HAMILTONIAN_ANOMALY: &str = "hamiltonian_anomaly";
    pub const COMMUTATOR_DIAGONAL: &str = "commutator_diagonal";

    pub const EIG_RESIDUAL: &str = "eig_residual";
    pub const EIG_ORTHONORMALITY: &str = "eig_orthonormality";
    pub const EIG_NEAR_TIE: &str = "eig_near_tie";
    pub const EIGEN_ORACLE: &str = "eigen_oracle";
    pub const SPECTRAL_SYMMETRY: &str = "spectral_symmetry";

    pub const ZERO_POLISH: &str = "hermite_zero_polish";
    pub const RECURSION_CLOSED_FORM: &str = "recursion_closed_form";
    pub const RECURSION_VS_EIG: &str = "recursion_vs_eig";

    pub const CONSTANT_LAST_ROW: &str = "constant_last_row";
    pub const ORIENTATION: &str = "orientation";
    pub const ROW_SUM: &str = "row_sum";
    pub const KOCHER_ROTATION: &str = "kocher_rotation";
    pub const BLOCK_FACTOR: &str = "block_factor";
    pub const BLOCK_CORNER: &str = "block_corner";
    pub const PHASE_SIMILARITY: &str = "phase_similarity";
    pub const MOMENTUM_DIAGONALIZATION: &str = "momentum_diagonalization";

    pub const IDENTITY_MINUS_ALLONES: &str = "identity_minus_allones";
    pub const TRANSFORM_IMAGINARY: &str = "transform_imaginary";
    pub const HERMITICITY: &str = "hermiticity";
    pub const KERNEL_MATCH: &str = "kernel_match";
    pub const KERNEL_ZERO_DIAGONAL: &str = "kernel_zero_diagonal";
    pub const NODE_SPACING: &str = "node_spacing";
    pub const COMMUTATOR_RECONSTRUCTION: &str = "commutator_reconstruction";
    pub const MOMENTUM_BASIS_STRUCTURE: &str = "momentum_basis_structure";

    pub const STATE_NORM: &str = "state_norm";
    pub const TAIL_WEIGHT: &str = "tail_weight";
    pub const EXPECTATION_REAL: &str = "expectation_real";
    pub const NEGATIVE_VARIANCE: &str = "negative_variance";
    pub const UNCERTAINTY_MARGIN: &str = "uncertainty_margin";
    pub const COHERENT_SATURATION: &str = "coherent_saturation";
    pub const ACTION_MEAN: &str = "action_mean";
    pub const MOMENT_BASIS_INVARIANCE: &str = "moment_basis_invariance";

    pub const GAP_MONOTONICITY: &str = "gap_monotonicity";
    pub const RESOLVENT_MONOTONICITY: &str = "resolvent_monotonicity";
    pub const ACTION_MEAN_MONOTONICITY: &str = "action_mean_monotonicity";
}

use names::*;
use Scaling::{Constant, LinearInDim};

const STANDARD: &[(&str, f64, Scaling)] = &[
    (GOLDEN_Q3, 1e-12, Constant),
    (GOLDEN_P3, 1e-12, Constant),
    (GOLDEN_H3, 1e-12, Constant),
    (GOLDEN_D3, 1e-12, Constant),
    (GOLDEN_DQ3, 1e-12, Constant),
    (TRACE_ZERO, 0.0, Constant),
    (RANK_ONE_IDENTITY, 0.0, Constant),
    (HAMILTONIAN_DIAGONAL, 1e-14, LinearInDim),
    (HAMILTONIAN_ANOMALY, 0.0, Constant),
    (COMMUTATOR_DIAGONAL, 1e-13, LinearInDim),
    // Multiplied by the largest off-diagonal modulus at the call site.
    (EIG_RESIDUAL, 1e-13, LinearInDim),
    (EIG_ORTHONORMALITY, 1e-12, Constant),
    // Relative to max(1, |λ|max).
    (EIG_NEAR_TIE, 1e-14, Constant),
    // Relative to max(1, |λ|).
    (EIGEN_ORACLE, 1e-12, Constant),
    (SPECTRAL_SYMMETRY, 1e-12, Constant),
    (ZERO_POLISH, 1e-13, Constant),
    (RECURSION_CLOSED_FORM, 1e-12, Constant),
    (RECURSION_VS_EIG, 1e-9, Constant),
    (CONSTANT_LAST_ROW, 1e-10, Constant),
    (ORIENTATION, 1e-13, Constant),
    (ROW_SUM, 1e-10, Constant),
    (KOCHER_ROTATION, 1e-13, Constant),
    (BLOCK_FACTOR, 1e-9, Constant),
    (BLOCK_CORNER, 1e-10, Constant),
    (PHASE_SIMILARITY, 1e-15, Constant),
    (MOMENTUM_DIAGONALIZATION, 1e-11, Constant),
    (IDENTITY_MINUS_ALLONES, 1e-9, LinearInDim),
    (TRANSFORM_IMAGINARY, 1e-12, Constant),
    (HERMITICITY, 1e-12, Constant),
    (KERNEL_MATCH, 1e-8, LinearInDim),
    (KERNEL_ZERO_DIAGONAL, 1e-12, Constant),
    (NODE_SPACING, 1e-13, Constant),
    (COMMUTATOR_RECONSTRUCTION, 1e-9, LinearInDim),
    (MOMENTUM_BASIS_STRUCTURE, 1e-9, LinearInDim),
    (STATE_NORM, 1e-12, Constant),
    (TAIL_WEIGHT, 1e-6, Constant),
    (EXPECTATION_REAL, 1e-12, Constant),
    (NEGATIVE_VARIANCE, 1e-12, Constant),
    (UNCERTAINTY_MARGIN, 1e-10, Constant),
    (COHERENT_SATURATION, 1e-8, Constant),
    (ACTION_MEAN, 1e-12, Constant),
    (MOMENT_BASIS_INVARIANCE, 1e-9, Constant),
    (GAP_MONOTONICITY, 1e-12, Constant),
    // Trend checks: the error is the largest increase between neighbours.
    (RESOLVENT_MONOTONICITY, 0.0, Constant),
    (ACTION_MEAN_MONOTONICITY, 0.0, Constant),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceRegistry {
    entries: BTreeMap<&'static str, Tolerance>,
}

impl ToleranceRegistry {
    /// The built-in registry; shared and read-only.
    pub fn standard() -> &'static ToleranceRegistry {
        static REGISTRY: OnceLock<ToleranceRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            let entries = STANDARD
                .iter()
                .map(|&(name, default_tol, scaling)| (name, Tolerance { default_tol, scaling }))
                .collect();
            ToleranceRegistry { entries }
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<Tolerance> {
        self.entries
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownCheck(name.to_string()))
    }

    /// Resolved tolerance for a check at order `n`.
    ///
    /// Panics on an unregistered name; all call sites use the constants in
    /// [`names`].
    pub fn tol(&self, name: &str, n: usize) -> f64 {
        match self.entries.get(name) {
            Some(t) => t.at(n),
            None => panic!("check `{name}` is not registered"),
        }
    }

    /// Replaces the base tolerance of `name`, keeping its scaling.
    pub fn with_override(mut self, name: &str, default_tol: f64) -> Result<Self> {
        if !(default_tol.is_finite() && default_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance for `{name}` must be finite and non-negative"
            )));
        }
        let entry = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::UnknownCheck(name.to_string()))?;
        entry.default_tol = default_tol;
        Ok(self)
    }
}

pub fn tol(name: &str, n: usize) -> f64 {
    ToleranceRegistry::standard().tol(name, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_are_unique() {
        let mut seen = HashSet::new();
        for (name, _, _) in STANDARD {
            assert!(seen.insert(*name), "duplicate check name {name}");
        }
        assert_eq!(seen.len(), ToleranceRegistry::standard().names().count());
    }

    #[test]
    fn linear_scaling_uses_dimension() {
        let reg = ToleranceRegistry::standard();
        assert_eq!(reg.tol(KERNEL_MATCH, 100), 1e-8 * 101.0);
        assert_eq!(reg.tol(CONSTANT_LAST_ROW, 100), 1e-10);
    }

    #[test]
    fn override_keeps_scaling_and_rejects_unknown() {
        let reg = ToleranceRegistry::standard()
            .clone()
            .with_override(IDENTITY_MINUS_ALLONES, 1e-6)
            .unwrap();
        assert!((reg.tol(IDENTITY_MINUS_ALLONES, 9) - 1e-5).abs() < 1e-20);
        assert!(matches!(
            ToleranceRegistry::standard().clone().with_override("bogus", 1.0),
            Err(Error::UnknownCheck(_))
        ));
        assert!(ToleranceRegistry::standard()
            .clone()
            .with_override(KERNEL_MATCH, f64::NAN)
            .is_err());
    }
}
