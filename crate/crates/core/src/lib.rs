//! Finite-dimensional Heisenberg matrix mechanics.
//!
//! Builds the truncated oscillator matrices `Q_N`, `P_N`, `H_N` and the action
//! difference `D_N = [Q_N, P_N]/i`, diagonalizes them with an in-house
//! tridiagonal QL solver, and checks the exact structural identities that hold
//! at every finite `N`:
//!
//! * every eigenvector of `Q_N` has last component `1/sqrt(N+1)`;
//! * `U†·D_N·U = I − J` in the position (and, with phases `i^k`, momentum) basis;
//! * `U†·P_N·U` is the discrete Cauchy–Hilbert kernel `i/(x_k − x_j)`;
//! * `ΔQ·ΔP ≥ ½|⟨D_N⟩|`, with `⟨D_N⟩ → 1` on finite-energy states.

pub mod actiondiff;
pub mod cli;
pub mod eig;
pub mod error;
pub mod hermite;
pub mod matrix;
pub mod modal;
pub mod operators;
pub mod report;
pub mod spectra;
pub mod states;
pub mod suite;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, LinearOperator, C64};
