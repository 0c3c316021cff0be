//! Quantum-channel nuclear-norm optimization with sign-function dual
//! certificates.
//!
//! The crate is organized bottom-up: [`linalg`] provides labeled dense
//! complex operators, [`superop`] Choi matrices and superoperators,
//! [`certificate`] the residual / sign / `H` pipeline, [`solver`] the
//! minimization over channels, [`symmetry`] the diagonal sign-flip group,
//! and [`paperbench`] the two-qubit counterexample and a randomized search.

pub mod certificate;
pub mod error;
pub mod linalg;
pub mod paperbench;
pub mod par;
pub mod solver;
pub mod superop;
pub mod symmetry;
pub mod tol;

pub use error::{Error, Result};
