//! Dense complex linear algebra on labeled tensor-product spaces.

mod eig;
mod labeled;

pub use eig::{
    hermitian_eig, jacobi_eigh, nuclear_norm, operator_norm, psd_order, sign, spectral_fn,
    EigenDecomposition, OrderVerdict, Ordering, JACOBI_MAX_SWEEPS, JACOBI_THRESHOLD,
};
pub use labeled::{
    lift_identity, matrix_to_rows, partial_trace, rows_to_matrix, tensor, CMatrix, HermitianCheck,
    LabeledOperator, Space,
};
