//! Dense complex linear algebra over labeled tensor-product registers.
//!
//! Every state or operator carries a [`RegisterLayout`]; binary operations
//! insist on equal layouts and tensor products concatenate them. Partial
//! traces and local operator application work by flat-index arithmetic over
//! the layout, never by building permutation matrices.

mod eigh;
mod layout;
mod matrix;
mod measures;
mod qr;
mod quantum;

pub use eigh::{eigh, Eigh};
pub use layout::{Register, RegisterLayout};
pub use matrix::Matrix;
pub use measures::{fidelity, pinv_sqrt, sqrt_psd, trace_distance};
pub use qr::qr;
pub use quantum::{
    embed_local,
    apply_local, partial_trace_matrix, partial_trace_outer, DensityOperator, HermitianOperator,
    StateVector, Tensor,
};

pub type C64 = num_complex::Complex<f64>;

/// Allowed deviation of a state-vector norm from one.
pub const NORM_TOL: f64 = 1e-9;
/// Allowed elementwise deviation from Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_REL_TOL * λ_max` count as zero.
pub const PSD_REL_TOL: f64 = 1e-10;
/// Allowed deviation of a density-operator trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Relative eigenvalue cutoff used by [`pinv_sqrt`] when none is given.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Eigenvalues below this (absolute) make [`pinv_sqrt`] reject its input.
pub const PINV_NEGATIVE_TOL: f64 = 1e-8;
