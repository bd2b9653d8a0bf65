//! Port-based state preparation (PBSP) and the programmable hybrid processor
//! built on top of it.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`linalg`]: dense complex linear algebra over labeled registers.
//! - [`states`]: maximally entangled resources, Haar sampling, program states.
//! - [`pbsp`]: the port measurements, exact channel evaluation (dense and
//!   structured) and Monte Carlo sampling.
//! - [`pbt`]: the standard port-based teleportation baseline (pretty good
//!   measurement on EPR pairs).
//! - [`uphp`]: the hybrid processor and the random access code extracted from it.
//! - [`bounds`]: closed-form bounds and the non-signaling certificates.
//!
//! Reports, file formats and the command line live in the `pbsp-cli` crate.

#![no_std]
#![forbid(unsafe_code)]
// `num_traits::Float` supplies sqrt/ln/powf without std. Whenever std is in
// the crate graph (tests, or a std dependent enabling features) the inherent
// f64 methods win and those imports look unused, hence the per-import allows.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod pbsp;
pub mod pbt;
pub mod states;
pub mod uphp;

pub use error::{Error, Result};
pub use linalg::{C64, DensityOperator, HermitianOperator, Matrix, RegisterLayout, StateVector};
