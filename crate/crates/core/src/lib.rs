//! Quantum f-divergences, non-commutative χ² metrics and strong data-processing
//! contraction coefficients of finite-dimensional quantum channels.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod contraction;
pub mod divergences;
pub mod error;
pub mod json;
pub mod linalg;
pub mod random;

pub use channels::{ChannelSpec, PrimitivityReport, QuantumChannel};
pub use error::{Error, Result};
pub use linalg::{CMatrix, DensityMatrix, EigenSystem, HermitianMatrix, Superoperator};
