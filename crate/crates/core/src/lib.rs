//! Numerical laboratory for templated output-feedback stabilization of
//! analytic control systems.
//!
//! The crate is organized bottom-up:
//!
//! * [`jets`]: Taylor-jet arithmetic and the output-derivative maps `H_k`, `𝓗_q`.
//! * [`models`]: systems `(f, h, λ)`, working boxes, saturation, benchmarks.
//! * [`template`]: control templates, isometry selection, certification, search.
//! * [`observer`]: high-gain observer and its numerical left inverse.
//! * [`hybrid`]: flow/jump simulation of the closed loops.
//! * [`analysis`]: error series, decay fits and containment checks.
//! * [`cli`]: config-driven batch front-end.

// `!(a > 0.0)` is used on purpose so that NaN is rejected too; dual-number
// product and quotient rules trip the arithmetic-impl lint.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::suspicious_arithmetic_impl)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod hybrid;
pub mod integrate;
pub mod jets;
pub mod models;
pub mod observer;
pub mod template;

pub use error::{LabError, Result};
