//! Threshold-based sampling with leaky integrate-and-fire (LIF) and
//! send-on-delta (SOD), Weyl discrepancy metrics on signals and event
//! sequences, approximate reconstruction from LIF events, and estimation of
//! the reconstruction error from re-sampled events alone.

// `!(a < b)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrepancy;
pub mod error;
pub mod estimator;
pub mod io;
pub mod quadrature;
pub mod reconstruction;
pub mod sampler;
pub mod signal;

pub use error::{Error, Result};
