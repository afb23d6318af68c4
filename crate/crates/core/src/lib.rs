//! Gaussian-state dynamics of the Lindblad-damped quantum harmonic oscillator.
// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod classicality;
pub mod config;
pub mod decoherence;
pub mod error;
pub mod fpe;
pub mod io;
pub mod linalg;
pub mod model;
pub mod propagate;
pub mod quadrature;
pub mod states;

pub use error::{Error, Result};
