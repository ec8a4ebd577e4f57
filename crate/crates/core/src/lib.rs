//! Verification, falsification and converse bounds for Jensen's operator
//! inequality on finite-dimensional Hermitian matrices.
//!
//! Integrals over a measure space are represented by finite weighted fields
//! of positive linear maps in Kraus form ([`maps::PositiveMapField`]).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod converse;
pub mod error;
pub mod generators;
pub mod hermitian;
pub mod instance;
pub mod jensen;
pub mod maps;
pub mod runner;
pub mod scalar;
pub mod subdiff;

pub use error::{Error, Result};
