//! Schmidt-type games on SL(2,R)/SL(2,Z) and the values of indefinite binary
//! quadratic forms.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod dd;
pub mod error;
pub mod forms;
pub mod game;
pub mod geometry;
pub mod lattice;
pub mod strategy;

pub use error::{Error, Result};
