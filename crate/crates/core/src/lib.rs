#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod interpret;
pub mod models;
pub mod rng;
pub mod svg;

pub use error::{Error, Result};
