//! Maximal operators on weighted trees, the Bellman functions behind their
//! sharp integral estimates, and explicit extremal step functions.
//!
//! The runnable programs in `examples/` are the primary guide: `trees`,
//! `maximal`, `scalars`, `extremizer`, `sharpness`, `verify`, `io` and `cli`.

// negated float comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod extremizer;
pub mod io;
pub mod maximal;
pub mod scalars;
pub mod svg;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
