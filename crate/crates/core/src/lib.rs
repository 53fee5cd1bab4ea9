// `!(x > 0.0)` is used on purpose throughout: it rejects NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classical;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod models;
pub mod scrambling;

pub use error::{Error, Result};
