//! Models of what observers infer from the timing of a fixed robot path, and
//! tools to fit those models to ratings and to choose timings that convey a
//! chosen hidden state.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conditions;
pub mod error;
pub mod fitting;
pub mod inference;
pub mod kinematics;
pub mod optimizer;
pub mod trajectory;

pub use error::{Error, Result};
