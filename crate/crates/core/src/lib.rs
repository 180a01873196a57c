// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod countable;
pub mod error;
pub mod experiment;
pub mod potential;
pub mod renewal;
pub mod ruelle;
pub mod special;
pub mod spectral;
pub mod symbolic;
pub mod zeta;

pub use error::{Error, Result};
