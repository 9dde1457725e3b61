//! Library surface of the batch front-end, reused by the binary and its
//! integration tests.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod sweep;
