//! Exact symbolic engine for formal oscillatory integrals, oscillatory point
//! distributions and natural star products.
//!
//! Everything is computed over Gaussian rationals with truncation in an explicit
//! grading, so results are exact up to the requested order.

pub mod cli;
pub mod error;
pub mod filtered;
pub mod foi;
pub mod grading;
pub mod index;
pub mod jet;
pub mod json;
pub mod matrix;
pub mod operator;
pub mod oscillatory;
pub mod scalar;
pub mod star;
