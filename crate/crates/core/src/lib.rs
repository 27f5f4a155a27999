//! Generalized regenerating codes and their repair over connectivity graphs.
//!
//! The crate covers storage/bandwidth bounds, symbol-level product-matrix,
//! generalized product-matrix and stacked codes, bandwidth accounting for
//! accumulate-and-forward versus intermediate-processing repair on trees,
//! repair-degree optimization, and rank-metric protection against nodes
//! with corrupted storage.

pub mod degreeopt;
pub mod error;
pub mod exec;
pub mod gf;

pub use error::{Error, Result};
pub use exec::Execution;
pub mod adversarial;
pub mod bounds;
pub mod codes;
pub mod graphrepair;
pub mod selftest;
pub mod stacking;
pub mod util;
