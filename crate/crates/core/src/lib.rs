//! Weighted conditional type operators M_w E M_u on finite atomic measure spaces.
//!
//! The crate builds the operators as dense matrices in an orthonormal atom basis,
//! classifies them through explicit defect operators (m-isometry, quasi-m-isometry,
//! normality, p-hyponormality) and evaluates the function-level criteria expressed in
//! terms of E(uw), E(|u|²) and E(|w|²), auditing one route against the other.

pub mod classify;
pub mod cli;
pub mod condexp;
pub mod criteria;
pub mod error;
pub mod linop;
pub mod measure;
pub mod suite;

pub use condexp::CondExp;
pub use error::{Error, Result};
pub use linop::{mult_op, wct_op, CompressedOp, LinOp};
pub use measure::{geometric_space, grid_space, MeasureSpace, Mfunc, Partition};
pub use num_complex::Complex64;
