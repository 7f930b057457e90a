//! Discrete space-time fields, the operators acting on them, and coefficients.

mod coefficient;
mod field;
pub mod ops;

pub use coefficient::{mollify_coefficient, CoefficientField};
pub use field::SpaceTimeField;
pub use ops::*;
