//! Volumes of perspective and naive relaxations of convex power, exponential
//! and super-polynomial functions of a linear form, with exact integration
//! over boxes, zonotopes and simplices and the concave envelope over boxes.

// `!(x > 0.0)` style guards reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod envelope;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod integration;
pub mod parallel;
pub mod quadrature;
pub mod relaxation;

pub use error::{Error, Result};
