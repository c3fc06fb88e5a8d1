//! Numerical verification of Kähler immersions into products of two real
//! space forms.

pub mod ambient;
pub mod catalog;
pub mod checks;
pub mod config;
pub mod error;
pub mod expr;
pub mod fd;
pub mod jetcalc;
pub mod kahler;
pub mod linalg;
pub mod par;
pub mod report;
pub mod runner;
pub mod sample;
pub mod tensors;

pub use error::{GeometryError, Result};
