//! Exact calculus of higher Koszul brackets, homotopy Poisson structures and
//! thick morphisms on truncated supercommutative series.

pub mod algebra;
pub mod error;

pub use error::{Error, Result};
pub mod brackets;
pub mod chart;
pub mod linfty;
pub mod koszul;
pub mod microformal;
pub mod bv_operator;
pub mod scenario;
pub mod verify;
pub mod cli;
