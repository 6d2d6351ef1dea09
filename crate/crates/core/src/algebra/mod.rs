//! Supercommutative series arithmetic.

pub mod context;
pub mod json;
pub mod parse;
pub mod random;
pub mod series;

pub use context::{GradedVariable, Parity, Role, VariableContext, LAMBDA};
pub use series::{int, rat, Coefficient, Monomial, Rational, SuperSeries, Term, TruncationPolicy};
