//! Exact numeric substrate: rationals, linear constraint systems, a simplex
//! solver and polyhedral projection.

mod linear;
pub mod lp;
pub mod project;
mod rational;

pub use linear::{Constraint, ConstraintSystem, LinComb, Relation, Var};
pub use lp::{is_feasible, solve_lp, LpOutcome, LpStatus, Sense};
pub use project::{project, remove_redundant};
pub use rational::{ParseRationalError, Rational};
