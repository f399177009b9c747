//! Interval bounds on event probabilities from partial specifications
//! structured by an undirected independence map.

pub mod error;
pub mod events;
pub mod global;
pub mod graph;
pub mod interval;
pub mod jointree;
pub mod model;
pub mod numeric;

pub use error::{Error, Result};
pub use events::{EventExpr, Scope};
pub use interval::{Bounds, Interval};
pub use model::{parse_model, PartialSpecification, Statement};
pub use numeric::Rational;
