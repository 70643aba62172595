//! A solver library for weighted constraint networks whose cost functions
//! are unary tables, binary tables and linear inequalities. Propagation
//! raises a zero-arity lower bound by moving costs between functions:
//! node consistency, direct LP-based propagation of single linear
//! constraints, and threshold-based conflict analysis that combines several
//! constraints into one provable bound increase. A depth-first
//! branch-and-bound search closes instances to optimality.

pub mod cost;
pub mod boolview;
pub mod fixtures;
pub mod search;
pub mod vac;
pub mod mckp;
pub mod model;

pub use cost::Cost;
pub use model::{Cfn, ConstraintRef};
