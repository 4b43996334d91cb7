//! Equality discovery and facet mining for integer programs given an explicit solution set,
//! with a travelling-salesman case study built on discounted-flow constraints.
//!
//! * [`ratlinalg`] exact rational matrices, rank and null spaces
//! * [`polytope`] point sets, affine hulls, equality discovery (`eca`)
//! * [`optimizer`] bounded-variable simplex and binary branch-and-bound, exact or float
//! * [`facetminer`] the facet-mining loop built on a big-M counting MIP
//! * [`tsplab`] TSP formulations, tour points, the mined inequality families and LP bounds

pub mod facetminer;
pub mod optimizer;
pub mod polytope;
pub mod ratlinalg;
pub mod tsplab;

pub use polytope::{ConstraintSystem, LinearConstraint, Relation, VertexSet};
pub use ratlinalg::{Rational, RationalMatrix};
