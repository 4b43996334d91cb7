#![allow(dead_code)]

use ineqmine::polytope::{parse_lin, parse_vtx};
use ineqmine::ratlinalg::int;
use ineqmine::{ConstraintSystem, LinearConstraint, Rational, VertexSet};

pub const STASHEFF_VTX: &str = include_str!("../../data/stasheff.vtx");
pub const STASHEFF_KNOWN: &str = include_str!("../../data/stasheff_known.lin");
pub const STASHEFF_MISSING: &str = include_str!("../../data/stasheff_missing.lin");
pub const STASHEFF_EQ: &str = include_str!("../../data/stasheff_eq.lin");

pub fn stasheff() -> VertexSet {
    parse_vtx(STASHEFF_VTX).unwrap()
}

pub fn known() -> Vec<LinearConstraint> {
    parse_lin(STASHEFF_KNOWN, Some(4)).unwrap()
}

pub fn missing() -> Vec<LinearConstraint> {
    parse_lin(STASHEFF_MISSING, Some(4)).unwrap()
}

pub fn equality() -> ConstraintSystem {
    ConstraintSystem::from_constraints(4, parse_lin(STASHEFF_EQ, Some(4)).unwrap()).unwrap()
}

pub fn system(constraints: Vec<LinearConstraint>) -> ConstraintSystem {
    ConstraintSystem::from_constraints(4, constraints).unwrap()
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}
