//! Linear and binary mixed-integer optimization.
//!
//! Models are solved either exactly over [`Rational`] or in `f64`; the scalar type is the
//! generic parameter of [`solve_lp`] and [`solve_mip`]. [`Mode`] names the two choices for
//! callers that pick at runtime.

mod branch;
mod enumerate;
mod field;
mod simplex;
mod text;

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::polytope::{LinearConstraint, Relation};
use crate::ratlinalg::Rational;

pub use branch::{solve_mip, MipOptions};
pub use enumerate::{enumerate_binary_points, enumerate_binary_solutions, ENUMERATION_LIMIT};
pub use field::{LpField, FLOAT_FEASIBILITY_TOL, FLOAT_INTEGRALITY_TOL, FLOAT_PIVOT_TOL};
pub use simplex::solve_lp;
pub use text::{format_model, parse_model};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("simplex made no progress after {iterations} iterations")]
    NumericalStall { iterations: usize },
    #[error("branch-and-bound node budget of {budget} exhausted")]
    NodeLimitExceeded { budget: usize, incumbent: Option<f64> },
    #[error("{variables} free binary variables exceed the enumeration limit of {limit}")]
    TooLarge { variables: usize, limit: usize },
    #[error("variable {0} is neither binary nor fixed")]
    NotEnumerable(String),
}

/// Arithmetic used for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrality {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    /// `None` is −∞.
    pub lower: Option<Rational>,
    /// `None` is +∞.
    pub upper: Option<Rational>,
    pub integrality: Integrality,
}

impl Variable {
    pub fn continuous(
        name: impl Into<String>,
        lower: Option<Rational>,
        upper: Option<Rational>,
    ) -> Self {
        Variable { name: name.into(), lower, upper, integrality: Integrality::Continuous }
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self::continuous(name, None, None)
    }

    pub fn nonnegative(name: impl Into<String>) -> Self {
        Self::continuous(name, Some(Rational::zero()), None)
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            lower: Some(Rational::zero()),
            upper: Some(Rational::one()),
            integrality: Integrality::Binary,
        }
    }

    pub fn fixed(name: impl Into<String>, value: Rational) -> Self {
        Self::continuous(name, Some(value.clone()), Some(value))
    }

    pub fn is_fixed(&self) -> bool {
        matches!((&self.lower, &self.upper), (Some(l), Some(u)) if l == u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// Variables, a linear objective and linear constraints over the variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub variables: Vec<Variable>,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<LinearConstraint>,
}

impl MipModel {
    pub fn new(sense: Sense) -> Self {
        MipModel { variables: Vec::new(), sense, objective: Vec::new(), constraints: Vec::new() }
    }

    /// Appends a variable with objective coefficient zero. Existing constraints are widened.
    pub fn add_variable(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.objective.push(Rational::zero());
        for c in &mut self.constraints {
            c.coeffs.push(Rational::zero());
        }
        self.variables.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_constraint(&mut self, c: LinearConstraint) -> Result<(), OptimizerError> {
        if c.width() != self.num_vars() {
            return Err(OptimizerError::InvalidModel(format!(
                "constraint has {} coefficients for {} variables",
                c.width(),
                self.num_vars()
            )));
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn set_objective(&mut self, coeffs: Vec<Rational>) -> Result<(), OptimizerError> {
        if coeffs.len() != self.num_vars() {
            return Err(OptimizerError::InvalidModel(format!(
                "objective has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.objective = coeffs;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        let n = self.num_vars();
        if self.objective.len() != n {
            return Err(OptimizerError::InvalidModel("objective width mismatch".into()));
        }
        if let Some(k) = self.constraints.iter().position(|c| c.width() != n) {
            return Err(OptimizerError::InvalidModel(format!("constraint {} width mismatch", k + 1)));
        }
        for v in &self.variables {
            if let (Some(l), Some(u)) = (&v.lower, &v.upper) {
                if l > u {
                    return Err(OptimizerError::InvalidModel(format!(
                        "variable {} has lower bound above upper bound",
                        v.name
                    )));
                }
            }
            if v.integrality == Integrality::Binary {
                let inside = v.lower.as_ref().map_or(false, |l| !l.is_negative())
                    && v.upper.as_ref().map_or(false, |u| *u <= Rational::one());
                if !inside {
                    return Err(OptimizerError::InvalidModel(format!(
                        "binary variable {} has bounds outside [0,1]",
                        v.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Copy with every binary variable relaxed to a continuous one on the same bounds.
    pub fn relaxed(&self) -> Self {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.integrality = Integrality::Continuous;
        }
        m
    }

    pub fn binary_indices(&self) -> Vec<usize> {
        (0..self.num_vars())
            .filter(|&j| self.variables[j].integrality == Integrality::Binary)
            .collect()
    }

    /// Objective value of `x` under the model's coefficients.
    pub fn objective_value<F: LpField>(&self, x: &[F]) -> F {
        let mut acc = F::zero_value();
        for (c, v) in self.objective.iter().zip(x) {
            if !c.is_zero() {
                acc = acc.add(&F::from_rational(c).mul(v));
            }
        }
        acc
    }

    /// Largest violation of bounds or constraints at `x` (zero when feasible).
    pub fn max_violation<F: LpField>(&self, x: &[F]) -> f64 {
        let mut worst = 0.0f64;
        for (v, xj) in self.variables.iter().zip(x) {
            let xj = xj.to_f64();
            if let Some(l) = &v.lower {
                worst = worst.max(crate::ratlinalg::to_f64(l) - xj);
            }
            if let Some(u) = &v.upper {
                worst = worst.max(xj - crate::ratlinalg::to_f64(u));
            }
        }
        for c in &self.constraints {
            let mut lhs = F::zero_value();
            for (a, xj) in c.coeffs.iter().zip(x) {
                if !a.is_zero() {
                    lhs = lhs.add(&F::from_rational(a).mul(xj));
                }
            }
            let gap = lhs.sub(&F::from_rational(&c.rhs)).to_f64();
            worst = worst.max(match c.relation {
                Relation::Le => gap,
                Relation::Ge => -gap,
                Relation::Eq => gap.abs(),
            });
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "OPTIMAL",
            LpStatus::Infeasible => "INFEASIBLE",
            LpStatus::Unbounded => "UNBOUNDED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<F> {
    pub status: LpStatus,
    /// Primal values; empty unless optimal.
    pub x: Vec<F>,
    /// Objective value; zero unless optimal.
    pub objective: F,
    /// One multiplier per constraint for optimal LP solves, in the model's sense
    /// (see [`dual_objective`]). `None` for MIP results and non-optimal solves.
    pub duals: Option<Vec<F>>,
    /// Simplex pivots (LP) or explored nodes (MIP).
    pub work: usize,
}

impl<F: LpField> LpSolution<F> {
    pub(crate) fn without_point(status: LpStatus, work: usize) -> Self {
        LpSolution { status, x: Vec::new(), objective: F::zero_value(), duals: None, work }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Objective of the Lagrangian dual at row multipliers `duals`.
///
/// For a minimization the multipliers of `GE` rows must be nonnegative and of `LE` rows
/// nonpositive (reversed for maximization). Reduced costs `c − Aᵀy` are charged at the bound
/// that makes the dual a valid bound; an error names the first sign or bound violation.
pub fn dual_objective<F: LpField>(model: &MipModel, duals: &[F]) -> Result<F, String> {
    if duals.len() != model.constraints.len() {
        return Err(format!("{} multipliers for {} rows", duals.len(), model.constraints.len()));
    }
    let flip = model.sense == Sense::Max;
    let mut total = F::zero_value();
    let mut reduced: Vec<F> = model.objective.iter().map(F::from_rational).collect();
    for (k, (c, y)) in model.constraints.iter().zip(duals).enumerate() {
        let wrong_sign = match (c.relation, flip) {
            (Relation::Ge, false) | (Relation::Le, true) => y.is_neg(),
            (Relation::Le, false) | (Relation::Ge, true) => y.is_pos(),
            (Relation::Eq, _) => false,
        };
        if wrong_sign {
            return Err(format!("multiplier of row {} has the wrong sign", k + 1));
        }
        total = total.add(&F::from_rational(&c.rhs).mul(y));
        for (r, a) in reduced.iter_mut().zip(&c.coeffs) {
            if !a.is_zero() {
                r.sub_mul(&F::from_rational(a), y);
            }
        }
    }
    for (j, (r, v)) in reduced.iter().zip(&model.variables).enumerate() {
        // for a minimization a positive reduced cost is paid at the lower bound
        let at_lower = if flip { r.is_neg() } else { r.is_pos() };
        let at_upper = if flip { r.is_pos() } else { r.is_neg() };
        let bound = if at_lower {
            Some(&v.lower)
        } else if at_upper {
            Some(&v.upper)
        } else {
            None
        };
        if let Some(bound) = bound {
            match bound {
                Some(b) => total = total.add(&r.mul(&F::from_rational(b))),
                None => return Err(format!("reduced cost of variable {} hits an infinite bound", j + 1)),
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlinalg::int;

    #[test]
    fn add_variable_widens_existing_rows() {
        let mut m = MipModel::new(Sense::Max);
        m.add_variable(Variable::binary("a"));
        m.add_constraint(LinearConstraint::le(vec![int(1)], int(1))).unwrap();
        m.add_variable(Variable::binary("b"));
        assert_eq!(m.constraints[0].width(), 2);
        assert!(m.validate().is_ok());
        assert!(m.add_constraint(LinearConstraint::le(vec![int(1)], int(1))).is_err());
    }

    #[test]
    fn validate_rejects_bad_bounds() {
        let mut m = MipModel::new(Sense::Min);
        m.add_variable(Variable::continuous("x", Some(int(2)), Some(int(1))));
        assert!(m.validate().is_err());
        let mut m = MipModel::new(Sense::Min);
        m.add_variable(Variable {
            name: "b".into(),
            lower: Some(int(0)),
            upper: Some(int(2)),
            integrality: Integrality::Binary,
        });
        assert!(m.validate().is_err());
    }
}
