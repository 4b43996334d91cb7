//! Point sets, linear constraints, affine hulls and equality discovery.

mod io;
pub mod random;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ratlinalg::{
    self, dot, format_rational, null_space_basis, primitive_integer_form, rank, Rational,
    RationalMatrix, RowBasis,
};

pub use io::{format_lin, format_vtx, parse_lin, parse_lin_line, parse_vtx, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("vertex set must contain at least one point")]
    EmptySet,
    #[error("point {index} has length {found}, expected {expected}")]
    PointLength { index: usize, expected: usize, found: usize },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("difference matrix needs at least two points")]
    SingletonSet,
    #[error("constraint has {found} coefficients, expected {expected}")]
    ConstraintWidth { expected: usize, found: usize },
    #[error("point {point} violates known equality {constraint}")]
    InconsistentInput { point: usize, constraint: usize },
    #[error("label {0} is out of range")]
    LabelOutOfRange(usize),
}

/// Finite point set `S = {s_1, .., s_N}`; labels are 1-based in reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    dim: usize,
    points: Vec<Vec<Rational>>,
}

impl VertexSet {
    pub fn new(points: Vec<Vec<Rational>>) -> Result<Self, PolytopeError> {
        let dim = points.first().ok_or(PolytopeError::EmptySet)?.len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(PolytopeError::PointLength { index, expected: dim, found: p.len() });
            }
        }
        let mut seen = std::collections::HashMap::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if let Some(first) = seen.insert(p, index) {
                return Err(PolytopeError::DuplicatePoint { first, second: index });
            }
        }
        Ok(Self { dim, points })
    }

    pub fn from_i64(points: &[&[i64]]) -> Result<Self, PolytopeError> {
        Self::new(
            points
                .iter()
                .map(|p| p.iter().map(|&v| ratlinalg::int(v)).collect())
                .collect(),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Rational] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    /// Sub-set by 0-based indices, keeping the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, PolytopeError> {
        let pts = indices
            .iter()
            .map(|&i| self.points.get(i).cloned().ok_or(PolytopeError::LabelOutOfRange(i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(pts)
    }

    /// Largest absolute coordinate over all points.
    pub fn max_abs_coordinate(&self) -> Rational {
        self.points
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Same point set with a different point in first position.
    pub fn with_anchor(&self, anchor: usize) -> Self {
        let mut points = self.points.clone();
        points.swap(0, anchor);
        Self { dim: self.dim, points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Eq => "EQ",
            Relation::Ge => "GE",
            Relation::Le => "LE",
        }
    }

    fn flipped(self) -> Self {
        match self {
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
            Relation::Le => Relation::Ge,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `coeffs · x  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self { coeffs, relation, rhs }
    }

    pub fn eq(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn ge(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x)
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Le => lhs <= self.rhs,
        }
    }

    pub fn is_tight_at(&self, x: &[Rational]) -> bool {
        self.lhs(x) == self.rhs
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Multiplies both sides by -1, flipping the relation.
    pub fn negated(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            relation: self.relation.flipped(),
            rhs: -&self.rhs,
        }
    }

    /// The same half-space written as `π·x <= π0`; `None` for equalities.
    pub fn as_le(&self) -> Option<Self> {
        match self.relation {
            Relation::Le => Some(self.clone()),
            Relation::Ge => Some(self.negated()),
            Relation::Eq => None,
        }
    }

    /// Scales to coprime integer coefficients with the first nonzero coefficient positive,
    /// flipping the relation when the scale is negative.
    pub fn primitive(&self) -> Self {
        let Some(idx) = self.coeffs.iter().position(|c| !c.is_zero()) else {
            return self.clone();
        };
        // the scale comes from the coefficients only; rhs may stay fractional
        let p = primitive_integer_form(&self.coeffs);
        let factor = &p[idx] / &self.coeffs[idx];
        let rhs = &self.rhs * &factor;
        let relation = if factor.is_negative() { self.relation.flipped() } else { self.relation };
        Self { coeffs: p, relation, rhs }
    }

    /// Stacks `self` after `offset` zero coefficients and pads to `width`.
    pub fn embedded(&self, offset: usize, width: usize) -> Self {
        assert!(offset + self.coeffs.len() <= width);
        let mut coeffs = vec![Rational::zero(); width];
        coeffs[offset..offset + self.coeffs.len()].clone_from_slice(&self.coeffs);
        Self { coeffs, relation: self.relation, rhs: self.rhs.clone() }
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.relation, format_rational(&self.rhs))?;
        for c in &self.coeffs {
            write!(f, " {}", format_rational(c))?;
        }
        Ok(())
    }
}

/// `{Ax = b, Bx >= d}` style system split by relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    dim: usize,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
}

impl ConstraintSystem {
    pub fn new(dim: usize) -> Self {
        Self { dim, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn from_constraints(
        dim: usize,
        constraints: impl IntoIterator<Item = LinearConstraint>,
    ) -> Result<Self, PolytopeError> {
        let mut sys = Self::new(dim);
        for c in constraints {
            sys.push(c)?;
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, c: LinearConstraint) -> Result<(), PolytopeError> {
        if c.width() != self.dim {
            return Err(PolytopeError::ConstraintWidth { expected: self.dim, found: c.width() });
        }
        match c.relation {
            Relation::Eq => self.equalities.push(c),
            _ => self.inequalities.push(c),
        }
        Ok(())
    }

    pub fn all(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.equalities.iter().chain(&self.inequalities)
    }

    pub fn len(&self) -> usize {
        self.equalities.len() + self.inequalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn equality_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_rows(self.dim, self.equalities.iter().map(|c| c.coeffs.clone()).collect())
            .expect("constraint widths are checked on insertion")
    }

    pub fn equality_rank(&self) -> usize {
        rank(&self.equality_matrix())
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.all().all(|c| c.is_satisfied_by(x))
    }
}

/// `n x (N-1)` matrix whose column `i-1` is `s_i - s_1`.
pub fn difference_matrix(set: &VertexSet) -> Result<RationalMatrix, PolytopeError> {
    if set.len() < 2 {
        return Err(PolytopeError::SingletonSet);
    }
    Ok(difference_columns(set))
}

fn difference_columns(set: &VertexSet) -> RationalMatrix {
    let n = set.ambient_dim();
    let cols = set.len() - 1;
    let mut m = RationalMatrix::zeros(n, cols);
    let anchor = set.point(0);
    for (c, p) in set.points().iter().skip(1).enumerate() {
        for r in 0..n {
            m.set(r, c, &p[r] - &anchor[r]);
        }
    }
    m
}

fn difference_rows(set: &VertexSet) -> Vec<Vec<Rational>> {
    let anchor = set.point(0);
    set.points()
        .iter()
        .skip(1)
        .map(|p| p.iter().zip(anchor).map(|(a, b)| a - b).collect())
        .collect()
}

/// Equality system `Ã x = b̃` describing aff(S).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineHull {
    pub matrix: RationalMatrix,
    pub rhs: Vec<Rational>,
}

impl AffineHull {
    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn constraints(&self) -> Vec<LinearConstraint> {
        (0..self.matrix.rows())
            .map(|r| LinearConstraint::eq(self.matrix.row(r).to_vec(), self.rhs[r].clone()))
            .collect()
    }
}

/// Orders rows by nonzero count, then lexicographically.
fn eca_row_order(a: &[Rational], b: &[Rational]) -> Ordering {
    let nz = |v: &[Rational]| v.iter().filter(|x| !x.is_zero()).count();
    nz(a).cmp(&nz(b)).then_with(|| a.cmp(b))
}

/// Rows of `null(V^T)^T` in primitive form, sorted by nonzero count then lexicographically.
fn sorted_hull_rows(set: &VertexSet) -> Vec<Vec<Rational>> {
    let n = set.ambient_dim();
    let vt = RationalMatrix::from_rows(n, difference_rows(set)).expect("uniform point length");
    let basis = null_space_basis(&vt);
    let mut rows: Vec<Vec<Rational>> = (0..basis.cols()).map(|c| basis.column(c)).collect();
    rows.sort_by(|a, b| eca_row_order(a, b));
    rows
}

/// Affine hull of `S`. A single point yields the `n` equalities `x = s_1`.
pub fn affine_hull(set: &VertexSet) -> AffineHull {
    let rows = sorted_hull_rows(set);
    let n = set.ambient_dim();
    let rhs = rows.iter().map(|r| dot(r, set.point(0))).collect();
    AffineHull { matrix: RationalMatrix::from_rows(n, rows).expect("uniform row length"), rhs }
}

/// `dim conv(S)`: the rank of the difference matrix, 0 for a single point.
pub fn polytope_dimension(set: &VertexSet) -> usize {
    if set.len() < 2 {
        return 0;
    }
    ratlinalg::rank_of_rows(set.ambient_dim(), difference_rows(set))
}

/// Rank of the difference rows modulo a prime: a certified lower bound on the dimension.
pub fn dimension_lower_bound(set: &VertexSet) -> Option<usize> {
    if set.len() < 2 {
        return Some(0);
    }
    ratlinalg::rank_lower_bound_mod_p(set.ambient_dim(), &difference_rows(set))
}

/// Result of the equality constraint augmenting pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcaResult {
    /// Number of unidentified equalities.
    pub unidentified: usize,
    /// Exactly `unidentified` new equalities, in acceptance order.
    pub equalities: Vec<LinearConstraint>,
}

/// Finds the equalities satisfied by every point of `S` that are not implied by `known`.
pub fn eca(set: &VertexSet, known: &[LinearConstraint]) -> Result<EcaResult, PolytopeError> {
    let n = set.ambient_dim();
    for (ci, c) in known.iter().enumerate() {
        if c.width() != n {
            return Err(PolytopeError::ConstraintWidth { expected: n, found: c.width() });
        }
        if let Some(p) = set.points().iter().position(|s| !c.is_tight_at(s)) {
            return Err(PolytopeError::InconsistentInput { point: p + 1, constraint: ci + 1 });
        }
    }

    let mut basis = RowBasis::new(n);
    for c in known {
        basis.insert(&c.coeffs);
    }
    let known_rank = basis.rank();
    let dim = polytope_dimension(set);
    let unidentified = n - dim - known_rank;
    if unidentified == 0 {
        return Ok(EcaResult { unidentified, equalities: Vec::new() });
    }

    let mut equalities = Vec::with_capacity(unidentified);
    for row in sorted_hull_rows(set) {
        if basis.insert(&row) {
            let rhs = dot(&row, set.point(0));
            equalities.push(LinearConstraint::eq(row, rhs));
            if equalities.len() == unidentified {
                break;
            }
        }
    }
    debug_assert_eq!(equalities.len(), unidentified);
    Ok(EcaResult { unidentified, equalities })
}

/// Converts 1-based labels to 0-based indices, rejecting out-of-range or repeated labels.
pub fn labels_to_indices(labels: &[usize], len: usize) -> Result<Vec<usize>, PolytopeError> {
    let mut seen = HashSet::new();
    labels
        .iter()
        .map(|&l| {
            if l == 0 || l > len || !seen.insert(l) {
                Err(PolytopeError::LabelOutOfRange(l))
            } else {
                Ok(l - 1)
            }
        })
        .collect()
}
