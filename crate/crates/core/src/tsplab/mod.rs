//! Asymmetric TSP case study: discounted-flow constraints, tour points, the mined `Set3`
//! inequality families, TSPLIB input and LP-relaxation bounds.
//!
//! Nodes are 1-based throughout. Models built here share one variable layout
//! ([`TspLayout`]): the `x_ij` block for `i, j ≥ 2` followed by the `z_ij` block over all arcs.
//! `x_1j` and `x_j1` never appear as variables; they are replaced by `z_1j` and
//! `β^{n-1}·z_j1`.

mod report;
mod set3;
mod tsplib;

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::optimizer::{solve_lp, LpStatus, MipModel, OptimizerError, Sense, Variable};
use crate::polytope::{ConstraintSystem, LinearConstraint, PolytopeError, VertexSet};
use crate::ratlinalg::{int, pow, Rational};

pub use report::{format_bound_line, format_bounds_table, BoundRow, ModelKind};
pub use set3::{
    appendix_case_table, set3_constraint, set3_members, validate_set3, Applicability, Arity,
    CaseRow, Set3Family, Set3Member, Set3Report, Set3Verdict, ValidateOptions, SET3,
};
pub use tsplib::{format_tsplib_atsp, parse_tsplib_atsp};

/// Largest `n` accepted by [`enumerate_tours`]; `(n-1)!` tours are materialized.
pub const TOUR_LIMIT: usize = 9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TspError {
    #[error("n = {n} is too small, at least {minimum} nodes are needed")]
    NTooSmall { n: usize, minimum: usize },
    #[error("n = {n} exceeds the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("family {family} does not apply at n = {n}")]
    NotApplicable { family: u8, n: usize },
    #[error("beta must lie strictly between 0 and 1")]
    InvalidBeta,
    #[error("invalid tour: {0}")]
    InvalidTour(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unsupported TSPLIB input: {0}")]
    UnsupportedFormat(String),
    #[error("expected {expected} edge weights, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("LP relaxation is {0}")]
    Relaxation(LpStatus),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Rejects discount factors outside the open interval (0, 1).
pub fn check_beta(beta: &Rational) -> Result<(), TspError> {
    if beta.is_zero() || *beta < Rational::zero() || *beta >= Rational::one() {
        return Err(TspError::InvalidBeta);
    }
    Ok(())
}

/// An asymmetric instance with cost matrix `costs[i-1][j-1] = c_ij`; the diagonal is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AtspInstance {
    pub name: String,
    pub costs: Vec<Vec<Rational>>,
}

impl AtspInstance {
    pub fn new(name: impl Into<String>, costs: Vec<Vec<Rational>>) -> Result<Self, TspError> {
        let n = costs.len();
        if n < 3 {
            return Err(TspError::NTooSmall { n, minimum: 3 });
        }
        if let Some(row) = costs.iter().position(|r| r.len() != n) {
            return Err(TspError::InvalidInstance(format!("row {} is not of length {n}", row + 1)));
        }
        Ok(AtspInstance { name: name.into(), costs })
    }

    pub fn from_i64(name: impl Into<String>, costs: &[Vec<i64>]) -> Result<Self, TspError> {
        Self::new(name, costs.iter().map(|r| r.iter().map(|&c| int(c)).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn cost(&self, i: usize, j: usize) -> &Rational {
        &self.costs[i - 1][j - 1]
    }
}

/// A Hamiltonian cycle written as its visiting order, starting at node 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Result<Self, TspError> {
        let n = order.len();
        if n < 3 {
            return Err(TspError::NTooSmall { n, minimum: 3 });
        }
        if order[0] != 1 {
            return Err(TspError::InvalidTour("a tour starts at node 1".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &order {
            if v == 0 || v > n || std::mem::replace(&mut seen[v], true) {
                return Err(TspError::InvalidTour(format!("node {v} is out of range or repeated")));
            }
        }
        Ok(Tour { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Arcs in visiting order, ending with the arc back to node 1.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).map(move |k| (self.order[k], self.order[(k + 1) % n]))
    }

    pub fn cost(&self, inst: &AtspInstance) -> Rational {
        self.arcs().map(|(i, j)| inst.cost(i, j)).sum()
    }
}

/// All `(n-1)!` tours in lexicographic order of their visiting sequence.
pub fn enumerate_tours(n: usize) -> Result<Vec<Tour>, TspError> {
    if n < 3 {
        return Err(TspError::NTooSmall { n, minimum: 3 });
    }
    if n > TOUR_LIMIT {
        return Err(TspError::TooLarge { n, limit: TOUR_LIMIT });
    }
    Ok((2..=n)
        .permutations(n - 1)
        .map(|rest| Tour { order: std::iter::once(1).chain(rest).collect() })
        .collect())
}

/// The point a tour induces: `x_ij = β^{k-1}` when `i` is visited `k`-th and `(i, j)` is a tour arc.
#[derive(Debug, Clone, PartialEq)]
pub struct TourPoint {
    /// `x[i-1][j-1]`; the diagonal and off-tour arcs are zero.
    pub x: Vec<Vec<Rational>>,
    /// `z[i-1][j-1]`, the arc indicator of the tour.
    pub z: Vec<Vec<bool>>,
}

impl TourPoint {
    pub fn x(&self, i: usize, j: usize) -> &Rational {
        &self.x[i - 1][j - 1]
    }

    pub fn z(&self, i: usize, j: usize) -> bool {
        self.z[i - 1][j - 1]
    }

    /// Coordinates in the layout of [`build_tsp_h`].
    pub fn to_vector(&self) -> Vec<Rational> {
        let layout = TspLayout::new(self.x.len());
        let mut v = vec![Rational::zero(); layout.len()];
        for (i, j) in layout.x_arcs() {
            v[layout.x(i, j)] = self.x(i, j).clone();
        }
        for (i, j) in layout.arcs() {
            if self.z(i, j) {
                v[layout.z(i, j)] = Rational::one();
            }
        }
        v
    }

    /// Values of all `n(n-1)` arc variables `x_ij` in [`arc_index`] order.
    pub fn full_x(&self) -> Vec<Rational> {
        let n = self.x.len();
        full_arcs(n).map(|(i, j)| self.x(i, j).clone()).collect()
    }
}

pub fn tour_to_point(tour: &Tour, beta: &Rational) -> TourPoint {
    let n = tour.n();
    let mut x = vec![vec![Rational::zero(); n]; n];
    let mut z = vec![vec![false; n]; n];
    let mut weight = Rational::one();
    for (i, j) in tour.arcs() {
        x[i - 1][j - 1] = weight.clone();
        z[i - 1][j - 1] = true;
        weight *= beta;
    }
    TourPoint { x, z }
}

/// All tour points for `n` nodes as a vertex set in the [`TspLayout`] coordinates.
pub fn tour_vertex_set(n: usize, beta: &Rational) -> Result<VertexSet, TspError> {
    check_beta(beta)?;
    let points = enumerate_tours(n)?.iter().map(|t| tour_to_point(t, beta).to_vector()).collect();
    Ok(VertexSet::new(points)?)
}

/// Arcs `(i, j)`, `i ≠ j`, in row-major order.
pub fn full_arcs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Position of arc `(i, j)` among the `n(n-1)` arcs in row-major order.
pub fn arc_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && (1..=n).contains(&i) && (1..=n).contains(&j));
    (i - 1) * (n - 1) + (j - 1) - usize::from(j > i)
}

/// Column layout of the reduced `TSP_H` models: `x_ij` for `i, j ≥ 2`, then `z_ij` for all arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TspLayout {
    pub n: usize,
}

impl TspLayout {
    pub fn new(n: usize) -> Self {
        TspLayout { n }
    }

    pub fn x_len(&self) -> usize {
        (self.n - 1) * (self.n - 2)
    }

    pub fn len(&self) -> usize {
        self.x_len() + self.n * (self.n - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 2 && j >= 2 && i != j);
        (i - 2) * (self.n - 2) + (j - 2) - usize::from(j > i)
    }

    pub fn z(&self, i: usize, j: usize) -> usize {
        self.x_len() + arc_index(self.n, i, j)
    }

    pub fn x_arcs(&self) -> impl Iterator<Item = (usize, usize)> {
        full_arcs(self.n).filter(|&(i, j)| i >= 2 && j >= 2)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> {
        full_arcs(self.n)
    }

    /// Column names, `x_2_3` and `z_1_2` style.
    pub fn names(&self) -> Vec<String> {
        self.x_arcs()
            .map(|(i, j)| format!("x_{i}_{j}"))
            .chain(self.arcs().map(|(i, j)| format!("z_{i}_{j}")))
            .collect()
    }

    /// Columns outside the symmetry-reduced template that only uses arcs incident to nodes
    /// 1, 2 and 3 (0-based, ready for a facet-search mask).
    pub fn symmetry_mask(&self) -> Vec<usize> {
        let touches = |i: usize, j: usize, nodes: &[usize]| nodes.contains(&i) || nodes.contains(&j);
        let mut mask: Vec<usize> = self
            .x_arcs()
            .filter(|&(i, j)| !touches(i, j, &[2, 3]))
            .map(|(i, j)| self.x(i, j))
            .collect();
        mask.extend(self.arcs().filter(|&(i, j)| !touches(i, j, &[1, 2, 3])).map(|(i, j)| self.z(i, j)));
        mask
    }
}

/// Sparse linear form over a [`TspLayout`] that substitutes `x_1j → z_1j`, `x_j1 → β^{n-1} z_j1`.
#[derive(Debug, Clone)]
pub(crate) struct FlowExpr {
    layout: TspLayout,
    last_weight: Rational,
    pub(crate) terms: BTreeMap<usize, Rational>,
}

impl FlowExpr {
    pub(crate) fn new(n: usize, beta: &Rational) -> Self {
        FlowExpr { layout: TspLayout::new(n), last_weight: pow(beta, n as u32 - 1), terms: BTreeMap::new() }
    }

    fn add(&mut self, col: usize, c: Rational) {
        let slot = self.terms.entry(col).or_insert_with(Rational::zero);
        *slot += c;
    }

    pub(crate) fn x(&mut self, i: usize, j: usize, c: &Rational) -> &mut Self {
        if i == 1 {
            self.add(self.layout.z(1, j), c.clone());
        } else if j == 1 {
            self.add(self.layout.z(i, 1), c * &self.last_weight);
        } else {
            self.add(self.layout.x(i, j), c.clone());
        }
        self
    }

    pub(crate) fn z(&mut self, i: usize, j: usize, c: &Rational) -> &mut Self {
        self.add(self.layout.z(i, j), c.clone());
        self
    }

    pub(crate) fn dense(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.layout.len()];
        for (&k, c) in &self.terms {
            v[k] = c.clone();
        }
        v
    }
}

/// The discounted-flow system `H_β` over the variables `x_ij` of all arcs (see [`arc_index`]).
///
/// Equalities: node 1's balance, the balances of nodes `2..n`, `Σ_j x_1j = 1`, then
/// `x_ij = 0` for each arc missing from `arcs`. Inequalities: `x_ij ≥ 0` for present arcs.
pub fn build_hbeta(
    n: usize,
    beta: &Rational,
    arcs: &[(usize, usize)],
) -> Result<ConstraintSystem, TspError> {
    check_beta(beta)?;
    if n < 3 {
        return Err(TspError::NTooSmall { n, minimum: 3 });
    }
    if arcs.is_empty() {
        return Err(TspError::InvalidInstance("graph has no arcs".into()));
    }
    if let Some(&(i, j)) = arcs.iter().find(|&&(i, j)| i == j || i == 0 || j == 0 || i > n || j > n) {
        return Err(TspError::InvalidInstance(format!("arc ({i}, {j}) is not an arc of K_{n}")));
    }
    let width = n * (n - 1);
    let present = |i: usize, j: usize| arcs.contains(&(i, j));
    let mut system = ConstraintSystem::new(width);
    for i in 1..=n {
        let mut row = vec![Rational::zero(); width];
        for j in (1..=n).filter(|&j| j != i) {
            if present(i, j) {
                row[arc_index(n, i, j)] += Rational::one();
            }
            if present(j, i) {
                row[arc_index(n, j, i)] -= beta;
            }
        }
        let rhs = if i == 1 { Rational::one() - pow(beta, n as u32) } else { Rational::zero() };
        system.push(LinearConstraint::eq(row, rhs))?;
    }
    let mut out_of_one = vec![Rational::zero(); width];
    for j in (2..=n).filter(|&j| present(1, j)) {
        out_of_one[arc_index(n, 1, j)] = Rational::one();
    }
    system.push(LinearConstraint::eq(out_of_one, Rational::one()))?;
    for (i, j) in full_arcs(n) {
        let mut row = vec![Rational::zero(); width];
        row[arc_index(n, i, j)] = Rational::one();
        if present(i, j) {
            system.push(LinearConstraint::ge(row, Rational::zero()))?;
        } else {
            system.push(LinearConstraint::eq(row, Rational::zero()))?;
        }
    }
    Ok(system)
}

/// Flow equalities (1)–(3) and the out-degree equalities of `TSP_H(β)` in [`TspLayout`] columns.
pub fn tsp_h_equalities(n: usize, beta: &Rational) -> Vec<LinearConstraint> {
    let one = Rational::one();
    let neg_beta = -beta.clone();
    let mut rows = Vec::new();
    let mut e = FlowExpr::new(n, beta);
    for j in 2..=n {
        e.x(1, j, &one).x(j, 1, &neg_beta);
    }
    rows.push(LinearConstraint::eq(e.dense(), one.clone() - pow(beta, n as u32)));
    for i in 2..=n {
        let mut e = FlowExpr::new(n, beta);
        for j in (1..=n).filter(|&j| j != i) {
            e.x(i, j, &one).x(j, i, &neg_beta);
        }
        rows.push(LinearConstraint::eq(e.dense(), Rational::zero()));
    }
    let mut e = FlowExpr::new(n, beta);
    for j in 2..=n {
        e.x(1, j, &one);
    }
    rows.push(LinearConstraint::eq(e.dense(), one.clone()));
    for i in 1..=n {
        let mut e = FlowExpr::new(n, beta);
        for j in (1..=n).filter(|&j| j != i) {
            e.z(i, j, &one);
        }
        rows.push(LinearConstraint::eq(e.dense(), one.clone()));
    }
    rows
}

/// `Σ_{i≠j} z_ij = 1` for every node `j`.
pub fn in_degree_equalities(n: usize, beta: &Rational) -> Vec<LinearConstraint> {
    (1..=n)
        .map(|j| {
            let mut e = FlowExpr::new(n, beta);
            for i in (1..=n).filter(|&i| i != j) {
                e.z(i, j, &Rational::one());
            }
            LinearConstraint::eq(e.dense(), Rational::one())
        })
        .collect()
}

fn layout_model(inst: &AtspInstance) -> MipModel {
    let layout = TspLayout::new(inst.n());
    let mut model = MipModel::new(Sense::Min);
    for (i, j) in layout.x_arcs() {
        model.add_variable(Variable::nonnegative(format!("x_{i}_{j}")));
    }
    for (i, j) in layout.arcs() {
        let k = model.add_variable(Variable::binary(format!("z_{i}_{j}")));
        model.objective[k] = inst.cost(i, j).clone();
    }
    model
}

/// The `TSP_H(β)` model: flow constraints (1)–(3) with `x_1j`, `x_j1` substituted, the linking
/// bounds `β^{n-2} z_ij ≤ x_ij ≤ β z_ij`, out-degree equalities and objective `Σ c_ij z_ij`.
pub fn build_tsp_h(inst: &AtspInstance, beta: &Rational) -> Result<MipModel, TspError> {
    check_beta(beta)?;
    let n = inst.n();
    let layout = TspLayout::new(n);
    let mut model = layout_model(inst);
    for c in tsp_h_equalities(n, beta) {
        model.add_constraint(c)?;
    }
    let low = pow(beta, n as u32 - 2);
    for (i, j) in layout.x_arcs() {
        let mut lower = FlowExpr::new(n, beta);
        lower.x(i, j, &Rational::one()).z(i, j, &-low.clone());
        model.add_constraint(LinearConstraint::ge(lower.dense(), Rational::zero()))?;
        let mut upper = FlowExpr::new(n, beta);
        upper.x(i, j, &Rational::one()).z(i, j, &-beta.clone());
        model.add_constraint(LinearConstraint::le(upper.dense(), Rational::zero()))?;
    }
    Ok(model)
}

/// `TSP_H(β)` strengthened with the in-degree equalities and every member of families 1–3.
pub fn build_tsp_h_star(inst: &AtspInstance, beta: &Rational) -> Result<MipModel, TspError> {
    let n = inst.n();
    if n < 6 {
        return Err(TspError::NTooSmall { n, minimum: 6 });
    }
    let mut model = build_tsp_h(inst, beta)?;
    for c in in_degree_equalities(n, beta) {
        model.add_constraint(c)?;
    }
    for family in &SET3[..3] {
        for member in set3_members(family, n)? {
            for c in set3_constraint(&member, n, beta)? {
                model.add_constraint(c)?;
            }
        }
    }
    Ok(model)
}

/// The Sherali–Driscoll lifted MTZ model over `x_ij` (`i, j ≥ 2`), `u_j` (`j ≥ 2`) and `z_ij`.
pub fn build_sd(inst: &AtspInstance) -> Result<MipModel, TspError> {
    let n = inst.n();
    let mut model = MipModel::new(Sense::Min);
    let mut x = BTreeMap::new();
    for (i, j) in full_arcs(n).filter(|&(i, j)| i >= 2 && j >= 2) {
        x.insert((i, j), model.add_variable(Variable::nonnegative(format!("x_{i}_{j}"))));
    }
    let u: Vec<usize> = (0..=n)
        .map(|j| if j >= 2 { model.add_variable(Variable::nonnegative(format!("u_{j}"))) } else { usize::MAX })
        .collect();
    let mut z = BTreeMap::new();
    for (i, j) in full_arcs(n) {
        let k = model.add_variable(Variable::binary(format!("z_{i}_{j}")));
        model.objective[k] = inst.cost(i, j).clone();
        z.insert((i, j), k);
    }
    let width = model.num_vars();
    let row = |terms: &[(usize, i64)]| {
        let mut r = vec![Rational::zero(); width];
        for &(k, c) in terms {
            r[k] += int(c);
        }
        r
    };
    let n1 = n as i64 - 1;
    let (n2, n3) = (n1 - 1, n1 - 2);
    for i in 2..=n {
        let mut t: Vec<(usize, i64)> = (2..=n).filter(|&j| j != i).map(|j| (x[&(i, j)], 1)).collect();
        t.extend([(z[&(i, 1)], n1), (u[i], -1)]);
        model.add_constraint(LinearConstraint::eq(row(&t), int(0)))?;
    }
    for j in 2..=n {
        let mut t: Vec<(usize, i64)> = (2..=n).filter(|&i| i != j).map(|i| (x[&(i, j)], 1)).collect();
        t.push((u[j], -1));
        model.add_constraint(LinearConstraint::eq(row(&t), int(-1)))?;
    }
    for (i, j) in full_arcs(n).filter(|&(i, j)| i >= 2 && j >= 2) {
        let (xij, xji, zij, zji) = (x[&(i, j)], x[&(j, i)], z[&(i, j)], z[&(j, i)]);
        model.add_constraint(LinearConstraint::le(row(&[(zij, 1), (xij, -1)]), int(0)))?;
        model.add_constraint(LinearConstraint::le(row(&[(xij, 1), (zij, -n2)]), int(0)))?;
        model.add_constraint(LinearConstraint::le(
            row(&[(u[j], 1), (zij, n2), (zji, n1), (xij, -1), (xji, -1)]),
            int(n1),
        ))?;
        model.add_constraint(LinearConstraint::le(
            row(&[(xij, 1), (xji, 1), (u[j], -1), (zji, -1)]),
            int(-1),
        ))?;
    }
    for j in 2..=n {
        let (z1j, zj1) = (z[&(1, j)], z[&(j, 1)]);
        model.add_constraint(LinearConstraint::le(row(&[(z1j, -1), (zj1, n3), (u[j], -1)]), int(-2)))?;
        model.add_constraint(LinearConstraint::le(row(&[(u[j], 1), (z1j, n3), (zj1, -1)]), int(n2)))?;
    }
    for v in 1..=n {
        let out: Vec<(usize, i64)> = (1..=n).filter(|&j| j != v).map(|j| (z[&(v, j)], 1)).collect();
        model.add_constraint(LinearConstraint::eq(row(&out), int(1)))?;
        let inc: Vec<(usize, i64)> = (1..=n).filter(|&i| i != v).map(|i| (z[&(i, v)], 1)).collect();
        model.add_constraint(LinearConstraint::eq(row(&inc), int(1)))?;
    }
    Ok(model)
}

/// Values of the [`build_sd`] variables at a tour, with `u_j` the visit rank of `j` (node 1 has rank 0).
pub fn sd_point(tour: &Tour) -> Vec<Rational> {
    let n = tour.n();
    let mut rank = vec![0usize; n + 1];
    for (k, &v) in tour.order().iter().enumerate() {
        rank[v] = k;
    }
    let on_tour: Vec<(usize, usize)> = tour.arcs().collect();
    let mut v = Vec::new();
    for (i, j) in full_arcs(n).filter(|&(i, j)| i >= 2 && j >= 2) {
        // x_ij carries the rank of i on tour arcs
        v.push(if on_tour.contains(&(i, j)) { int(rank[i] as i64) } else { int(0) });
    }
    v.extend((2..=n).map(|j| int(rank[j] as i64)));
    v.extend(full_arcs(n).map(|a| if on_tour.contains(&a) { int(1) } else { int(0) }));
    v
}

/// Minimum of the LP relaxation, solved in floating point.
pub fn lp_bound(model: &MipModel) -> Result<f64, TspError> {
    let solution = solve_lp::<f64>(&model.relaxed())?;
    if !solution.is_optimal() {
        return Err(TspError::Relaxation(solution.status));
    }
    Ok(solution.objective)
}
