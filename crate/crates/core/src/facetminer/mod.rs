//! Facet mining: repeatedly solve a big-M counting MIP for the valid inequality tight at the
//! most points of `S`, classify the tight set, and cut it off.

pub mod oracle;

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::optimizer::{
    self, solve_lp, solve_mip, LpField, LpStatus, MipModel, MipOptions, Mode, OptimizerError,
    Sense, Variable,
};
use crate::polytope::{
    affine_hull, polytope_dimension, ConstraintSystem, LinearConstraint, PolytopeError,
    VertexSet,
};
use crate::ratlinalg::{self, dot, format_rational, int, Rational, RowBasis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FacetError {
    #[error("cap {cap} is below the minimum support size {minimum}")]
    CapTooSmall { cap: usize, minimum: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("known constraints admit no point")]
    InfeasibleRelaxation,
    #[error("the tight set spans no hyperplane beyond the known equalities")]
    NoNewEquality,
    #[error("no hyperplane through the tight set keeps every point on one side")]
    NotOneSided,
    #[error("equality system has rank {found}, the point set needs {expected}; run eca first")]
    IncompleteEqualities { expected: usize, found: usize },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetSearchConfig {
    pub big_m: Rational,
    pub epsilon: Rational,
    /// Smallest face dimension kept; `None` keeps facets only.
    pub face_threshold: Option<usize>,
    /// Box bound on each `π_k`.
    pub pi_bound: Rational,
    /// 0-based coordinates whose coefficient is forced to zero.
    pub mask: Option<Vec<usize>>,
    pub node_budget: usize,
    /// Stop after this many iterations.
    pub max_iterations: Option<usize>,
    pub mode: Mode,
}

impl Default for FacetSearchConfig {
    fn default() -> Self {
        FacetSearchConfig {
            big_m: int(100),
            epsilon: ratlinalg::frac(1, 100),
            face_threshold: None,
            pi_bound: int(1),
            mask: None,
            node_budget: MipOptions::default().node_budget,
            max_iterations: None,
            mode: Mode::Exact,
        }
    }
}

impl FacetSearchConfig {
    pub fn validate(&self, ambient: usize) -> Result<(), FacetError> {
        let bad = |m: &str| Err(FacetError::InvalidConfig(m.to_string()));
        if !self.big_m.is_positive() {
            return bad("big M must be positive");
        }
        if !self.epsilon.is_positive() || self.epsilon >= self.big_m {
            return bad("epsilon must lie strictly between 0 and big M");
        }
        if !self.pi_bound.is_positive() {
            return bad("pi bound must be positive");
        }
        if matches!(self.face_threshold, Some(t) if t >= ambient) {
            return bad("face threshold must be below the ambient dimension");
        }
        if let Some(mask) = &self.mask {
            if let Some(k) = mask.iter().find(|&&k| k >= ambient) {
                return Err(FacetError::InvalidConfig(format!("mask coordinate {} out of range", k + 1)));
            }
        }
        Ok(())
    }

    /// Bound on `|π₀|` implied by the π box.
    pub fn pi0_bound(&self, set: &VertexSet) -> Rational {
        &self.pi_bound * int(set.ambient_dim() as i64) * set.max_abs_coordinate()
    }

    /// True when big M covers every slack `π₀ − π·s` a boxed inequality can have on `S`.
    pub fn big_m_sufficient(&self, set: &VertexSet) -> bool {
        self.big_m >= int(2) * self.pi0_bound(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    FacetNew,
    FacetRedundant,
    Face,
    Rejected,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::FacetNew => "FACET_NEW",
            Classification::FacetRedundant => "FACET_REDUNDANT",
            Classification::Face => "FACE",
            Classification::Rejected => "REJECTED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedInequality {
    /// `π·x ≤ π₀` as returned by the solver (converted exactly from `f64` in float mode).
    pub pi: Vec<Rational>,
    pub pi0: Rational,
    /// 1-based labels of the tight points.
    pub support: Vec<usize>,
    pub face_dim: usize,
    pub classification: Classification,
    pub simplified: Option<LinearConstraint>,
    /// Right-hand side of the cardinality cap when this iteration was solved.
    pub cap: usize,
}

impl MinedInequality {
    /// The simplified form if there is one, otherwise the raw inequality.
    pub fn display_constraint(&self) -> LinearConstraint {
        self.simplified
            .clone()
            .unwrap_or_else(|| LinearConstraint::le(self.pi.clone(), self.pi0.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MipInfeasible,
    NodeBudget,
    UserLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::MipInfeasible => "MIP_INFEASIBLE",
            Termination::NodeBudget => "NODE_BUDGET",
            Termination::UserLimit => "USER_LIMIT",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningReport {
    pub config: FacetSearchConfig,
    pub iterations: Vec<MinedInequality>,
    pub termination: Termination,
    pub final_cap: usize,
}

impl MiningReport {
    pub fn new_facets(&self) -> impl Iterator<Item = &MinedInequality> {
        self.iterations.iter().filter(|it| it.classification == Classification::FacetNew)
    }

    /// Cap at the start of each iteration followed by the final cap.
    pub fn cap_trace(&self) -> Vec<usize> {
        self.iterations.iter().map(|it| it.cap).chain(std::iter::once(self.final_cap)).collect()
    }
}

/// `CONFIG` header, one `ITER` line per iteration and a closing `TERM` line.
impl fmt::Display for MiningReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "CONFIG epsilon={} big_m={} pi_bound={} mode={}",
            format_rational(&c.epsilon),
            format_rational(&c.big_m),
            format_rational(&c.pi_bound),
            match c.mode {
                Mode::Exact => "exact",
                Mode::Float => "float",
            }
        )?;
        for (k, it) in self.iterations.iter().enumerate() {
            let support: Vec<String> = it.support.iter().map(usize::to_string).collect();
            writeln!(
                f,
                "ITER {} {} dim={} support={{{}}} ineq=\"{}\"",
                k + 1,
                it.classification,
                it.face_dim,
                support.join(","),
                display_form(&it.display_constraint())
            )?;
        }
        write!(f, "TERM {} cap={}", self.termination, self.final_cap)
    }
}

/// Primitive form whose first nonzero coefficient is positive.
pub fn display_form(c: &LinearConstraint) -> LinearConstraint {
    let p = c.primitive();
    match p.coeffs.iter().find(|v| !v.is_zero()) {
        Some(v) if v.is_negative() => p.negated(),
        _ => p,
    }
}

/// Model with variables `π_1..π_n, π₀, θ_1..θ_N` maximizing `Σθ`.
///
/// `cuts` are written over the θ block (width `N`). `m` is the rank of the full equality
/// system of `S`.
pub fn build_facet_mip(
    set: &VertexSet,
    m: usize,
    cfg: &FacetSearchConfig,
    cap: usize,
    cuts: &[LinearConstraint],
) -> Result<MipModel, FacetError> {
    let n = set.ambient_dim();
    let big_n = set.len();
    cfg.validate(n)?;
    let minimum = n - m;
    if cap < minimum {
        return Err(FacetError::CapTooSmall { cap, minimum });
    }
    let mut model = MipModel::new(Sense::Max);
    let masked = |k: usize| cfg.mask.as_ref().map_or(false, |mask| mask.contains(&k));
    for k in 0..n {
        model.add_variable(if masked(k) {
            Variable::fixed(format!("pi{}", k + 1), Rational::zero())
        } else {
            Variable::continuous(format!("pi{}", k + 1), Some(-&cfg.pi_bound), Some(cfg.pi_bound.clone()))
        });
    }
    let b0 = cfg.pi0_bound(set);
    model.add_variable(Variable::continuous("pi0", Some(-&b0), Some(b0)));
    for i in 0..big_n {
        model.add_variable(Variable::binary(format!("theta{}", i + 1)));
    }
    let width = n + 1 + big_n;
    let mut objective = vec![Rational::zero(); width];
    for o in objective.iter_mut().skip(n + 1) {
        *o = Rational::one();
    }
    model.set_objective(objective)?;

    for (i, s) in set.points().iter().enumerate() {
        // −π·s_i + π₀ + Mθ_i ≤ M
        let mut row = vec![Rational::zero(); width];
        for k in 0..n {
            row[k] = -&s[k];
        }
        row[n] = Rational::one();
        row[n + 1 + i] = cfg.big_m.clone();
        model.add_constraint(LinearConstraint::le(row, cfg.big_m.clone()))?;
        // π·s_i − π₀ − εθ_i ≤ −ε
        let mut row = vec![Rational::zero(); width];
        row[..n].clone_from_slice(s);
        row[n] = -Rational::one();
        row[n + 1 + i] = -&cfg.epsilon;
        model.add_constraint(LinearConstraint::le(row, -&cfg.epsilon))?;
    }
    let mut count = vec![Rational::zero(); width];
    for c in count.iter_mut().skip(n + 1) {
        *c = Rational::one();
    }
    model.add_constraint(LinearConstraint::le(count.clone(), int(cap as i64)))?;
    model.add_constraint(LinearConstraint::ge(count, int(minimum as i64)))?;
    for cut in cuts {
        if cut.width() != big_n {
            return Err(PolytopeError::ConstraintWidth { expected: big_n, found: cut.width() }.into());
        }
        model.add_constraint(cut.embedded(n + 1, width))?;
    }
    Ok(model)
}

/// No-good cut `Σ_{θ*=1} θ_i − Σ_{θ*=0} θ_i ≤ |θ*| − 1` over the θ block.
pub fn dedup_cut(theta: &[bool]) -> LinearConstraint {
    let coeffs = theta.iter().map(|&t| if t { int(1) } else { int(-1) }).collect();
    let ones = theta.iter().filter(|&&t| t).count() as i64;
    LinearConstraint::le(coeffs, int(ones - 1))
}

/// Tight-set indicator of `c` over `S`.
pub fn tight_indicator(c: &LinearConstraint, set: &VertexSet) -> Vec<bool> {
    set.points().iter().map(|s| c.is_tight_at(s)).collect()
}

/// One cut per known inequality, from the points where it is tight.
pub fn dedup_cuts_for_existing(known: &ConstraintSystem, set: &VertexSet) -> Vec<LinearConstraint> {
    known.inequalities.iter().map(|c| dedup_cut(&tight_indicator(c, set))).collect()
}

/// `(dim conv(S_F), whether that is one below the dimension of S)`.
pub fn classify_face(face: &VertexSet, equality_rank: usize, n: usize) -> (usize, bool) {
    let dim = polytope_dimension(face);
    (dim, n >= equality_rank + 1 && dim == n - equality_rank - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Redundancy {
    New,
    Redundant,
}

/// Whether `ineq` is implied by `eqs` and `known`: maximizes its left side over the known
/// system and compares with the right side. Variables are free.
pub fn redundancy_check<F: LpField>(
    ineq: &LinearConstraint,
    eqs: &ConstraintSystem,
    known: &ConstraintSystem,
) -> Result<Redundancy, FacetError> {
    let le = ineq
        .as_le()
        .ok_or_else(|| FacetError::InvalidConfig("redundancy check needs an inequality".into()))?;
    let n = le.width();
    let mut model = MipModel::new(Sense::Max);
    for k in 0..n {
        model.add_variable(Variable::free(format!("x{}", k + 1)));
    }
    model.set_objective(le.coeffs.clone())?;
    for c in eqs.all().chain(known.all()) {
        model.add_constraint(c.clone())?;
    }
    let sol = solve_lp::<F>(&model)?;
    match sol.status {
        LpStatus::Infeasible => Err(FacetError::InfeasibleRelaxation),
        LpStatus::Unbounded => Ok(Redundancy::New),
        LpStatus::Optimal => {
            let slack = F::from_rational(&le.rhs).sub(&sol.objective);
            Ok(if slack.is_neg() { Redundancy::New } else { Redundancy::Redundant })
        }
    }
}

/// Rewrites the hyperplane through `S_F` using a row of its affine hull.
///
/// Candidates are the hull rows independent of `eqs`, each also taken with one coordinate
/// eliminated by one equality of `eqs`. Every candidate that keeps `S` on one side is
/// oriented as a `GE` row; the one with the fewest negative coefficients wins, then the
/// fewest nonzeros, then the lexicographically smallest. The result is in primitive
/// integer form, written as `LE` when its leading coefficient would be negative.
pub fn simplify_inequality(
    face: &VertexSet,
    set: &VertexSet,
    eqs: &ConstraintSystem,
) -> Result<LinearConstraint, FacetError> {
    let n = set.ambient_dim();
    let hull = affine_hull(face);
    let mut eq_basis = RowBasis::new(n);
    for e in &eqs.equalities {
        eq_basis.insert(&e.coeffs);
    }
    let mut best: Option<(usize, usize, LinearConstraint)> = None;
    let mut independent = false;
    let anchor = face.point(0);
    let mut candidates = Vec::new();
    for row in hull.matrix.row_vecs() {
        if !eq_basis.is_independent(&row) {
            continue;
        }
        for e in &eqs.equalities {
            for k in 0..n {
                if row[k].is_zero() || e.coeffs[k].is_zero() {
                    continue;
                }
                let lambda = &row[k] / &e.coeffs[k];
                candidates.push(row.iter().zip(&e.coeffs).map(|(r, c)| r - &lambda * c).collect::<Vec<_>>());
            }
        }
        candidates.push(row);
    }
    for row in candidates {
        let rhs = dot(&row, anchor);
        independent = true;
        let values: Vec<Rational> = set.points().iter().map(|s| dot(&row, s)).collect();
        let candidate = if values.iter().all(|v| *v >= rhs) {
            LinearConstraint::ge(row, rhs)
        } else if values.iter().all(|v| *v <= rhs) {
            LinearConstraint::ge(row.iter().map(|v| -v).collect(), -rhs)
        } else {
            continue;
        };
        // counted before normalization, which may flip the orientation
        let negatives = candidate.coeffs.iter().filter(|v| v.is_negative()).count();
        let nonzeros = candidate.coeffs.iter().filter(|v| !v.is_zero()).count();
        let candidate = candidate.primitive();
        let better = match &best {
            None => true,
            Some((bn, bz, bc)) => (negatives, nonzeros, &candidate.coeffs) < (*bn, *bz, &bc.coeffs),
        };
        if better {
            best = Some((negatives, nonzeros, candidate));
        }
    }
    match best {
        Some((_, _, c)) => Ok(display_form(&c)),
        None if independent => Err(FacetError::NotOneSided),
        None => Err(FacetError::NoNewEquality),
    }
}

/// Runs the mining loop until the counting MIP becomes infeasible or a limit is hit.
///
/// `eqs` must be the complete equality system of `S`. Newly found facets are added to the
/// known system used by later redundancy checks.
pub fn mine(
    set: &VertexSet,
    eqs: &ConstraintSystem,
    known: &ConstraintSystem,
    cfg: &FacetSearchConfig,
) -> Result<MiningReport, FacetError> {
    let n = set.ambient_dim();
    cfg.validate(n)?;
    let m = eqs.equality_rank();
    let expected = n - polytope_dimension(set);
    if m != expected {
        return Err(FacetError::IncompleteEqualities { expected, found: m });
    }
    for (ci, c) in eqs.equalities.iter().enumerate() {
        if let Some(p) = set.points().iter().position(|s| !c.is_tight_at(s)) {
            return Err(PolytopeError::InconsistentInput { point: p + 1, constraint: ci + 1 }.into());
        }
    }
    let full_dim = n - m;
    let threshold = cfg.face_threshold.unwrap_or(full_dim.saturating_sub(1));
    let mut cuts = dedup_cuts_for_existing(known, set);
    let mut known = known.clone();
    let mut cap = set.len() - 1;
    let mut iterations = Vec::new();
    let options = MipOptions { node_budget: cfg.node_budget };

    let termination = loop {
        if cfg.max_iterations.map_or(false, |limit| iterations.len() >= limit) {
            break Termination::UserLimit;
        }
        let model = match build_facet_mip(set, m, cfg, cap, &cuts) {
            Ok(model) => model,
            Err(FacetError::CapTooSmall { .. }) => break Termination::MipInfeasible,
            Err(e) => return Err(e),
        };
        let solved = match cfg.mode {
            Mode::Exact => solve_counting_mip::<Rational>(&model, &options, n),
            Mode::Float => solve_counting_mip::<f64>(&model, &options, n),
        };
        let (pi, pi0, theta) = match solved {
            Ok(Some(found)) => found,
            Ok(None) => break Termination::MipInfeasible,
            Err(OptimizerError::NodeLimitExceeded { .. }) => break Termination::NodeBudget,
            Err(e) => return Err(e.into()),
        };
        let support_idx: Vec<usize> = (0..set.len()).filter(|&i| theta[i]).collect();
        let face = set.subset(&support_idx)?;
        let (face_dim, is_facet) = classify_face(&face, m, n);
        let raw = LinearConstraint::le(pi.clone(), pi0.clone());
        let consistent = match cfg.mode {
            Mode::Exact => set
                .points()
                .iter()
                .zip(&theta)
                .all(|(s, &t)| raw.is_satisfied_by(s) && raw.is_tight_at(s) == t),
            Mode::Float => float_consistent(&raw, set, &theta),
        };
        let mut simplified = None;
        let classification = if !consistent || support_idx.len() < full_dim {
            Classification::Rejected
        } else if is_facet {
            let s = simplify_inequality(&face, set, eqs)?;
            let verdict = redundancy_check::<Rational>(&s, eqs, &known)?;
            simplified = Some(s.clone());
            match verdict {
                Redundancy::New => {
                    known.push(s)?;
                    Classification::FacetNew
                }
                Redundancy::Redundant => Classification::FacetRedundant,
            }
        } else if face_dim >= threshold {
            let verdict = redundancy_check::<Rational>(&raw, eqs, &known)?;
            simplified = simplify_face(&face, set, eqs);
            match verdict {
                Redundancy::New => Classification::Face,
                Redundancy::Redundant => Classification::Rejected,
            }
        } else {
            Classification::Rejected
        };
        iterations.push(MinedInequality {
            pi,
            pi0,
            support: support_idx.iter().map(|i| i + 1).collect(),
            face_dim,
            classification,
            simplified,
            cap,
        });
        cuts.push(dedup_cut(&theta));
        cap = cap.min(support_idx.len());
    };
    Ok(MiningReport { config: cfg.clone(), iterations, termination, final_cap: cap })
}

/// A simplified row for a lower-dimensional face when one is tight exactly on it.
fn simplify_face(face: &VertexSet, set: &VertexSet, eqs: &ConstraintSystem) -> Option<LinearConstraint> {
    let c = simplify_inequality(face, set, eqs).ok()?;
    let tight = set.points().iter().filter(|s| c.is_tight_at(s)).count();
    (tight == face.len()).then_some(c)
}

fn float_consistent(raw: &LinearConstraint, set: &VertexSet, theta: &[bool]) -> bool {
    let tol = 1e-6;
    set.points().iter().zip(theta).all(|(s, &t)| {
        let slack = ratlinalg::to_f64(&raw.rhs) - ratlinalg::to_f64(&raw.lhs(s));
        slack >= -tol && (slack.abs() <= tol) == t
    })
}

type CountingSolution = (Vec<Rational>, Rational, Vec<bool>);

fn solve_counting_mip<F: LpField>(
    model: &MipModel,
    options: &MipOptions,
    n: usize,
) -> Result<Option<CountingSolution>, OptimizerError> {
    let sol = solve_mip::<F>(model, options)?;
    if sol.status != optimizer::LpStatus::Optimal {
        return Ok(None);
    }
    let pi = sol.x[..n].iter().map(F::to_rational).collect();
    let pi0 = sol.x[n].to_rational();
    let theta = sol.x[n + 1..].iter().map(|t| t.to_f64() > 0.5).collect();
    Ok(Some((pi, pi0, theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::tests::stasheff;
    use crate::polytope::Relation;

    #[test]
    fn dedup_cut_of_zero_vector_demands_one_point() {
        let c = dedup_cut(&[false, false, false]);
        assert_eq!(c.relation, Relation::Le);
        assert_eq!(c.rhs, int(-1));
        assert!(c.coeffs.iter().all(|v| *v == int(-1)));
    }

    #[test]
    fn model_shape_for_stasheff() {
        let s = stasheff();
        let model = build_facet_mip(&s, 1, &FacetSearchConfig::default(), 13, &[]).unwrap();
        assert_eq!(model.num_vars(), 4 + 1 + 14);
        assert_eq!(model.binary_indices().len(), 14);
        assert_eq!(model.constraints.len(), 30);
        assert!(matches!(
            build_facet_mip(&s, 1, &FacetSearchConfig::default(), 2, &[]),
            Err(FacetError::CapTooSmall { cap: 2, minimum: 3 })
        ));
    }

    #[test]
    fn display_form_leads_with_positive_coefficient() {
        let c = LinearConstraint::ge(vec![int(-2), int(0)], int(-8));
        assert_eq!(display_form(&c).to_string(), "LE 4 1 0");
    }
}
