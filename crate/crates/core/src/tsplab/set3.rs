//! The eleven `Set3` inequality families for `TSP_H(β)` and their validation over tours.
//!
//! Every family is written once, symbolically, in [`family_form`]: a middle expression
//! plus an optional lower and upper side, each side being a constant plus `z` terms. A
//! one-sided `≥` family has an empty-`z` lower side holding its right-hand side.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{
    check_beta, enumerate_tours, in_degree_equalities, tour_to_point, tsp_h_equalities, FlowExpr,
    TspError, TspLayout,
};
use crate::polytope::{polytope_dimension, LinearConstraint, Relation, VertexSet};
use crate::ratlinalg::{pow, rank_lower_bound_mod_p, rank_of_rows, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applicability {
    AllN,
    EvenN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// Indexed by an ordered pair `i ≠ j` of nodes in `2..n`.
    Pair,
    /// Indexed by one node `j` in `2..n`.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Set3Family {
    pub id: u8,
    pub applicability: Applicability,
    pub arity: Arity,
}

const fn family(id: u8, applicability: Applicability, arity: Arity) -> Set3Family {
    Set3Family { id, applicability, arity }
}

pub const SET3: [Set3Family; 11] = [
    family(1, Applicability::AllN, Arity::Pair),
    family(2, Applicability::AllN, Arity::Single),
    family(3, Applicability::AllN, Arity::Pair),
    family(4, Applicability::AllN, Arity::Pair),
    family(5, Applicability::AllN, Arity::Pair),
    family(6, Applicability::AllN, Arity::Pair),
    family(7, Applicability::AllN, Arity::Pair),
    family(8, Applicability::AllN, Arity::Pair),
    family(9, Applicability::AllN, Arity::Pair),
    family(10, Applicability::AllN, Arity::Pair),
    family(11, Applicability::EvenN, Arity::Pair),
];

/// Smallest `n` for which the printed coefficient sums are well defined.
pub const SET3_MIN_N: usize = 6;

impl Set3Family {
    pub fn get(id: u8) -> Option<Set3Family> {
        SET3.iter().copied().find(|f| f.id == id)
    }

    pub fn check(&self, n: usize) -> Result<(), TspError> {
        if n < SET3_MIN_N {
            return Err(TspError::NTooSmall { n, minimum: SET3_MIN_N });
        }
        if self.applicability == Applicability::EvenN && n % 2 == 1 {
            return Err(TspError::NotApplicable { family: self.id, n });
        }
        Ok(())
    }
}

/// One member of a family; `i` is `None` for single-node families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Set3Member {
    pub family: u8,
    pub i: Option<usize>,
    pub j: usize,
}

impl fmt::Display for Set3Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.i {
            Some(i) => write!(f, "F{}({i},{})", self.family, self.j),
            None => write!(f, "F{}({})", self.family, self.j),
        }
    }
}

/// All members of `family` at `n`, ordered by `i` then `j`.
pub fn set3_members(family: &Set3Family, n: usize) -> Result<Vec<Set3Member>, TspError> {
    family.check(n)?;
    Ok(match family.arity {
        Arity::Single => (2..=n).map(|j| Set3Member { family: family.id, i: None, j }).collect(),
        Arity::Pair => (2..=n)
            .flat_map(|i| (2..=n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| Set3Member { family: family.id, i: Some(i), j })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    One,
    I,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Sym {
    X(Node, Node),
    Z(Node, Node),
    /// `Σ x_{v,a}` over `a = start..n` with `a` distinct from `v` and from the member's nodes.
    SumX(Node, usize),
}

#[derive(Debug, Clone)]
struct Side {
    z: Vec<(Sym, Rational)>,
    constant: Rational,
}

#[derive(Debug, Clone)]
struct Form {
    middle: Vec<(Sym, Rational)>,
    lower: Option<Side>,
    upper: Option<Side>,
}

struct Powers {
    beta: Rational,
    n: i64,
}

impl Powers {
    /// `β^{n+k}`.
    fn p(&self, k: i64) -> Rational {
        let e = self.n + k;
        assert!(e >= 0);
        pow(&self.beta, e as u32)
    }

    /// `β^k` for a fixed exponent.
    fn b(&self, k: u32) -> Rational {
        pow(&self.beta, k)
    }

    /// `Σ_{a=lo}^{hi} β^a` with `hi` given relative to `n`; empty ranges are zero.
    fn sum(&self, lo: i64, hi_rel: i64) -> Rational {
        let hi = self.n + hi_rel;
        (lo..=hi).map(|a| pow(&self.beta, a as u32)).fold(Rational::zero(), |s, t| s + t)
    }

    /// `Σ_{a=lo}^{hi} β^{2a+1}`.
    fn odd_sum(&self, lo: i64, hi: i64) -> Rational {
        (lo..=hi).map(|a| pow(&self.beta, (2 * a + 1) as u32)).fold(Rational::zero(), |s, t| s + t)
    }
}

fn ge(middle: Vec<(Sym, Rational)>, rhs: Rational) -> Form {
    Form { middle, lower: Some(Side { z: Vec::new(), constant: rhs }), upper: None }
}

/// The coefficient table: one entry per printed term of each family.
fn family_form(id: u8, n: usize, beta: &Rational) -> Form {
    use Node::{One, I, J};
    use Sym::{SumX, X, Z};
    let w = Powers { beta: beta.clone(), n: n as i64 };
    let one = Rational::one();
    let b = beta.clone();
    let b1 = &b + &one;
    match id {
        1 => Form {
            middle: vec![(SumX(J, 1), one.clone()), (X(I, J), -b.clone())],
            lower: Some(Side { z: vec![(Z(I, J), -w.p(-1)), (Z(J, I), -w.p(-1))], constant: w.p(-1) }),
            upper: Some(Side { z: vec![(Z(I, J), -b.clone()), (Z(J, I), -b.clone())], constant: b.clone() }),
        },
        2 => Form {
            middle: vec![(SumX(J, 1), one.clone())],
            lower: Some(Side {
                z: vec![(Z(J, One), w.p(-1) - w.p(-2)), (Z(One, J), &b - w.p(-2))],
                constant: w.p(-2),
            }),
            upper: Some(Side {
                z: vec![(Z(J, One), w.p(-1) - w.b(2)), (Z(One, J), &b - w.b(2))],
                constant: w.b(2),
            }),
        },
        3 => Form {
            middle: vec![(X(J, I), one.clone())],
            lower: None,
            upper: Some(Side {
                z: vec![(Z(One, J), &b - w.b(2)), (Z(J, I), w.b(2))],
                constant: Rational::zero(),
            }),
        },
        4 => {
            let s5 = w.sum(0, -5);
            ge(
                vec![
                    (Z(One, J), w.p(-2) - &b),
                    (Z(I, One), (w.p(-3) - w.p(n as i64 - 6)) / &s5),
                    (Z(J, One), w.p(-2)),
                    (Z(J, I), -w.p(-3) / &s5),
                    (X(J, I), w.sum(0, -4) / &s5),
                    (SumX(J, 2), one.clone()),
                ],
                w.p(-2),
            )
        }
        5 => {
            let s4 = w.sum(0, -4);
            ge(
                vec![
                    (Z(One, J), w.p(-3) - &b),
                    (Z(I, One), w.p(-2) - w.p(-3)),
                    (Z(J, One), w.p(-2)),
                    (Z(J, I), (w.p(n as i64 - 6) + w.p(-3)) / &s4),
                    (X(J, I), (w.sum(0, -5) - w.p(-4)) / &s4),
                    (SumX(J, 2), one.clone()),
                ],
                w.p(-2),
            )
        }
        6 => {
            let c = w.p(-2) - w.p(-3) + w.p(-4);
            ge(
                vec![
                    (Z(One, I), w.p(-4) - &b),
                    (Z(One, J), w.p(-4) - &b),
                    (Z(I, One), c.clone()),
                    (Z(J, One), c),
                    (X(I, J), one.clone() / &b),
                    (X(J, I), one.clone() / &b),
                    (SumX(I, 2), one.clone()),
                    (SumX(J, 2), one.clone()),
                ],
                w.p(-2) + w.p(-4),
            )
        }
        7 => {
            let c = w.p(-2) - w.p(-3) + w.p(-4);
            ge(
                vec![
                    (Z(One, I), w.p(-4) - &b),
                    (Z(I, One), c.clone()),
                    (Z(J, One), c),
                    (Z(J, I), w.p(-4) + w.p(-2)),
                    (X(I, J), one.clone() / &b),
                    (X(J, I), -b.clone()),
                    (SumX(I, 2), one.clone()),
                    (SumX(J, 2), one.clone()),
                ],
                w.p(-2) + w.p(-4),
            )
        }
        8 => {
            let c = w.p(-2) - w.p(-3) + w.p(-4);
            let s5 = w.sum(0, -5);
            ge(
                vec![
                    (Z(One, I), w.p(-4) - &b),
                    (Z(One, J), w.p(-4) - &b),
                    (Z(I, One), c.clone()),
                    (Z(J, One), c),
                    (Z(J, I), w.p(-4) * (&one + w.sum(2, -3)) / &s5),
                    (X(I, J), one.clone() / &b),
                    (X(J, I), (&one - w.p(-4) - w.p(-5)) / &s5),
                    (SumX(I, 2), one.clone()),
                    (SumX(J, 2), one.clone()),
                ],
                w.p(-2) + w.p(-4),
            )
        }
        9 => ge(
            vec![
                (Z(One, I), w.p(-3) - w.b(2)),
                (Z(I, One), w.p(0)),
                (Z(J, One), w.p(0) + w.p(-1) + w.p(-3)),
                (Z(J, I), w.p(0) + w.p(-1) + w.p(-2) + w.p(-3)),
                (X(I, J), one.clone()),
                (SumX(I, 2), b.clone()),
                (SumX(J, 2), w.b(2) + &b + &one),
                (X(J, I), -w.b(2)),
            ],
            w.p(0) + w.p(-1) + w.p(-2) + w.p(-3),
        ),
        10 | 11 => {
            let (zji, xji) = if id == 10 {
                let d = &one + w.p(-3) + w.sum(1, -4) * Rational::from_integer(2.into());
                (
                    w.p(-3) * (&one + &b + w.sum(3, -2)) / &d,
                    (&one - w.p(-3) + &b * Rational::from_integer(2.into()) + w.sum(2, -5)) / &d,
                )
            } else {
                let d = w.sum(0, -4);
                let half = n as i64 / 2;
                (
                    w.p(-3) * (&one + w.odd_sum(1, half - 2)) / &d,
                    (&one - w.p(-4) + w.odd_sum(0, half - 3)) / &d,
                )
            };
            ge(
                vec![
                    (Z(One, I), (w.p(-3) - w.b(2)) / &b1),
                    (Z(One, J), w.p(-3) - &b),
                    (Z(I, One), w.p(-1) / &b1),
                    (Z(J, One), (w.p(-1) + w.p(-3)) / &b1),
                    (Z(J, I), zji),
                    (X(I, J), &one / &b1),
                    (X(J, I), xji),
                    (SumX(I, 2), &b / &b1),
                    (SumX(J, 2), one.clone()),
                ],
                (w.p(-1) + w.p(-2) + w.p(-3)) / &b1,
            )
        }
        _ => unreachable!("family ids are 1..=11"),
    }
}

fn node(v: Node, member: &Set3Member) -> usize {
    match v {
        Node::One => 1,
        Node::I => member.i.expect("pair family"),
        Node::J => member.j,
    }
}

fn instantiate(terms: &[(Sym, Rational)], member: &Set3Member, e: &mut FlowExpr, n: usize, sign: bool) {
    for (sym, c) in terms {
        let c = if sign { c.clone() } else { -c.clone() };
        match *sym {
            Sym::X(a, b) => {
                e.x(node(a, member), node(b, member), &c);
            }
            Sym::Z(a, b) => {
                e.z(node(a, member), node(b, member), &c);
            }
            Sym::SumX(v, start) => {
                let from = node(v, member);
                for a in (start..=n).filter(|&a| a != from && a != member.j && Some(a) != member.i) {
                    e.x(from, a, &c);
                }
            }
        }
    }
}

fn check_member(member: &Set3Member, n: usize, beta: &Rational) -> Result<Set3Family, TspError> {
    check_beta(beta)?;
    let family = Set3Family::get(member.family).ok_or(TspError::NotApplicable { family: member.family, n })?;
    family.check(n)?;
    let in_range = |v: usize| (2..=n).contains(&v);
    let shape_ok = match (family.arity, member.i) {
        (Arity::Single, None) => true,
        (Arity::Pair, Some(i)) => in_range(i) && i != member.j,
        _ => false,
    };
    if !shape_ok || !in_range(member.j) {
        return Err(TspError::InvalidInstance(format!("{member} is not a member at n = {n}")));
    }
    Ok(family)
}

/// Rows of a member as sparse forms: `(relation, lhs, rhs)`; two-sided families give `GE` then `LE`.
fn member_rows(member: &Set3Member, n: usize, beta: &Rational) -> Result<Vec<(Relation, FlowExpr, Rational)>, TspError> {
    check_member(member, n, beta)?;
    let form = family_form(member.family, n, beta);
    let mut rows = Vec::new();
    for (relation, side) in [(Relation::Ge, &form.lower), (Relation::Le, &form.upper)] {
        if let Some(side) = side {
            let mut e = FlowExpr::new(n, beta);
            instantiate(&form.middle, member, &mut e, n, true);
            instantiate(&side.z, member, &mut e, n, false);
            e.terms.retain(|_, c| !c.is_zero());
            rows.push((relation, e, side.constant.clone()));
        }
    }
    Ok(rows)
}

/// The member's rows over the [`TspLayout`] columns, with exact coefficients.
pub fn set3_constraint(member: &Set3Member, n: usize, beta: &Rational) -> Result<Vec<LinearConstraint>, TspError> {
    Ok(member_rows(member, n, beta)?
        .into_iter()
        .map(|(relation, e, rhs)| LinearConstraint::new(e.dense(), relation, rhs))
        .collect())
}

/// Tour points scaled to integers; `β^k = p^k / q^k` so multiplying by `q^{n-1}` clears all denominators.
struct ScaledTours {
    points: Vec<Vec<Rational>>,
    sparse: Vec<Vec<(usize, BigInt)>>,
    scale: BigInt,
}

impl ScaledTours {
    fn new(n: usize, beta: &Rational) -> Result<Self, TspError> {
        let scale = num_traits::pow(beta.denom().clone(), n - 1);
        let scale_q = Rational::from_integer(scale.clone());
        let points: Vec<Vec<Rational>> =
            enumerate_tours(n)?.iter().map(|t| tour_to_point(t, beta).to_vector()).collect();
        let sparse = points
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| {
                        let s = v * &scale_q;
                        debug_assert!(s.is_integer());
                        (k, s.to_integer())
                    })
                    .collect()
            })
            .collect();
        Ok(ScaledTours { points, sparse, scale })
    }
}

/// Integer row `a·x (rel) r` equivalent to `lhs (rel) rhs` evaluated on scaled points.
struct IntRow {
    coeffs: Vec<Option<BigInt>>,
    rhs: BigInt,
    relation: Relation,
}

impl IntRow {
    fn new(relation: Relation, e: &FlowExpr, rhs: &Rational, width: usize, scale: &BigInt) -> Self {
        let lcm = e.terms.values().chain(std::iter::once(rhs)).fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let lcm_q = Rational::from_integer(lcm);
        let mut coeffs = vec![None; width];
        for (&k, c) in &e.terms {
            coeffs[k] = Some((c * &lcm_q).to_integer());
        }
        IntRow { coeffs, rhs: (rhs * &lcm_q).to_integer() * scale, relation }
    }

    /// Signed slack: nonnegative iff satisfied, zero iff tight.
    fn slack(&self, point: &[(usize, BigInt)]) -> BigInt {
        let lhs: BigInt = point
            .iter()
            .filter_map(|(k, v)| self.coeffs[*k].as_ref().map(|c| c * v))
            .sum();
        match self.relation {
            Relation::Ge => lhs - &self.rhs,
            _ => &self.rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Set3Verdict {
    pub member: Set3Member,
    pub relation: Relation,
    pub valid: bool,
    pub violations: usize,
    pub tight_count: usize,
    /// Dimension of the face cut out by the tight tours; `None` when facet checks are off or
    /// no tour is tight.
    pub face_dim: Option<usize>,
    pub is_facet: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Set3Report {
    pub n: usize,
    pub beta: Rational,
    pub tours: usize,
    /// Dimension of the convex hull of all tour points.
    pub dimension: usize,
    pub verdicts: Vec<Set3Verdict>,
    /// Families that do not apply at this `n`.
    pub skipped: Vec<(u8, TspError)>,
}

impl Set3Report {
    pub fn all_valid(&self) -> bool {
        self.verdicts.iter().all(|v| v.valid)
    }

    pub fn all_facets(&self) -> bool {
        self.verdicts.iter().all(|v| v.is_facet == Some(true))
    }
}

impl fmt::Display for Set3Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SET3 n={} beta={} tours={} dim={}", self.n, self.beta, self.tours, self.dimension)?;
        let opt = |v: Option<usize>| v.map_or("-".to_string(), |d| d.to_string());
        for family in SET3 {
            let rows: Vec<&Set3Verdict> = self.verdicts.iter().filter(|v| v.member.family == family.id).collect();
            if rows.is_empty() {
                continue;
            }
            let valid = rows.iter().filter(|v| v.valid).count();
            let facets = rows.iter().filter(|v| v.is_facet == Some(true)).count();
            let checked = rows.iter().any(|v| v.is_facet.is_some());
            let verdict = match (valid == rows.len(), checked, facets == rows.len()) {
                (false, _, _) => "INVALID",
                (true, false, _) => "VALID",
                (true, true, true) => "VALID+FACET",
                (true, true, false) => "VALID+NONFACET",
            };
            writeln!(
                f,
                "FAMILY {:>2} {:<14} rows={:<3} valid={:<3} facets={}",
                family.id,
                verdict,
                rows.len(),
                valid,
                if checked { facets.to_string() } else { "-".into() }
            )?;
        }
        for (id, reason) in &self.skipped {
            writeln!(f, "FAMILY {id:>2} SKIPPED        {reason}")?;
        }
        for v in self.verdicts.iter().filter(|v| !v.valid || v.is_facet == Some(false)) {
            writeln!(
                f,
                "  {} {} violations={} tight={} face_dim={}",
                v.member,
                v.relation,
                v.violations,
                v.tight_count,
                opt(v.face_dim)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Worker threads; results are ordered by family, `i`, `j` regardless.
    pub jobs: usize,
    /// Compute face dimensions and facet status, not just validity.
    pub facets: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { jobs: 1, facets: true }
    }
}

fn differences(points: &[Vec<Rational>], subset: &[usize]) -> Vec<Vec<Rational>> {
    let base = &points[subset[0]];
    subset[1..]
        .iter()
        .map(|&k| points[k].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect()
}

/// Affine dimension of `points[subset]`, using the modular rank when it reaches `upper`.
fn subset_dimension(points: &[Vec<Rational>], subset: &[usize], upper: usize) -> Result<usize, TspError> {
    let diffs = differences(points, subset);
    let width = points[0].len();
    if rank_lower_bound_mod_p(width, &diffs) == Some(upper) {
        return Ok(upper);
    }
    let set = VertexSet::new(subset.iter().map(|&k| points[k].clone()).collect())?;
    Ok(polytope_dimension(&set))
}

/// Checks every applicable member of every family against all `(n-1)!` tours, exactly.
///
/// A member is a facet when it is valid, some tour is slack, and the tight tours span a face
/// of dimension one less than the tour polytope.
pub fn validate_set3(n: usize, beta: &Rational, opts: ValidateOptions) -> Result<Set3Report, TspError> {
    check_beta(beta)?;
    if !(SET3_MIN_N..=8).contains(&n) {
        return Err(if n < SET3_MIN_N {
            TspError::NTooSmall { n, minimum: SET3_MIN_N }
        } else {
            TspError::TooLarge { n, limit: 8 }
        });
    }
    let tours = ScaledTours::new(n, beta)?;
    let layout = TspLayout::new(n);
    let equalities: Vec<Vec<Rational>> = tsp_h_equalities(n, beta)
        .into_iter()
        .chain(in_degree_equalities(n, beta))
        .map(|c| c.coeffs)
        .collect();
    // Tour points satisfy these equalities, so their rank bounds the dimension from above.
    let upper = layout.len() - rank_of_rows(layout.len(), equalities);
    let all: Vec<usize> = (0..tours.points.len()).collect();
    let dimension = subset_dimension(&tours.points, &all, upper)?;

    let mut members = Vec::new();
    let mut skipped = Vec::new();
    for family in &SET3 {
        match set3_members(family, n) {
            Ok(ms) => members.extend(ms),
            Err(e @ TspError::NotApplicable { .. }) => skipped.push((family.id, e)),
            Err(e) => return Err(e),
        }
    }
    let check = |member: &Set3Member| -> Result<Vec<Set3Verdict>, TspError> {
        let mut out = Vec::new();
        for (relation, e, rhs) in member_rows(member, n, beta)? {
            let row = IntRow::new(relation, &e, &rhs, layout.len(), &tours.scale);
            let mut violations = 0;
            let mut tight = Vec::new();
            for (k, p) in tours.sparse.iter().enumerate() {
                let s = row.slack(p);
                if s.is_negative() {
                    violations += 1;
                } else if s.is_zero() {
                    tight.push(k);
                }
            }
            let (face_dim, is_facet) = if opts.facets && !tight.is_empty() {
                let d = subset_dimension(&tours.points, &tight, dimension.saturating_sub(1))?;
                let proper = tight.len() < tours.points.len();
                (Some(d), Some(violations == 0 && proper && d + 1 == dimension))
            } else if opts.facets {
                (None, Some(false))
            } else {
                (None, None)
            };
            out.push(Set3Verdict {
                member: *member,
                relation,
                valid: violations == 0,
                violations,
                tight_count: tight.len(),
                face_dim,
                is_facet,
            });
        }
        Ok(out)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| TspError::InvalidInstance(e.to_string()))?;
    let results: Vec<Result<Vec<Set3Verdict>, TspError>> = pool.install(|| members.par_iter().map(check).collect());
    let mut verdicts = Vec::new();
    for r in results {
        verdicts.extend(r?);
    }
    Ok(Set3Report { n, beta: beta.clone(), tours: tours.points.len(), dimension, verdicts, skipped })
}

/// Extremes of a family's middle expression over the tours matching one assignment of its binaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRow {
    /// Values of [`CaseTable::binaries`], in order.
    pub pattern: Vec<bool>,
    pub tours: usize,
    /// `None` when no tour matches the pattern.
    pub min: Option<Rational>,
    pub max: Option<Rational>,
}

/// Case analysis of member `F(i, j)` in the style of a by-hand validity proof.
///
/// The binaries are the `z` variables of the family, ordered `z_1i, z_1j, z_i1, z_j1, z_ij, z_ji`;
/// patterns run from all ones down to all zeros. Returns the binaries as arcs and one row per pattern.
pub fn appendix_case_table(
    member: &Set3Member,
    n: usize,
    beta: &Rational,
) -> Result<(Vec<(usize, usize)>, Vec<CaseRow>), TspError> {
    check_member(member, n, beta)?;
    let form = family_form(member.family, n, beta);
    let mut syms: Vec<Sym> = form
        .middle
        .iter()
        .chain(form.lower.iter().flat_map(|s| &s.z))
        .chain(form.upper.iter().flat_map(|s| &s.z))
        .filter_map(|(s, _)| matches!(s, Sym::Z(..)).then_some(*s))
        .collect();
    let order = |s: &Sym| match s {
        Sym::Z(Node::One, Node::I) => 0,
        Sym::Z(Node::One, Node::J) => 1,
        Sym::Z(Node::I, Node::One) => 2,
        Sym::Z(Node::J, Node::One) => 3,
        Sym::Z(Node::I, Node::J) => 4,
        Sym::Z(Node::J, Node::I) => 5,
        _ => 6,
    };
    syms.sort_by_key(order);
    syms.dedup();
    let binaries: Vec<(usize, usize)> = syms
        .iter()
        .map(|s| match *s {
            Sym::Z(a, b) => (node(a, member), node(b, member)),
            _ => unreachable!(),
        })
        .collect();
    let mut middle = FlowExpr::new(n, beta);
    instantiate(&form.middle, member, &mut middle, n, true);
    let middle = LinearConstraint::eq(middle.dense(), Rational::zero());
    let k = binaries.len();
    let mut rows: Vec<CaseRow> = (0..1usize << k)
        .rev()
        .map(|mask| CaseRow {
            pattern: (0..k).map(|b| mask >> (k - 1 - b) & 1 == 1).collect(),
            tours: 0,
            min: None,
            max: None,
        })
        .collect();
    for tour in enumerate_tours(n)? {
        let p = tour_to_point(&tour, beta);
        let mask = binaries.iter().fold(0usize, |m, &(a, b)| m << 1 | usize::from(p.z(a, b)));
        let row = &mut rows[(1 << k) - 1 - mask];
        let v = middle.lhs(&p.to_vector());
        row.tours += 1;
        if row.min.as_ref().map_or(true, |m| v < *m) {
            row.min = Some(v.clone());
        }
        if row.max.as_ref().map_or(true, |m| v > *m) {
            row.max = Some(v);
        }
    }
    Ok((binaries, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlinalg::{frac, int};

    fn coeff(member: Set3Member, n: usize, beta: &Rational, col: usize) -> Vec<Rational> {
        set3_constraint(&member, n, beta).unwrap().iter().map(|c| c.coeffs[col].clone()).collect()
    }

    fn pair(family: u8, i: usize, j: usize) -> Set3Member {
        Set3Member { family, i: Some(i), j }
    }

    // The printed terms are checked one by one at n = 6, β = 1/2, member (i, j) = (2, 3).
    // x_{j1} terms carry the substitution factor β^5 = 1/32.
    const N: usize = 6;

    fn half() -> Rational {
        frac(1, 2)
    }

    #[test]
    fn family_1_terms() {
        let l = TspLayout::new(N);
        let m = pair(1, 2, 3);
        assert_eq!(coeff(m, N, &half(), l.x(3, 4)), vec![int(1), int(1)]);
        assert_eq!(coeff(m, N, &half(), l.z(3, 1)), vec![frac(1, 32), frac(1, 32)]);
        assert_eq!(coeff(m, N, &half(), l.x(2, 3)), vec![frac(-1, 2), frac(-1, 2)]);
        assert_eq!(coeff(m, N, &half(), l.z(2, 3)), vec![frac(1, 32), frac(1, 2)]);
        assert_eq!(coeff(m, N, &half(), l.z(3, 2)), vec![frac(1, 32), frac(1, 2)]);
        let rows = set3_constraint(&m, N, &half()).unwrap();
        assert_eq!((rows[0].relation, rows[0].rhs.clone()), (Relation::Ge, frac(1, 32)));
        assert_eq!((rows[1].relation, rows[1].rhs.clone()), (Relation::Le, frac(1, 2)));
        assert!(coeff(m, N, &half(), l.x(3, 2)).iter().all(Zero::is_zero));
    }

    #[test]
    fn family_2_terms() {
        let l = TspLayout::new(N);
        let m = Set3Member { family: 2, i: None, j: 3 };
        assert_eq!(coeff(m, N, &half(), l.x(3, 2)), vec![int(1), int(1)]);
        // x_31 = β^5 z_31 minus the side's (β^5 - β^4) and (β^5 - β^2)
        assert_eq!(coeff(m, N, &half(), l.z(3, 1)), vec![frac(1, 16), frac(1, 4)]);
        assert_eq!(coeff(m, N, &half(), l.z(1, 3)), vec![frac(-7, 16), frac(-1, 4)]);
        let rows = set3_constraint(&m, N, &half()).unwrap();
        assert_eq!(rows[0].rhs, frac(1, 16));
        assert_eq!(rows[1].rhs, frac(1, 4));
    }

    #[test]
    fn family_3_terms() {
        let l = TspLayout::new(N);
        let m = pair(3, 2, 3);
        let rows = set3_constraint(&m, N, &half()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].relation, Relation::Le);
        assert_eq!(rows[0].coeffs[l.x(3, 2)], int(1));
        assert_eq!(rows[0].coeffs[l.z(1, 3)], frac(-1, 4));
        assert_eq!(rows[0].coeffs[l.z(3, 2)], frac(-1, 4));
        assert_eq!(rows[0].rhs, int(0));
    }

    #[test]
    fn family_4_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(4, 2, 3), N, &half()).unwrap()[0];
        // Σ_{a=0}^{1} β^a = 3/2, Σ_{a=0}^{2} β^a = 7/4
        assert_eq!(c.coeffs[l.z(1, 3)], frac(1, 16) - half());
        assert_eq!(c.coeffs[l.z(2, 1)], (frac(1, 8) - frac(1, 64)) / frac(3, 2));
        assert_eq!(c.coeffs[l.z(3, 1)], frac(1, 16));
        assert_eq!(c.coeffs[l.z(3, 2)], frac(-1, 8) / frac(3, 2));
        assert_eq!(c.coeffs[l.x(3, 2)], frac(7, 4) / frac(3, 2));
        assert_eq!(c.coeffs[l.x(3, 5)], int(1));
        assert_eq!(c.rhs, frac(1, 16));
    }

    #[test]
    fn family_5_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(5, 2, 3), N, &half()).unwrap()[0];
        assert_eq!(c.coeffs[l.z(1, 3)], frac(1, 8) - half());
        assert_eq!(c.coeffs[l.z(2, 1)], frac(1, 16) - frac(1, 8));
        assert_eq!(c.coeffs[l.z(3, 1)], frac(1, 16));
        assert_eq!(c.coeffs[l.z(3, 2)], (frac(1, 64) + frac(1, 8)) / frac(7, 4));
        assert_eq!(c.coeffs[l.x(3, 2)], (frac(3, 2) - frac(1, 4)) / frac(7, 4));
        assert_eq!(c.coeffs[l.x(3, 6)], int(1));
        assert_eq!(c.rhs, frac(1, 16));
    }

    #[test]
    fn family_6_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(6, 2, 3), N, &half()).unwrap()[0];
        let mid = frac(1, 16) - frac(1, 8) + frac(1, 4);
        assert_eq!(c.coeffs[l.z(1, 2)], frac(-1, 4));
        assert_eq!(c.coeffs[l.z(1, 3)], frac(-1, 4));
        assert_eq!(c.coeffs[l.z(2, 1)], mid.clone());
        assert_eq!(c.coeffs[l.z(3, 1)], mid);
        assert_eq!(c.coeffs[l.x(2, 3)], int(2));
        assert_eq!(c.coeffs[l.x(3, 2)], int(2));
        assert_eq!(c.coeffs[l.x(2, 4)], int(1));
        assert_eq!(c.coeffs[l.x(3, 4)], int(1));
        assert_eq!(c.rhs, frac(1, 16) + frac(1, 4));
    }

    #[test]
    fn family_7_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(7, 2, 3), N, &half()).unwrap()[0];
        let mid = frac(1, 16) - frac(1, 8) + frac(1, 4);
        assert_eq!(c.coeffs[l.z(1, 2)], frac(-1, 4));
        assert_eq!(c.coeffs[l.z(1, 3)], int(0));
        assert_eq!(c.coeffs[l.z(2, 1)], mid.clone());
        assert_eq!(c.coeffs[l.z(3, 1)], mid);
        assert_eq!(c.coeffs[l.z(3, 2)], frac(1, 4) + frac(1, 16));
        assert_eq!(c.coeffs[l.x(2, 3)], int(2));
        assert_eq!(c.coeffs[l.x(3, 2)], frac(-1, 2));
        assert_eq!(c.rhs, frac(1, 16) + frac(1, 4));
    }

    #[test]
    fn family_8_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(8, 2, 3), N, &half()).unwrap()[0];
        // Σ_{a=2}^{3} β^a = 3/8, Σ_{a=0}^{1} β^a = 3/2
        assert_eq!(c.coeffs[l.z(3, 2)], frac(1, 4) * frac(11, 8) / frac(3, 2));
        assert_eq!(c.coeffs[l.x(3, 2)], (int(1) - frac(1, 4) - half()) / frac(3, 2));
        assert_eq!(c.coeffs[l.x(2, 3)], int(2));
        assert_eq!(c.coeffs[l.z(1, 3)], frac(-1, 4));
        assert_eq!(c.rhs, frac(5, 16));
    }

    #[test]
    fn family_9_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(9, 2, 3), N, &half()).unwrap()[0];
        let (b6, b5, b4, b3) = (frac(1, 64), frac(1, 32), frac(1, 16), frac(1, 8));
        assert_eq!(c.coeffs[l.z(1, 2)], b3.clone() - frac(1, 4));
        // x_21 is absent from the sums, so z_21 carries only β^n
        assert_eq!(c.coeffs[l.z(2, 1)], b6.clone());
        assert_eq!(c.coeffs[l.z(3, 1)], b6.clone() + &b5 + &b3);
        assert_eq!(c.coeffs[l.z(3, 2)], b6.clone() + &b5 + &b4 + &b3);
        assert_eq!(c.coeffs[l.x(2, 3)], int(1));
        assert_eq!(c.coeffs[l.x(2, 4)], half());
        assert_eq!(c.coeffs[l.x(3, 4)], frac(7, 4));
        assert_eq!(c.coeffs[l.x(3, 2)], frac(-1, 4));
        assert_eq!(c.rhs, b6 + b5 + b4 + b3);
    }

    #[test]
    fn family_10_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(10, 2, 3), N, &half()).unwrap()[0];
        let b1 = frac(3, 2);
        // 1 + β^3 + 2(β + β^2) = 21/8
        let d = frac(21, 8);
        assert_eq!(c.coeffs[l.z(1, 2)], (frac(1, 8) - frac(1, 4)) / &b1);
        assert_eq!(c.coeffs[l.z(1, 3)], frac(1, 8) - half());
        assert_eq!(c.coeffs[l.z(2, 1)], frac(1, 32) / &b1);
        assert_eq!(c.coeffs[l.z(3, 1)], (frac(1, 32) + frac(1, 8)) / &b1);
        // 1 + β + β^3 + β^4
        assert_eq!(c.coeffs[l.z(3, 2)], frac(1, 8) * frac(27, 16) / &d);
        // 1 - β^3 + 2β, the β^2.. sum is empty at n = 6
        assert_eq!(c.coeffs[l.x(3, 2)], frac(15, 8) / &d);
        assert_eq!(c.coeffs[l.x(2, 3)], int(1) / &b1);
        assert_eq!(c.coeffs[l.x(2, 5)], half() / &b1);
        assert_eq!(c.coeffs[l.x(3, 5)], int(1));
        assert_eq!(c.rhs, (frac(1, 32) + frac(1, 16) + frac(1, 8)) / b1);
    }

    #[test]
    fn family_11_terms() {
        let l = TspLayout::new(N);
        let c = &set3_constraint(&pair(11, 2, 3), N, &half()).unwrap()[0];
        // Σ_{a=0}^{2} β^a = 7/4; odd sums: β^3 for the z term, β for the x term
        assert_eq!(c.coeffs[l.z(3, 2)], frac(1, 8) * frac(9, 8) / frac(7, 4));
        assert_eq!(c.coeffs[l.x(3, 2)], (int(1) - frac(1, 4) + half()) / frac(7, 4));
        assert_eq!(c.coeffs[l.z(1, 3)], frac(1, 8) - half());
        assert_eq!(c.rhs, (frac(1, 32) + frac(1, 16) + frac(1, 8)) / frac(3, 2));
    }

    #[test]
    fn applicability_and_domain_errors() {
        let f11 = Set3Family::get(11).unwrap();
        assert_eq!(set3_members(&f11, 7), Err(TspError::NotApplicable { family: 11, n: 7 }));
        assert_eq!(set3_members(&f11, 6).unwrap().len(), 20);
        assert_eq!(set3_members(&SET3[1], 6).unwrap().len(), 5);
        assert_eq!(set3_members(&SET3[0], 5), Err(TspError::NTooSmall { n: 5, minimum: 6 }));
        assert!(set3_constraint(&Set3Member { family: 2, i: Some(2), j: 3 }, 6, &half()).is_err());
        assert!(set3_constraint(&pair(1, 3, 3), 6, &half()).is_err());
        assert!(set3_constraint(&pair(12, 2, 3), 6, &half()).is_err());
    }

    #[test]
    fn members_print_compactly() {
        assert_eq!(pair(7, 2, 5).to_string(), "F7(2,5)");
        assert_eq!(Set3Member { family: 2, i: None, j: 4 }.to_string(), "F2(4)");
    }
}
