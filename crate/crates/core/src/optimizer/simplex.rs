//! Two-phase bounded-variable primal simplex on a dense tableau, plus a bounded dual
//! simplex used to re-optimize after a variable is fixed.

use num_traits::Zero;

use super::{LpField, LpSolution, LpStatus, MipModel, OptimizerError, Sense};
use crate::polytope::Relation;
use crate::ratlinalg::Rational;

/// Consecutive degenerate float pivots tolerated before pricing falls back to Bland's rule.
const DEGENERATE_STREAK: usize = 64;
/// Bound overshoot allowed by the float ratio test.
const HARRIS_TOL: f64 = 1e-9;
/// Smallest pivot the float ratio test accepts; rows below it are left to the bound tolerance.
const HARRIS_PIVOT_TOL: f64 = 1e-7;
/// Pivots below this fraction of the column's largest candidate are treated as noise.
const HARRIS_RELATIVE_PIVOT: f64 = 1e-8;
/// Preferred minimum of a pivot relative to the largest entry of its row.
const HARRIS_ROW_PIVOT: f64 = 1e-9;
/// Reduced costs within this distance of zero count as optimal in float mode.
const FLOAT_OPTIMALITY_TOL: f64 = 1e-7;
/// Smallest pivot accepted while refactoring.
const FLOAT_REFACTOR_PIVOT: f64 = 1e-11;
/// Artificial sum at which a float phase one counts as feasible.
const PHASE_ONE_ZERO: f64 = 1e-9;
/// Float pivots between rebuilds of the tableau from the original rows.
const REFACTOR_INTERVAL: usize = 100;

/// Solves the continuous relaxation of `model`; integrality flags are ignored.
///
/// Exact solves price with Bland's rule throughout. Float solves use Dantzig pricing and
/// switch to Bland's rule after a run of degenerate pivots, with a Harris ratio test and a
/// periodic rebuild of the tableau from the original rows. A float solve that still exceeds
/// its iteration cap fails with [`OptimizerError::NumericalStall`].
pub fn solve_lp<F: LpField>(model: &MipModel) -> Result<LpSolution<F>, OptimizerError> {
    model.validate()?;
    let lower: Vec<Option<Rational>> = model.variables.iter().map(|v| v.lower.clone()).collect();
    let upper: Vec<Option<Rational>> = model.variables.iter().map(|v| v.upper.clone()).collect();
    let (solution, _) = Relaxation::solve(model, &lower, &upper)?;
    Ok(solution)
}

/// Variable `j` of the model in terms of tableau columns.
#[derive(Debug, Clone)]
enum ColumnMap<F> {
    /// `x = lo + y`
    Shift { col: usize, lo: F },
    /// `x = up − y`
    Mirror { col: usize, up: F },
    /// `x = y⁺ − y⁻`
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone)]
struct Tableau<F> {
    m: usize,
    n: usize,
    t: Vec<F>,
    beta: Vec<F>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    lower: Vec<F>,
    upper: Vec<Option<F>>,
    at_upper: Vec<bool>,
    barred: Vec<bool>,
    d: Vec<F>,
    pivots: usize,
    /// Float only: the starting rows, rhs and current phase cost, for refactoring.
    a0: Vec<F>,
    b0: Vec<F>,
    cost: Vec<F>,
    since_refactor: usize,
    /// Float only: artificial columns left basic in redundant rows, whose entries are noise.
    pinned: Vec<usize>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

/// An optimal tableau kept for re-optimization after bound changes.
#[derive(Debug, Clone)]
pub(crate) struct Relaxation<F> {
    tab: Tableau<F>,
    maps: Vec<ColumnMap<F>>,
    id_col: Vec<usize>,
    signs: Vec<i8>,
    flip: bool,
}

impl<F: LpField> Relaxation<F> {
    /// Cold solve under the given variable bounds. The relaxation is returned only when the
    /// solve ends optimal.
    pub(crate) fn solve(
        model: &MipModel,
        lower: &[Option<Rational>],
        upper: &[Option<Rational>],
    ) -> Result<(LpSolution<F>, Option<Self>), OptimizerError> {
        let nv = model.num_vars();
        for j in 0..nv {
            if let (Some(l), Some(u)) = (&lower[j], &upper[j]) {
                if l > u {
                    return Ok((LpSolution::without_point(LpStatus::Infeasible, 0), None));
                }
            }
        }

        let mut maps = Vec::with_capacity(nv);
        let mut col_upper: Vec<Option<F>> = Vec::new();
        for j in 0..nv {
            let map = match (&lower[j], &upper[j]) {
                (Some(l), u) => {
                    col_upper.push(u.as_ref().map(|u| F::from_rational(&(u - l))));
                    ColumnMap::Shift { col: col_upper.len() - 1, lo: F::from_rational(l) }
                }
                (None, Some(u)) => {
                    col_upper.push(None);
                    ColumnMap::Mirror { col: col_upper.len() - 1, up: F::from_rational(u) }
                }
                (None, None) => {
                    col_upper.push(None);
                    col_upper.push(None);
                    ColumnMap::Split { pos: col_upper.len() - 2, neg: col_upper.len() - 1 }
                }
            };
            maps.push(map);
        }
        let n_struct = col_upper.len();

        // rows over structural columns, with rhs corrected for shifts
        let m = model.constraints.len();
        let mut rows: Vec<Vec<F>> = Vec::with_capacity(m);
        let mut rhs: Vec<F> = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        let mut signs = Vec::with_capacity(m);
        for c in &model.constraints {
            let mut row = vec![F::zero_value(); n_struct];
            let mut b = F::from_rational(&c.rhs);
            for (a, map) in c.coeffs.iter().zip(&maps) {
                if a.is_zero() {
                    continue;
                }
                let a = F::from_rational(a);
                match map {
                    ColumnMap::Shift { col, lo } => {
                        b.sub_mul(&a, lo);
                        row[*col] = a;
                    }
                    ColumnMap::Mirror { col, up } => {
                        b.sub_mul(&a, up);
                        row[*col] = a.neg();
                    }
                    ColumnMap::Split { pos, neg } => {
                        row[*neg] = a.neg();
                        row[*pos] = a;
                    }
                }
            }
            let mut rel = c.relation;
            let mut sign = 1i8;
            if b < F::zero_value() {
                for v in &mut row {
                    *v = v.neg();
                }
                b = b.neg();
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                sign = -1;
            }
            rows.push(row);
            rhs.push(b);
            relations.push(rel);
            signs.push(sign);
        }

        // logical columns: slack or surplus per inequality, then artificials
        let n_slack = relations.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = relations.iter().filter(|r| **r != Relation::Le).count();
        let n = n_struct + n_slack + n_art;
        let first_art = n_struct + n_slack;
        let mut t = vec![F::zero_value(); m * n];
        let mut basis = vec![0usize; m];
        let mut id_col = vec![0usize; m];
        let (mut next_slack, mut next_art) = (n_struct, first_art);
        for i in 0..m {
            for (k, v) in rows[i].iter().enumerate() {
                if !v.is_zero_value() {
                    t[i * n + k] = v.clone();
                }
            }
            match relations[i] {
                Relation::Le => {
                    t[i * n + next_slack] = F::one_value();
                    basis[i] = next_slack;
                    id_col[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    t[i * n + next_slack] = F::one_value().neg();
                    next_slack += 1;
                    t[i * n + next_art] = F::one_value();
                    basis[i] = next_art;
                    id_col[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    t[i * n + next_art] = F::one_value();
                    basis[i] = next_art;
                    id_col[i] = next_art;
                    next_art += 1;
                }
            }
        }
        col_upper.resize(n, None);
        let mut row_of = vec![None; n];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = Some(i);
        }
        let (a0, b0) = if F::EXACT { (Vec::new(), Vec::new()) } else { (t.clone(), rhs.clone()) };
        let mut tab = Tableau {
            m,
            n,
            t,
            beta: rhs,
            basis,
            row_of,
            lower: vec![F::zero_value(); n],
            upper: col_upper,
            at_upper: vec![false; n],
            barred: vec![false; n],
            d: vec![F::zero_value(); n],
            pivots: 0,
            a0,
            b0,
            cost: Vec::new(),
            since_refactor: 0,
            pinned: Vec::new(),
        };

        if n_art > 0 {
            let mut cost = vec![F::zero_value(); n];
            for c in cost.iter_mut().skip(first_art) {
                *c = F::one_value();
            }
            tab.price_out(&cost);
            match tab.run(true)? {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => unreachable!("phase one is bounded below by zero"),
            }
            let mut residual = F::zero_value();
            for i in 0..m {
                if tab.basis[i] >= first_art {
                    residual = residual.add(&tab.beta[i]);
                }
            }
            if residual.is_infeasibility_residual() {
                return Ok((LpSolution::without_point(LpStatus::Infeasible, tab.pivots), None));
            }
            for j in first_art..n {
                tab.barred[j] = true;
                tab.upper[j] = Some(F::zero_value());
                tab.at_upper[j] = false;
            }
            if !F::EXACT {
                tab.drive_out_artificials(first_art);
            }
        }

        let flip = model.sense == Sense::Max;
        let mut cost = vec![F::zero_value(); n];
        for (c, map) in model.objective.iter().zip(&maps) {
            if c.is_zero() {
                continue;
            }
            let c = if flip { F::from_rational(&-c) } else { F::from_rational(c) };
            match map {
                ColumnMap::Shift { col, .. } => cost[*col] = c,
                ColumnMap::Mirror { col, .. } => cost[*col] = c.neg(),
                ColumnMap::Split { pos, neg } => {
                    cost[*neg] = c.neg();
                    cost[*pos] = c;
                }
            }
        }
        tab.price_out(&cost);
        if let PhaseEnd::Unbounded = tab.run(false)? {
            return Ok((LpSolution::without_point(LpStatus::Unbounded, tab.pivots), None));
        }
        let relaxation = Relaxation { tab, maps, id_col, signs, flip };
        Ok((relaxation.solution(model), Some(relaxation)))
    }

    /// Fixes model variable `var` to `value` and re-optimizes with the dual simplex.
    ///
    /// The variable must have a finite lower bound in the bounds the relaxation was built
    /// with. Returns `Infeasible` when the fixing empties the feasible region.
    pub(crate) fn fix(&mut self, model: &MipModel, var: usize, value: &Rational) -> Result<LpSolution<F>, OptimizerError> {
        let ColumnMap::Shift { col, lo } = &self.maps[var] else {
            panic!("only variables with a finite lower bound can be fixed");
        };
        let col = *col;
        let v = F::from_rational(value).sub(lo);
        let within = !v.is_neg() && self.tab.upper[col].as_ref().map_or(true, |u| !v.sub(u).is_pos());
        if !within {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
        }
        let start = self.tab.pivots;
        self.tab.fix_column(col, v);
        let status = self.tab.dual_run()?;
        let mut sol = match status {
            LpStatus::Optimal => self.solution(model),
            other => LpSolution::without_point(other, 0),
        };
        sol.work = self.tab.pivots - start;
        Ok(sol)
    }

    fn solution(&self, model: &MipModel) -> LpSolution<F> {
        let tab = &self.tab;
        let values: Vec<F> = (0..tab.n).map(|j| tab.value(j)).collect();
        let x: Vec<F> = self
            .maps
            .iter()
            .map(|map| match map {
                ColumnMap::Shift { col, lo } => lo.add(&values[*col]),
                ColumnMap::Mirror { col, up } => up.sub(&values[*col]),
                ColumnMap::Split { pos, neg } => values[*pos].sub(&values[*neg]),
            })
            .collect();
        let duals: Vec<F> = (0..tab.m)
            .map(|i| {
                // multiplier of the transformed row is −d at its unit column
                let y = tab.d[self.id_col[i]].neg();
                let y = if self.signs[i] < 0 { y.neg() } else { y };
                if self.flip {
                    y.neg()
                } else {
                    y
                }
            })
            .collect();
        let objective = model.objective_value(&x);
        LpSolution { status: LpStatus::Optimal, x, objective, duals: Some(duals), work: tab.pivots }
    }
}

impl<F: LpField> Tableau<F> {
    fn value(&self, j: usize) -> F {
        match self.row_of[j] {
            Some(i) => self.beta[i].clone(),
            None if self.at_upper[j] => self.upper[j].clone().expect("at_upper implies a bound"),
            None => self.lower[j].clone(),
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!(&self.upper[j], Some(u) if u.sub(&self.lower[j]).is_zero_value())
    }

    /// Reduced costs `c − c_B B⁻¹A` for a fresh cost vector.
    fn price_out(&mut self, cost: &[F]) {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = &cost[self.basis[i]];
            if cb.is_zero_value() {
                continue;
            }
            let row = &self.t[i * self.n..(i + 1) * self.n];
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero_value() {
                    dj.sub_mul(cb, a);
                }
            }
        }
        for &b in &self.basis {
            d[b] = F::zero_value();
        }
        self.d = d;
        if !F::EXACT {
            self.cost = cost.to_vec();
        }
    }

    /// Float only: recomputes `B⁻¹A`, the basic values and the reduced costs from the
    /// original rows, discarding accumulated round-off. Leaves the tableau untouched and
    /// returns false if the basis has become numerically singular.
    fn refactor(&mut self) -> bool {
        if F::EXACT {
            return true;
        }
        self.since_refactor = 0;
        let (m, n) = (self.m, self.n);
        let mut t = self.a0.clone();
        let mut rhs = self.b0.clone();
        let mut assigned = vec![false; m];
        let mut basis = vec![0usize; m];
        for &c in &self.basis {
            let mut best: Option<(usize, f64)> = None;
            for i in (0..m).filter(|&i| !assigned[i]) {
                let mag = t[i * n + c].to_f64().abs();
                if mag > FLOAT_REFACTOR_PIVOT && best.map_or(true, |(_, b)| mag > b) {
                    best = Some((i, mag));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            assigned[r] = true;
            basis[r] = c;
            let inv = F::one_value().div(&t[r * n + c]);
            let mut pivot_row: Vec<(usize, F)> = Vec::new();
            for k in 0..n {
                let v = &mut t[r * n + k];
                if !v.is_zero_value() {
                    *v = v.mul(&inv);
                    pivot_row.push((k, v.clone()));
                }
            }
            rhs[r] = rhs[r].mul(&inv);
            let pr = rhs[r].clone();
            for i in (0..m).filter(|&i| i != r) {
                let f = t[i * n + c].clone();
                if f.is_zero_value() {
                    continue;
                }
                let row = &mut t[i * n..(i + 1) * n];
                for (k, v) in &pivot_row {
                    row[*k].sub_mul(&f, v);
                    row[*k].snap();
                }
                row[c] = F::zero_value();
                rhs[i].sub_mul(&f, &pr);
            }
        }
        let mut row_of = vec![None; n];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = Some(i);
        }
        let nonbasic: Vec<(usize, F)> = (0..n)
            .filter(|&j| row_of[j].is_none())
            .map(|j| (j, self.value(j)))
            .filter(|(_, v)| !v.is_zero_value())
            .collect();
        for i in 0..m {
            for (j, v) in &nonbasic {
                let a = t[i * n + j].clone();
                if !a.is_zero_value() {
                    rhs[i].sub_mul(&a, v);
                }
            }
        }
        self.t = t;
        self.beta = rhs;
        self.basis = basis;
        self.row_of = row_of;
        self.clear_pinned_rows();
        let cost = std::mem::take(&mut self.cost);
        self.price_out(&cost);
        true
    }

    fn iteration_cap(&self) -> usize {
        if F::EXACT {
            usize::MAX
        } else {
            20_000 + 50 * (self.m + self.n)
        }
    }

    /// Primal simplex to optimality. With `feasibility`, a float phase one also stops once
    /// its objective is numerically zero.
    fn run(&mut self, feasibility: bool) -> Result<PhaseEnd, OptimizerError> {
        let mut bland = F::EXACT;
        let mut streak = 0usize;
        let cap = self.iteration_cap();
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(OptimizerError::NumericalStall { iterations: iterations - 1 });
            }
            if !F::EXACT && self.since_refactor >= REFACTOR_INTERVAL {
                self.refactor();
            }
            if !F::EXACT && feasibility && self.phase_one_done() {
                return Ok(PhaseEnd::Optimal);
            }
            let Some((q, up)) = self.entering(bland) else {
                if !F::EXACT && self.since_refactor > 0 && self.refactor() && self.entering(bland).is_some() {
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };
            let Some(step) = self.ratio_test(q, up, bland) else {
                return Ok(PhaseEnd::Unbounded);
            };
            if step.is_degenerate() {
                streak += 1;
                if streak > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = F::EXACT;
            }
            self.apply(q, up, step);
        }
    }

    /// Float only: pivots basic artificials out on a usable structural entry, and pins the
    /// ones whose row holds nothing but round-off.
    fn drive_out_artificials(&mut self, first_art: usize) {
        for r in 0..self.m {
            if self.basis[r] < first_art {
                continue;
            }
            let row = &self.t[r * self.n..(r + 1) * self.n];
            let best = (0..first_art)
                .filter(|&j| self.row_of[j].is_none() && !self.is_fixed(j))
                .map(|j| (j, row[j].to_f64().abs()))
                .filter(|&(_, mag)| mag > HARRIS_PIVOT_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((q, _)) => {
                    let value = self.value(q);
                    self.pivot(r, q, value, false);
                }
                None => self.pinned.push(self.basis[r]),
            }
        }
        self.clear_pinned_rows();
    }

    fn clear_pinned_rows(&mut self) {
        for &c in &self.pinned {
            let r = self.row_of[c].expect("pinned artificials stay basic");
            for v in &mut self.t[r * self.n..(r + 1) * self.n] {
                *v = F::zero_value();
            }
            self.t[r * self.n + c] = F::one_value();
            self.beta[r] = F::zero_value();
        }
    }

    fn phase_one_done(&self) -> bool {
        let residual: f64 = (0..self.m)
            .filter(|&i| !self.cost[self.basis[i]].is_zero_value())
            .map(|i| self.beta[i].to_f64().abs())
            .sum();
        residual <= PHASE_ONE_ZERO
    }

    /// Entering column and whether it moves up from its lower bound.
    fn entering(&self, bland: bool) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool)> = None;
        let mut best_mag = F::zero_value();
        for j in 0..self.n {
            if self.row_of[j].is_some() || self.barred[j] || self.is_fixed(j) {
                continue;
            }
            let dj = &self.d[j];
            if !F::EXACT && dj.to_f64().abs() <= FLOAT_OPTIMALITY_TOL {
                continue;
            }
            let up = if !self.at_upper[j] && dj.is_neg() {
                true
            } else if self.at_upper[j] && dj.is_pos() {
                false
            } else {
                continue;
            };
            if bland {
                return Some((j, up));
            }
            let mag = dj.abs();
            if best.is_none() || mag > best_mag {
                best = Some((j, up));
                best_mag = mag;
            }
        }
        best
    }

    /// Distance the basic variable of row `i` may travel, and whether it stops at its upper bound.
    fn row_limit(&self, i: usize, q: usize, up: bool) -> Option<(F, F, bool)> {
        let a = &self.t[i * self.n + q];
        if a.is_negligible() {
            return None;
        }
        // the basic variable moves by −s·step
        let s = if up { a.clone() } else { a.neg() };
        let b = self.basis[i];
        if s > F::zero_value() {
            Some((self.beta[i].sub(&self.lower[b]), s, false))
        } else {
            let ub = self.upper[b].as_ref()?;
            Some((ub.sub(&self.beta[i]), s.neg(), true))
        }
    }

    fn ratio_test(&self, q: usize, up: bool, bland: bool) -> Option<Step<F>> {
        let best = if F::EXACT { self.exact_ratio(q, up, bland) } else { self.harris_ratio(q, up, bland) };
        let range = self.upper[q].as_ref().map(|u| u.sub(&self.lower[q]));
        match (range, best) {
            (Some(r), Some((_, ratio, _))) if !r.sub(&ratio).is_pos() => Some(Step::Flip(r)),
            (Some(r), None) => Some(Step::Flip(r)),
            (_, Some((row, ratio, to_upper))) => Some(Step::Pivot { row, ratio, to_upper }),
            (None, None) => None,
        }
    }

    fn exact_ratio(&self, q: usize, up: bool, bland: bool) -> Option<(usize, F, bool)> {
        let mut best: Option<(usize, F, bool)> = None;
        for i in 0..self.m {
            let Some((room, s, to_upper)) = self.row_limit(i, q, up) else {
                continue;
            };
            let ratio = clamp_nonneg(room.div(&s));
            let replace = match &best {
                None => true,
                Some((bi, br, _)) => {
                    let diff = ratio.sub(br);
                    if diff.is_neg() {
                        true
                    } else if diff.is_pos() {
                        false
                    } else if bland {
                        self.basis[i] < self.basis[*bi]
                    } else {
                        self.t[i * self.n + q].abs() > self.t[*bi * self.n + q].abs()
                    }
                }
            };
            if replace {
                best = Some((i, ratio, to_upper));
            }
        }
        best
    }

    /// Two-pass ratio test: bounds may be overshot by a small tolerance so that the largest
    /// pivot among nearly tied rows can be chosen.
    fn harris_ratio(&self, q: usize, up: bool, bland: bool) -> Option<(usize, F, bool)> {
        let limits: Vec<(usize, F, F, bool)> = (0..self.m)
            .filter_map(|i| self.row_limit(i, q, up).map(|(room, s, to_upper)| (i, room, s, to_upper)))
            .collect();
        let col_max = limits.iter().map(|(_, _, s, _)| s.to_f64()).fold(0.0, f64::max);
        let floor = HARRIS_PIVOT_TOL.max(HARRIS_RELATIVE_PIVOT * col_max);
        let limits: Vec<_> = limits.into_iter().filter(|(_, _, s, _)| s.to_f64() > floor).collect();
        let relaxed = limits
            .iter()
            .map(|(_, room, s, _)| (room.to_f64().max(0.0) + HARRIS_TOL) / s.to_f64())
            .fold(f64::INFINITY, f64::min);
        let mut candidates: Vec<usize> = (0..limits.len())
            .filter(|&k| {
                let (_, room, s, _) = &limits[k];
                room.to_f64().max(0.0) / s.to_f64() <= relaxed
            })
            .collect();
        if bland {
            candidates.sort_by_key(|&k| self.basis[limits[k].0]);
        } else {
            candidates.sort_by(|&a, &b| limits[b].2.to_f64().total_cmp(&limits[a].2.to_f64()));
        }
        // a pivot tiny against its own row would leave the basis nearly singular
        let chosen = candidates
            .iter()
            .copied()
            .find(|&k| {
                let (i, _, s, _) = &limits[k];
                let row_max = self.t[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|v| v.to_f64().abs())
                    .fold(0.0, f64::max);
                s.to_f64() >= HARRIS_ROW_PIVOT * row_max
            })
            .or_else(|| candidates.first().copied());
        chosen.map(|k| {
            let (i, room, s, to_upper) = &limits[k];
            (*i, clamp_nonneg(room.div(s)), *to_upper)
        })
    }

    fn apply(&mut self, q: usize, up: bool, step: Step<F>) {
        let n = self.n;
        let len = step.length().clone();
        if !len.is_zero_value() {
            for i in 0..self.m {
                let a = &self.t[i * n + q];
                if a.is_zero_value() {
                    continue;
                }
                let s = if up { a.clone() } else { a.neg() };
                self.beta[i].sub_mul(&s, &len);
                self.beta[i].snap();
            }
        }
        let (r, to_upper) = match step {
            Step::Flip(_) => {
                self.at_upper[q] = !self.at_upper[q];
                return;
            }
            Step::Pivot { row, to_upper, .. } => (row, to_upper),
        };
        let entering_value = if up {
            self.lower[q].add(&len)
        } else {
            self.upper[q].clone().expect("entering from upper bound").sub(&len)
        };
        self.pivot(r, q, entering_value, to_upper);
    }

    /// Makes `q` basic in row `r` with value `entering_value`; the leaving variable rests at
    /// its upper bound when `to_upper`, else at its lower bound.
    fn pivot(&mut self, r: usize, q: usize, entering_value: F, to_upper: bool) {
        let n = self.n;
        self.pivots += 1;
        self.since_refactor += 1;
        let leaving = self.basis[r];
        self.at_upper[leaving] = to_upper;
        self.row_of[leaving] = None;
        self.basis[r] = q;
        self.row_of[q] = Some(r);
        self.at_upper[q] = false;
        self.beta[r] = entering_value;

        let inv = F::one_value().div(&self.t[r * n + q]);
        let mut pivot_row: Vec<(usize, F)> = Vec::new();
        for k in 0..n {
            let v = &mut self.t[r * n + k];
            if v.is_zero_value() {
                continue;
            }
            let mut scaled = v.mul(&inv);
            scaled.snap();
            *v = scaled.clone();
            pivot_row.push((k, scaled));
        }
        self.t[r * n + q] = F::one_value();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + q].clone();
            if f.is_zero_value() {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            for (k, v) in &pivot_row {
                row[*k].sub_mul(&f, v);
                row[*k].snap();
            }
            row[q] = F::zero_value();
        }
        let f = self.d[q].clone();
        if !f.is_zero_value() {
            for (k, v) in &pivot_row {
                self.d[*k].sub_mul(&f, v);
                self.d[*k].snap();
            }
        }
        self.d[q] = F::zero_value();
    }

    /// Pins column `j` to `v`, moving basic values if `j` is nonbasic.
    fn fix_column(&mut self, j: usize, v: F) {
        if self.row_of[j].is_none() {
            let delta = v.sub(&self.value(j));
            if !delta.is_zero_value() {
                for i in 0..self.m {
                    let a = &self.t[i * self.n + j];
                    if !a.is_zero_value() {
                        self.beta[i].sub_mul(a, &delta);
                        self.beta[i].snap();
                    }
                }
            }
        }
        self.lower[j] = v.clone();
        self.upper[j] = Some(v);
        self.at_upper[j] = false;
    }

    /// Bounded dual simplex from a dual-feasible basis.
    fn dual_run(&mut self) -> Result<LpStatus, OptimizerError> {
        let cap = self.iteration_cap();
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(OptimizerError::NumericalStall { iterations: iterations - 1 });
            }
            if !F::EXACT && self.since_refactor >= REFACTOR_INTERVAL {
                self.refactor();
            }
            // leaving row: smallest basic index (exact) or largest violation (float)
            let mut leave: Option<(usize, bool, F)> = None;
            for i in 0..self.m {
                let b = self.basis[i];
                let below = self.lower[b].sub(&self.beta[i]);
                let above = self.upper[b].as_ref().map(|u| self.beta[i].sub(u));
                let violation = if below.is_pos() {
                    Some((false, below))
                } else {
                    above.filter(|a| a.is_pos()).map(|a| (true, a))
                };
                let Some((too_high, amount)) = violation else { continue };
                let replace = match &leave {
                    None => true,
                    Some((bi, _, best)) => {
                        if F::EXACT {
                            b < self.basis[*bi]
                        } else {
                            amount > *best
                        }
                    }
                };
                if replace {
                    leave = Some((i, too_high, amount));
                }
            }
            let Some((r, too_high, _)) = leave else {
                return Ok(LpStatus::Optimal);
            };

            let mut enter: Option<(usize, F)> = None;
            for j in 0..self.n {
                if self.row_of[j].is_some() || self.barred[j] || self.is_fixed(j) {
                    continue;
                }
                let alpha = &self.t[r * self.n + j];
                if alpha.is_negligible() || (!F::EXACT && alpha.to_f64().abs() <= HARRIS_PIVOT_TOL) {
                    continue;
                }
                // x_B moves by −alpha·Δx_j; pick columns that push it back inside
                let eligible = match (too_high, self.at_upper[j]) {
                    (false, false) => alpha.is_neg(),
                    (false, true) => alpha.is_pos(),
                    (true, false) => alpha.is_pos(),
                    (true, true) => alpha.is_neg(),
                };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs().div(&alpha.abs());
                let replace = match &enter {
                    None => true,
                    Some((bj, br)) => {
                        let diff = ratio.sub(br);
                        if diff.is_neg() {
                            true
                        } else if diff.is_pos() || F::EXACT {
                            false
                        } else {
                            alpha.abs() > self.t[r * self.n + *bj].abs()
                        }
                    }
                };
                if replace {
                    enter = Some((j, ratio));
                }
            }
            let Some((q, _)) = enter else {
                return Ok(LpStatus::Infeasible);
            };

            let b = self.basis[r];
            let target = if too_high {
                self.upper[b].clone().expect("violated upper bound exists")
            } else {
                self.lower[b].clone()
            };
            let alpha = self.t[r * self.n + q].clone();
            let delta = self.beta[r].sub(&target).div(&alpha);
            let entering_value = self.value(q).add(&delta);
            for i in 0..self.m {
                let a = &self.t[i * self.n + q];
                if !a.is_zero_value() {
                    self.beta[i].sub_mul(a, &delta);
                    self.beta[i].snap();
                }
            }
            self.pivot(r, q, entering_value, too_high);
        }
    }
}

enum Step<F> {
    /// The entering column crosses to its opposite bound; carries the bound range.
    Flip(F),
    Pivot { row: usize, ratio: F, to_upper: bool },
}

impl<F: LpField> Step<F> {
    fn length(&self) -> &F {
        match self {
            Step::Flip(u) => u,
            Step::Pivot { ratio, .. } => ratio,
        }
    }

    fn is_degenerate(&self) -> bool {
        self.length().is_negligible()
    }
}

fn clamp_nonneg<F: LpField>(v: F) -> F {
    if v < F::zero_value() {
        F::zero_value()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{dual_objective, Variable};
    use crate::polytope::LinearConstraint;
    use crate::ratlinalg::{frac, int};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    /// max 3x + 2y s.t. x + y ≤ 4, x + 3y ≤ 6, x ≤ 3, x, y ≥ 0
    fn textbook() -> MipModel {
        let mut m = MipModel::new(Sense::Max);
        m.add_variable(Variable::continuous("x", Some(int(0)), Some(int(3))));
        m.add_variable(Variable::nonnegative("y"));
        m.set_objective(ints(&[3, 2])).unwrap();
        m.add_constraint(LinearConstraint::le(ints(&[1, 1]), int(4))).unwrap();
        m.add_constraint(LinearConstraint::le(ints(&[1, 3]), int(6))).unwrap();
        m
    }

    #[test]
    fn textbook_lp_exact_and_float() {
        let m = textbook();
        let exact = solve_lp::<Rational>(&m).unwrap();
        assert_eq!(exact.status, LpStatus::Optimal);
        assert_eq!(exact.objective, int(11));
        assert_eq!(exact.x, ints(&[3, 1]));
        let duals = exact.duals.clone().unwrap();
        assert_eq!(dual_objective(&m, &duals).unwrap(), int(11));
        let float = solve_lp::<f64>(&m).unwrap();
        assert!((float.objective - 11.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut m = MipModel::new(Sense::Min);
        m.add_variable(Variable::nonnegative("x"));
        m.add_constraint(LinearConstraint::le(ints(&[1]), int(-1))).unwrap();
        assert_eq!(solve_lp::<Rational>(&m).unwrap().status, LpStatus::Infeasible);
        assert_eq!(solve_lp::<f64>(&m).unwrap().status, LpStatus::Infeasible);

        let mut m = MipModel::new(Sense::Max);
        m.add_variable(Variable::free("x"));
        m.set_objective(ints(&[1])).unwrap();
        m.add_constraint(LinearConstraint::ge(ints(&[1]), int(2))).unwrap();
        assert_eq!(solve_lp::<Rational>(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_only_variables() {
        // min x − y, x free, y ≤ 5, x + y ≥ 1, x ≥ −2 written as a row
        let mut m = MipModel::new(Sense::Min);
        m.add_variable(Variable::free("x"));
        m.add_variable(Variable::continuous("y", None, Some(int(5))));
        m.set_objective(ints(&[1, -1])).unwrap();
        m.add_constraint(LinearConstraint::ge(ints(&[1, 1]), int(1))).unwrap();
        m.add_constraint(LinearConstraint::ge(ints(&[1, 0]), int(-2))).unwrap();
        let s = solve_lp::<Rational>(&m).unwrap();
        assert_eq!(s.objective, int(-7));
        assert_eq!(s.x, ints(&[-2, 5]));
        assert_eq!(dual_objective(&m, s.duals.as_ref().unwrap()).unwrap(), int(-7));
    }

    #[test]
    fn equality_with_fractional_optimum() {
        // max x s.t. 3x + 2y = 1, y ≥ 0
        let mut m = MipModel::new(Sense::Max);
        m.add_variable(Variable::free("x"));
        m.add_variable(Variable::nonnegative("y"));
        m.set_objective(ints(&[1, 0])).unwrap();
        m.add_constraint(LinearConstraint::eq(ints(&[3, 2]), int(1))).unwrap();
        let s = solve_lp::<Rational>(&m).unwrap();
        assert_eq!(s.objective, frac(1, 3));
        assert_eq!(dual_objective(&m, s.duals.as_ref().unwrap()).unwrap(), frac(1, 3));
    }

    #[test]
    fn empty_model_is_feasible_with_zero_objective() {
        let m = MipModel::new(Sense::Max);
        let s = solve_lp::<Rational>(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.is_zero());
    }

    #[test]
    fn redundant_equalities_keep_artificials_at_zero() {
        let mut m = MipModel::new(Sense::Max);
        m.add_variable(Variable::nonnegative("x"));
        m.add_variable(Variable::nonnegative("y"));
        m.set_objective(ints(&[1, 2])).unwrap();
        m.add_constraint(LinearConstraint::eq(ints(&[1, 1]), int(2))).unwrap();
        m.add_constraint(LinearConstraint::eq(ints(&[2, 2]), int(4))).unwrap();
        let s = solve_lp::<Rational>(&m).unwrap();
        assert_eq!(s.objective, int(4));
        assert_eq!(dual_objective(&m, s.duals.as_ref().unwrap()).unwrap(), int(4));
        let f = solve_lp::<f64>(&m).unwrap();
        assert!((f.objective - 4.0).abs() < 1e-9);
    }
}
