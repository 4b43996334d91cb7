//! Best-bound branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::{One, Zero};

use super::simplex::Relaxation;
use super::{Integrality, LpField, LpSolution, LpStatus, MipModel, OptimizerError, Sense};
use crate::ratlinalg::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MipOptions {
    /// Maximum number of LP relaxations solved before giving up.
    pub node_budget: usize,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions { node_budget: 200_000 }
    }
}

struct Node<F> {
    /// Relaxation bound in minimization form, used only for ordering.
    key: f64,
    id: usize,
    fixings: Vec<(usize, bool)>,
    relaxation: LpSolution<F>,
    state: Relaxation<F>,
}

impl<F> PartialEq for Node<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F> Eq for Node<F> {}

impl<F> PartialOrd for Node<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F> Ord for Node<F> {
    // BinaryHeap pops the maximum: smallest key first, then smallest id
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.id.cmp(&self.id))
    }
}

/// Solves `model` honoring the integrality of its binary variables.
///
/// Open nodes are explored best bound first (ties by creation order) and branch on the most
/// fractional binary (ties by lowest index), so the search is deterministic. The returned
/// solution has no dual multipliers; `work` counts solved relaxations.
pub fn solve_mip<F: LpField>(
    model: &MipModel,
    options: &MipOptions,
) -> Result<LpSolution<F>, OptimizerError> {
    model.validate()?;
    let binaries = model.binary_indices();
    let sign = if model.sense == Sense::Max { -1.0 } else { 1.0 };
    let integral_objective = model.objective.iter().enumerate().all(|(j, c)| {
        c.is_zero() || (model.variables[j].integrality == Integrality::Binary && c.is_integer())
    });

    let base_lower: Vec<Option<Rational>> = model.variables.iter().map(|v| v.lower.clone()).collect();
    let base_upper: Vec<Option<Rational>> = model.variables.iter().map(|v| v.upper.clone()).collect();
    let cold_solve = |fixings: &[(usize, bool)]| {
        let mut lower = base_lower.clone();
        let mut upper = base_upper.clone();
        for &(j, one) in fixings {
            let v = if one { Rational::one() } else { Rational::zero() };
            lower[j] = Some(v.clone());
            upper[j] = Some(v);
        }
        Relaxation::<F>::solve(model, &lower, &upper)
    };
    // children start from the parent's optimal tableau; float solves that stall restart cold
    let solve_child = |parent: &Relaxation<F>, fixings: &[(usize, bool)]| {
        let &(j, one) = fixings.last().expect("child has a fixing");
        let mut state = parent.clone();
        let value = if one { Rational::one() } else { Rational::zero() };
        match state.fix(model, j, &value) {
            Ok(sol) => {
                let keep = sol.status == LpStatus::Optimal;
                Ok((sol, keep.then_some(state)))
            }
            Err(OptimizerError::NumericalStall { .. }) if !F::EXACT => cold_solve(fixings),
            Err(e) => Err(e),
        }
    };

    let mut solved = 1usize;
    let (root, root_state) = cold_solve(&[])?;
    let Some(root_state) = root_state else {
        return Ok(LpSolution::without_point(root.status, solved));
    };
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        key: sign * root.objective.to_f64(),
        id: next_id,
        fixings: Vec::new(),
        relaxation: root,
        state: root_state,
    });
    next_id += 1;
    let mut incumbent: Option<(F, Vec<F>)> = None;

    // a node is pruned when its bound, rounded for integral objectives, cannot beat the incumbent
    let cannot_improve = |bound: &F, incumbent: &Option<(F, Vec<F>)>| -> bool {
        let Some((best, _)) = incumbent else { return false };
        let bound = match (integral_objective, model.sense) {
            (true, Sense::Max) => bound.floor(),
            (true, Sense::Min) => bound.ceil(),
            (false, _) => bound.clone(),
        };
        let gap = match model.sense {
            Sense::Max => bound.sub(best),
            Sense::Min => best.sub(&bound),
        };
        !gap.is_pos()
    };

    while let Some(node) = heap.pop() {
        if cannot_improve(&node.relaxation.objective, &incumbent) {
            continue;
        }
        let x = &node.relaxation.x;
        let branch_var = binaries
            .iter()
            .copied()
            .filter(|&j| !x[j].is_integral())
            .fold(None::<(usize, f64)>, |best, j| {
                let frac = x[j].fractionality();
                match best {
                    Some((_, bf)) if bf >= frac => best,
                    _ => Some((j, frac)),
                }
            });
        let Some((j, _)) = branch_var else {
            let mut point = node.relaxation.x;
            for &b in &binaries {
                point[b] = point[b].round_integral();
            }
            let value = model.objective_value(&point);
            let better = match &incumbent {
                None => true,
                Some((best, _)) => match model.sense {
                    Sense::Max => value.sub(best).is_pos(),
                    Sense::Min => best.sub(&value).is_pos(),
                },
            };
            if better {
                incumbent = Some((value, point));
            }
            continue;
        };
        for one in [false, true] {
            if solved >= options.node_budget {
                return Err(OptimizerError::NodeLimitExceeded {
                    budget: options.node_budget,
                    incumbent: incumbent.as_ref().map(|(v, _)| v.to_f64()),
                });
            }
            let mut fixings = node.fixings.clone();
            fixings.push((j, one));
            let (relaxation, state) = solve_child(&node.state, &fixings)?;
            solved += 1;
            let Some(state) = state else { continue };
            if cannot_improve(&relaxation.objective, &incumbent) {
                continue;
            }
            heap.push(Node { key: sign * relaxation.objective.to_f64(), id: next_id, fixings, relaxation, state });
            next_id += 1;
        }
    }

    Ok(match incumbent {
        Some((objective, x)) => LpSolution { status: LpStatus::Optimal, x, objective, duals: None, work: solved },
        None => LpSolution::without_point(LpStatus::Infeasible, solved),
    })
}
