//! Exhaustive enumeration of 0/1 solutions for small models.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{Integrality, MipModel, OptimizerError};
use crate::polytope::{Relation, VertexSet};
use crate::ratlinalg::Rational;

/// Largest number of free binary variables [`enumerate_binary_solutions`] accepts.
pub const ENUMERATION_LIMIT: usize = 24;

/// Every feasible assignment of a model whose variables are binary or fixed, in
/// lexicographic order.
///
/// Fails with [`OptimizerError::InvalidModel`] when nothing is feasible, since a point set
/// cannot be empty; [`enumerate_binary_points`] returns the raw list instead.
pub fn enumerate_binary_solutions(model: &MipModel) -> Result<VertexSet, OptimizerError> {
    let points = enumerate_binary_points(model)?;
    VertexSet::new(points)
        .map_err(|_| OptimizerError::InvalidModel("model has no feasible 0/1 point".into()))
}

/// As [`enumerate_binary_solutions`], possibly empty.
pub fn enumerate_binary_points(model: &MipModel) -> Result<Vec<Vec<Rational>>, OptimizerError> {
    model.validate()?;
    let mut free = Vec::new();
    let mut base = vec![Rational::zero(); model.num_vars()];
    for (j, v) in model.variables.iter().enumerate() {
        if v.is_fixed() {
            base[j] = v.lower.clone().expect("fixed variables have bounds");
        } else if v.integrality == Integrality::Binary {
            free.push(j);
        } else {
            return Err(OptimizerError::NotEnumerable(v.name.clone()));
        }
    }
    let k = free.len();
    if k > ENUMERATION_LIMIT {
        return Err(OptimizerError::TooLarge { variables: k, limit: ENUMERATION_LIMIT });
    }

    let mut rows = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let rest = &c.rhs - crate::ratlinalg::dot(&c.coeffs, &base);
        let coeffs: Vec<Rational> = free.iter().map(|&j| c.coeffs[j].clone()).collect();
        let lcm = coeffs
            .iter()
            .chain(std::iter::once(&rest))
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let scale = |r: &Rational| (r * Rational::from_integer(lcm.clone())).to_integer().to_i64();
        let coeffs: Option<Vec<i64>> = coeffs.iter().map(scale).collect();
        match (coeffs, scale(&rest)) {
            (Some(coeffs), Some(rhs)) => rows.push(IntRow { coeffs, rhs, relation: c.relation }),
            _ => {
                return Err(OptimizerError::InvalidModel(
                    "constraint coefficients too large for enumeration".into(),
                ))
            }
        }
    }

    // split the free variables in half and tabulate each half's row sums
    let hi_bits = k / 2;
    let lo_bits = k - hi_bits;
    let tabulate = |offset: usize, bits: usize| -> Vec<Vec<i128>> {
        rows.iter()
            .map(|row| {
                let mut table = vec![0i128; 1 << bits];
                for mask in 1usize..1 << bits {
                    let low = mask.trailing_zeros() as usize;
                    // bit b of the mask is variable offset + bits − 1 − b
                    table[mask] = table[mask & (mask - 1)]
                        + i128::from(row.coeffs[offset + bits - 1 - low]);
                }
                table
            })
            .collect()
    };
    let hi_table = tabulate(0, hi_bits);
    let lo_table = tabulate(hi_bits, lo_bits);

    let mut points = Vec::new();
    for hi in 0usize..1 << hi_bits {
        'lo: for lo in 0usize..1 << lo_bits {
            for (r, row) in rows.iter().enumerate() {
                let lhs = hi_table[r][hi] + lo_table[r][lo];
                let rhs = i128::from(row.rhs);
                let ok = match row.relation {
                    Relation::Le => lhs <= rhs,
                    Relation::Ge => lhs >= rhs,
                    Relation::Eq => lhs == rhs,
                };
                if !ok {
                    continue 'lo;
                }
            }
            let mask = (hi << lo_bits) | lo;
            let mut p = base.clone();
            for (pos, &j) in free.iter().enumerate() {
                if (mask >> (k - 1 - pos)) & 1 == 1 {
                    p[j] = Rational::one();
                }
            }
            points.push(p);
        }
    }
    Ok(points)
}

struct IntRow {
    coeffs: Vec<i64>,
    rhs: i64,
    relation: Relation,
}
