//! Facets by exhaustive search over vertex subsets; only viable for a handful of points.

use num_traits::{Signed, Zero};

use crate::polytope::{difference_matrix, polytope_dimension, VertexSet};
use crate::ratlinalg::{dot, int, null_space_basis, Rational, RowBasis};

/// Largest point set [`brute_force_facets`] accepts.
pub const ORACLE_LIMIT: usize = 16;

/// Supports (1-based labels) of all facets of `conv(S)`, sorted.
///
/// A subset is a facet support when its points span a face one dimension below `S`, some
/// hyperplane through them keeps `S` on one side, and no other point of `S` lies on it.
pub fn brute_force_facets(set: &VertexSet) -> Vec<Vec<usize>> {
    assert!(set.len() <= ORACLE_LIMIT, "oracle limited to {ORACLE_LIMIT} points");
    let n = set.ambient_dim();
    let full_dim = polytope_dimension(set);
    if full_dim == 0 {
        return Vec::new();
    }
    let equations = hull_normals(set);
    let mut base = RowBasis::new(n);
    for e in &equations {
        base.insert(e);
    }
    let big_n = set.len();
    let mut facets = Vec::new();
    for mask in 1u32..(1 << big_n) - 1 {
        if (mask.count_ones() as usize) < full_dim {
            continue;
        }
        let idx: Vec<usize> = (0..big_n).filter(|&i| mask >> i & 1 == 1).collect();
        let face = set.subset(&idx).expect("nonempty subset");
        if polytope_dimension(&face) + 1 != full_dim {
            continue;
        }
        let Some(normal) = hull_normals(&face).into_iter().find(|r| base.is_independent(r)) else {
            continue;
        };
        let level = dot(&normal, face.point(0));
        let gaps: Vec<_> = set.points().iter().map(|s| dot(&normal, s) - &level).collect();
        let one_sided = gaps.iter().all(|g| !g.is_negative()) || gaps.iter().all(|g| !g.is_positive());
        let exact = gaps.iter().enumerate().all(|(i, g)| g.is_zero() == (mask >> i & 1 == 1));
        if one_sided && exact {
            facets.push(idx.iter().map(|i| i + 1).collect());
        }
    }
    facets.sort();
    facets
}

fn hull_normals(set: &VertexSet) -> Vec<Vec<Rational>> {
    let n = set.ambient_dim();
    if set.len() < 2 {
        return (0..n)
            .map(|k| (0..n).map(|j| int(i64::from(j == k))).collect())
            .collect();
    }
    let v = difference_matrix(set).expect("at least two points");
    null_space_basis(&v.transpose()).transpose().row_vecs()
}
