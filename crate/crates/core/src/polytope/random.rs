//! Seeded random point sets for property checks and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinearConstraint, VertexSet};
use crate::ratlinalg::{int, Rational};

/// Distinct 0/1 points spanning a `dim`-dimensional polytope, lifted into `ambient`
/// coordinates by integer affine maps (each extra coordinate is `c·x + c0`, `c ∈ {-1,0,1}`).
///
/// The point count lies in `[dim + 1, max_points]` and never exceeds `2^dim`.
pub fn random_embedded_01_polytope(
    seed: u64,
    dim: usize,
    ambient: usize,
    max_points: usize,
) -> VertexSet {
    assert!(dim >= 1 && dim <= ambient && dim <= 16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cube: Vec<Vec<i64>> = (0..1u32 << dim)
        .map(|mask| (0..dim).map(|b| i64::from((mask >> (dim - 1 - b)) & 1)).collect())
        .collect();
    let upper = max_points.min(cube.len()).max(dim + 1);
    let lifts: Vec<(Vec<i64>, i64)> = (dim..ambient)
        .map(|_| ((0..dim).map(|_| rng.gen_range(-1..=1)).collect(), rng.gen_range(0..=2)))
        .collect();
    loop {
        let count = rng.gen_range(dim + 1..=upper);
        let chosen: Vec<&Vec<i64>> = cube.choose_multiple(&mut rng, count).collect();
        let points: Vec<Vec<Rational>> = chosen
            .iter()
            .map(|p| {
                let mut full: Vec<i64> = p.to_vec();
                for (c, c0) in &lifts {
                    full.push(c.iter().zip(p.iter()).map(|(a, b)| a * b).sum::<i64>() + c0);
                }
                full.into_iter().map(int).collect()
            })
            .collect();
        let set = VertexSet::new(points).expect("distinct cube vertices stay distinct");
        if super::polytope_dimension(&set) == dim {
            return set;
        }
    }
}

/// Random integer points in `R^n` on `planted` random independent hyperplanes.
///
/// Returns the points together with the planted equalities. Free coordinates are drawn from
/// `[-3, 3]`; each dependent coordinate is an integer combination of the free ones.
pub fn random_planted_set(
    seed: u64,
    n: usize,
    planted: usize,
    count: usize,
) -> (VertexSet, Vec<LinearConstraint>) {
    assert!(planted < n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = n - planted;
    let mut coords: Vec<usize> = (0..n).collect();
    coords.shuffle(&mut rng);
    let (free_coords, dep_coords) = coords.split_at(free);
    let maps: Vec<(Vec<i64>, i64)> = (0..planted)
        .map(|_| ((0..free).map(|_| rng.gen_range(-2..=2)).collect(), rng.gen_range(-3..=3)))
        .collect();
    let mut points: Vec<Vec<Rational>> = Vec::new();
    let mut attempts = 0;
    while points.len() < count && attempts < count * 50 {
        attempts += 1;
        let x: Vec<i64> = (0..free).map(|_| rng.gen_range(-3..=3)).collect();
        let mut p = vec![0i64; n];
        for (k, &c) in free_coords.iter().enumerate() {
            p[c] = x[k];
        }
        for ((coef, c0), &c) in maps.iter().zip(dep_coords) {
            p[c] = coef.iter().zip(&x).map(|(a, b)| a * b).sum::<i64>() + c0;
        }
        let p: Vec<Rational> = p.into_iter().map(int).collect();
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let equalities = maps
        .iter()
        .zip(dep_coords)
        .map(|((coef, c0), &c)| {
            // x_c - Σ coef_k x_free_k = c0
            let mut row = vec![int(0); n];
            row[c] = int(1);
            for (k, &fc) in free_coords.iter().enumerate() {
                row[fc] = int(-coef[k]);
            }
            LinearConstraint::eq(row, int(*c0))
        })
        .collect();
    (VertexSet::new(points).expect("deduplicated above"), equalities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::polytope_dimension;

    #[test]
    fn embedded_polytope_has_requested_dimension() {
        for seed in 0..10 {
            let s = random_embedded_01_polytope(seed, 3, 4, 10);
            assert_eq!(s.ambient_dim(), 4);
            assert_eq!(polytope_dimension(&s), 3);
            assert!(s.len() <= 8);
        }
    }

    #[test]
    fn planted_points_satisfy_planted_equalities() {
        let (s, eqs) = random_planted_set(7, 6, 2, 15);
        assert_eq!(eqs.len(), 2);
        for p in s.points() {
            assert!(eqs.iter().all(|e| e.is_satisfied_by(p)));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_embedded_01_polytope(3, 3, 4, 9), random_embedded_01_polytope(3, 3, 4, 9));
        assert_eq!(random_planted_set(3, 5, 1, 8), random_planted_set(3, 5, 1, 8));
    }
}
