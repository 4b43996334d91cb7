//! End-to-end acceptance checks. Runs without the libtest harness so that every criterion
//! prints its own PASS/FAIL line; the process exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use ineqmine::facetminer::oracle::brute_force_facets;
use ineqmine::facetminer::{mine, FacetSearchConfig, Termination};
use ineqmine::optimizer::{
    dual_objective, solve_lp, solve_mip, LpStatus, MipModel, MipOptions, Sense, Variable,
};
use ineqmine::polytope::random::random_embedded_01_polytope;
use ineqmine::polytope::eca;
use ineqmine::ratlinalg::{frac, int, pow, rank, rank_of_rows, to_f64, RationalMatrix};
use ineqmine::tsplab::{
    appendix_case_table, build_sd, build_tsp_h, build_tsp_h_star, lp_bound, parse_tsplib_atsp,
    set3_members, validate_set3, AtspInstance, Set3Family, ValidateOptions,
};
use ineqmine::{ConstraintSystem, LinearConstraint, Rational, Relation, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BR17: &str = include_str!("../data/br17.atsp");

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_secs), || format!("took {elapsed:.1?}, limit {limit_secs}s"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s = stasheff();
    let found = eca(&s, &[]).map_err(|e| e.to_string())?;
    let eq: Vec<String> = found.equalities.iter().map(ToString::to_string).collect();
    ensure(eq == ["EQ 10 1 1 1 1"], || format!("eca gave {eq:?}"))?;

    let eqs = ConstraintSystem::from_constraints(4, found.equalities).unwrap();
    let cfg = FacetSearchConfig { big_m: int(100), epsilon: frac(1, 100), ..Default::default() };
    let report = mine(&s, &eqs, &system(known()), &cfg).map_err(|e| e.to_string())?;
    let mined: BTreeSet<(String, Vec<usize>)> = report
        .new_facets()
        .map(|it| (it.simplified.as_ref().unwrap().to_string(), it.support.clone()))
        .collect();
    let expected: BTreeSet<(String, Vec<usize>)> = [
        ("GE 1 0 0 0 1".to_string(), vec![1, 5, 11, 12, 14]),
        ("GE 6 1 1 1 0".to_string(), vec![3, 7, 8, 10, 13]),
    ]
    .into_iter()
    .collect();
    ensure(mined == expected, || format!("mined {mined:?}"))?;
    // two accepted iterations; the third MIP is infeasible
    ensure(report.iterations.len() == 2 && report.termination == Termination::MipInfeasible, || {
        format!("{} iterations, {:?}", report.iterations.len(), report.termination)
    })?;
    let caps = report.cap_trace();
    ensure(caps.first() == Some(&13) && caps.last() == Some(&5), || format!("cap trace {caps:?}"))?;
    within(start.elapsed(), 5)?;
    Ok(format!("x4 >= 1 and x1+x2+x3 >= 6, caps {caps:?}, {:.2?}", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let seeds = 24u64;
    for seed in 0..seeds {
        let s = random_embedded_01_polytope(seed, 3, 4, 10);
        let eqs = eca(&s, &[]).map_err(|e| e.to_string())?.equalities;
        let eqs = ConstraintSystem::from_constraints(4, eqs).unwrap();
        let report = mine(&s, &eqs, &ConstraintSystem::new(4), &FacetSearchConfig::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let mut mined: Vec<Vec<usize>> = report.new_facets().map(|it| it.support.clone()).collect();
        mined.sort();
        let oracle = brute_force_facets(&s);
        ensure(mined == oracle, || format!("seed {seed}: mined {mined:?}, oracle {oracle:?}"))?;
    }
    within(start.elapsed(), 120)?;
    Ok(format!("{seeds} random polytopes, {:.1?}", start.elapsed()))
}

/// Points `x = A y + b` for random integer `y`; every row of `A` beyond the first `free`
/// is a fixed integer combination of earlier rows, planting one equality each.
fn planted_points(rng: &mut ChaCha8Rng, n: usize, free: usize, count: usize) -> VertexSet {
    let mut a: Vec<Vec<i64>> = (0..free).map(|_| (0..free).map(|_| rng.gen_range(-3..=3)).collect()).collect();
    for _ in free..n {
        let w: Vec<i64> = (0..a.len()).map(|_| rng.gen_range(-2..=2)).collect();
        let row = (0..free).map(|k| a.iter().zip(&w).map(|(r, c)| r[k] * c).sum()).collect();
        a.push(row);
    }
    // shuffle coordinates so planted rows are not always last
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let b: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
    let points: BTreeSet<Vec<Rational>> = (0..count)
        .map(|_| {
            let y: Vec<i64> = (0..free).map(|_| rng.gen_range(-4..=4)).collect();
            order.iter().map(|&i| int(a[i].iter().zip(&y).map(|(c, v)| c * v).sum::<i64>() + b[i])).collect()
        })
        .collect();
    VertexSet::new(points.into_iter().collect()).unwrap()
}

fn affine_rank(set: &VertexSet) -> usize {
    let p0 = set.point(0);
    let diffs: Vec<Vec<Rational>> =
        set.points().iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    rank(&RationalMatrix::from_rows(set.ambient_dim(), diffs).unwrap())
}

fn augmented(eqs: &[LinearConstraint]) -> Vec<Vec<Rational>> {
    eqs.iter().map(|e| e.coeffs.iter().cloned().chain([e.rhs.clone()]).collect()).collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = 0;
    for trial in 0..40 {
        let n = rng.gen_range(3..=8);
        let free = rng.gen_range(1..=n);
        let set = planted_points(&mut rng, n, free, 3 * n);
        let dim = affine_rank(&set);
        let found = eca(&set, &[]).map_err(|e| e.to_string())?;
        let eqs = &found.equalities;
        for e in eqs {
            ensure(e.relation == Relation::Eq && set.points().iter().all(|p| e.is_tight_at(p)), || {
                format!("trial {trial}: {e} not satisfied by every point")
            })?;
        }
        let width = n + 1;
        ensure(rank_of_rows(width, augmented(eqs)) == n - dim && found.unidentified == n - dim, || {
            format!("trial {trial}: {} equalities for dim {dim} in R^{n}", eqs.len())
        })?;
        for k in 1..=eqs.len() {
            ensure(rank_of_rows(width, augmented(&eqs[..k])) == k, || format!("trial {trial}: row {k} dependent"))?;
        }
        for _ in 0..5 {
            let anchor = rng.gen_range(0..set.len());
            let moved = eca(&set.with_anchor(anchor), &[]).map_err(|e| e.to_string())?;
            let joint = [augmented(eqs), augmented(&moved.equalities)].concat();
            ensure(moved.unidentified == found.unidentified && rank_of_rows(width, joint) == eqs.len(), || {
                format!("trial {trial}: anchor {anchor} changed the hull")
            })?;
        }
        cases += 1;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("{cases} planted sets, 5 anchors each, {:.1?}", start.elapsed()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut checked = 0;
    for n in [6, 7, 8] {
        for beta in [frac(9, 10), frac(999, 1000)] {
            let report = validate_set3(n, &beta, ValidateOptions { jobs, facets: n < 8 }).map_err(|e| e.to_string())?;
            ensure(report.all_valid(), || format!("n={n} beta={beta}: violation\n{report}"))?;
            if n < 8 {
                ensure(report.all_facets(), || format!("n={n} beta={beta}: non-facet\n{report}"))?;
            }
            checked += report.verdicts.len();
        }
    }
    within(start.elapsed(), 600)?;
    Ok(format!("{checked} members valid, facets at n=6,7, {:.1?}", start.elapsed()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut tables = 0;
    for n in [6usize, 7, 8] {
        for beta in [frac(9, 10), frac(999, 1000)] {
            let k = n as u32;
            let one = &beta + int(1);
            for member in set3_members(&Set3Family::get(1).unwrap(), n).unwrap() {
                let (_, rows) = appendix_case_table(&member, n, &beta).map_err(|e| e.to_string())?;
                let extremes: Vec<(usize, Option<Rational>, Option<Rational>)> =
                    rows.iter().map(|r| (r.tours, r.min.clone(), r.max.clone())).collect();
                let ok = extremes[0].0 == 0
                    && extremes[1].1 == Some(int(0))
                    && extremes[1].2 == Some(int(0))
                    && extremes[2].1 == Some(int(0))
                    && extremes[2].2 == Some(int(0))
                    && extremes[3].1 == Some(pow(&beta, k - 1))
                    && extremes[3].2 == Some(beta.clone());
                ensure(ok, || format!("n={n} beta={beta} {member}: {extremes:?}"))?;
                tables += 1;
            }
            for (family, rhs) in [
                (7u8, pow(&beta, k - 2) + pow(&beta, k - 4)),
                (10, (pow(&beta, k - 1) + pow(&beta, k - 2) + pow(&beta, k - 3)) / &one),
            ] {
                for member in set3_members(&Set3Family::get(family).unwrap(), n).unwrap() {
                    let (_, rows) = appendix_case_table(&member, n, &beta).map_err(|e| e.to_string())?;
                    for r in rows.iter().filter(|r| r.tours > 0) {
                        ensure(r.min.as_ref().unwrap() >= &rhs, || {
                            format!("n={n} beta={beta} {member} case {:?}: min {} < {rhs}", r.pattern, r.min.as_ref().unwrap())
                        })?;
                    }
                    tables += 1;
                }
            }
        }
    }
    Ok(format!("{tables} case tables, {:.1?}", start.elapsed()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let inst: AtspInstance = parse_tsplib_atsp(BR17).map_err(|e| e.to_string())?;
    let b1 = frac(999, 1000);
    let b2 = frac(9999, 10000);
    let targets: [(&str, f64, MipModel); 5] = [
        ("SD", 27.6786, build_sd(&inst).unwrap()),
        ("TSP_H(0.999)", 0.0961, build_tsp_h(&inst, &b1).unwrap()),
        ("TSP_H(0.9999)", 0.0997, build_tsp_h(&inst, &b2).unwrap()),
        ("TSP_H*(0.999)", 27.6555, build_tsp_h_star(&inst, &b1).unwrap()),
        ("TSP_H*(0.9999)", 27.6763, build_tsp_h_star(&inst, &b2).unwrap()),
    ];
    let mut summary = Vec::new();
    let mut misses = Vec::new();
    for (name, want, model) in &targets {
        let got = lp_bound(model).map_err(|e| format!("{name}: {e}"))?;
        let rel = (got - want).abs() / want.abs();
        summary.push(format!("{name}={got:.6}"));
        if rel > 1e-3 {
            misses.push(format!("{name}: {got:.6} vs {want} (rel {rel:.2e})"));
        }
    }
    within(start.elapsed(), 300)?;
    ensure(misses.is_empty(), || misses.join("; "))?;
    Ok(format!("{}, {:.1?}", summary.join(" "), start.elapsed()))
}

fn random_binary_mip(rng: &mut ChaCha8Rng, k: usize) -> MipModel {
    let mut m = MipModel::new(if rng.gen_bool(0.5) { Sense::Max } else { Sense::Min });
    for j in 0..k {
        m.add_variable(Variable::binary(format!("b{j}")));
    }
    m.set_objective((0..k).map(|_| int(rng.gen_range(-9..=9))).collect()).unwrap();
    for _ in 0..rng.gen_range(1..=6) {
        let coeffs: Vec<Rational> = (0..k).map(|_| int(rng.gen_range(-4..=4))).collect();
        let rhs = int(rng.gen_range(-3..=(k as i64)));
        let relation = [Relation::Le, Relation::Ge, Relation::Le, Relation::Eq][rng.gen_range(0..4)];
        m.add_constraint(LinearConstraint::new(coeffs, relation, rhs)).unwrap();
    }
    m
}

fn enumerate_best(m: &MipModel) -> Option<Rational> {
    let k = m.num_vars();
    (0u32..1 << k)
        .map(|mask| (0..k).map(|j| int(i64::from(mask >> j & 1))).collect::<Vec<_>>())
        .filter(|x| m.constraints.iter().all(|c| c.is_satisfied_by(x)))
        .map(|x| m.objective.iter().zip(&x).map(|(a, b)| a * b).sum::<Rational>())
        .reduce(|a, b| match m.sense {
            Sense::Max => a.max(b),
            Sense::Min => a.min(b),
        })
}

fn random_lp(rng: &mut ChaCha8Rng, n: usize) -> MipModel {
    let mut m = MipModel::new(Sense::Max);
    for j in 0..n {
        m.add_variable(Variable::continuous(format!("x{j}"), Some(int(0)), Some(int(rng.gen_range(1..=6)))));
    }
    m.set_objective((0..n).map(|_| frac(rng.gen_range(-12..=12), rng.gen_range(1..=4))).collect()).unwrap();
    for _ in 0..rng.gen_range(2..=2 * n) {
        let coeffs: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-3..=5))).collect();
        let relation = [Relation::Le, Relation::Le, Relation::Ge][rng.gen_range(0..3)];
        let rhs = if relation == Relation::Ge { int(rng.gen_range(-4..=1)) } else { int(rng.gen_range(2..=15)) };
        m.add_constraint(LinearConstraint::new(coeffs, relation, rhs)).unwrap();
    }
    m
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mips = 0;
    for trial in 0..60 {
        let k = rng.gen_range(2..=16);
        let m = random_binary_mip(&mut rng, k);
        let want = enumerate_best(&m);
        let got = solve_mip::<Rational>(&m, &MipOptions::default()).map_err(|e| e.to_string())?;
        let got = got.is_optimal().then_some(got.objective);
        ensure(got == want, || format!("mip trial {trial} ({k} binaries): {got:?} vs {want:?}"))?;
        mips += 1;
    }

    let mut lps: Vec<MipModel> = (0..40).map(|_| {
        let n = rng.gen_range(2..=8);
        random_lp(&mut rng, n)
    }).collect();
    let mut stasheff_lp = MipModel::new(Sense::Max);
    for j in 0..4 {
        stasheff_lp.add_variable(Variable::free(format!("x{}", j + 1)));
    }
    stasheff_lp.set_objective(ints(&[3, -1, 2, 5])).unwrap();
    for c in known().into_iter().chain(missing()).chain(equality().all().cloned()) {
        stasheff_lp.add_constraint(c).unwrap();
    }
    lps.push(stasheff_lp);
    let mut tsp_rng = ChaCha8Rng::seed_from_u64(11);
    let costs: Vec<Vec<i64>> =
        (0..5).map(|i| (0..5).map(|j| if i == j { 0 } else { tsp_rng.gen_range(1..=30) }).collect()).collect();
    let tiny = AtspInstance::from_i64("tiny", &costs).unwrap();
    lps.push(build_tsp_h(&tiny, &frac(9, 10)).unwrap().relaxed());
    lps.push(build_sd(&tiny).unwrap().relaxed());

    let mut optimal = 0;
    for (idx, m) in lps.iter().enumerate() {
        let exact = solve_lp::<Rational>(m).map_err(|e| e.to_string())?;
        let float = solve_lp::<f64>(m).map_err(|e| e.to_string())?;
        ensure(exact.status == float.status, || format!("lp {idx}: {} vs {}", exact.status, float.status))?;
        if exact.status != LpStatus::Optimal {
            continue;
        }
        let e = to_f64(&exact.objective);
        let rel = (e - float.objective).abs() / e.abs().max(1.0);
        ensure(rel <= 1e-6, || format!("lp {idx}: exact {e} float {} (rel {rel:.2e})", float.objective))?;
        let duals = exact.duals.as_ref().ok_or_else(|| format!("lp {idx}: no duals"))?;
        let bound = dual_objective(m, duals).map_err(|e| format!("lp {idx}: {e}"))?;
        ensure(bound == exact.objective, || format!("lp {idx}: dual {bound} primal {}", exact.objective))?;
        optimal += 1;
    }
    within(start.elapsed(), 120)?;
    Ok(format!("{mips} MIPs, {optimal} optimal LPs of {}, {:.1?}", lps.len(), start.elapsed()))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let s = stasheff();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let dir: Vec<Rational> = (0..4).map(|_| frac(rng.gen_range(-50..=50), rng.gen_range(1..=7))).collect();
        let mut m = MipModel::new(Sense::Max);
        for j in 0..4 {
            m.add_variable(Variable::free(format!("x{}", j + 1)));
        }
        m.set_objective(dir.clone()).unwrap();
        for c in known().into_iter().chain(missing()).chain(equality().all().cloned()) {
            m.add_constraint(c).unwrap();
        }
        let lp = solve_lp::<Rational>(&m).map_err(|e| e.to_string())?;
        let best = s
            .points()
            .iter()
            .map(|p| p.iter().zip(&dir).map(|(a, b)| a * b).sum::<Rational>())
            .max()
            .unwrap();
        ensure(lp.status == LpStatus::Optimal && lp.objective == best, || {
            format!("direction {trial}: lp {} {} vs vertices {best}", lp.status, lp.objective)
        })?;
    }
    Ok(format!("100 directions, {:.2?}", start.elapsed()))
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 stasheff end-to-end", criterion_1),
        ("2 oracle equivalence", criterion_2),
        ("3 eca properties", criterion_3),
        ("4 set-3 validity and facets", criterion_4),
        ("5 case tables", criterion_5),
        ("6 br17 lp bounds", criterion_6),
        ("7 solver self-checks", criterion_7),
        ("8 support function", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
