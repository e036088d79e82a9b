use pareto_forge::lp::{self, DenseSimplex, LinearProgram, LpSolver, LpStatus};
use pareto_forge::rng;
use proptest::prelude::*;
use rand::Rng as _;

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-10 {
        return None;
    }
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *xc = det(&mc) / d;
    }
    Some(x)
}

/// Brute-force optimum of a box-bounded 3-variable LP over all vertices.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let mut cons: Vec<([f64; 3], f64)> = lp.a.iter().zip(&lp.b).map(|(r, &b)| ([r[0], r[1], r[2]], b)).collect();
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        cons.push((e, lp.upper[j]));
        e[j] = -1.0;
        cons.push((e, -lp.lower[j]));
    }
    let mut best: Option<f64> = None;
    for a in 0..cons.len() {
        for b in a + 1..cons.len() {
            for c in b + 1..cons.len() {
                let Some(x) = solve3([cons[a].0, cons[b].0, cons[c].0], [cons[a].1, cons[b].1, cons[c].1]) else {
                    continue;
                };
                if lp.max_violation(&x) <= 1e-9 {
                    let v = lp.objective(&x);
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
    }
    best
}

fn random_small_lp(seed: u64) -> LinearProgram {
    let mut r = rng::rng(seed);
    let mut lp = LinearProgram::new((0..3).map(|_| r.random_range(-1.0..1.0)).collect());
    lp.upper = vec![5.0; 3];
    lp.lower = vec![-1.0, 0.0, -2.0];
    for _ in 0..5 {
        lp.add_row((0..3).map(|_| r.random_range(-1.0..1.0)).collect(), r.random_range(-1.0..2.0));
    }
    lp
}

#[test]
fn small_programs_match_vertex_enumeration() {
    let mut infeasible = 0;
    for seed in 0..300 {
        let lp = random_small_lp(seed);
        let res = lp::solve(&lp).unwrap();
        match vertex_oracle(&lp) {
            Some(v) => {
                assert_eq!(res.status, LpStatus::Optimal, "seed {seed}");
                assert!((res.objective - v).abs() < 1e-7 * (1.0 + v.abs()), "seed {seed}: {} vs {v}", res.objective);
                assert!(lp.max_violation(&res.x) < 1e-7);
            }
            None => {
                infeasible += 1;
                assert_eq!(res.status, LpStatus::Infeasible, "seed {seed}");
            }
        }
    }
    assert!(infeasible > 0 && infeasible < 300);
}

#[test]
fn strong_duality_on_random_programs() {
    // min cᵀx, Ax ≤ b, x ≥ 0 against max bᵀy, Aᵀy ≤ c, y ≤ 0.
    let mut compared = 0;
    for seed in 0..100 {
        let mut r = rng::rng(1000 + seed);
        let (m, n) = (4, 5);
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..m).map(|_| r.random_range(-0.5..2.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
        let mut primal = LinearProgram::new(c.clone());
        for (row, &rhs) in a.iter().zip(&b) {
            primal.add_row(row.clone(), rhs);
        }
        let mut dual = LinearProgram::new(b.iter().map(|v| -v).collect());
        dual.lower = vec![f64::NEG_INFINITY; m];
        dual.upper = vec![0.0; m];
        for j in 0..n {
            dual.add_row((0..m).map(|i| a[i][j]).collect(), c[j]);
        }
        let p = lp::solve(&primal).unwrap();
        let d = lp::solve(&dual).unwrap();
        match p.status {
            LpStatus::Optimal => {
                assert_eq!(d.status, LpStatus::Optimal);
                assert!((p.objective + d.objective).abs() < 1e-8, "seed {seed}");
                compared += 1;
            }
            LpStatus::Infeasible => assert_eq!(d.status, LpStatus::Unbounded, "seed {seed}"),
            s => panic!("unexpected status {s:?}"),
        }
    }
    assert!(compared > 20);
}

#[test]
fn textbook_examples() {
    let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
    lp.add_row(vec![1.0, 2.0], 4.0);
    lp.add_row(vec![3.0, 1.0], 6.0);
    let res = lp::solve(&lp).unwrap();
    assert_eq!(res.status, LpStatus::Optimal);
    assert!((res.objective + 2.8).abs() < 1e-12);
    assert!((res.x[0] - 1.6).abs() < 1e-12 && (res.x[1] - 1.2).abs() < 1e-12);

    let lp = LinearProgram::new(vec![-1.0]);
    assert_eq!(lp::solve(&lp).unwrap().status, LpStatus::Unbounded);

    let mut lp = LinearProgram::new(vec![0.0]);
    lp.add_row(vec![1.0], -1.0);
    assert_eq!(lp::solve(&lp).unwrap().status, LpStatus::Infeasible);

    // Free variable pushed negative, fixed variable honoured.
    let mut lp = LinearProgram::new(vec![1.0, 0.0]);
    lp.lower = vec![f64::NEG_INFINITY, 2.0];
    lp.upper = vec![f64::INFINITY, 2.0];
    lp.add_row(vec![-1.0, -1.0], 1.0);
    let res = lp::solve(&lp).unwrap();
    assert!((res.x[0] + 3.0).abs() < 1e-12 && res.x[1] == 2.0);
}

#[test]
fn malformed_programs_are_rejected() {
    let mut lp = LinearProgram::new(vec![1.0, 1.0]);
    lp.add_row(vec![1.0], 1.0);
    assert!(lp::solve(&lp).is_err());
    let mut lp = LinearProgram::new(vec![1.0]);
    lp.lower = vec![2.0];
    lp.upper = vec![1.0];
    assert!(lp::solve(&lp).is_err());
    let mut lp = LinearProgram::new(vec![f64::NAN]);
    lp.upper = vec![1.0];
    assert!(lp::solve(&lp).is_err());
}

fn planted_lp(seed: u64, m: usize, n: usize) -> (LinearProgram, Vec<f64>) {
    let mut r = rng::rng(seed);
    let x0: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
    let mut lp = LinearProgram::new((0..n).map(|_| r.random_range(-1.0..1.0)).collect());
    lp.upper = vec![2.0; n];
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let lhs: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        lp.add_row(row, lhs + r.random_range(0.0..0.5));
    }
    (lp, x0)
}

#[test]
fn larger_planted_programs_are_solved_consistently() {
    for seed in 0..20 {
        let (lp, x0) = planted_lp(seed, 20, 40);
        let res = lp::solve(&lp).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!(lp.max_violation(&res.x) < 1e-7);
        assert!(res.objective <= lp.objective(&x0) + 1e-9);

        let mut shuffled = lp.clone();
        shuffled.a.reverse();
        shuffled.b.reverse();
        let again = DenseSimplex::default().solve(&shuffled).unwrap();
        assert!((again.objective - res.objective).abs() < 1e-8 * (1.0 + res.objective.abs()));
    }
}

#[test]
fn feasibility_helper_returns_witness() {
    let a = vec![vec![1.0, 1.0], vec![-1.0, 0.0]];
    let (ok, x) = lp::feasible(&a, &[1.0, -0.25], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let x = x.unwrap();
    assert!(ok && x[0] >= 0.25 - 1e-12 && x[0] + x[1] <= 1.0 + 1e-12);
    let (ok, x) = lp::feasible(&a, &[1.0, -2.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert!(!ok && x.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_row_scaling_keeps_the_optimum(seed in 0u64..10_000, scales in prop::collection::vec(0.01f64..100.0, 5)) {
        let lp = random_small_lp(seed);
        let mut scaled = lp.clone();
        for (k, s) in scales.iter().enumerate() {
            scaled.a[k].iter_mut().for_each(|v| *v *= s);
            scaled.b[k] *= s;
        }
        let a = lp::solve(&lp).unwrap();
        let b = lp::solve(&scaled).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert!((a.objective - b.objective).abs() < 1e-7 * (1.0 + a.objective.abs()));
        }
    }
}
