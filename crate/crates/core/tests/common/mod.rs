#![allow(dead_code)]

use pareto_forge::dro::{PsiBox, PsiVector, Scenario};
use pareto_forge::lp;
use pareto_forge::model::{BudgetSet, GbarTable};
use pareto_forge::rng;
use rand::Rng as _;

/// Smallest `r` making `u_s − u_t ≤ λ_t (table[t][s] + r)` hold for a fixed
/// `ψ`, located by bisection over LP feasibility checks with every variable
/// pinned by equal lower and upper bounds.
pub fn lp_bisection_gap(psi: &PsiVector, table: &GbarTable, hi: f64, tol: f64) -> f64 {
    let (t, m) = (table.periods(), table.agents());
    let nv = 2 * t * m;
    let mut fixed = vec![0.0; nv];
    for j in 0..t * m {
        fixed[j] = psi.u[j];
        fixed[t * m + j] = psi.lambda[j];
    }
    let feasible_at = |r: f64| {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for tt in 0..t {
            for s in 0..t {
                for i in 0..m {
                    let mut row = vec![0.0; nv];
                    row[s * m + i] += 1.0;
                    row[tt * m + i] -= 1.0;
                    row[t * m + tt * m + i] = -(table.get(tt, s, i) + r);
                    a.push(row);
                    b.push(0.0);
                }
            }
        }
        lp::feasible(&a, &b, &fixed, &fixed).expect("lp solve").0
    };
    if feasible_at(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, hi);
    assert!(feasible_at(hi), "upper end must be feasible");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn random_psi(t: usize, m: usize, b: &PsiBox, r: &mut rng::Rng) -> PsiVector {
    PsiVector {
        t,
        m,
        u: (0..t * m).map(|_| r.random_range(-b.u_max..=b.u_max)).collect(),
        lambda: (0..t * m).map(|_| r.random_range(b.lambda_lo..=b.lambda_hi)).collect(),
    }
}

/// A uniform point of the box `[0, extent]` pulled into the budget set.
pub fn random_point(set: &BudgetSet, r: &mut rng::Rng) -> Vec<f64> {
    loop {
        let p: Vec<f64> = set.extent().iter().map(|&e| r.random_range(0.0..=e)).collect();
        if set.contains(&p, 0.0) {
            return p;
        }
    }
}

pub fn random_scenario(sets: &[BudgetSet], t: usize, m: usize, r: &mut rng::Rng) -> Scenario {
    Scenario { t, m, points: sets.iter().map(|s| random_point(s, r)).collect() }
}

/// All points of the `step` grid on `[0, extent]^2` inside the budget set.
pub fn grid2(set: &BudgetSet, step: f64) -> Vec<[f64; 2]> {
    let ext = set.extent();
    let n0 = (ext[0] / step).floor() as usize;
    let n1 = (ext[1] / step).floor() as usize;
    let mut out = Vec::new();
    for a in 0..=n0 {
        for b in 0..=n1 {
            let p = [a as f64 * step, b as f64 * step];
            if set.contains(&p, 1e-12) {
                out.push(p);
            }
        }
    }
    out
}
