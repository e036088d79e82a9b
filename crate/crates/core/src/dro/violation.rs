use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{euclid, h_from_table, DroContext, PsiVector, Scenario};
use crate::model::{BudgetSet, ConstraintFunction};
use crate::optim::{projected_ascent, AscentOptions};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvOptions {
    /// Grid points per axis over the bounding box of a budget set.
    pub grid_per_axis: usize,
    pub random_starts: usize,
    /// Best grid candidates refined by projected ascent.
    pub refine: usize,
    pub ascent_iters: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { grid_per_axis: 11, random_starts: 2, refine: 2, ascent_iters: 100 }
    }
}

fn grid_points(set: &BudgetSet, per_axis: usize) -> Vec<Vec<f64>> {
    let ext = set.extent();
    let k = ext.len();
    let per = per_axis.max(2);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let p: Vec<f64> = idx.iter().zip(&ext).map(|(&j, &e)| e * j as f64 / (per - 1) as f64).collect();
        if set.contains(&p, 1e-12) {
            out.push(p);
        }
        let mut c = 0;
        while c < k {
            idx[c] += 1;
            if idx[c] < per {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        if c == k {
            return out;
        }
    }
}

/// Maximises `c − g(γ) − κ‖γ − anchor‖` over `γ` in `set` (optionally also
/// restricted to the ball `‖γ − anchor‖ ≤ radius`).
#[allow(clippy::too_many_arguments)]
fn block_max(
    g: &ConstraintFunction,
    c: f64,
    kappa: f64,
    anchor: &[f64],
    set: &BudgetSet,
    radius: Option<f64>,
    opts: &CvOptions,
    r: &mut rng::Rng,
) -> (f64, Vec<f64>) {
    let f = |y: &[f64]| c - g.value(y) - kappa * euclid(y, anchor);
    let grad = |y: &[f64]| {
        let dist = euclid(y, anchor);
        let mut gr: Vec<f64> = g.gradient(y).iter().map(|v| -v).collect();
        if dist > 1e-12 {
            for (gi, (yi, ai)) in gr.iter_mut().zip(y.iter().zip(anchor)) {
                *gi -= kappa * (yi - ai) / dist;
            }
        }
        gr
    };
    let project = |y: &[f64]| match radius {
        None => set.project(y),
        Some(rad) => project_ball_budget(y, anchor, rad, set),
    };
    let feasible = |y: &[f64]| set.contains(y, 1e-12) && radius.is_none_or(|rad| euclid(y, anchor) <= rad + 1e-12);

    let mut cands: Vec<Vec<f64>> = vec![anchor.to_vec()];
    match radius {
        None => {
            cands.extend(set.vertices());
            cands.extend(grid_points(set, opts.grid_per_axis));
        }
        Some(rad) => {
            // Steepest descent direction of g from the anchor, and the axes.
            let gr = g.gradient(anchor);
            let norm = gr.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                cands.push(project(&anchor.iter().zip(&gr).map(|(a, d)| a - rad * d / norm).collect::<Vec<_>>()));
            }
            for j in 0..anchor.len() {
                let mut p = anchor.to_vec();
                p[j] -= rad;
                cands.push(project(&p));
            }
        }
    }
    let ext = set.extent();
    for _ in 0..opts.random_starts {
        let p: Vec<f64> = ext.iter().map(|&e| r.random_range(0.0..=1.0) * e).collect();
        cands.push(project(&p));
    }
    cands.retain(|p| feasible(p));
    let mut scored: Vec<(f64, Vec<f64>)> = cands.into_iter().map(|p| (f(&p), p)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].clone();
    let asc = AscentOptions { max_iters: opts.ascent_iters, tol: 1e-10, initial_step: 0.5 };
    let refine = scored.iter().take(opts.refine.max(1)).map(|s| s.1.clone()).chain(std::iter::once(anchor.to_vec()));
    for start in refine.collect::<Vec<_>>() {
        let (y, fy, _) = projected_ascent(&f, &grad, &project, &start, asc);
        if fy > best.0 && feasible(&y) {
            best = (fy, y);
        }
    }
    best
}

/// Projection onto `{‖y − a‖ ≤ r} ∩ set` by Dykstra's alternating projections.
fn project_ball_budget(y: &[f64], a: &[f64], radius: f64, set: &BudgetSet) -> Vec<f64> {
    let ball = |z: &[f64]| -> Vec<f64> {
        let d = euclid(z, a);
        if d <= radius {
            z.to_vec()
        } else {
            z.iter().zip(a).map(|(zi, ai)| ai + (zi - ai) * radius / d).collect()
        }
    };
    let k = y.len();
    let mut x = y.to_vec();
    let (mut p, mut q) = (vec![0.0; k], vec![0.0; k]);
    for _ in 0..200 {
        let yb: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let z = ball(&yb);
        p = yb.iter().zip(&z).map(|(a, b)| a - b).collect();
        let zq: Vec<f64> = z.iter().zip(&q).map(|(a, b)| a + b).collect();
        let xn = set.project(&zq);
        q = zq.iter().zip(&xn).map(|(a, b)| a - b).collect();
        let moved = euclid(&xn, &x);
        x = xn;
        if moved < 1e-13 {
            break;
        }
    }
    // Dykstra converges from outside; pull back strictly into the ball.
    let d = euclid(&x, a);
    if d > radius {
        let t = radius / d;
        x = x.iter().zip(a).map(|(xi, ai)| ai + (xi - ai) * t).collect();
        x = set.project(&x);
    }
    x
}

/// Maximum constraint violation for sample index `k` at the master point:
/// `max_Φ [h(ψ̂, Φ) − κ̂·d_k(Φ)] − v̂_k`, searched over scenarios that move at
/// most one block away from the `k`-th sample dataset.
pub fn constraint_violation(
    k: usize,
    psi: &PsiVector,
    kappa: f64,
    v_k: f64,
    ctx: &DroContext,
    opts: &CvOptions,
    seed: u64,
) -> (f64, Scenario) {
    let d = ctx.dataset;
    let (t_n, m) = (ctx.periods(), ctx.agents());
    let sample = &ctx.samples[k];
    let mut best = (h_from_table(psi, &ctx.sample_tables[k]), sample.clone());
    let mut r = rng::rng(seed);
    for s in 0..t_n {
        for i in 0..m {
            let anchor = sample.point(s, i);
            let set = &ctx.budgets[s * m + i];
            for t in 0..t_n {
                let c = (psi.u(s, i) - psi.u(t, i)) / psi.lambda(t, i);
                let (val, y) = block_max(d.constraint(t, i), c, kappa, anchor, set, None, opts, &mut r);
                if val > best.0 {
                    let mut phi = sample.clone();
                    phi.set_point(s, i, y);
                    best = (val, phi);
                }
            }
        }
    }
    (best.0 - v_k, best.1)
}

/// `max h(ψ̂, Φ)` over scenarios whose summed nearest-sample distance is at
/// most `ε`. Each term of `h` involves one block, so the whole budget goes to
/// that block around whichever sample is best.
pub fn robust_gap(psi: &PsiVector, ctx: &DroContext, eps: f64, opts: &CvOptions, seed: u64) -> f64 {
    let d = ctx.dataset;
    let (t_n, m) = (ctx.periods(), ctx.agents());
    let mut best = 0.0f64;
    let mut r = rng::rng(seed);
    for sample in &ctx.samples {
        for s in 0..t_n {
            for i in 0..m {
                let anchor = sample.point(s, i);
                let set = &ctx.budgets[s * m + i];
                for t in 0..t_n {
                    let c = (psi.u(s, i) - psi.u(t, i)) / psi.lambda(t, i);
                    let val = if eps > 0.0 {
                        block_max(d.constraint(t, i), c, 0.0, anchor, set, Some(eps), opts, &mut r).0
                    } else {
                        c - d.constraint(t, i).value(anchor)
                    };
                    best = best.max(val);
                }
            }
        }
    }
    best
}
