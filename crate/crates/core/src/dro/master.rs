use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{DroContext, PsiVector, ScenarioSet};
use crate::optim::golden_section_min;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MasterOptions {
    /// Points on the coarse geometric grid over `κ`.
    pub kappa_grid: usize,
    /// Subgradient steps per descent.
    pub descent_iters: usize,
    /// Random restarts in addition to the warm and neutral starts.
    pub restarts: usize,
    /// Rounds of exact `κ` line search followed by `ψ` descent.
    pub alternations: usize,
    /// Relative objective spread across starts that raises the warning flag.
    pub spread_tol: f64,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self { kappa_grid: 8, descent_iters: 150, restarts: 2, alternations: 3, spread_tol: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasterSolution {
    pub psi: PsiVector,
    /// `κ = v_{N+1}`, the price of transport.
    pub kappa: f64,
    /// `v_k` for `k < N`, set to the attained inner maxima.
    pub v: Vec<f64>,
    pub objective: f64,
    /// Multistart objectives disagreed by more than `spread_tol`.
    pub spread_warning: bool,
}

/// Per-`k` value `max(0, max_j [h(ψ, Φ_kj) − κ d_kj])`, with the active term
/// `(j, t, s, i)` when positive.
fn inner(psi: &PsiVector, cuts: &ScenarioSet, kappa: f64, k: usize) -> (f64, Option<(usize, usize, usize, usize)>) {
    let mut best = 0.0;
    let mut arg = None;
    for (j, cut) in cuts.cuts[k].iter().enumerate() {
        let tab = &cut.table;
        let pen = kappa * cut.distance;
        for t in 0..tab.periods() {
            for s in 0..tab.periods() {
                for i in 0..tab.agents() {
                    let v = (psi.u(s, i) - psi.u(t, i)) / psi.lambda(t, i) - tab.get(t, s, i) - pen;
                    if v > best {
                        best = v;
                        arg = Some((j, t, s, i));
                    }
                }
            }
        }
    }
    (best, arg)
}

fn objective(psi: &PsiVector, cuts: &ScenarioSet, kappa: f64, eps: f64) -> f64 {
    let n = cuts.cuts.len() as f64;
    eps * kappa + (0..cuts.cuts.len()).map(|k| inner(psi, cuts, kappa, k).0).sum::<f64>() / n
}

/// Projected normalised subgradient descent over `ψ` at fixed `κ`; returns
/// the best iterate seen.
fn descend(
    start: &PsiVector,
    cuts: &ScenarioSet,
    ctx: &DroContext,
    kappa: f64,
    eps: f64,
    iters: usize,
) -> (PsiVector, f64) {
    let b = ctx.psi_box;
    let mut psi = start.clone();
    psi.project(&b);
    let mut best = (psi.clone(), objective(&psi, cuts, kappa, eps));
    let m = psi.m;
    let n = cuts.cuts.len() as f64;
    let step0 = 0.25 * b.u_max.max(b.lambda_hi - b.lambda_lo);
    for it in 0..iters {
        let mut gu = vec![0.0; psi.u.len()];
        let mut gl = vec![0.0; psi.lambda.len()];
        for k in 0..cuts.cuts.len() {
            if let (_, Some((_, t, s, i))) = inner(&psi, cuts, kappa, k) {
                if s != t {
                    let lam = psi.lambda(t, i);
                    gu[s * m + i] += 1.0 / (lam * n);
                    gu[t * m + i] -= 1.0 / (lam * n);
                    gl[t * m + i] -= (psi.u(s, i) - psi.u(t, i)) / (lam * lam * n);
                }
            }
        }
        let norm = gu.iter().chain(&gl).map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-15 {
            break;
        }
        let step = step0 / ((it + 1) as f64).sqrt() / norm;
        for (v, g) in psi.u.iter_mut().zip(&gu) {
            *v -= step * g;
        }
        for (v, g) in psi.lambda.iter_mut().zip(&gl) {
            *v -= step * g;
        }
        psi.project(&b);
        let f = objective(&psi, cuts, kappa, eps);
        if f < best.1 {
            best = (psi.clone(), f);
        }
    }
    best
}

/// Exact minimiser of the convex piecewise-linear map `κ ↦ J(ψ, κ)`.
fn best_kappa(psi: &PsiVector, cuts: &ScenarioSet, eps: f64, kappa_max: f64) -> (f64, f64) {
    let f = |kappa: f64| objective(psi, cuts, kappa, eps);
    let (k, v) = golden_section_min(&f, 0.0, kappa_max, 120);
    let f0 = f(0.0);
    if f0 <= v {
        (0.0, f0)
    } else {
        (k, v)
    }
}

/// Approximately solves the finite master problem over the accumulated cuts.
///
/// A coarse geometric grid over `κ ∈ [0, V/ε]` seeds the search; then exact
/// line searches in `κ` alternate with multistart subgradient descent in `ψ`.
/// `warm` (the previous solution) is always among the starts.
pub fn master_solve(
    cuts: &ScenarioSet,
    ctx: &DroContext,
    eps: f64,
    v_bound: f64,
    warm: Option<(&PsiVector, f64)>,
    opts: &MasterOptions,
    seed: u64,
) -> MasterSolution {
    let b = ctx.psi_box;
    let (t, m) = (ctx.periods(), ctx.agents());
    let n = cuts.cuts.len();
    let neutral = PsiVector::neutral(t, m, &b);
    if cuts.total() == 0 {
        let psi = warm.map(|w| w.0.clone()).unwrap_or(neutral);
        return MasterSolution { psi, kappa: 0.0, v: vec![0.0; n], objective: 0.0, spread_warning: false };
    }
    let kappa_max = if eps > 0.0 { v_bound / eps } else { v_bound * 1e6 };

    let mut starts = vec![neutral.clone()];
    if let Some((p, _)) = warm {
        starts.insert(0, p.clone());
    }
    let mut r = rng::rng(seed);
    for _ in 0..opts.restarts {
        let mut p = neutral.clone();
        p.u.iter_mut().for_each(|v| *v = r.random_range(-b.u_max..=b.u_max));
        p.lambda.iter_mut().for_each(|v| *v = r.random_range(b.lambda_lo..=b.lambda_hi));
        starts.push(p);
    }

    // Coarse grid over κ from the first start.
    let mut grid = vec![0.0];
    if let Some((_, k)) = warm {
        grid.push(k.clamp(0.0, kappa_max));
    }
    let g = opts.kappa_grid.max(2);
    for j in 0..g {
        grid.push(kappa_max * 10f64.powf(-4.0 * (1.0 - j as f64 / (g - 1) as f64)));
    }
    let short = (opts.descent_iters / 3).max(10);
    let mut best: Option<(PsiVector, f64, f64)> = None;
    for &kappa in &grid {
        let (p, f) = descend(&starts[0], cuts, ctx, kappa, eps, short);
        if best.as_ref().is_none_or(|bst| f < bst.2) {
            best = Some((p, kappa, f));
        }
    }
    if let Some((p, k)) = warm {
        let f = objective(p, cuts, k.clamp(0.0, kappa_max), eps);
        if f < best.as_ref().map_or(f64::INFINITY, |bst| bst.2) {
            best = Some((p.clone(), k.clamp(0.0, kappa_max), f));
        }
    }
    let (mut psi, _, _) = best.expect("nonempty grid");
    let mut kappa;

    let mut finals = Vec::new();
    for round in 0..opts.alternations.max(1) {
        let (k, _) = best_kappa(&psi, cuts, eps, kappa_max);
        kappa = k;
        let mut round_best = (psi.clone(), objective(&psi, cuts, kappa, eps));
        let pool: Vec<&PsiVector> =
            if round == 0 { std::iter::once(&psi).chain(&starts).collect() } else { vec![&psi] };
        let results: Vec<(PsiVector, f64)> =
            pool.iter().map(|s| descend(s, cuts, ctx, kappa, eps, opts.descent_iters)).collect();
        if round == 0 {
            finals = results.iter().map(|r| r.1).collect();
        }
        for (p, f) in results {
            if f < round_best.1 {
                round_best = (p, f);
            }
        }
        psi = round_best.0;
    }
    let (k, f) = best_kappa(&psi, cuts, eps, kappa_max);
    kappa = k;
    let v: Vec<f64> = (0..n).map(|k| inner(&psi, cuts, kappa, k).0).collect();
    let lo = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread_warning = hi - lo > opts.spread_tol * (1.0 + lo.abs());
    MasterSolution { psi, kappa, v, objective: f, spread_warning }
}

/// Objective of the finite master problem at a given point (exposed for tests).
pub fn master_objective(psi: &PsiVector, cuts: &ScenarioSet, kappa: f64, eps: f64) -> f64 {
    objective(psi, cuts, kappa, eps)
}
