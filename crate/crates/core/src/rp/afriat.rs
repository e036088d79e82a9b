use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{DenseSimplex, LinearProgram, LpSolver, LpStatus};
use crate::model::{AsGbar, GbarTable, ParetoCertificate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapResult {
    pub gap: f64,
    pub certificate: ParetoCertificate,
    pub per_agent_gaps: Vec<f64>,
    pub bisection_iters: usize,
}

/// Afriat numbers `(u, λ)` for one agent at relaxation `r`, if the system
/// `u_s − u_t − λ_t·gbar[t][s] ≤ λ_t·r`, `λ ≥ alpha` is feasible.
fn agent_system(
    solver: &mut dyn LpSolver,
    g: &GbarTable,
    i: usize,
    r: f64,
    alpha: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let t = g.periods();
    if t == 1 {
        // Only the diagonal row −λ(g + r) ≤ 0 exists.
        return Ok((g.get(0, 0, i) + r >= 0.0).then(|| (vec![0.0], vec![alpha])));
    }
    let n = 2 * t;
    let mut lp = LinearProgram::new(vec![0.0; n]);
    for j in 0..t {
        lp.lower[j] = f64::NEG_INFINITY;
        lp.lower[t + j] = alpha;
    }
    for a in 0..t {
        for b in 0..t {
            let coef = g.get(a, b, i) + r;
            // Rows are normalised; positive scaling leaves the feasible set unchanged.
            let w = 1.0 / coef.abs().max(1.0);
            let mut row = vec![0.0; n];
            if a != b {
                row[b] += w;
                row[a] -= w;
            }
            row[t + a] = -coef * w;
            lp.add_row(row, 0.0);
        }
    }
    let res = solver.solve(&lp)?;
    match res.status {
        LpStatus::Optimal => Ok(Some((res.x[..t].to_vec(), res.x[t..].to_vec()))),
        LpStatus::Infeasible => Ok(None),
        other => Err(Error::Lp(format!("agent {i} at r = {r}: status {other:?}"))),
    }
}

fn certificate(parts: &[(Vec<f64>, Vec<f64>)], t: usize, r: f64, alpha: f64) -> ParetoCertificate {
    let u = (0..t).map(|s| parts.iter().map(|p| p.0[s]).collect()).collect();
    let lambda = (0..t).map(|s| parts.iter().map(|p| p.1[s]).collect()).collect();
    ParetoCertificate { u, lambda, r, alpha }
}

/// Feasibility of the relaxed Afriat system at `r`. Agents share no
/// variables, so one LP is solved per agent.
pub fn afriat_feasible<D: AsGbar + ?Sized>(d: &D, r: f64, alpha: f64) -> Result<(bool, Option<ParetoCertificate>)> {
    if !(r >= 0.0) || !(alpha > 0.0) {
        return Err(Error::Invalid(format!("need r ≥ 0 and alpha > 0 (got r = {r}, alpha = {alpha})")));
    }
    let g = d.gbar();
    let mut solver = DenseSimplex::default();
    let mut parts = Vec::with_capacity(g.agents());
    for i in 0..g.agents() {
        match agent_system(&mut solver, g, i, r, alpha)? {
            Some(p) => parts.push(p),
            None => return Ok((false, None)),
        }
    }
    Ok((true, Some(certificate(&parts, g.periods(), r, alpha))))
}

/// Smallest feasible `r` for agent `i` (to `tol_r`), its certificate, and the
/// number of bisection steps.
pub fn agent_gap(
    solver: &mut dyn LpSolver,
    g: &GbarTable,
    i: usize,
    alpha: f64,
    tol_r: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>, usize)> {
    if let Some((u, l)) = agent_system(solver, g, i, 0.0, alpha)? {
        return Ok((0.0, u, l, 0));
    }
    let mut hi = g.agent_r_upper(i);
    // u ≡ 0, λ ≡ alpha is feasible at the upper end.
    let mut best = (vec![0.0; g.periods()], vec![alpha; g.periods()]);
    let mut lo = 0.0;
    let mut iters = 0;
    while hi - lo > tol_r {
        let mid = 0.5 * (lo + hi);
        iters += 1;
        match agent_system(solver, g, i, mid, alpha)? {
            Some(p) => {
                hi = mid;
                best = p;
            }
            None => lo = mid,
        }
    }
    Ok((hi, best.0, best.1, iters))
}

/// The Pareto gap: the smallest `r ≥ 0` making the relaxed system feasible,
/// located by bisection on `[0, max(0, max −gbar)]`.
pub fn pareto_gap<D: AsGbar + ?Sized>(d: &D, alpha: f64, tol_r: f64) -> Result<GapResult> {
    pareto_gap_with(&mut DenseSimplex::default(), d, alpha, tol_r)
}

pub fn pareto_gap_with<D: AsGbar + ?Sized>(
    solver: &mut dyn LpSolver,
    d: &D,
    alpha: f64,
    tol_r: f64,
) -> Result<GapResult> {
    if !(alpha > 0.0) || !(tol_r > 0.0) {
        return Err(Error::Invalid(format!("need alpha > 0 and tol_r > 0 (got {alpha}, {tol_r})")));
    }
    let g = d.gbar();
    let mut per_agent = Vec::with_capacity(g.agents());
    let mut parts = Vec::with_capacity(g.agents());
    let mut iters = 0;
    for i in 0..g.agents() {
        let (r, u, l, k) = agent_gap(solver, g, i, alpha, tol_r)?;
        per_agent.push(r);
        parts.push((u, l));
        iters += k;
    }
    let gap = per_agent.iter().cloned().fold(0.0, f64::max);
    Ok(GapResult {
        gap,
        certificate: certificate(&parts, g.periods(), gap, alpha),
        per_agent_gaps: per_agent,
        bisection_iters: iters,
    })
}

/// Gap of a dataset whose table holds sample means; identical computation,
/// kept separate so callers can distinguish the estimate from the exact loss.
pub fn empirical_pareto_gap<D: AsGbar + ?Sized>(d: &D, alpha: f64, tol_r: f64) -> Result<GapResult> {
    pareto_gap(d, alpha, tol_r)
}
