use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    constraint_violation, master_solve, robust_gap, CvOptions, DroContext, MasterOptions, PsiBox, PsiVector,
    ScenarioSet,
};
use crate::error::{invalid, Result};
use crate::model::RpDataset;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DroConfig {
    pub psi_box: PsiBox,
    /// Bound on `h` sizing the `v` box; `None` uses `2·u_max/λ_lo + G`.
    pub v_bound: Option<f64>,
    pub max_iters: usize,
    pub master: MasterOptions,
    pub cv: CvOptions,
    pub seed: u64,
}

impl Default for DroConfig {
    fn default() -> Self {
        Self {
            psi_box: PsiBox::standard(0.1),
            v_bound: None,
            max_iters: 50,
            master: MasterOptions::default(),
            cv: CvOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroState {
    pub psi_hat: PsiVector,
    /// `v_1..v_N` followed by `v_{N+1} = κ`.
    pub v_hat: Vec<f64>,
    pub cv: Vec<f64>,
    pub iteration: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl DroState {
    pub fn kappa(&self) -> f64 {
        *self.v_hat.last().expect("v_hat holds kappa")
    }

    pub fn max_cv(&self) -> f64 {
        self.cv.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroTraceRow {
    pub iter: usize,
    pub max_cv: f64,
    pub master_objective: f64,
    pub n_cuts_total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroResult {
    pub psi_hat: PsiVector,
    pub robust_gap: f64,
    pub certified: bool,
    pub iterations: usize,
    pub state: DroState,
    pub trace: Vec<DroTraceRow>,
    /// The master problem reported disagreeing multistarts at least once.
    pub spread_warning: bool,
}

impl DroResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iter,max_cv,master_objective,n_cuts_total\n");
        for r in &self.trace {
            s.push_str(&format!("{},{},{},{}\n", r.iter, r.max_cv, r.master_objective, r.n_cuts_total));
        }
        s
    }

    /// `{psi_hat, robust_gap, certified, iterations}` plus the final violations.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "psi_hat": self.psi_hat,
            "robust_gap": self.robust_gap,
            "certified": self.certified,
            "iterations": self.iterations,
            "max_cv": self.state.max_cv(),
            "kappa": self.state.kappa(),
        })
    }
}

/// Upper bound `(1/δ + 1)^{2TM+2}` on exchange iterations.
pub fn iteration_ceiling(t: usize, m: usize, delta: f64) -> f64 {
    (1.0 / delta + 1.0).powf((2 * t * m + 2) as f64)
}

/// Runs the exchange method until every violation is below `delta` or the
/// iteration cap is reached (then the result is not certified).
pub fn exchange_loop(d: &RpDataset, eps: f64, delta: f64, cfg: &DroConfig) -> Result<DroResult> {
    if !(delta > 0.0) || !(eps >= 0.0) {
        return invalid("exchange needs delta > 0 and eps ≥ 0");
    }
    let ctx = DroContext::new(d, cfg.psi_box)?;
    let v_bound = cfg.v_bound.unwrap_or_else(|| ctx.h_bound());
    let n = ctx.n();
    let mut cuts = ScenarioSet::new(n);
    let mut trace = Vec::new();
    let mut warm: Option<(PsiVector, f64)> = None;
    let mut spread_warning = false;
    let mut state = None;

    for iter in 1..=cfg.max_iters.max(1) {
        let mseed = rng::split_path(cfg.seed, &[iter as u64, 0]);
        let sol = master_solve(&cuts, &ctx, eps, v_bound, warm.as_ref().map(|(p, k)| (p, *k)), &cfg.master, mseed);
        spread_warning |= sol.spread_warning;
        let found: Vec<(f64, super::Scenario)> = (0..n)
            .into_par_iter()
            .map(|k| {
                let s = rng::split_path(cfg.seed, &[iter as u64, 1, k as u64]);
                constraint_violation(k, &sol.psi, sol.kappa, sol.v[k], &ctx, &cfg.cv, s)
            })
            .collect();
        let cv: Vec<f64> = found.iter().map(|f| f.0).collect();
        let max_cv = cv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        trace.push(DroTraceRow { iter, max_cv, master_objective: sol.objective, n_cuts_total: cuts.total() });
        let mut v_hat = sol.v.clone();
        v_hat.push(sol.kappa);
        let done = max_cv < delta;
        state = Some(DroState { psi_hat: sol.psi.clone(), v_hat, cv, iteration: iter, epsilon: eps, delta });
        if done {
            break;
        }
        for (k, (c, phi)) in found.into_iter().enumerate() {
            if c > 0.0 {
                cuts.add(&ctx, k, phi);
            }
        }
        warm = Some((sol.psi, sol.kappa));
    }
    let state = state.expect("at least one iteration");
    let certified = state.max_cv() < delta;
    let rg = robust_gap(&state.psi_hat, &ctx, eps, &cfg.cv, rng::split(cfg.seed, u64::MAX));
    Ok(DroResult {
        psi_hat: state.psi_hat.clone(),
        robust_gap: rg,
        certified,
        iterations: state.iteration,
        state,
        trace,
        spread_warning,
    })
}
