//! Mechanism tuning by simultaneous-perturbation stochastic approximation.
//!
//! Each step draws a Rademacher direction `Δ_n`, evaluates the loss at
//! `θ_n ± c_nΔ_n` (these perturbed points are not projected), forms the
//! two-sided gradient estimate and takes a projected step with injected
//! Gaussian noise of scale `q_n`:
//!
//! `θ_{n+1} = Proj(θ_n − a_n ĝ_n + q_n w_n)`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{collect_dataset, river_probes, NashOptions, RiverPollutionGame};
use crate::rng;
use crate::rp::empirical_pareto_gap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub q: f64,
    pub eta: f64,
    /// Per-coordinate `[lo, hi]`.
    pub theta_box: Vec<(f64, f64)>,
    /// Probe periods per loss evaluation.
    #[serde(rename = "T")]
    pub t_periods: usize,
    pub max_iters: usize,
    pub stop_tol: f64,
    pub seed: u64,
    /// Lower bound on multipliers in the gap computation.
    pub alpha: f64,
    pub tol_r: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a: 0.5,
            c: 0.5,
            q: 0.001,
            eta: 0.25,
            theta_box: vec![(0.0, 1.0); 7],
            t_periods: 10,
            max_iters: 30,
            stop_tol: crate::TOL_R,
            seed: 0,
            alpha: crate::ALPHA,
            tol_r: crate::TOL_R,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.c > 0.0 && self.q > 0.0) {
            return invalid("a, c and q must be positive");
        }
        if !(1.0 / 6.0..=0.5).contains(&self.eta) {
            return invalid(format!("eta = {} outside [1/6, 1/2]", self.eta));
        }
        if self.theta_box.is_empty() || self.theta_box.iter().any(|(lo, hi)| !(lo <= hi)) {
            return invalid("theta_box needs lo ≤ hi in every coordinate");
        }
        if self.t_periods == 0 || !(self.stop_tol >= 0.0) || !(self.alpha > 0.0) || !(self.tol_r > 0.0) {
            return invalid("need T ≥ 1, stop_tol ≥ 0, alpha > 0, tol_r > 0");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.theta_box.len()
    }

    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().zip(&self.theta_box).map(|(v, (lo, hi))| v.clamp(*lo, *hi)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gains {
    pub a_n: f64,
    pub c_n: f64,
    pub q_n: f64,
}

/// `a_n = a/n`, `c_n = c/n^η`, `q_n = sqrt(q / (m ln ln m))` with `m = n + 3`
/// so that the noise scale is real for every `n ≥ 1`.
pub fn gains(n: usize, cfg: &SpsaConfig) -> Gains {
    assert!(n >= 1, "iterations are 1-based");
    let nf = n as f64;
    let m = nf + 3.0;
    Gains { a_n: cfg.a / nf, c_n: cfg.c / nf.powf(cfg.eta), q_n: (cfg.q / (m * m.ln().ln())).sqrt() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub delta: Vec<f64>,
    pub gradient: Vec<f64>,
    pub noise: Vec<f64>,
    pub r_plus: f64,
    pub r_minus: f64,
    pub gains: Gains,
}

/// One projected SPSA step with randomness drawn from `seed`.
pub fn spsa_step(
    theta: &[f64],
    loss: &mut dyn FnMut(&[f64]) -> Result<f64>,
    n: usize,
    cfg: &SpsaConfig,
    seed: u64,
) -> Result<(Vec<f64>, StepRecord)> {
    if theta.len() != cfg.dim() {
        return Err(Error::Dimension { expected: cfg.dim(), got: theta.len() });
    }
    let gains = gains(n, cfg);
    let mut r = rng::rng(seed);
    let delta: Vec<f64> = (0..theta.len()).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let noise: Vec<f64> = (0..theta.len()).map(|_| r.sample(StandardNormal)).collect();
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + gains.c_n * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - gains.c_n * d).collect();
    let r_plus = loss(&plus)?;
    let r_minus = loss(&minus)?;
    let gradient: Vec<f64> = delta.iter().map(|d| (r_plus - r_minus) / (2.0 * gains.c_n * d)).collect();
    let raw: Vec<f64> = (0..theta.len()).map(|i| theta[i] - gains.a_n * gradient[i] + gains.q_n * noise[i]).collect();
    Ok((cfg.project(&raw), StepRecord { delta, gradient, noise, r_plus, r_minus, gains }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub n: usize,
    pub theta: Vec<f64>,
    pub loss: f64,
    pub gradient: Vec<f64>,
    pub gains: Gains,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpsaTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    pub final_theta: Vec<f64>,
}

impl SpsaTrace {
    pub fn csv_header(p: usize) -> String {
        let thetas: Vec<String> = (1..=p).map(|i| format!("theta_{i}")).collect();
        format!("n,loss,{},a_n,c_n,q_n", thetas.join(","))
    }

    pub fn csv_row(r: &TraceRecord) -> String {
        let thetas: Vec<String> = r.theta.iter().map(|v| v.to_string()).collect();
        format!("{},{},{},{},{},{}", r.n, r.loss, thetas.join(","), r.gains.a_n, r.gains.c_n, r.gains.q_n)
    }

    pub fn to_csv(&self, p: usize) -> String {
        let mut out = Self::csv_header(p);
        out.push('\n');
        for r in &self.records {
            out.push_str(&Self::csv_row(r));
            out.push('\n');
        }
        out
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.loss)
    }
}

/// A loss that depends on a nuisance probe seed (re-drawn on failure).
pub trait LossOracle {
    fn loss(&self, theta: &[f64], probe_seed: u64) -> Result<f64>;
}

impl<F: Fn(&[f64], u64) -> Result<f64>> LossOracle for F {
    fn loss(&self, theta: &[f64], probe_seed: u64) -> Result<f64> {
        self(theta, probe_seed)
    }
}

/// Iterate state of the mechanism-design loop.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismState {
    pub theta: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub probe_seed: u64,
}

const MAX_ATTEMPTS: u64 = 3;

/// Loss at `θ_n` and the step taken from it, if any.
type Attempt = (f64, Option<(Vec<f64>, StepRecord)>);

/// Runs the SPSA loop from `theta1`. At each `n` the loss at `θ_n` is
/// recorded; the loop stops once it is at most `stop_tol`, otherwise a step
/// is taken. A failed loss evaluation re-draws the probe seed and retries
/// the iteration (three attempts in total).
pub fn run_mechanism_design(
    oracle: &dyn LossOracle,
    theta1: &[f64],
    cfg: &SpsaConfig,
    mut sink: Option<&mut dyn FnMut(&TraceRecord)>,
) -> Result<SpsaTrace> {
    cfg.validate()?;
    if theta1.len() != cfg.dim() {
        return Err(Error::Dimension { expected: cfg.dim(), got: theta1.len() });
    }
    let mut state =
        MechanismState { theta: cfg.project(theta1), n: 1, seed: cfg.seed, probe_seed: rng::split(cfg.seed, 0x9_0be) };
    let mut trace = SpsaTrace::default();
    let mut redraws = 0u64;
    while state.n <= cfg.max_iters {
        let n = state.n;
        let attempt = (|| -> Result<Attempt> {
            let loss_n = oracle.loss(&state.theta, state.probe_seed)?;
            if loss_n <= cfg.stop_tol {
                return Ok((loss_n, None));
            }
            let probe = state.probe_seed;
            let mut f = |th: &[f64]| oracle.loss(th, probe);
            let step = spsa_step(&state.theta, &mut f, n, cfg, rng::split_path(state.seed, &[1, n as u64]))?;
            Ok((loss_n, Some(step)))
        })();
        let (loss_n, step) = match attempt {
            Ok(v) => {
                redraws = 0;
                v
            }
            Err(Error::Equilibrium(msg)) => {
                redraws += 1;
                if redraws >= MAX_ATTEMPTS {
                    return Err(Error::Equilibrium(format!("iteration {n}: {msg} (after {MAX_ATTEMPTS} attempts)")));
                }
                state.probe_seed = rng::split_path(cfg.seed, &[2, redraws]);
                continue;
            }
            Err(e) => return Err(e),
        };
        let record = TraceRecord {
            n,
            theta: state.theta.clone(),
            loss: loss_n,
            gradient: step.as_ref().map(|s| s.1.gradient.clone()).unwrap_or_default(),
            gains: gains(n, cfg),
        };
        if let Some(s) = sink.as_mut() {
            s(&record);
        }
        trace.records.push(record);
        match step {
            None => {
                trace.converged = true;
                break;
            }
            Some((next, _)) => {
                state.theta = next;
                state.n += 1;
            }
        }
    }
    trace.final_theta = state.theta;
    Ok(trace)
}

/// Loss oracle for the river game: probes drawn from the probe seed, one
/// equilibrium per period, empirical Pareto gap of the resulting dataset.
pub struct RiverLoss {
    pub base: RiverPollutionGame,
    pub periods: usize,
    pub samples: usize,
    pub jitter: f64,
    pub alpha: f64,
    pub tol_r: f64,
    pub nash: NashOptions,
}

impl LossOracle for RiverLoss {
    fn loss(&self, theta: &[f64], probe_seed: u64) -> Result<f64> {
        let game = self.base.with_theta(theta.to_vec())?;
        let probes = river_probes(&game, self.periods, probe_seed);
        let d = collect_dataset(&game, &probes, self.samples, self.jitter, rng::split(probe_seed, 1), &self.nash)?;
        Ok(empirical_pareto_gap(&d, self.alpha, self.tol_r)?.gap)
    }
}

/// `θ₁ ~ U[lo, hi]^p`.
pub fn uniform_start(p: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::rng(seed);
    (0..p).map(|_| r.random_range(lo..=hi)).collect()
}
