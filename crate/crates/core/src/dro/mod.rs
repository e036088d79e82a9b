//! Wasserstein-robust Pareto-gap estimation by an exchange (cutting) method.
//!
//! For a fixed vector `ψ = (u, λ)` the gap of one scenario `Φ = {γ_t^i}` has
//! the closed form
//!
//! `h(ψ, Φ) = max(0, max_{t,s,i} [(u_s^i − u_t^i)/λ_t^i − g_t^i(γ_s^i)])`.
//!
//! The robust problem minimises `ε·κ + (1/N)Σ_k v_k` subject to
//! `h(ψ, Φ) − κ·d_k(Φ) ≤ v_k` for every scenario `Φ`, where `d_k` is the
//! summed distance to the `k`-th sample dataset. The exchange loop alternates
//! a finite master problem over accumulated cuts with a violation oracle that
//! searches for the most violated scenario.

mod exchange;
mod instance;
mod master;
mod violation;

pub use exchange::{exchange_loop, iteration_ceiling, DroConfig, DroResult, DroState, DroTraceRow};
pub use instance::{two_good_instance, TwoGoodConfig, TwoGoodUtility};
pub use master::{master_objective, master_solve, MasterOptions, MasterSolution};
pub use violation::{constraint_violation, robust_gap, CvOptions};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{AsGbar, BudgetSet, GbarTable, RpDataset};

/// Box for `ψ`: `u ∈ [−u_max, u_max]`, `λ ∈ [lambda_lo, lambda_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiBox {
    pub u_max: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl PsiBox {
    /// `u ∈ [−1, 1]`, `λ ∈ [λ̂, 1]`.
    pub fn standard(lambda_hat: f64) -> Self {
        Self { u_max: 1.0, lambda_lo: lambda_hat, lambda_hi: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > 0.0 && self.lambda_lo > 0.0 && self.lambda_hi >= self.lambda_lo) {
            return invalid("psi box needs u_max > 0 and 0 < lambda_lo ≤ lambda_hi");
        }
        Ok(())
    }

    /// Bound on `h` over the box: `2·u_max/lambda_lo + G`.
    pub fn h_bound(&self, g_range: f64) -> f64 {
        2.0 * self.u_max / self.lambda_lo + g_range
    }

    /// Scale `u` and `λ` bounds by `c > 0`; `h` is unchanged under this map.
    pub fn scaled(&self, c: f64) -> Self {
        Self { u_max: c * self.u_max, lambda_lo: c * self.lambda_lo, lambda_hi: c * self.lambda_hi }
    }
}

/// `ψ` with `u` and `λ` stored at index `t·M + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiVector {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl PsiVector {
    /// `u ≡ 0`, `λ ≡ lambda_hi`.
    pub fn neutral(t: usize, m: usize, b: &PsiBox) -> Self {
        Self { t, m, u: vec![0.0; t * m], lambda: vec![b.lambda_hi; t * m] }
    }

    #[inline]
    pub fn u(&self, t: usize, i: usize) -> f64 {
        self.u[t * self.m + i]
    }

    #[inline]
    pub fn lambda(&self, t: usize, i: usize) -> f64 {
        self.lambda[t * self.m + i]
    }

    pub fn project(&mut self, b: &PsiBox) {
        self.u.iter_mut().for_each(|v| *v = v.clamp(-b.u_max, b.u_max));
        self.lambda.iter_mut().for_each(|v| *v = v.clamp(b.lambda_lo, b.lambda_hi));
    }

    pub fn in_box(&self, b: &PsiBox) -> bool {
        self.u.iter().all(|v| v.abs() <= b.u_max) && self.lambda.iter().all(|&l| l >= b.lambda_lo && l <= b.lambda_hi)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            t: self.t,
            m: self.m,
            u: self.u.iter().map(|v| c * v).collect(),
            lambda: self.lambda.iter().map(|v| c * v).collect(),
        }
    }
}

/// One point `γ_s^i` per (period, agent), stored at index `s·M + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub points: Vec<Vec<f64>>,
}

impl Scenario {
    #[inline]
    pub fn point(&self, s: usize, i: usize) -> &[f64] {
        &self.points[s * self.m + i]
    }

    pub fn set_point(&mut self, s: usize, i: usize, x: Vec<f64>) {
        self.points[s * self.m + i] = x;
    }

    /// `Σ_{s,i} ‖γ_s^i − other_s^i‖₂`
    pub fn distance(&self, other: &Scenario) -> f64 {
        self.points.iter().zip(&other.points).map(|(a, b)| euclid(a, b)).sum()
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The `k`-th sample dataset `Φ̂_k` for every `k`; requires a common sample count.
pub fn sample_scenarios(d: &RpDataset) -> Result<Vec<Scenario>> {
    let n = d.common_sample_count().ok_or_else(|| Error::Invalid("strategies need a common sample count".into()))?;
    let (t, m) = (d.periods(), d.agents());
    Ok((0..n)
        .map(|k| Scenario {
            t,
            m,
            points: (0..t)
                .flat_map(|s| (0..m).map(move |i| (s, i)))
                .map(|(s, i)| d.strategy(s, i).samples[k].clone())
                .collect(),
        })
        .collect())
}

/// `table[t][s][i] = g_t^i(γ_s^i)` for a scenario.
pub fn scenario_table(d: &RpDataset, phi: &Scenario) -> GbarTable {
    GbarTable::from_fn(d.periods(), d.agents(), |t, s, i| d.constraint(t, i).value(phi.point(s, i)))
        .expect("scenario values are finite")
}

/// `h` from a precomputed scenario table.
pub fn h_from_table(psi: &PsiVector, table: &GbarTable) -> f64 {
    let mut h = 0.0f64;
    for t in 0..table.periods() {
        for s in 0..table.periods() {
            for i in 0..table.agents() {
                h = h.max((psi.u(s, i) - psi.u(t, i)) / psi.lambda(t, i) - table.get(t, s, i));
            }
        }
    }
    h
}

/// Closed-form gap of the single-scenario system at fixed `ψ`.
pub fn h_value(psi: &PsiVector, d: &RpDataset, phi: &Scenario) -> f64 {
    h_from_table(psi, &scenario_table(d, phi))
}

/// `Σ_{t,i} min_k ‖γ_t^i − γ̂_{t,k}^i‖ ≤ ε`.
pub fn wasserstein_ball_check(phi: &Scenario, samples: &[Scenario], eps: f64) -> bool {
    nearest_sample_distance(phi, samples) <= eps
}

pub fn nearest_sample_distance(phi: &Scenario, samples: &[Scenario]) -> f64 {
    (0..phi.points.len())
        .map(|b| samples.iter().map(|s| euclid(&phi.points[b], &s.points[b])).fold(f64::INFINITY, f64::min))
        .sum()
}

/// `G = max_{t,i} |inf g_t^i|`, attained at the origin for increasing budgets.
pub fn g_range(d: &RpDataset) -> f64 {
    let zero = vec![0.0; d.action_dim()];
    d.constraints().iter().flatten().map(|g| g.value(&zero).abs()).fold(0.0, f64::max)
}

/// Everything the master and violation oracles share for one dataset.
pub struct DroContext<'a> {
    pub dataset: &'a RpDataset,
    pub samples: Vec<Scenario>,
    pub sample_tables: Vec<GbarTable>,
    /// Feasible set of block `(s, i)` at index `s·M + i`.
    pub budgets: Vec<BudgetSet>,
    pub g_range: f64,
    pub psi_box: PsiBox,
}

impl<'a> DroContext<'a> {
    pub fn new(d: &'a RpDataset, psi_box: PsiBox) -> Result<Self> {
        psi_box.validate()?;
        let samples = sample_scenarios(d)?;
        let sample_tables = samples.iter().map(|s| scenario_table(d, s)).collect();
        let budgets = (0..d.periods())
            .flat_map(|s| (0..d.agents()).map(move |i| (s, i)))
            .map(|(s, i)| d.constraint(s, i).budget_set())
            .collect::<Vec<_>>();
        if budgets.iter().any(|b| !b.is_bounded()) {
            return invalid("robust estimation needs bounded budget sets");
        }
        Ok(Self { dataset: d, samples, sample_tables, budgets, g_range: g_range(d), psi_box })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn periods(&self) -> usize {
        self.dataset.periods()
    }

    pub fn agents(&self) -> usize {
        self.dataset.agents()
    }

    pub fn h_bound(&self) -> f64 {
        self.psi_box.h_bound(self.g_range)
    }

    pub fn table(&self, phi: &Scenario) -> GbarTable {
        scenario_table(self.dataset, phi)
    }
}

/// An accumulated scenario for sample index `k` with its cached table and distance.
#[derive(Clone, Debug)]
pub struct Cut {
    pub scenario: Scenario,
    pub table: GbarTable,
    pub distance: f64,
}

/// `Γ̃_k` for every sample index `k`.
#[derive(Clone, Debug, Default)]
pub struct ScenarioSet {
    pub cuts: Vec<Vec<Cut>>,
}

impl ScenarioSet {
    pub fn new(n: usize) -> Self {
        Self { cuts: vec![Vec::new(); n] }
    }

    pub fn add(&mut self, ctx: &DroContext, k: usize, scenario: Scenario) {
        let distance = scenario.distance(&ctx.samples[k]);
        let table = ctx.table(&scenario);
        self.cuts[k].push(Cut { scenario, table, distance });
    }

    pub fn total(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }
}

impl AsGbar for Cut {
    fn gbar(&self) -> &GbarTable {
        &self.table
    }
}
