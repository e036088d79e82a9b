//! Linearly constrained test instance: three agents with two-good utilities
//! on random budget lines `⟨α, γ⟩ ≤ 1`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ConstraintFunction, EmpiricalStrategy, RpDataset};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoGoodUtility {
    /// `β₁ + β₂`
    Linear,
    /// `β₁ + β₂^{1/4}`
    RootSecond,
    /// `β₁^{1/4} + β₂`
    RootFirst,
}

impl TwoGoodUtility {
    pub const ALL: [TwoGoodUtility; 3] =
        [TwoGoodUtility::Linear, TwoGoodUtility::RootSecond, TwoGoodUtility::RootFirst];

    pub fn value(&self, b: &[f64]) -> f64 {
        match self {
            TwoGoodUtility::Linear => b[0] + b[1],
            TwoGoodUtility::RootSecond => b[0] + b[1].powf(0.25),
            TwoGoodUtility::RootFirst => b[0].powf(0.25) + b[1],
        }
    }

    /// Maximiser over `{β ≥ 0 : ⟨α, β⟩ ≤ 1}`.
    pub fn optimum(&self, alpha: [f64; 2]) -> [f64; 2] {
        let [a1, a2] = alpha;
        match self {
            TwoGoodUtility::Linear => {
                if a1 <= a2 {
                    [1.0 / a1, 0.0]
                } else {
                    [0.0, 1.0 / a2]
                }
            }
            TwoGoodUtility::RootSecond => {
                let b2 = (a1 / (4.0 * a2)).powf(4.0 / 3.0).min(1.0 / a2);
                [((1.0 - a2 * b2) / a1).max(0.0), b2]
            }
            TwoGoodUtility::RootFirst => {
                let b1 = (a2 / (4.0 * a1)).powf(4.0 / 3.0).min(1.0 / a1);
                [b1, ((1.0 - a1 * b1) / a2).max(0.0)]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoGoodConfig {
    #[serde(rename = "T")]
    pub t: usize,
    /// Samples per strategy.
    #[serde(rename = "N")]
    pub n: usize,
    /// Half-width of the uniform displacement along the budget line.
    pub jitter: f64,
    pub alpha_range: (f64, f64),
    pub seed: u64,
}

impl Default for TwoGoodConfig {
    fn default() -> Self {
        Self { t: 5, n: 5, jitter: 0.05, alpha_range: (0.1, 1.1), seed: 0 }
    }
}

/// Builds the dataset: for each period and agent a random price vector, the
/// agent's optimum on that budget, and `N` samples spread along the budget
/// line around it.
pub fn two_good_instance(cfg: &TwoGoodConfig) -> Result<RpDataset> {
    let (lo, hi) = cfg.alpha_range;
    if cfg.t == 0 || cfg.n == 0 || !(lo > 0.0 && hi > lo) || !(cfg.jitter >= 0.0) {
        return invalid("instance needs T, N ≥ 1, 0 < alpha_lo < alpha_hi and jitter ≥ 0");
    }
    let mut constraints = Vec::with_capacity(cfg.t);
    let mut strategies = Vec::with_capacity(cfg.t);
    for t in 0..cfg.t {
        let mut crow = Vec::new();
        let mut srow = Vec::new();
        for (i, u) in TwoGoodUtility::ALL.iter().enumerate() {
            let mut r = rng::rng(rng::split_path(cfg.seed, &[t as u64, i as u64]));
            let alpha = [r.random_range(lo..hi), r.random_range(lo..hi)];
            let opt = u.optimum(alpha);
            let norm = alpha[0].hypot(alpha[1]);
            let dir = [alpha[1] / norm, -alpha[0] / norm];
            // Largest displacements that keep both coordinates nonnegative.
            let up = (opt[1] / alpha[0] * norm).min(cfg.jitter);
            let down = (opt[0] / alpha[1] * norm).min(cfg.jitter);
            let samples = (0..cfg.n)
                .map(|_| {
                    let tau = if cfg.jitter > 0.0 { r.random_range(-down..=up) } else { 0.0 };
                    vec![(opt[0] + tau * dir[0]).max(0.0), (opt[1] + tau * dir[1]).max(0.0)]
                })
                .collect();
            crow.push(ConstraintFunction::affine(alpha.to_vec(), 1.0));
            srow.push(EmpiricalStrategy::new(samples)?);
        }
        constraints.push(crow);
        strategies.push(srow);
    }
    RpDataset::new(constraints, strategies)
}
