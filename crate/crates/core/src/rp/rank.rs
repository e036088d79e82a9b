use crate::error::{invalid, Result};

/// `M` strict rankings over `D` outcomes (best first) and a common utility
/// profile by position, `U(1) ≥ … ≥ U(D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceProfile {
    pub rankings: Vec<Vec<usize>>,
    pub utility: Vec<f64>,
}

impl PreferenceProfile {
    pub fn new(rankings: Vec<Vec<usize>>, utility: Vec<f64>) -> Result<Self> {
        let p = Self { rankings, utility };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.utility.len();
        if d == 0 || self.rankings.is_empty() {
            return invalid("profile needs at least one outcome and one agent");
        }
        for r in &self.rankings {
            let mut seen = vec![false; d];
            if r.len() != d || r.iter().any(|&o| o >= d || std::mem::replace(&mut seen[o], true)) {
                return invalid("each ranking must be a permutation of the outcomes");
            }
        }
        if self.utility.windows(2).any(|w| w[1] > w[0]) {
            return invalid("utility levels must be weakly decreasing");
        }
        Ok(())
    }

    pub fn outcomes(&self) -> usize {
        self.utility.len()
    }

    /// 1-based position of outcome `o` in agent `j`'s ranking.
    pub fn position(&self, j: usize, o: usize) -> usize {
        self.rankings[j].iter().position(|&x| x == o).expect("validated permutation") + 1
    }

    /// Number of agents ranking `o` within their top `k`.
    pub fn rnk(&self, k: usize, o: usize) -> usize {
        (0..self.rankings.len()).filter(|&j| self.position(j, o) <= k).count()
    }

    pub fn max_rnk(&self, k: usize) -> usize {
        (0..self.outcomes()).map(|o| self.rnk(k, o)).max().unwrap_or(0)
    }

    pub fn welfare(&self, o: usize) -> f64 {
        (0..self.rankings.len()).map(|j| self.utility[self.position(j, o) - 1]).sum()
    }

    /// All welfare-maximising outcomes (ties within `1e-12`).
    pub fn socially_optimal_outcomes(&self) -> Vec<usize> {
        let w: Vec<f64> = (0..self.outcomes()).map(|o| self.welfare(o)).collect();
        let best = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..self.outcomes()).filter(|&o| w[o] >= best - 1e-12 * (1.0 + best.abs())).collect()
    }
}

/// True iff the expected `k`-rank under `strategy` equals the best
/// achievable `k`-rank for every `k ∈ [D]`.
pub fn rank_optimality_check(p: &PreferenceProfile, strategy: &[f64]) -> Result<bool> {
    p.validate()?;
    let d = p.outcomes();
    if strategy.len() != d || strategy.iter().any(|&w| !(w >= 0.0)) {
        return invalid("strategy must be a nonnegative vector over the outcomes");
    }
    let total: f64 = strategy.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return invalid(format!("strategy sums to {total}, expected 1"));
    }
    Ok((1..=d).all(|k| {
        let expected: f64 = (0..d).map(|o| strategy[o] * p.rnk(k, o) as f64).sum();
        (expected - p.max_rnk(k) as f64).abs() <= 1e-9
    }))
}
