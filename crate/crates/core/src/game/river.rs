use rand::Rng as _;

use super::Game;
use crate::error::{invalid, Result};
use crate::model::ConstraintFunction;
use crate::rng;

/// Three firms discharging into a river monitored at two stations.
///
/// Firm `i` earns `d1·x_i − d2·√(x1+x2+x3) − c_{1i}·√x_i − c_{2i}·x_i` where
/// `θ = [d2, c11, c12, c13, c21, c22, c23]` is the mechanism parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct RiverPollutionGame {
    pub d1: f64,
    /// Transport decay `δ_il` from firm `i` to station `l`.
    pub delta: [[f64; 2]; 3],
    pub cap: f64,
    pub theta: Vec<f64>,
}

impl RiverPollutionGame {
    pub const DEFAULT_DELTA: [[f64; 2]; 3] = [[0.9, 0.6], [0.7, 0.8], [0.5, 1.0]];

    pub fn new(d1: f64, delta: [[f64; 2]; 3], cap: f64, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != 7 {
            return invalid(format!("theta must have 7 components, got {}", theta.len()));
        }
        if delta.iter().flatten().any(|&d| !(d > 0.0 && d <= 1.0)) {
            return invalid("transport coefficients must lie in (0, 1]");
        }
        if !(cap > 0.0) || !d1.is_finite() || theta.iter().any(|v| !v.is_finite()) {
            return invalid("cap must be positive and parameters finite");
        }
        Ok(Self { d1, delta, cap, theta })
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.d1, self.delta, self.cap, theta)
    }

    /// Concentration `q_l(x) = Σ_i δ_il e_i x_i` at station `l`.
    pub fn station_load(&self, e: &[f64; 3], x: &[f64; 3], l: usize) -> f64 {
        (0..3).map(|i| self.delta[i][l] * e[i] * x[i]).sum()
    }

    /// Worst-station transport coefficient of firm `i`.
    pub fn worst_delta(&self, i: usize) -> f64 {
        self.delta[i][0].max(self.delta[i][1])
    }
}

impl Game for RiverPollutionGame {
    fn num_agents(&self) -> usize {
        3
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn payoff(&self, x: &[Vec<f64>], i: usize) -> f64 {
        let total: f64 = x.iter().map(|v| v[0]).sum();
        let xi = x[i][0];
        let (d2, c1, c2) = (self.theta[0], self.theta[1 + i], self.theta[4 + i]);
        self.d1 * xi - d2 * total.max(0.0).sqrt() - c1 * xi.max(0.0).sqrt() - c2 * xi
    }

    fn theta(&self) -> &[f64] {
        &self.theta
    }
}

/// Per-agent probes `g_t^i(x_i) = (max_l δ_il)·e_i·x_i − cap` with
/// `e ~ U[0,1]³` drawn per period; indexed `[t][i]`.
pub fn river_probes(game: &RiverPollutionGame, t: usize, seed: u64) -> Vec<Vec<ConstraintFunction>> {
    let mut r = rng::rng(seed);
    (0..t)
        .map(|_| {
            let e: [f64; 3] = std::array::from_fn(|_| r.random_range(0.0..1.0f64).max(1e-9));
            (0..3).map(|i| ConstraintFunction::affine(vec![game.worst_delta(i) * e[i]], game.cap)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> Vec<f64> {
        vec![0.3, 0.1, 0.2, 0.4, 0.5, 0.6, 0.7]
    }

    #[test]
    fn zero_action_gives_zero_payoff() {
        let g = RiverPollutionGame::new(3.0, RiverPollutionGame::DEFAULT_DELTA, 100.0, theta()).unwrap();
        let x = vec![vec![0.0]; 3];
        assert!((0..3).all(|i| g.payoff(&x, i) == 0.0));
    }

    #[test]
    fn linear_case() {
        let g = RiverPollutionGame::new(1.0, RiverPollutionGame::DEFAULT_DELTA, 100.0, vec![0.0; 7]).unwrap();
        assert_eq!(g.payoff(&[vec![2.0], vec![0.0], vec![0.0]], 0), 2.0);
    }

    #[test]
    fn hand_evaluation_at_ones() {
        let g = RiverPollutionGame::new(3.0, RiverPollutionGame::DEFAULT_DELTA, 100.0, theta()).unwrap();
        let x = vec![vec![1.0]; 3];
        // 3 − 0.3·√3 − c1 − c2
        let s3 = 3f64.sqrt();
        let expect = [3.0 - 0.3 * s3 - 0.1 - 0.5, 3.0 - 0.3 * s3 - 0.2 - 0.6, 3.0 - 0.3 * s3 - 0.4 - 0.7];
        for i in 0..3 {
            assert!((g.payoff(&x, i) - expect[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn probes_bound_station_loads() {
        let g = RiverPollutionGame::new(3.0, RiverPollutionGame::DEFAULT_DELTA, 100.0, theta()).unwrap();
        let probes = river_probes(&g, 4, 9);
        assert_eq!(probes, river_probes(&g, 4, 9));
        for p in &probes {
            for (i, f) in p.iter().enumerate() {
                assert_eq!(f.b, 100.0);
                assert!(f.alpha[0] > 0.0 && f.alpha[0] <= g.worst_delta(i));
            }
        }
    }
}
