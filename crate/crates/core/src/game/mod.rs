//! Concave games, Nash equilibria via the Nikaido–Isoda relaxation method,
//! and dataset collection under budget probes.

mod collect;
mod quadratic;
mod river;

pub use collect::collect_dataset;
pub use quadratic::QuadraticGame;
pub use river::{river_probes, RiverPollutionGame};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::BudgetSet;
use crate::optim::{numerical_gradient, projected_ascent, AscentOptions};
use crate::rng;

/// One action vector per agent.
pub type JointAction = Vec<Vec<f64>>;

/// A game with `M` agents, each choosing an action in `R^k_+`.
pub trait Game: Sync {
    fn num_agents(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Payoff of agent `i` at joint action `x`; callers guarantee `x ≥ 0`.
    fn payoff(&self, x: &[Vec<f64>], i: usize) -> f64;
    fn theta(&self) -> &[f64];
}

/// Checked payoff: rejects malformed or negative joint actions.
pub fn payoff(g: &dyn Game, x: &[Vec<f64>], i: usize) -> Result<f64> {
    check_joint(g, x)?;
    if i >= g.num_agents() {
        return Err(Error::Invalid(format!("agent {i} out of range")));
    }
    Ok(g.payoff(x, i))
}

fn check_joint(g: &dyn Game, x: &[Vec<f64>]) -> Result<()> {
    if x.len() != g.num_agents() {
        return Err(Error::Dimension { expected: g.num_agents(), got: x.len() });
    }
    for xi in x {
        if xi.len() != g.action_dim() {
            return Err(Error::Dimension { expected: g.action_dim(), got: xi.len() });
        }
        if let Some((index, &value)) = xi.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeCoordinate { index, value });
        }
    }
    Ok(())
}

/// `Ψ(x, y) = Σ_i [f^i(y_i, x_{−i}) − f^i(x)]`.
pub fn nikaido_isoda(g: &dyn Game, x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let mut z = x.to_vec();
    let mut total = 0.0;
    for i in 0..g.num_agents() {
        z[i] = y[i].clone();
        total += g.payoff(&z, i) - g.payoff(x, i);
        z[i] = x[i].clone();
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelaxationSchedule {
    /// `α_k = 1/(k+1)`
    Harmonic,
    Constant(f64),
}

impl RelaxationSchedule {
    pub fn step(&self, k: usize) -> f64 {
        match *self {
            Self::Harmonic => 1.0 / (k as f64 + 1.0),
            Self::Constant(a) => a,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NashOptions {
    pub schedule: RelaxationSchedule,
    pub tol_ne: f64,
    pub max_iters: usize,
    pub inner: AscentOptions,
    /// Extra random starts per agent in the best-response search.
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for NashOptions {
    fn default() -> Self {
        Self {
            schedule: RelaxationSchedule::Harmonic,
            tol_ne: 1e-5,
            max_iters: 500,
            inner: AscentOptions { max_iters: 300, tol: 1e-12, initial_step: 1.0 },
            random_starts: 2,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestDeviation {
    pub z: JointAction,
    /// False when some agent's ascent hit its iteration cap on every start.
    pub converged: bool,
}

/// `Z(x)`: each agent's best reply to `x_{−i}` over its budget set, by
/// multistart projected gradient ascent (current action, extreme points,
/// centroid and a few seeded random points).
pub fn best_deviation(g: &dyn Game, x: &[Vec<f64>], sets: &[BudgetSet], opts: &NashOptions) -> Result<BestDeviation> {
    check_joint(g, x)?;
    if sets.len() != g.num_agents() {
        return Err(Error::Dimension { expected: g.num_agents(), got: sets.len() });
    }
    let mut z = x.to_vec();
    let mut converged = true;
    for (i, set) in sets.iter().enumerate() {
        if !set.is_bounded() {
            return Err(Error::Invalid(format!("agent {i} has an unbounded feasible set")));
        }
        let objective = |y: &[f64]| {
            let mut w = x.to_vec();
            w[i] = y.to_vec();
            g.payoff(&w, i)
        };
        let grad = |y: &[f64]| numerical_gradient(&objective, y);
        let project = |y: &[f64]| set.project(y);

        let verts = set.vertices();
        let k = set.dim();
        let mut centroid = vec![0.0; k];
        for v in &verts {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi / verts.len() as f64;
            }
        }
        let mut starts = vec![x[i].clone(), centroid];
        starts.extend(verts);
        let mut r = rng::rng(rng::split(opts.seed, i as u64));
        let extent = set.extent();
        for _ in 0..opts.random_starts {
            starts.push(extent.iter().map(|&e| r.random_range(0.0..=1.0) * e).collect());
        }

        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut any_done = false;
        for s in &starts {
            let (y, fy, done) = projected_ascent(&objective, &grad, &project, s, opts.inner);
            any_done |= done;
            if best.as_ref().is_none_or(|b| fy > b.1) {
                best = Some((y, fy));
            }
        }
        let (y, fy) = best.expect("at least one start");
        // Never report a deviation worse than staying put.
        z[i] = if fy >= objective(&x[i]) { y } else { x[i].clone() };
        converged &= any_done;
    }
    Ok(BestDeviation { z, converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NashResult {
    pub x_star: JointAction,
    /// `Ψ(x*, Z(x*))`, the attained unilateral improvement.
    pub ni_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Relaxation iteration `x_{k+1} = (1 − α_k)x_k + α_k Z(x_k)` until the
/// Nikaido–Isoda residual drops to `tol_ne`.
pub fn relaxation_nash(g: &dyn Game, sets: &[BudgetSet], x0: &[Vec<f64>], opts: &NashOptions) -> Result<NashResult> {
    check_joint(g, x0)?;
    for (i, (xi, s)) in x0.iter().zip(sets).enumerate() {
        if !s.contains(xi, crate::TOL_FEAS) {
            return Err(Error::Invalid(format!("starting point infeasible for agent {i}")));
        }
    }
    let mut x = x0.to_vec();
    let mut residual = f64::INFINITY;
    for k in 0..=opts.max_iters {
        let z = best_deviation(g, &x, sets, opts)?.z;
        residual = nikaido_isoda(g, &x, &z);
        if residual <= opts.tol_ne {
            return Ok(NashResult { x_star: x, ni_residual: residual, iterations: k, converged: true });
        }
        if k == opts.max_iters {
            break;
        }
        let a = opts.schedule.step(k);
        for (xi, zi) in x.iter_mut().zip(&z) {
            for (v, w) in xi.iter_mut().zip(zi) {
                *v = ((1.0 - a) * *v + a * w).max(0.0);
            }
        }
    }
    Ok(NashResult { x_star: x, ni_residual: residual, iterations: opts.max_iters, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budgets(m: usize, cap: f64) -> Vec<BudgetSet> {
        vec![BudgetSet { w: vec![1.0], cap }; m]
    }

    #[test]
    fn psi_vanishes_on_diagonal() {
        let g = QuadraticGame::new(vec![1.0, 2.0], vec![vec![0.0, 0.3], vec![-0.2, 0.0]]).unwrap();
        let x = vec![vec![0.4], vec![1.3]];
        assert_eq!(nikaido_isoda(&g, &x, &x), 0.0);
    }

    #[test]
    fn single_agent_psi_is_payoff_difference() {
        let g = QuadraticGame::new(vec![1.0], vec![vec![0.0]]).unwrap();
        let (x, y) = (vec![vec![0.2]], vec![vec![0.9]]);
        let expect = g.payoff(&y, 0) - g.payoff(&x, 0);
        assert_eq!(nikaido_isoda(&g, &x, &y), expect);
    }

    #[test]
    fn one_dimensional_quadratic_argmax() {
        let g = QuadraticGame::new(vec![0.7317], vec![vec![0.0]]).unwrap();
        let bd = best_deviation(&g, &[vec![0.0]], &budgets(1, 5.0), &NashOptions::default()).unwrap();
        assert!((bd.z[0][0] - 0.7317).abs() < 1e-6);
    }

    #[test]
    fn monotone_payoff_hits_budget_boundary() {
        let g = QuadraticGame::new(vec![10.0], vec![vec![0.0]]).unwrap();
        let set = BudgetSet { w: vec![2.0], cap: 3.0 };
        let bd = best_deviation(&g, &[vec![0.1]], std::slice::from_ref(&set), &NashOptions::default()).unwrap();
        assert!((2.0 * bd.z[0][0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_equilibrium_matches_closed_form() {
        let g = QuadraticGame::new(vec![1.0, 2.0], vec![vec![0.0, 0.3], vec![-0.2, 0.0]]).unwrap();
        let ne = g.interior_equilibrium().unwrap();
        let opts = NashOptions { schedule: RelaxationSchedule::Constant(0.5), tol_ne: 1e-12, ..Default::default() };
        let res = relaxation_nash(&g, &budgets(2, 10.0), &[vec![0.0], vec![0.0]], &opts).unwrap();
        assert!(res.converged);
        for i in 0..2 {
            assert!((res.x_star[i][0] - ne[i]).abs() < 1e-4);
        }
    }

    #[test]
    fn start_at_equilibrium_converges_immediately() {
        let g = QuadraticGame::new(vec![1.0, 2.0], vec![vec![0.0, 0.3], vec![-0.2, 0.0]]).unwrap();
        let ne = g.interior_equilibrium().unwrap();
        let x0: JointAction = ne.iter().map(|&v| vec![v]).collect();
        let res = relaxation_nash(&g, &budgets(2, 10.0), &x0, &NashOptions::default()).unwrap();
        assert!(res.converged && res.iterations <= 1);
    }

    #[test]
    fn infeasible_start_rejected() {
        let g = QuadraticGame::new(vec![1.0], vec![vec![0.0]]).unwrap();
        assert!(relaxation_nash(&g, &budgets(1, 1.0), &[vec![2.0]], &NashOptions::default()).is_err());
        assert!(payoff(&g, &[vec![-1.0]], 0).is_err());
    }
}
