use rand::Rng as _;
use rayon::prelude::*;

use super::{relaxation_nash, Game, NashOptions};
use crate::error::{Error, Result};
use crate::model::{ConstraintFunction, EmpiricalStrategy, RpDataset};
use crate::rng;

/// Computes an equilibrium per period under `probes[t][i]` and records `n`
/// samples per agent: the equilibrium action plus uniform jitter in
/// `[−jitter, jitter]^k`, projected back into the budget set.
pub fn collect_dataset(
    g: &dyn Game,
    probes: &[Vec<ConstraintFunction>],
    n: usize,
    jitter: f64,
    seed: u64,
    opts: &NashOptions,
) -> Result<RpDataset> {
    let m = g.num_agents();
    let k = g.action_dim();
    if probes.is_empty() || probes.iter().any(|p| p.len() != m) {
        return Err(Error::Invalid(format!("probes must cover T×{m}")));
    }
    if n == 0 || !(jitter >= 0.0) {
        return Err(Error::Invalid("need N ≥ 1 and jitter ≥ 0".into()));
    }
    let periods: Vec<Result<Vec<EmpiricalStrategy>>> = probes
        .par_iter()
        .enumerate()
        .map(|(t, fs)| {
            let sets: Vec<_> = fs.iter().map(|f| f.budget_set()).collect();
            let x0 = vec![vec![0.0; k]; m];
            let res = relaxation_nash(g, &sets, &x0, opts)?;
            if !res.converged {
                return Err(Error::Equilibrium(format!(
                    "period {t}: residual {:.3e} after {} iterations",
                    res.ni_residual, res.iterations
                )));
            }
            let mut r = rng::rng(rng::split(seed, t as u64));
            let strategies = (0..m)
                .map(|i| {
                    let x = &res.x_star[i];
                    let samples = (0..n)
                        .map(|_| {
                            if jitter == 0.0 {
                                sets[i].project(x)
                            } else {
                                let y: Vec<f64> = x.iter().map(|v| v + r.random_range(-jitter..=jitter)).collect();
                                sets[i].project(&y)
                            }
                        })
                        .collect();
                    EmpiricalStrategy { samples }
                })
                .collect();
            Ok(strategies)
        })
        .collect();
    let strategies = periods.into_iter().collect::<Result<Vec<_>>>()?;
    RpDataset::new(probes.to_vec(), strategies)
}
