//! Synthetic datasets with known ground truth, used by tests and the CLI.

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::model::{ConstraintFunction, EmpiricalStrategy, GbarTable, RpDataset};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub t: usize,
    pub m: usize,
    pub k: usize,
    /// Samples per strategy. With `n > 1` samples come in symmetric pairs
    /// along the budget line, so the sample mean is the optimum.
    pub n: usize,
    pub spread: f64,
}

impl Shape {
    pub fn pure(t: usize, m: usize, k: usize) -> Self {
        Self { t, m, k, n: 1, spread: 0.0 }
    }

    fn check(&self) -> Result<()> {
        if self.t == 0 || self.m == 0 || self.k == 0 || self.n == 0 || !(self.spread >= 0.0) {
            return invalid("shape needs T, M, k, N ≥ 1 and spread ≥ 0");
        }
        Ok(())
    }
}

/// Cobb-Douglas weights `w ≥ 0.1/k` summing to one.
fn cd_weights(r: &mut rng::Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// Samples around `x` on the hyperplane `⟨α, y⟩ = ⟨α, x⟩`, kept nonnegative.
fn spread_samples(r: &mut rng::Rng, x: &[f64], alpha: &[f64], n: usize, spread: f64) -> Vec<Vec<f64>> {
    if n == 1 || spread == 0.0 || x.len() < 2 {
        return vec![x.to_vec(); n];
    }
    let mut out = Vec::with_capacity(n);
    if n % 2 == 1 {
        out.push(x.to_vec());
    }
    while out.len() < n {
        // Random direction in the hyperplane: trade good a for good b.
        let a = r.random_range(0..x.len());
        let mut b = r.random_range(0..x.len() - 1);
        if b >= a {
            b += 1;
        }
        let mut d = vec![0.0; x.len()];
        d[a] = alpha[b];
        d[b] = -alpha[a];
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lim = (x[a] / d[a].abs().max(1e-300)).min(x[b] / d[b].abs().max(1e-300)) * norm;
        let tau = r.random_range(0.0..=1.0) * spread.min(lim);
        let plus: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| (xi + tau * di / norm).max(0.0)).collect();
        let minus: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| (xi - tau * di / norm).max(0.0)).collect();
        out.push(plus);
        out.push(minus);
    }
    out
}

/// Socially optimal play for separable Cobb-Douglas utilities on random
/// binding affine budgets `⟨α, x⟩ ≤ b`, `α ~ U(0.5, 1.5)^k`, `b ~ U(0.8, 1.2)`.
pub fn consistent_dataset(shape: Shape, seed: u64) -> Result<RpDataset> {
    shape.check()?;
    let mut r = rng::rng(seed);
    let weights: Vec<Vec<f64>> = (0..shape.m).map(|_| cd_weights(&mut r, shape.k)).collect();
    let mut constraints = Vec::new();
    let mut strategies = Vec::new();
    for _ in 0..shape.t {
        let mut crow = Vec::new();
        let mut srow = Vec::new();
        for w in &weights {
            let alpha: Vec<f64> = (0..shape.k).map(|_| r.random_range(0.5..1.5)).collect();
            let b = r.random_range(0.8..1.2);
            let x: Vec<f64> = w.iter().zip(&alpha).map(|(wj, aj)| wj * b / aj).collect();
            let g = ConstraintFunction::affine(alpha.clone(), b);
            srow.push(EmpiricalStrategy::new(spread_samples(&mut r, &x, &alpha, shape.n, shape.spread))?);
            crow.push(g);
        }
        constraints.push(crow);
        strategies.push(srow);
    }
    RpDataset::new(constraints, strategies)
}

/// Replaces agent `0`'s first two periods of a consistent dataset with a
/// budget reversal: each bundle is strictly affordable (by at least
/// `margin ≥ 0.05`) at the other period's budget. Needs `T ≥ 2` and `k ≥ 2`.
pub fn violation_dataset(shape: Shape, seed: u64) -> Result<RpDataset> {
    if shape.t < 2 || shape.k < 2 {
        return invalid("a budget reversal needs T ≥ 2 and k ≥ 2");
    }
    let base = consistent_dataset(shape, seed)?;
    let mut r = rng::rng(rng::split(seed, 1));
    let hi = r.random_range(0.6..1.2);
    let lo = hi - r.random_range(0.3..0.5);
    let h = r.random_range(0.1..0.6);
    let rest: Vec<f64> = (2..shape.k).map(|_| r.random_range(0.1..0.5)).collect();
    let rest_alpha: Vec<f64> = (2..shape.k).map(|_| r.random_range(0.5..1.5)).collect();
    let build = |first: [f64; 2], alpha: [f64; 2]| {
        let x: Vec<f64> = first.iter().chain(&rest).cloned().collect();
        let a: Vec<f64> = alpha.iter().chain(&rest_alpha).cloned().collect();
        (x, a)
    };
    let (x0, a0) = build([hi, lo], [1.0, h]);
    let (x1, a1) = build([lo, hi], [h, 1.0]);
    let mut constraints = base.constraints().to_vec();
    let mut strategies = base.strategies().to_vec();
    for (t, (x, a)) in [(x0, a0), (x1, a1)].into_iter().enumerate() {
        let b: f64 = x.iter().zip(&a).map(|(p, q)| p * q).sum();
        let mut sr = rng::rng(rng::split_path(seed, &[2, t as u64]));
        strategies[t][0] = EmpiricalStrategy::new(spread_samples(&mut sr, &x, &a, shape.n, shape.spread.min(0.01)))?;
        constraints[t][0] = ConstraintFunction::affine(a, b);
    }
    RpDataset::new(constraints, strategies)
}

/// Random bundles on random binding affine budgets. A minority of the
/// generated datasets (about one in five for small `T`) violate consistency.
pub fn random_dataset(shape: Shape, seed: u64) -> Result<RpDataset> {
    shape.check()?;
    let mut r = rng::rng(seed);
    let mut constraints = Vec::new();
    let mut strategies = Vec::new();
    for _ in 0..shape.t {
        let mut crow = Vec::new();
        let mut srow = Vec::new();
        for _ in 0..shape.m {
            let alpha: Vec<f64> = (0..shape.k).map(|_| r.random_range(0.2..1.8)).collect();
            let b = r.random_range(0.8..1.2);
            let w = cd_weights(&mut r, shape.k);
            let x: Vec<f64> = w.iter().zip(&alpha).map(|(wj, aj)| wj * b / aj).collect();
            srow.push(EmpiricalStrategy::new(spread_samples(&mut r, &x, &alpha, shape.n, shape.spread))?);
            crow.push(ConstraintFunction::affine(alpha, b));
        }
        constraints.push(crow);
        strategies.push(srow);
    }
    RpDataset::new(constraints, strategies)
}

/// Affine budgets paired with strategies uniform on axis-aligned boxes; the
/// exact `ḡ` table is available in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxPlay {
    pub constraints: Vec<Vec<ConstraintFunction>>,
    /// `(lower, upper)` corner of each strategy's box.
    pub boxes: Vec<Vec<(Vec<f64>, Vec<f64>)>>,
}

impl BoxPlay {
    /// Two periods, one agent, two goods: box centres `(1, 0.2)` and
    /// `(0.2, 1)` of half-width `0.15` under crossing prices, with budgets
    /// just wide enough to contain each box. The exact gap is `0.625`.
    pub fn reversal() -> Self {
        let w = 0.15;
        let centres = [[1.0, 0.2], [0.2, 1.0]];
        let prices = [[1.0, 0.5], [0.5, 1.0]];
        let mut constraints = Vec::new();
        let mut boxes = Vec::new();
        for (c, a) in centres.iter().zip(&prices) {
            let b = a[0] * c[0] + a[1] * c[1] + w * (a[0] + a[1]);
            constraints.push(vec![ConstraintFunction::affine(a.to_vec(), b)]);
            boxes.push(vec![(vec![c[0] - w, c[1] - w], vec![c[0] + w, c[1] + w])]);
        }
        Self { constraints, boxes }
    }

    /// `ḡ[t][s][i] = g_t^i(centre of box (s, i))`, exact for affine `g`.
    pub fn exact_gbar(&self) -> GbarTable {
        let t = self.constraints.len();
        let m = self.constraints[0].len();
        GbarTable::from_fn(t, m, |a, s, i| {
            let (lo, hi) = &self.boxes[s][i];
            let mid: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
            self.constraints[a][i].value(&mid)
        })
        .expect("finite box play")
    }

    /// `n` uniform draws per strategy.
    pub fn sample(&self, n: usize, seed: u64) -> Result<RpDataset> {
        let mut strategies = Vec::new();
        for (s, row) in self.boxes.iter().enumerate() {
            let mut srow = Vec::new();
            for (i, (lo, hi)) in row.iter().enumerate() {
                let mut r = rng::rng(rng::split_path(seed, &[s as u64, i as u64]));
                let samples =
                    (0..n).map(|_| lo.iter().zip(hi).map(|(l, h)| r.random_range(*l..=*h)).collect()).collect();
                srow.push(EmpiricalStrategy::new(samples)?);
            }
            strategies.push(srow);
        }
        RpDataset::new(self.constraints.clone(), strategies)
    }
}
