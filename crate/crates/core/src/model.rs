//! Shared domain types and probe generation.
//!
//! A budget ("probe") function `g` maps an agent's action `x ∈ R^k_+` to a
//! scalar; the agent's feasible set in period `t` is `{x ≥ 0 : g(x) ≤ 0}`.
//! Two base families are supported, both concave and increasing when the
//! coefficient vector is nonnegative:
//!
//! * affine: `⟨α, z⟩ − b`
//! * log-sigmoid: `log(2σ(⟨α, z⟩ − b))`
//!
//! Every function carries a shift `(a_t, β)` and is evaluated at
//! `z = x − a_t·β`. A zero shift gives the unshifted base.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Affine,
    LogSigmoid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFunction {
    pub kind: ConstraintKind,
    pub alpha: Vec<f64>,
    pub b: f64,
    #[serde(default)]
    pub a_t: f64,
    #[serde(default)]
    pub beta: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(2σ(s))` computed without overflow.
fn log_two_sigmoid(s: f64) -> f64 {
    // log σ(s) = −softplus(−s)
    let softplus = if s > 0.0 { (-s).exp().ln_1p() } else { -s + s.exp().ln_1p() };
    std::f64::consts::LN_2 - softplus
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

impl ConstraintFunction {
    pub fn affine(alpha: Vec<f64>, b: f64) -> Self {
        let k = alpha.len();
        Self { kind: ConstraintKind::Affine, alpha, b, a_t: 0.0, beta: vec![0.0; k] }
    }

    pub fn log_sigmoid(alpha: Vec<f64>, b: f64) -> Self {
        let k = alpha.len();
        Self { kind: ConstraintKind::LogSigmoid, alpha, b, a_t: 0.0, beta: vec![0.0; k] }
    }

    /// The same base shifted by `a·β`.
    pub fn shifted(&self, a: f64, beta: &[f64]) -> Self {
        Self { a_t: a, beta: beta.to_vec(), ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return invalid("constraint has empty coefficient vector");
        }
        if self.beta.len() != self.alpha.len() {
            return Err(Error::Dimension { expected: self.alpha.len(), got: self.beta.len() });
        }
        let finite = self.alpha.iter().chain(&self.beta).chain([&self.b, &self.a_t]);
        if finite.into_iter().any(|v| !v.is_finite()) {
            return invalid("constraint parameters must be finite");
        }
        if self.alpha.iter().any(|&a| a < 0.0) {
            return invalid("constraint coefficients must be nonnegative");
        }
        Ok(())
    }

    /// Index of the base function, `⟨α, x − a_t β⟩ − b`.
    fn index(&self, x: &[f64]) -> f64 {
        let shift: f64 = if self.a_t == 0.0 { 0.0 } else { self.a_t * dot(&self.alpha, &self.beta) };
        dot(&self.alpha, x) - shift - self.b
    }

    /// Evaluates `g(x)` without domain checks. Dimensions must agree.
    pub fn value(&self, x: &[f64]) -> f64 {
        let s = self.index(x);
        match self.kind {
            ConstraintKind::Affine => s,
            ConstraintKind::LogSigmoid => log_two_sigmoid(s),
        }
    }

    /// Gradient of `g` at `x`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let scale = match self.kind {
            ConstraintKind::Affine => 1.0,
            ConstraintKind::LogSigmoid => sigmoid(-self.index(x)),
        };
        self.alpha.iter().map(|a| a * scale).collect()
    }

    /// The feasible set `{x ≥ 0 : g(x) ≤ 0}`. Both families reduce to the
    /// half-space `⟨α, x⟩ ≤ b + a_t⟨α, β⟩`.
    pub fn budget_set(&self) -> BudgetSet {
        let shift = self.a_t * dot(&self.alpha, &self.beta);
        BudgetSet { w: self.alpha.clone(), cap: self.b + shift }
    }
}

/// Checked evaluation on the nonnegative orthant.
pub fn eval_constraint(f: &ConstraintFunction, x: &[f64]) -> Result<f64> {
    if x.len() != f.dim() {
        return Err(Error::Dimension { expected: f.dim(), got: x.len() });
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeCoordinate { index, value });
    }
    Ok(f.value(x))
}

/// Mean of `g` over the strategy's samples.
pub fn expected_constraint(f: &ConstraintFunction, s: &EmpiricalStrategy) -> Result<f64> {
    if s.samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut acc = 0.0;
    for x in &s.samples {
        acc += eval_constraint(f, x)?;
    }
    Ok(acc / s.samples.len() as f64)
}

/// `{x ∈ R^k_+ : ⟨w, x⟩ ≤ cap}` with `w ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetSet {
    pub w: Vec<f64>,
    pub cap: f64,
}

impl BudgetSet {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter().all(|&v| v >= -tol) && dot(&self.w, x) <= self.cap + tol
    }

    pub fn is_bounded(&self) -> bool {
        self.w.iter().all(|&w| w > 0.0)
    }

    /// Euclidean projection: `y(τ) = max(z − τw, 0)` with the smallest
    /// `τ ≥ 0` satisfying the budget.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let at = |tau: f64| -> Vec<f64> { z.iter().zip(&self.w).map(|(zi, wi)| (zi - tau * wi).max(0.0)).collect() };
        let y0 = at(0.0);
        if self.cap <= 0.0 {
            return vec![0.0; z.len()];
        }
        if dot(&self.w, &y0) <= self.cap {
            return y0;
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while dot(&self.w, &at(hi)) > self.cap {
            hi *= 2.0;
            if hi > 1e300 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dot(&self.w, &at(mid)) > self.cap {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi.max(1.0) {
                break;
            }
        }
        at(hi)
    }

    /// Extreme points: the origin and the axis intercepts. Requires a bounded set.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut out = vec![vec![0.0; k]];
        if self.cap > 0.0 {
            for j in 0..k {
                if self.w[j] > 0.0 {
                    let mut v = vec![0.0; k];
                    v[j] = self.cap / self.w[j];
                    out.push(v);
                }
            }
        }
        out
    }

    /// Coordinate-wise upper bounds of the set.
    pub fn extent(&self) -> Vec<f64> {
        self.w.iter().map(|&w| if w > 0.0 { self.cap.max(0.0) / w } else { f64::INFINITY }).collect()
    }
}

/// `N` samples approximating one agent's mixed strategy; uniform weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalStrategy {
    pub samples: Vec<Vec<f64>>,
}

impl EmpiricalStrategy {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { samples };
        s.validate()?;
        Ok(s)
    }

    pub fn pure(x: Vec<f64>) -> Self {
        Self { samples: vec![x] }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.samples.first().ok_or(Error::EmptySamples)?;
        let k = first.len();
        for x in &self.samples {
            if x.len() != k {
                return Err(Error::Dimension { expected: k, got: x.len() });
            }
            if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::NegativeCoordinate { index, value });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> Vec<f64> {
        let k = self.samples[0].len();
        let mut m = vec![0.0; k];
        for x in &self.samples {
            for (a, b) in m.iter_mut().zip(x) {
                *a += b;
            }
        }
        let n = self.samples.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}

/// Cross-evaluation table `gbar[t][s][i] = g_t^i(μ̂_s^i)` for `T` periods and `M` agents.
#[derive(Clone, Debug, PartialEq)]
pub struct GbarTable {
    t: usize,
    m: usize,
    values: Vec<f64>,
}

impl GbarTable {
    pub fn new(t: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if t == 0 || m == 0 {
            return invalid("table needs T ≥ 1 and M ≥ 1");
        }
        if values.len() != t * t * m {
            return Err(Error::Dimension { expected: t * t * m, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("table entries must be finite");
        }
        Ok(Self { t, m, values })
    }

    pub fn from_fn(t: usize, m: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(t * t * m);
        for a in 0..t {
            for b in 0..t {
                for i in 0..m {
                    values.push(f(a, b, i));
                }
            }
        }
        Self::new(t, m, values)
    }

    pub fn periods(&self) -> usize {
        self.t
    }

    pub fn agents(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, t: usize, s: usize, i: usize) -> f64 {
        self.values[(t * self.t + s) * self.m + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The single-agent slice as a `T×T` row-major matrix.
    pub fn agent(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.t * self.t);
        for a in 0..self.t {
            for b in 0..self.t {
                out.push(self.get(a, b, i));
            }
        }
        out
    }

    /// Restrict to one agent.
    pub fn single_agent(&self, i: usize) -> GbarTable {
        GbarTable { t: self.t, m: 1, values: self.agent(i) }
    }

    /// `max(0, max −gbar)`, the relaxation at which `u ≡ 0` is a certificate.
    pub fn r_upper(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, &v| acc.max(-v))
    }

    pub fn agent_r_upper(&self, i: usize) -> f64 {
        self.agent(i).iter().fold(0.0f64, |acc, &v| acc.max(-v))
    }
}

/// Anything that exposes a cross-evaluation table.
pub trait AsGbar {
    fn gbar(&self) -> &GbarTable;
}

impl AsGbar for GbarTable {
    fn gbar(&self) -> &GbarTable {
        self
    }
}

/// `D = {g_t^i, μ̂_t^i}` over `T` periods and `M` agents with action dimension `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RpDataset {
    k: usize,
    constraints: Vec<Vec<ConstraintFunction>>,
    strategies: Vec<Vec<EmpiricalStrategy>>,
    gbar: GbarTable,
}

impl AsGbar for RpDataset {
    fn gbar(&self) -> &GbarTable {
        &self.gbar
    }
}

impl RpDataset {
    /// Builds the dataset, checking shapes and that observed play respects its budget.
    pub fn new(constraints: Vec<Vec<ConstraintFunction>>, strategies: Vec<Vec<EmpiricalStrategy>>) -> Result<Self> {
        Self::with_tolerance(constraints, strategies, crate::TOL_FEAS)
    }

    pub fn with_tolerance(
        constraints: Vec<Vec<ConstraintFunction>>,
        strategies: Vec<Vec<EmpiricalStrategy>>,
        tol_feas: f64,
    ) -> Result<Self> {
        let t = constraints.len();
        if t == 0 || strategies.len() != t {
            return invalid("constraints and strategies need the same nonzero number of periods");
        }
        let m = constraints[0].len();
        if m == 0 {
            return invalid("dataset needs at least one agent");
        }
        let k = constraints[0][0].dim();
        for (tt, (cs, ss)) in constraints.iter().zip(&strategies).enumerate() {
            if cs.len() != m || ss.len() != m {
                return invalid(format!("period {tt} does not have {m} agents"));
            }
            for (c, s) in cs.iter().zip(ss) {
                c.validate()?;
                s.validate()?;
                if c.dim() != k {
                    return Err(Error::Dimension { expected: k, got: c.dim() });
                }
                if s.samples[0].len() != k {
                    return Err(Error::Dimension { expected: k, got: s.samples[0].len() });
                }
            }
        }
        for tt in 0..t {
            for i in 0..m {
                for x in &strategies[tt][i].samples {
                    let v = constraints[tt][i].value(x);
                    if v > tol_feas {
                        return Err(Error::InfeasibleSample { t: tt, i, value: v });
                    }
                }
            }
        }
        let gbar = GbarTable::from_fn(t, m, |a, b, i| {
            let f = &constraints[a][i];
            let s = &strategies[b][i];
            s.samples.iter().map(|x| f.value(x)).sum::<f64>() / s.samples.len() as f64
        })?;
        Ok(Self { k, constraints, strategies, gbar })
    }

    pub fn periods(&self) -> usize {
        self.gbar.periods()
    }

    pub fn agents(&self) -> usize {
        self.gbar.agents()
    }

    pub fn action_dim(&self) -> usize {
        self.k
    }

    pub fn constraint(&self, t: usize, i: usize) -> &ConstraintFunction {
        &self.constraints[t][i]
    }

    pub fn strategy(&self, t: usize, i: usize) -> &EmpiricalStrategy {
        &self.strategies[t][i]
    }

    pub fn constraints(&self) -> &[Vec<ConstraintFunction>] {
        &self.constraints
    }

    pub fn strategies(&self) -> &[Vec<EmpiricalStrategy>] {
        &self.strategies
    }

    /// Common sample count, if every strategy has the same number of samples.
    pub fn common_sample_count(&self) -> Option<usize> {
        let n = self.strategies[0][0].len();
        self.strategies.iter().flatten().all(|s| s.len() == n).then_some(n)
    }
}

/// Afriat numbers `u_t^i`, multipliers `λ_t^i ≥ alpha` and the relaxation `r` they certify.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoCertificate {
    /// `u[t][i]`
    pub u: Vec<Vec<f64>>,
    /// `lambda[t][i]`
    pub lambda: Vec<Vec<f64>>,
    pub r: f64,
    pub alpha: f64,
}

impl ParetoCertificate {
    /// Largest violation of `u_s − u_t − λ_t(gbar[t][s] + r) ≤ 0` (negative when strict).
    pub fn max_residual<D: AsGbar + ?Sized>(&self, d: &D) -> f64 {
        let g = d.gbar();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..g.agents() {
            for t in 0..g.periods() {
                for s in 0..g.periods() {
                    let lhs = self.u[s][i] - self.u[t][i] - self.lambda[t][i] * (g.get(t, s, i) + self.r);
                    worst = worst.max(lhs);
                }
            }
        }
        worst
    }

    /// Checks shapes, the multiplier bound and every inequality to `tol_lp`
    /// (relative to the magnitude of its terms).
    pub fn validate<D: AsGbar + ?Sized>(&self, d: &D, tol_lp: f64) -> Result<()> {
        let g = d.gbar();
        let (t, m) = (g.periods(), g.agents());
        if self.u.len() != t || self.lambda.len() != t || self.u.iter().chain(&self.lambda).any(|row| row.len() != m) {
            return invalid("certificate shape does not match dataset");
        }
        if !(self.alpha > 0.0) {
            return invalid("certificate alpha must be positive");
        }
        for row in &self.lambda {
            if let Some(l) = row.iter().find(|&&l| l < self.alpha * (1.0 - 1e-12)) {
                return invalid(format!("multiplier {l} below alpha {}", self.alpha));
            }
        }
        for i in 0..m {
            for a in 0..t {
                for b in 0..t {
                    let lam = self.lambda[a][i];
                    let lhs = self.u[b][i] - self.u[a][i] - lam * g.get(a, b, i);
                    let scale =
                        1.0 + lam.abs() * (1.0 + g.get(a, b, i).abs()) + self.u[a][i].abs() + self.u[b][i].abs();
                    if lhs > lam * self.r + tol_lp * scale {
                        return invalid(format!("inequality (t={a}, s={b}, i={i}) violated by {}", lhs - lam * self.r));
                    }
                }
            }
        }
        Ok(())
    }

    /// Multiply one agent's `(u, λ)` by `c > 0`.
    pub fn rescale_agent(&mut self, i: usize, c: f64) {
        for row in self.u.iter_mut() {
            row[i] *= c;
        }
        for row in self.lambda.iter_mut() {
            row[i] *= c;
        }
    }
}

/// Recipe for generating shifted probes `g_t = g(· − a_t β)` with `a_t ~ U(χ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub base: ConstraintFunction,
    pub beta: Vec<f64>,
    pub chi: (f64, f64),
    pub seed: u64,
}

pub fn generate_probes(spec: &ProbeSpec, t: usize) -> Result<Vec<ConstraintFunction>> {
    if t == 0 {
        return invalid("need at least one period");
    }
    let (lo, hi) = spec.chi;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return invalid(format!("invalid chi interval [{lo}, {hi}]"));
    }
    if spec.beta.len() != spec.base.dim() {
        return Err(Error::Dimension { expected: spec.base.dim(), got: spec.beta.len() });
    }
    if spec.beta.iter().all(|&b| b == 0.0) {
        return invalid("beta must be nonzero");
    }
    let mut r = rng::rng(spec.seed);
    Ok((0..t)
        .map(|_| {
            let a = r.random_range(lo..hi);
            spec.base.shifted(a, &spec.beta)
        })
        .collect())
}

/// Numerical monotonicity check: raising one coordinate never lowers `f`.
pub fn check_monotone(f: &dyn Fn(&[f64]) -> f64, dim: usize, trials: usize, seed: u64) -> bool {
    let mut r = rng::rng(seed);
    for _ in 0..trials {
        let x: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..5.0)).collect();
        let j = r.random_range(0..dim);
        let mut y = x.clone();
        y[j] += r.random_range(1e-3..2.0);
        if f(&y) < f(&x) - 1e-12 * (1.0 + f(&x).abs()) {
            return false;
        }
    }
    true
}

/// Numerical concavity check via the midpoint inequality on random segments.
pub fn check_concave(f: &dyn Fn(&[f64]) -> f64, dim: usize, trials: usize, seed: u64) -> bool {
    let mut r = rng::rng(seed);
    for _ in 0..trials {
        let x: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..5.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..5.0)).collect();
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let chord = 0.5 * (f(&x) + f(&y));
        if f(&mid) < chord - 1e-10 * (1.0 + chord.abs()) {
            return false;
        }
    }
    true
}

/// Finds a zero of `φ(τ) = f(p + τd − aβ)` by bracketing and bisection.
fn level_point(f: &dyn Fn(&[f64]) -> f64, p: &[f64], d: &[f64], shift: &[f64]) -> Option<Vec<f64>> {
    let at = |tau: f64| -> Vec<f64> { p.iter().zip(d).zip(shift).map(|((p, d), s)| p + tau * d - s).collect() };
    let phi = |tau: f64| f(&at(tau));
    let f0 = phi(0.0);
    let (mut lo, mut hi) = if f0 > 0.0 { (-1.0, 0.0) } else { (0.0, 1.0) };
    for _ in 0..80 {
        if phi(lo) <= 0.0 && phi(hi) >= 0.0 {
            break;
        }
        if f0 > 0.0 {
            lo *= 2.0;
        } else {
            hi *= 2.0;
        }
    }
    if !(phi(lo) <= 0.0 && phi(hi) >= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = at(0.5 * (lo + hi));
    // Undo the shift: x is a zero of f, so x + aβ is a zero of f(· − aβ).
    Some(x.iter().zip(shift).map(|(x, s)| x + s).collect())
}

/// Samples shifts `a ∈ [0, 1]` and pairs of zero-level-set points of
/// `f(· − aβ)`, and checks that `f` takes equal values on each pair.
pub fn check_shift_invariance(f: &dyn Fn(&[f64]) -> f64, dim: usize, beta: &[f64], trials: usize, seed: u64) -> bool {
    const TOL: f64 = 1e-6;
    let mut r = rng::rng(seed);
    let draw_point = |r: &mut rng::Rng, shift: &[f64]| -> Option<Vec<f64>> {
        let p: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let d: Vec<f64> = (0..dim).map(|_| r.random_range(0.1..1.0)).collect();
        level_point(f, &p, &d, shift)
    };
    for _ in 0..trials {
        let a = r.random_range(0.0..1.0);
        let shift: Vec<f64> = beta.iter().map(|b| a * b).collect();
        let (Some(x), Some(y)) = (draw_point(&mut r, &shift), draw_point(&mut r, &shift)) else {
            continue;
        };
        if (f(&x) - f(&y)).abs() > TOL * (1.0 + f(&x).abs()) {
            return false;
        }
    }
    true
}

/// Shift-invariance check for a built-in family.
pub fn check_constraint_shift_invariance(base: &ConstraintFunction, beta: &[f64], trials: usize, seed: u64) -> bool {
    let f = |x: &[f64]| base.value(x);
    check_shift_invariance(&f, base.dim(), beta, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_examples() {
        let f = ConstraintFunction::affine(vec![1.0, 1.0], 1.0);
        assert_eq!(eval_constraint(&f, &[0.5, 0.5]).unwrap(), 0.0);
        let f = ConstraintFunction::affine(vec![2.0, 3.0], 1.0);
        assert_eq!(eval_constraint(&f, &[1.0, 1.0]).unwrap(), 4.0);
    }

    #[test]
    fn log_sigmoid_at_origin() {
        let f = ConstraintFunction::log_sigmoid(vec![1.0, 1.0, 1.0], 0.0);
        assert!(eval_constraint(&f, &[0.0; 3]).unwrap().abs() < 1e-15);
        assert!((f.value(&[50.0, 0.0, 0.0]) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(f.value(&[-800.0, 0.0, 0.0]).is_finite());
    }

    #[test]
    fn domain_errors() {
        let f = ConstraintFunction::affine(vec![1.0, 1.0], 1.0);
        assert!(matches!(eval_constraint(&f, &[1.0]), Err(Error::Dimension { .. })));
        assert!(matches!(eval_constraint(&f, &[1.0, -0.1]), Err(Error::NegativeCoordinate { .. })));
    }

    #[test]
    fn shift_substitution() {
        let base = ConstraintFunction::affine(vec![2.0, 3.0], 1.0);
        let g = base.shifted(0.5, &[1.0, 0.0]);
        let x = [1.5, 0.7];
        let expect = 2.0 * (1.5 - 0.5) + 3.0 * 0.7 - 1.0;
        assert!((g.value(&x) - expect).abs() < 1e-15);
        assert_eq!(base.shifted(0.0, &[1.0, 0.0]).value(&x), base.value(&x));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let f = ConstraintFunction::log_sigmoid(vec![0.5, 1.5], 0.2).shifted(0.3, &[1.0, 1.0]);
        let x = [0.7, 0.4];
        let g = f.gradient(&x);
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += 1e-6;
            xm[j] -= 1e-6;
            let fd = (f.value(&xp) - f.value(&xm)) / 2e-6;
            assert!((fd - g[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn expected_constraint_mean() {
        let f = ConstraintFunction::affine(vec![1.0], 1.0);
        let s = EmpiricalStrategy::new(vec![vec![0.8], vec![0.6]]).unwrap();
        assert!((expected_constraint(&f, &s).unwrap() + 0.3).abs() < 1e-15);
        let p = EmpiricalStrategy::pure(vec![0.25]);
        assert_eq!(expected_constraint(&f, &p).unwrap(), f.value(&[0.25]));
        assert!(matches!(expected_constraint(&f, &EmpiricalStrategy { samples: vec![] }), Err(Error::EmptySamples)));
    }

    #[test]
    fn projection_lands_in_set() {
        let b = BudgetSet { w: vec![1.0, 2.0], cap: 1.0 };
        let y = b.project(&[3.0, 3.0]);
        assert!(b.contains(&y, 1e-12));
        assert!((y[0] + 2.0 * y[1] - 1.0).abs() < 1e-9);
        assert_eq!(b.project(&[0.2, 0.1]), vec![0.2, 0.1]);
        assert_eq!(b.project(&[-1.0, 0.1]), vec![0.0, 0.1]);
    }

    #[test]
    fn probes_are_deterministic_and_validated() {
        let spec = ProbeSpec {
            base: ConstraintFunction::affine(vec![1.0, 2.0], 1.0),
            beta: vec![1.0, 0.0],
            chi: (0.0, 1.0),
            seed: 11,
        };
        let a = generate_probes(&spec, 5).unwrap();
        let b = generate_probes(&spec, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|g| (0.0..1.0).contains(&g.a_t)));
        let bad = ProbeSpec { chi: (1.0, 1.0), ..spec.clone() };
        assert!(generate_probes(&bad, 2).is_err());
        assert!(generate_probes(&spec, 0).is_err());
        let zero = ProbeSpec { beta: vec![0.0, 0.0], ..spec };
        assert!(generate_probes(&zero, 2).is_err());
    }

    #[test]
    fn validators_accept_families_and_reject_bad_functions() {
        let families = [
            ConstraintFunction::affine(vec![1.0, 0.5], 1.0),
            ConstraintFunction::log_sigmoid(vec![1.0, 1.0], 0.0),
            ConstraintFunction::log_sigmoid(vec![1.0, 1.0], 0.0).shifted(0.4, &[1.0, 1.0]),
        ];
        for f in &families {
            let h = |x: &[f64]| f.value(x);
            assert!(check_monotone(&h, 2, 500, 1));
            assert!(check_concave(&h, 2, 500, 2));
        }
        let convex = |x: &[f64]| x[0] * x[0] + x[1] * x[1] - 1.0;
        assert!(!check_concave(&convex, 2, 500, 3));
        let decreasing = |x: &[f64]| 1.0 - x[0] - x[1];
        assert!(!check_monotone(&decreasing, 2, 500, 4));
    }

    #[test]
    fn shift_invariance_examples() {
        let aff = ConstraintFunction::affine(vec![0.7, 1.3], 1.0);
        assert!(check_constraint_shift_invariance(&aff, &[0.3, -1.2], 200, 5));
        let ls = ConstraintFunction::log_sigmoid(vec![1.0, 1.0], 0.0);
        assert!(check_constraint_shift_invariance(&ls, &[0.5, 0.5], 200, 6));
        let quad = |x: &[f64]| x[0] * x[0] + x[1] - 1.0;
        assert!(!check_shift_invariance(&quad, 2, &[1.0, 0.0], 200, 7));
    }

    #[test]
    fn dataset_rejects_infeasible_samples() {
        let c = vec![vec![ConstraintFunction::affine(vec![1.0], 1.0)]];
        let s = vec![vec![EmpiricalStrategy::pure(vec![2.0])]];
        assert!(matches!(RpDataset::new(c, s), Err(Error::InfeasibleSample { .. })));
    }

    #[test]
    fn certificate_rescaling_preserves_validity() {
        let c = vec![
            vec![ConstraintFunction::affine(vec![1.0, 2.0], 1.0)],
            vec![ConstraintFunction::affine(vec![2.0, 1.0], 1.0)],
        ];
        let s = vec![vec![EmpiricalStrategy::pure(vec![1.0, 0.0])], vec![EmpiricalStrategy::pure(vec![0.0, 1.0])]];
        let d = RpDataset::new(c, s).unwrap();
        let mut cert = ParetoCertificate {
            u: vec![vec![0.0], vec![0.0]],
            lambda: vec![vec![1.0], vec![1.0]],
            r: d.gbar().r_upper(),
            alpha: 1e-3,
        };
        cert.validate(&d, 1e-9).unwrap();
        cert.rescale_agent(0, 7.5);
        cert.validate(&d, 1e-9).unwrap();
    }
}
