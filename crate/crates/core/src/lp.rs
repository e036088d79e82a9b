//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `min cᵀx` subject to `Ax ≤ b` and per-variable
//! bounds `lower ≤ x ≤ upper` (either side may be infinite). Internally
//! every variable is mapped onto nonnegative columns, finite upper bounds
//! become extra rows, and a phase-1 problem over artificial columns finds an
//! initial basis. Entering columns follow Dantzig pricing; after a run of
//! degenerate pivots the solver falls back to Bland's rule, which cannot
//! cycle. The basis inverse is refactored periodically and once more before
//! optimality is declared.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `n` variables with default bounds `x ≥ 0`.
    pub fn new(c: Vec<f64>) -> Self {
        let n = c.len();
        Self { c, a: Vec::new(), b: Vec::new(), lower: vec![0.0; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn add_row(&mut self, row: Vec<f64>, rhs: f64) {
        self.a.push(row);
        self.b.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Lp(format!(
                "bounds have length {}/{}, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.a.len() != self.b.len() {
            return Err(Error::Lp(format!("{} rows but {} right-hand sides", self.a.len(), self.b.len())));
        }
        if let Some(row) = self.a.iter().find(|r| r.len() != n) {
            return Err(Error::Lp(format!("row of length {}, expected {n}", row.len())));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(Error::Lp(format!("invalid bounds for variable {j}")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(Error::Lp(format!("empty bound interval for variable {j}")));
            }
        }
        let finite = self.c.iter().chain(&self.b).chain(self.a.iter().flatten());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Lp("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Largest violation of rows and bounds at `x` (≤ 0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let lhs: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
            worst = worst.max(lhs - rhs);
        }
        for j in 0..x.len() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst
    }

    /// Like [`max_violation`](Self::max_violation) but each row residual is
    /// divided by `1 + |b_r| + Σ_j |a_rj x_j|`.
    pub fn max_relative_violation(&self, x: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let lhs: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
            let mag: f64 = row.iter().zip(x).map(|(a, x)| (a * x).abs()).sum();
            worst = worst.max((lhs - rhs) / (1.0 + rhs.abs() + mag));
        }
        for j in 0..x.len() {
            let mag = 1.0 + x[j].abs();
            worst = worst.max((self.lower[j] - x[j]) / mag).max((x[j] - self.upper[j]) / mag);
        }
        worst
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot limit reached or the recovered point failed verification.
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Solution when `Optimal`, empty otherwise.
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Pluggable LP backend.
pub trait LpSolver {
    fn solve(&mut self, lp: &LinearProgram) -> Result<LpResult>;
}

#[derive(Clone, Debug)]
pub struct DenseSimplex {
    /// Residual tolerance used when verifying a returned point.
    pub tol_lp: f64,
    /// Smallest pivot magnitude accepted.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub cost_tol: f64,
    pub max_pivots: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self { tol_lp: crate::TOL_LP, pivot_tol: 1e-9, cost_tol: 1e-10, max_pivots: 50_000 }
    }
}

/// How an original variable is recovered from nonnegative columns.
#[derive(Clone, Copy)]
enum VarMap {
    /// `x = off + y[col]`
    Shift { off: f64, col: usize },
    /// `x = off − y[col]`
    Flip { off: f64, col: usize },
    /// `x = y[pos] − y[neg]`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs; the last entry is minus the objective value.
    z: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    /// Initial rows, used to rebuild `rows` from the basis.
    orig: Vec<Vec<f64>>,
    cost: Vec<f64>,
}

impl Tableau {
    fn new(rows: Vec<Vec<f64>>, basis: Vec<usize>, ncols: usize) -> Self {
        Self { orig: rows.clone(), rows, z: Vec::new(), basis, ncols, cost: vec![0.0; ncols] }
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        let pivot_row: Vec<f64> = self.rows[r].iter().map(|v| v / p).collect();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = self.z[j];
        if f != 0.0 {
            for (v, pv) in self.z.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.z[j] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        self.cost = cost.to_vec();
        let mut z = cost.to_vec();
        z.push(0.0);
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (v, a) in z.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
        self.z = z;
    }

    /// Recomputes `B⁻¹·[A | b]` from the original rows by Gauss-Jordan
    /// elimination with partial pivoting. Leaves the tableau untouched if the
    /// basis matrix is numerically singular.
    fn refactor(&mut self) -> bool {
        let m = self.rows.len();
        let mut work = self.orig.clone();
        let mut order = vec![usize::MAX; m];
        for (slot, &col) in self.basis.clone().iter().enumerate() {
            let piv = (0..m)
                .filter(|&r| !order.contains(&r))
                .max_by(|&a, &b| work[a][col].abs().total_cmp(&work[b][col].abs()));
            let Some(pr) = piv else { return false };
            let p = work[pr][col];
            if p.abs() < 1e-11 {
                return false;
            }
            order[slot] = pr;
            let prow: Vec<f64> = work[pr].iter().map(|v| v / p).collect();
            for (k, row) in work.iter_mut().enumerate() {
                if k != pr {
                    let f = row[col];
                    if f != 0.0 {
                        for (v, pv) in row.iter_mut().zip(&prow) {
                            *v -= f * pv;
                        }
                        row[col] = 0.0;
                    }
                }
            }
            work[pr] = prow;
        }
        self.rows = order.iter().map(|&r| work[r].clone()).collect();
        let cost = self.cost.clone();
        self.set_costs(&cost);
        true
    }
}

enum Outcome {
    Optimal,
    Unbounded,
    PivotLimit,
}

impl DenseSimplex {
    /// Dantzig pricing, switching to Bland's rule while pivots stay
    /// degenerate (which rules out cycling). With `bounded_below` (phase 1) a
    /// ray can only come from roundoff in the reduced costs; such columns are
    /// skipped. The tableau is rebuilt from the original data periodically
    /// and before declaring optimality.
    fn run(&self, tab: &mut Tableau, allowed: &[bool], bounded_below: bool, pivots: &mut usize) -> Outcome {
        let mut blocked = vec![false; tab.ncols];
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        loop {
            let bland = degenerate > 20;
            let candidates = (0..tab.ncols).filter(|&j| allowed[j] && !blocked[j] && tab.z[j] < -self.cost_tol);
            let entering =
                if bland { candidates.min() } else { candidates.min_by(|&a, &b| tab.z[a].total_cmp(&tab.z[b])) };
            let Some(j) = entering else {
                if since_refactor > 0 && tab.refactor() {
                    since_refactor = 0;
                    blocked.iter_mut().for_each(|b| *b = false);
                    continue;
                }
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..tab.rows.len() {
                let a = tab.rows[r][j];
                if a > self.pivot_tol {
                    let ratio = tab.rhs(r).max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                            let better_tie = if bland { tab.basis[r] < tab.basis[br] } else { a > tab.rows[br][j] };
                            if ratio < bratio && !tie || tie && better_tie {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = best else {
                if bounded_below {
                    blocked[j] = true;
                    continue;
                }
                return Outcome::Unbounded;
            };
            blocked.iter_mut().for_each(|b| *b = false);
            degenerate = if ratio <= 1e-14 { degenerate + 1 } else { 0 };
            tab.pivot(r, j);
            *pivots += 1;
            since_refactor += 1;
            if since_refactor >= 50 && tab.refactor() {
                since_refactor = 0;
            }
            if *pivots > self.max_pivots {
                return Outcome::PivotLimit;
            }
        }
    }

    pub fn solve_lp(&self, lp: &LinearProgram) -> Result<LpResult> {
        lp.validate()?;
        let n = lp.num_vars();
        let fail = |status| LpResult { status, x: Vec::new(), objective: f64::NAN };

        // Map variables to nonnegative columns.
        let mut maps = Vec::with_capacity(n);
        let mut ncols_struct = 0;
        let mut extra_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            let map = if l.is_finite() {
                let col = ncols_struct;
                ncols_struct += 1;
                if u.is_finite() {
                    extra_rows.push((col, u - l));
                }
                VarMap::Shift { off: l, col }
            } else if u.is_finite() {
                let col = ncols_struct;
                ncols_struct += 1;
                VarMap::Flip { off: u, col }
            } else {
                let pos = ncols_struct;
                ncols_struct += 2;
                VarMap::Split { pos, neg: pos + 1 }
            };
            maps.push(map);
        }

        // Transformed rows A'y ≤ b' and costs.
        let mut rows_struct: Vec<(Vec<f64>, f64)> = Vec::with_capacity(lp.a.len() + extra_rows.len());
        for (row, &rhs) in lp.a.iter().zip(&lp.b) {
            let mut t = vec![0.0; ncols_struct];
            let mut b = rhs;
            for (j, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match maps[j] {
                    VarMap::Shift { off, col } => {
                        t[col] += a;
                        b -= a * off;
                    }
                    VarMap::Flip { off, col } => {
                        t[col] -= a;
                        b -= a * off;
                    }
                    VarMap::Split { pos, neg } => {
                        t[pos] += a;
                        t[neg] -= a;
                    }
                }
            }
            rows_struct.push((t, b));
        }
        for &(col, width) in &extra_rows {
            let mut t = vec![0.0; ncols_struct];
            t[col] = 1.0;
            rows_struct.push((t, width));
        }
        let mut cost_struct = vec![0.0; ncols_struct];
        for (j, &c) in lp.c.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, .. } => cost_struct[col] += c,
                VarMap::Flip { col, .. } => cost_struct[col] -= c,
                VarMap::Split { pos, neg } => {
                    cost_struct[pos] += c;
                    cost_struct[neg] -= c;
                }
            }
        }

        let m = rows_struct.len();
        let n_art = rows_struct.iter().filter(|(_, b)| *b < 0.0).count();
        let ncols = ncols_struct + m + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art = ncols_struct + m;
        for (r, (t, b)) in rows_struct.iter().enumerate() {
            let mut row = vec![0.0; ncols + 1];
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for (dst, src) in row.iter_mut().zip(t) {
                *dst = sign * src;
            }
            row[ncols_struct + r] = sign;
            row[ncols] = sign * b;
            if *b < 0.0 {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            } else {
                basis.push(ncols_struct + r);
            }
            rows.push(row);
        }
        let mut tab = Tableau::new(rows, basis, ncols);
        let is_art = |j: usize| j >= ncols_struct + m;
        let mut pivots = 0;
        let mut phase1_residual = 0.0;

        if n_art > 0 {
            let cost1: Vec<f64> = (0..ncols).map(|j| if is_art(j) { 1.0 } else { 0.0 }).collect();
            tab.set_costs(&cost1);
            let allowed = vec![true; ncols];
            match self.run(&mut tab, &allowed, true, &mut pivots) {
                Outcome::Optimal => {}
                Outcome::Unbounded | Outcome::PivotLimit => return Ok(fail(LpStatus::NumericalFailure)),
            }
            let scale = 1.0 + rows_struct.iter().map(|(_, b)| b.abs()).fold(0.0, f64::max);
            let infeas = -tab.z[ncols];
            if infeas > 1e-9 * scale {
                return Ok(fail(LpStatus::Infeasible));
            }
            phase1_residual = infeas;
            // Drive artificial columns out of the basis.
            for r in 0..m {
                if is_art(tab.basis[r]) {
                    let j = (0..ncols_struct + m).find(|&j| tab.rows[r][j].abs() > self.pivot_tol);
                    if let Some(j) = j {
                        tab.pivot(r, j);
                    }
                }
            }
        }

        let mut cost2 = vec![0.0; ncols];
        cost2[..ncols_struct].copy_from_slice(&cost_struct);
        tab.set_costs(&cost2);
        let allowed: Vec<bool> = (0..ncols).map(|j| !is_art(j)).collect();
        match self.run(&mut tab, &allowed, false, &mut pivots) {
            Outcome::Optimal => {}
            Outcome::Unbounded => return Ok(fail(LpStatus::Unbounded)),
            Outcome::PivotLimit => return Ok(fail(LpStatus::NumericalFailure)),
        }

        let mut y = vec![0.0; ncols_struct];
        for r in 0..m {
            let j = tab.basis[r];
            if j < ncols_struct {
                y[j] = tab.rhs(r).max(0.0);
            }
        }
        let x: Vec<f64> = maps
            .iter()
            .map(|map| match *map {
                VarMap::Shift { off, col } => off + y[col],
                VarMap::Flip { off, col } => off - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect();
        if !x.iter().all(|v| v.is_finite()) || lp.max_relative_violation(&x) > self.tol_lp {
            // A positive phase-1 residual below the threshold means the
            // system sits on the feasibility boundary; call it infeasible.
            let status = if phase1_residual > 0.0 { LpStatus::Infeasible } else { LpStatus::NumericalFailure };
            return Ok(fail(status));
        }
        let objective = lp.objective(&x);
        Ok(LpResult { status: LpStatus::Optimal, x, objective })
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&mut self, lp: &LinearProgram) -> Result<LpResult> {
        self.solve_lp(lp)
    }
}

/// Solve with the built-in backend.
pub fn solve(lp: &LinearProgram) -> Result<LpResult> {
    DenseSimplex::default().solve_lp(lp)
}

/// Feasibility of `{x : Ax ≤ b, lower ≤ x ≤ upper}` with a witness when feasible.
pub fn feasible(a: &[Vec<f64>], b: &[f64], lower: &[f64], upper: &[f64]) -> Result<(bool, Option<Vec<f64>>)> {
    feasible_with(&mut DenseSimplex::default(), a, b, lower, upper)
}

pub fn feasible_with(
    solver: &mut dyn LpSolver,
    a: &[Vec<f64>],
    b: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<(bool, Option<Vec<f64>>)> {
    let lp = LinearProgram {
        c: vec![0.0; lower.len()],
        a: a.to_vec(),
        b: b.to_vec(),
        lower: lower.to_vec(),
        upper: upper.to_vec(),
    };
    let res = solver.solve(&lp)?;
    match res.status {
        LpStatus::Optimal => Ok((true, Some(res.x))),
        LpStatus::Infeasible => Ok((false, None)),
        // A zero objective cannot be unbounded.
        LpStatus::Unbounded | LpStatus::NumericalFailure => {
            Err(Error::Lp(format!("feasibility solve ended with status {:?}", res.status)))
        }
    }
}
