//! Small derivative-based helpers shared by the game and DRO modules.

/// Finite-difference gradient on the nonnegative orthant: central where the
/// stencil stays nonnegative, forward otherwise.
pub fn numerical_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        let xj = x[j];
        if xj - h >= 0.0 {
            y[j] = xj + h;
            let fp = f(&y);
            y[j] = xj - h;
            let fm = f(&y);
            g[j] = (fp - fm) / (2.0 * h);
        } else {
            let f0 = f(&y);
            y[j] = xj + h;
            g[j] = (f(&y) - f0) / h;
        }
        y[j] = xj;
    }
    g
}

#[derive(Clone, Copy, Debug)]
pub struct AscentOptions {
    pub max_iters: usize,
    /// Stop once a step moves less than `tol·(1 + ‖x‖)`.
    pub tol: f64,
    pub initial_step: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iters: 200, tol: 1e-10, initial_step: 1.0 }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Projected gradient ascent with Armijo backtracking.
///
/// Returns the final point, its value and whether the iteration stopped on
/// the step tolerance (rather than the iteration cap).
pub fn projected_ascent(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    project: &dyn Fn(&[f64]) -> Vec<f64>,
    start: &[f64],
    opts: AscentOptions,
) -> (Vec<f64>, f64, bool) {
    let mut x = project(start);
    let mut fx = f(&x);
    let mut step = opts.initial_step;
    for _ in 0..opts.max_iters {
        let g = grad(&x);
        if !g.iter().all(|v| v.is_finite()) {
            return (x, fx, false);
        }
        let mut accepted = None;
        let mut s = step;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + s * gi).collect();
            let y = project(&trial);
            let gain: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            let fy = f(&y);
            if fy >= fx + 1e-4 * gain && fy >= fx {
                accepted = Some((y, fy));
                break;
            }
            s *= 0.5;
        }
        let Some((y, fy)) = accepted else { return (x, fx, true) };
        let moved = norm(&y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = y;
        fx = fy;
        step = (2.0 * s).min(1e6);
        if moved <= opts.tol * (1.0 + norm(&x)) {
            return (x, fx, true);
        }
    }
    (x, fx, false)
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub fn golden_section_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    let mut best = if fa <= fb { (a, fa) } else { (b, fb) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}
