use crate::model::{AsGbar, GbarTable};

/// Which form of the combinatorial multi-agent axiom to check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MmGarpVariant {
    /// Closure `H` in the premise, `gbar[j][j]` on the right-hand side.
    #[default]
    Standard,
    /// Direct relation `R` in the premise, `gbar[k][k]` on the right-hand side.
    Printed,
}

/// In-place Floyd–Warshall transitive closure of an `n×n` boolean relation.
pub fn transitive_closure(rel: &mut [bool], n: usize) {
    for k in 0..n {
        for a in 0..n {
            if rel[a * n + k] {
                for b in 0..n {
                    if rel[k * n + b] {
                        rel[a * n + b] = true;
                    }
                }
            }
        }
    }
}

fn relation(n: usize, f: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut r = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            r[a * n + b] = f(a, b);
        }
    }
    r
}

/// `k R j` iff `gbar[k][j] ≤ gbar[k][k]`; the axiom requires
/// `k H j ⟹ gbar[j][k] ≥ gbar[j][j]` for every agent.
pub fn mm_garp<D: AsGbar + ?Sized>(d: &D) -> bool {
    mm_garp_variant(d, MmGarpVariant::Standard)
}

pub fn mm_garp_variant<D: AsGbar + ?Sized>(d: &D, variant: MmGarpVariant) -> bool {
    let g = d.gbar();
    let n = g.periods();
    (0..g.agents()).all(|i| {
        let mut h = relation(n, |k, j| g.get(k, j, i) <= g.get(k, k, i));
        match variant {
            MmGarpVariant::Standard => {
                transitive_closure(&mut h, n);
                relation(n, |k, j| !h[k * n + j] || g.get(j, k, i) >= g.get(j, j, i)).iter().all(|&b| b)
            }
            MmGarpVariant::Printed => {
                relation(n, |k, j| !h[k * n + j] || g.get(j, k, i) >= g.get(k, k, i)).iter().all(|&b| b)
            }
        }
    })
}

/// Additively relaxed axiom on the shifted budgets `ḡ = g + 1`.
pub fn garp_f<D: AsGbar + ?Sized>(d: &D, f: f64) -> bool {
    let g = d.gbar();
    let n = g.periods();
    let gb = |a: usize, b: usize, i: usize| g.get(a, b, i) + 1.0;
    (0..g.agents()).all(|i| {
        let mut h = relation(n, |k, j| gb(k, j, i) + f <= gb(k, k, i));
        transitive_closure(&mut h, n);
        (0..n).all(|k| (0..n).all(|j| !h[k * n + j] || gb(j, j, i) <= gb(j, k, i) + f))
    })
}

/// Smallest `F` (to `tol`) at which [`garp_f`] passes, by bisection on
/// `[0, r_upper + 2]` where the premise relation is empty.
pub fn garp_f_threshold<D: AsGbar + ?Sized>(d: &D, tol: f64) -> f64 {
    if garp_f(d, 0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = d.gbar().r_upper() + 2.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if garp_f(d, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn garp_e(g: &GbarTable, i: usize, e: f64) -> bool {
    let n = g.periods();
    let gb = |a: usize, b: usize| g.get(a, b, i) + 1.0;
    let mut h = relation(n, |t, s| e * gb(t, t) >= gb(t, s));
    transitive_closure(&mut h, n);
    (0..n).all(|t| (0..n).all(|s| !h[t * n + s] || e * gb(s, s) <= gb(s, t)))
}

/// Largest common efficiency `e ∈ [0, 1]` (to `tol_e`) for which the
/// efficiency-deflated axiom holds for `agent`.
pub fn ccei_scalar<D: AsGbar + ?Sized>(d: &D, agent: usize, tol_e: f64) -> f64 {
    let g = d.gbar();
    if garp_e(g, agent, 1.0) {
        return 1.0;
    }
    if !garp_e(g, agent, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol_e {
        let mid = 0.5 * (lo + hi);
        if garp_e(g, agent, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
