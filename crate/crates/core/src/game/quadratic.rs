use super::Game;
use crate::error::{invalid, Result};

/// Scalar-action game with `f^i(x) = a_i x_i − x_i²/2 + x_i Σ_{j≠i} b_ij x_j`.
///
/// Each payoff is strictly concave in the agent's own action, and the
/// unconstrained best reply is `a_i + Σ_j b_ij x_j`.
#[derive(Clone, Debug)]
pub struct QuadraticGame {
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    theta: Vec<f64>,
}

impl QuadraticGame {
    pub fn new(a: Vec<f64>, b: Vec<Vec<f64>>) -> Result<Self> {
        let m = a.len();
        if m == 0 || b.len() != m || b.iter().any(|r| r.len() != m) {
            return invalid("interaction matrix must be M×M");
        }
        let theta = a.clone();
        Ok(Self { a, b, theta })
    }

    /// Solves `(I − B)x = a` (diagonal of `B` ignored), the equilibrium when
    /// it is interior to every budget.
    pub fn interior_equilibrium(&self) -> Option<Vec<f64>> {
        let m = self.a.len();
        let mut mat: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = (0..m).map(|j| if i == j { 1.0 } else { -self.b[i][j] }).collect();
                row.push(self.a[i]);
                row
            })
            .collect();
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| mat[x][c].abs().total_cmp(&mat[y][c].abs()))?;
            if mat[p][c].abs() < 1e-14 {
                return None;
            }
            mat.swap(c, p);
            for r in 0..m {
                if r != c {
                    let f = mat[r][c] / mat[c][c];
                    for k in c..=m {
                        mat[r][k] -= f * mat[c][k];
                    }
                }
            }
        }
        Some((0..m).map(|i| mat[i][m] / mat[i][i]).collect())
    }
}

impl Game for QuadraticGame {
    fn num_agents(&self) -> usize {
        self.a.len()
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn payoff(&self, x: &[Vec<f64>], i: usize) -> f64 {
        let xi = x[i][0];
        let cross: f64 = (0..x.len()).filter(|&j| j != i).map(|j| self.b[i][j] * x[j][0]).sum();
        self.a[i] * xi - 0.5 * xi * xi + xi * cross
    }

    fn theta(&self) -> &[f64] {
        &self.theta
    }
}
