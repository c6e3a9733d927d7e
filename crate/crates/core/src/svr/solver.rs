//! Sequential two-variable solver for the epsilon-SVR dual.
//!
//! The dual is written over `2n` variables `a = [a_1..a_n, a*_1..a*_n]`:
//!
//! ```text
//! min  1/2 a^T Q a + p^T a
//! s.t. sum_t s_t a_t = 0,  0 <= a_t <= C
//! ```
//!
//! with signs `s = [+1..., -1...]`, `Q_tu = s_t s_u K(t mod n, u mod n)` and
//! `p = [eps - y, eps + y]`. Working pairs are chosen by maximal violation
//! with second-order gain.

use serde::{Deserialize, Serialize};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the maximal violating pair gap falls below this.
    pub tolerance: f64,
    /// Update cap as a multiple of the sample count.
    pub max_iter_per_sample: usize,
}

/// Default gap tolerance. A 1e-3 pair gap can leave the dual objective more
/// than 1e-3 short of its optimum on small linear-kernel problems, so final
/// models are solved ten times tighter.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iter_per_sample: 10_000,
        }
    }
}

impl SolverOptions {
    /// Looser settings for the many fits inside a hyperparameter search.
    pub fn search() -> Self {
        Self {
            tolerance: 1e-3,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// `a_i - a_i*`
    pub beta: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_violation: f64,
    /// Maximized dual value `-1/2 b^T K b + y^T b - eps |b|_1`.
    pub dual_objective: f64,
}

/// Dual objective in the `beta` parameterization (to be maximized).
pub fn dual_objective(k: &[f64], y: &[f64], epsilon: f64, beta: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if beta[i] == 0.0 {
            continue;
        }
        let row = &k[i * n..(i + 1) * n];
        quad += beta[i] * row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
    }
    let lin: f64 = y.iter().zip(beta).map(|(a, b)| a * b).sum();
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    -0.5 * quad + lin - epsilon * l1
}

struct State<'a> {
    n: usize,
    k: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
}

impl<'a> State<'a> {
    #[inline]
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn kv(&self, t: usize, u: usize) -> f64 {
        self.k[(t % self.n) * self.n + (u % self.n)]
    }

    /// Returns the working pair and the current violation gap.
    fn select(&self) -> (Option<(usize, usize)>, f64) {
        let n = self.n;
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if self.alpha[t] < self.c && -self.grad[t] >= gmax {
                gmax = -self.grad[t];
                i_sel = Some(t);
            }
        }
        for t in n..2 * n {
            if self.alpha[t] > 0.0 && self.grad[t] >= gmax {
                gmax = self.grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            return (None, 0.0);
        };
        let row = &self.k[(i % n) * n..(i % n + 1) * n];
        let kii = self.diag[i % n];
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        let mut consider = |t: usize, yg: f64, u: usize| {
            if yg >= gmax2 {
                gmax2 = yg;
            }
            let b = gmax + yg;
            if b > 0.0 {
                let a = kii + self.diag[u] - 2.0 * row[u];
                let a = if a > 0.0 { a } else { TAU };
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        };
        for u in 0..n {
            if self.alpha[u] > 0.0 {
                consider(u, self.grad[u], u);
            }
        }
        for u in 0..n {
            let t = u + n;
            if self.alpha[t] < self.c {
                consider(t, -self.grad[t], u);
            }
        }
        let gap = gmax + gmax2;
        (j_sel.map(|j| (i, j)), gap)
    }

    fn update(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (yi, yj) = (self.sign(i), self.sign(j));
        let quad = self.kv(i, i) + self.kv(j, j) - 2.0 * self.kv(i, j);
        let quad = if quad > 0.0 { quad } else { TAU };
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        if di == 0.0 && dj == 0.0 {
            return;
        }
        // grad_t += Q_ti di + Q_tj dj
        let n = self.n;
        let row_i = &self.k[(i % n) * n..(i % n + 1) * n];
        let row_j = &self.k[(j % n) * n..(j % n + 1) * n];
        let (ci, cj) = (yi * di, yj * dj);
        for u in 0..n {
            let delta = row_i[u] * ci + row_j[u] * cj;
            self.grad[u] += delta;
            self.grad[u + n] -= delta;
        }
    }

    fn bias(&self) -> f64 {
        let m = 2 * self.n;
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum, mut count) = (0.0, 0usize);
        for t in 0..m {
            let yg = self.sign(t) * self.grad[t];
            let a = self.alpha[t];
            if a > 0.0 && a < self.c {
                sum += yg;
                count += 1;
            } else {
                let at_upper = a >= self.c;
                let positive = t < self.n;
                // bounds on rho from variables fixed at a box face
                if at_upper == positive {
                    lb = lb.max(yg);
                } else {
                    ub = ub.min(yg);
                }
            }
        }
        let rho = if count > 0 {
            sum / count as f64
        } else {
            0.5 * (ub + lb)
        };
        -rho
    }
}

/// Solves the dual for a precomputed `n x n` kernel matrix.
pub fn solve(k: &[f64], y: &[f64], c: f64, epsilon: f64, opts: &SolverOptions) -> DualSolution {
    let n = y.len();
    debug_assert_eq!(k.len(), n * n);
    let mut grad = Vec::with_capacity(2 * n);
    grad.extend(y.iter().map(|v| epsilon - v));
    grad.extend(y.iter().map(|v| epsilon + v));
    let mut st = State {
        n,
        k,
        c,
        alpha: vec![0.0; 2 * n],
        grad,
        diag: (0..n).map(|i| k[i * n + i]).collect(),
    };
    let cap = opts.max_iter_per_sample.saturating_mul(n).max(1);
    let mut iterations = 0;
    let mut converged = false;
    let mut gap;
    loop {
        let (pair, g) = st.select();
        gap = g;
        if gap < opts.tolerance {
            converged = true;
            break;
        }
        let Some((i, j)) = pair else {
            converged = true;
            break;
        };
        if iterations >= cap {
            break;
        }
        st.update(i, j);
        iterations += 1;
    }
    let beta: Vec<f64> = (0..n).map(|i| st.alpha[i] - st.alpha[i + n]).collect();
    let bias = st.bias();
    let dual_objective = dual_objective(k, y, epsilon, &beta);
    DualSolution {
        beta,
        bias,
        iterations,
        converged,
        kkt_violation: gap.max(0.0),
        dual_objective,
    }
}
