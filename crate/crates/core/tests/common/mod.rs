#![allow(dead_code)]

//! Test-only oracles, independent of the library's solution paths.

use emd_forecast::svr::{KernelSpec, SvrParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod qp {
    /// Dense accelerated projected-gradient solver for the eps-SVR dual in
    /// the 2n-variable form. Returns `beta = a - a*`.
    pub fn solve(k: &[f64], y: &[f64], c: f64, eps: f64, iters: usize) -> Vec<f64> {
        let n = y.len();
        let m = 2 * n;
        let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
        let q = |t: usize, u: usize| sign(t) * sign(u) * k[(t % n) * n + (u % n)];
        let p: Vec<f64> = (0..m)
            .map(|t| if t < n { eps - y[t] } else { eps + y[t - n] })
            .collect();
        let lipschitz = 2.0 * top_eigenvalue(k, n) + 1e-12;
        let grad = |a: &[f64]| -> Vec<f64> {
            (0..m)
                .map(|t| p[t] + (0..m).map(|u| q(t, u) * a[u]).sum::<f64>())
                .collect()
        };
        let obj = |a: &[f64]| -> f64 {
            let g: f64 = (0..m)
                .map(|t| a[t] * (0.5 * (0..m).map(|u| q(t, u) * a[u]).sum::<f64>() + p[t]))
                .sum();
            g
        };
        let mut x = vec![0.0; m];
        let mut z = x.clone();
        let mut momentum = 1.0f64;
        let mut f_prev = obj(&x);
        for _ in 0..iters {
            let g = grad(&z);
            let v: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - b / lipschitz).collect();
            let x_next = project(&v, n, c);
            let f_next = obj(&x_next);
            if f_next > f_prev {
                // adaptive restart
                momentum = 1.0;
                z = x.clone();
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let w = (momentum - 1.0) / t_next;
            z = x_next.iter().zip(&x).map(|(a, b)| a + w * (a - b)).collect();
            x = x_next;
            momentum = t_next;
            f_prev = f_next;
        }
        (0..n).map(|i| x[i] - x[i + n]).collect()
    }

    /// Euclidean projection onto {0 <= a <= c, sum(a[..n]) = sum(a[n..])}.
    fn project(v: &[f64], n: usize, c: f64) -> Vec<f64> {
        let apply = |lambda: f64| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(t, x)| {
                    let s = if t < n { 1.0 } else { -1.0 };
                    (x - lambda * s).clamp(0.0, c)
                })
                .collect()
        };
        let balance = |a: &[f64]| -> f64 { a[..n].iter().sum::<f64>() - a[n..].iter().sum::<f64>() };
        let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balance(&apply(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        apply(0.5 * (lo + hi))
    }

    fn top_eigenvalue(k: &[f64], n: usize) -> f64 {
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| k[i * n + j] * v[j]).sum())
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm;
            v = w.into_iter().map(|x| x / norm).collect();
        }
        lambda
    }
}

/// Independent recheck of the eps-SVR KKT conditions for `beta`, `bias`:
/// the largest amount by which any point violates its complementarity
/// condition, measured on the prediction residual.
pub fn kkt_violation(k: &[f64], y: &[f64], c: f64, eps: f64, beta: &[f64], bias: f64) -> f64 {
    let n = y.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| beta[j] * k[i * n + j]).sum::<f64>() + bias;
        let r = y[i] - f;
        let b = beta[i];
        let tol = 1e-9 * c;
        let v = if b.abs() <= tol {
            (r.abs() - eps).max(0.0)
        } else if b.abs() >= c - tol {
            // at bound the residual must lie outside the tube on the side of b
            (eps - r * b.signum()).max(0.0)
        } else {
            (r - eps * b.signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Small random regression instance: n in [10, 50], d in [1, 3]; every third
/// seed uses the linear kernel.
pub fn svr_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, SvrParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(10..=50);
    let d = rng.gen_range(1..=3);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let y: Vec<f64> = x
        .iter()
        .map(|r| r.iter().map(|v| v.sin()).sum::<f64>() + 0.2 * rng.gen_range(-1.0..1.0))
        .collect();
    let kernel = if seed % 3 == 0 {
        KernelSpec::Linear
    } else {
        KernelSpec::Rbf { gamma: rng.gen_range(0.1..2.0) }
    };
    let p = SvrParams::new(rng.gen_range(0.5..5.0), rng.gen_range(0.0..0.2), kernel);
    (x, y, p)
}
