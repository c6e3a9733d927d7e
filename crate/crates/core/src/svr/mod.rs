//! Epsilon-insensitive support vector regression.
//!
//! Inputs are standardized with training-set statistics before any kernel
//! evaluation; targets are used as given.

mod solver;

pub use solver::{dual_objective, solve, DualSolution, SolverOptions, DEFAULT_TOLERANCE};

use crate::error::{arg, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Linear,
}

impl KernelSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                arg(format!("RBF gamma must be positive, got {gamma}"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => u.iter().zip(v).map(|(a, b)| a * b).sum(),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

pub fn kernel_eval(k: &KernelSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return arg(format!("dimension mismatch: {} vs {}", u.len(), v.len()));
    }
    Ok(k.eval_unchecked(u, v))
}

/// Penalty `c`, tube half-width `epsilon` and kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, kernel: KernelSpec) -> Self {
        Self { c, epsilon, kernel }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return arg(format!("C must be positive, got {}", self.c));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return arg(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        self.kernel.validate()
    }
}

/// Per-feature affine standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for row in x {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Solver diagnostics kept with the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainInfo {
    pub iterations: usize,
    pub converged: bool,
    pub kkt_violation: f64,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Standardized support vectors.
    pub support_vectors: Vec<Vec<f64>>,
    /// `a_i - a_i*` per support vector.
    pub beta: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub scaler: Scaler,
    pub info: TrainInfo,
}

impl SvrModel {
    pub fn dim(&self) -> usize {
        self.scaler.mean.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return arg(format!(
                "dimension mismatch: model expects {}, got {}",
                self.dim(),
                x.len()
            ));
        }
        let z = self.scaler.transform(x);
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.beta)
            .map(|(sv, b)| b * self.kernel.eval_unchecked(sv, &z))
            .sum::<f64>()
            + self.bias)
    }

    pub fn predict_many(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        x.iter().map(|row| self.predict(row)).collect()
    }
}

/// Kernel matrix of already standardized rows, row-major.
pub fn kernel_matrix(kernel: &KernelSpec, rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval_unchecked(&rows[i], &rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

pub fn train(x: &[Vec<f64>], y: &[f64], p: &SvrParams) -> Result<SvrModel> {
    train_with(x, y, p, &SolverOptions::default())
}

pub fn train_with(
    x: &[Vec<f64>],
    y: &[f64],
    p: &SvrParams,
    opts: &SolverOptions,
) -> Result<SvrModel> {
    p.validate()?;
    if x.len() != y.len() {
        return arg(format!("{} inputs but {} targets", x.len(), y.len()));
    }
    if x.len() < 2 {
        return arg("training needs at least two samples");
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return arg("inputs must share one positive dimension");
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return arg("training data must be finite");
    }
    let scaler = Scaler::fit(x);
    let (lo, hi) = y
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-12 * (1.0 + hi.abs()) {
        return Ok(SvrModel {
            support_vectors: Vec::new(),
            beta: Vec::new(),
            bias: y[0],
            kernel: p.kernel,
            scaler,
            info: TrainInfo {
                iterations: 0,
                converged: true,
                kkt_violation: 0.0,
                dual_objective: 0.0,
            },
        });
    }
    let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
    let k = kernel_matrix(&p.kernel, &z);
    let sol = solve(&k, y, p.c, p.epsilon, opts);
    let mut support_vectors = Vec::new();
    let mut beta = Vec::new();
    for (row, b) in z.into_iter().zip(&sol.beta) {
        if *b != 0.0 {
            support_vectors.push(row);
            beta.push(*b);
        }
    }
    Ok(SvrModel {
        support_vectors,
        beta,
        bias: sol.bias,
        kernel: p.kernel,
        scaler,
        info: TrainInfo {
            iterations: sol.iterations,
            converged: sol.converged,
            kkt_violation: sol.kkt_violation,
            dual_objective: sol.dual_objective,
        },
    })
}
