//! Global-best particle swarm search and the cross-validated SVR objective.

use crate::error::{arg, Result};
use crate::par;
use crate::svr::{self, KernelSpec, SolverOptions, SvrParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub c1: f64,
    pub c2: f64,
    /// Inertia at the first and last iteration; interpolated linearly.
    pub inertia: (f64, f64),
    /// Per-dimension `(low, high)`.
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

/// log10 bounds for C, epsilon and gamma.
pub const SVR_LOG_BOUNDS: [(f64, f64); 3] = [(-2.0, 3.0), (-4.0, 0.0), (-3.0, 2.0)];

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            iterations: 50,
            c1: 2.0,
            c2: 2.0,
            inertia: (0.9, 0.4),
            bounds: SVR_LOG_BOUNDS.to_vec(),
            seed: 0,
        }
    }
}

impl PsoConfig {
    fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 || self.iterations == 0 {
            return arg("PSO needs at least 2 particles and 1 iteration");
        }
        if self.bounds.is_empty() || self.bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return arg("PSO bounds must satisfy low < high");
        }
        Ok(())
    }

    fn inertia_at(&self, iter: usize) -> f64 {
        if self.iterations <= 1 {
            return self.inertia.0;
        }
        let frac = iter as f64 / (self.iterations - 1) as f64;
        self.inertia.0 + (self.inertia.1 - self.inertia.0) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_position: Vec<f64>,
    pub best_score: f64,
    /// Best score after each iteration.
    pub history: Vec<f64>,
}

/// Minimizes `objective` over the configured box.
pub fn optimize<F>(objective: F, cfg: &PsoConfig) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    cfg.validate()?;
    let dim = cfg.bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let span: Vec<f64> = cfg.bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let mut pos: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| cfg.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect())
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| span.iter().map(|s| 0.1 * s * rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    let score = |x: &Vec<f64>| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut pbest = pos.clone();
    let mut pbest_score = vec![f64::INFINITY; cfg.swarm_size];
    let mut gbest = pos[0].clone();
    let mut gbest_score = f64::INFINITY;
    let mut history = Vec::with_capacity(cfg.iterations);
    for iter in 0..cfg.iterations {
        let scores = par::map(&pos, score);
        for (i, s) in scores.into_iter().enumerate() {
            if s < pbest_score[i] {
                pbest_score[i] = s;
                pbest[i].clone_from(&pos[i]);
            }
            if s < gbest_score {
                gbest_score = s;
                gbest.clone_from(&pos[i]);
            }
        }
        history.push(gbest_score);
        if iter + 1 == cfg.iterations {
            break;
        }
        let w = cfg.inertia_at(iter);
        for i in 0..cfg.swarm_size {
            for d in 0..dim {
                let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                let v = w * vel[i][d]
                    + cfg.c1 * r1 * (pbest[i][d] - pos[i][d])
                    + cfg.c2 * r2 * (gbest[d] - pos[i][d]);
                vel[i][d] = v.clamp(-span[d], span[d]);
                let (lo, hi) = cfg.bounds[d];
                pos[i][d] = (pos[i][d] + vel[i][d]).clamp(lo, hi);
            }
        }
    }
    Ok(SearchResult {
        best_position: gbest,
        best_score: gbest_score,
        history,
    })
}

pub const DEFAULT_FOLDS: usize = 10;

/// Mean validation RMSE over `k` contiguous blocks.
pub fn cv_objective(x: &[Vec<f64>], y: &[f64], params: &SvrParams, k: usize) -> Result<f64> {
    cv_objective_with(x, y, params, k, &SolverOptions::default())
}

/// [`cv_objective`] with explicit solver settings for the fold fits.
pub fn cv_objective_with(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SvrParams,
    k: usize,
    opts: &SolverOptions,
) -> Result<f64> {
    let n = y.len();
    if x.len() != n {
        return arg(format!("{} inputs but {} targets", x.len(), n));
    }
    if k < 2 || n < k {
        return arg(format!("{k}-fold validation needs k >= 2 and at least k samples, got {n}"));
    }
    let mut total = 0.0;
    for f in 0..k {
        let (lo, hi) = (f * n / k, (f + 1) * n / k);
        let (mut tx, mut ty) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in (0..lo).chain(hi..n) {
            tx.push(x[i].clone());
            ty.push(y[i]);
        }
        let model = svr::train_with(&tx, &ty, params, opts)?;
        let mut sse = 0.0;
        for i in lo..hi {
            sse += (model.predict(&x[i])? - y[i]).powi(2);
        }
        total += (sse / (hi - lo) as f64).sqrt();
    }
    Ok(total / k as f64)
}

/// Kernel family searched by [`tune_svr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    Rbf,
    Linear,
}

/// Maps a log10 position to SVR parameters.
pub fn params_from_position(family: KernelFamily, pos: &[f64]) -> SvrParams {
    let p = |i: usize| 10f64.powf(pos[i]);
    let kernel = match family {
        KernelFamily::Rbf => KernelSpec::Rbf { gamma: p(2) },
        KernelFamily::Linear => KernelSpec::Linear,
    };
    SvrParams::new(p(0), p(1), kernel)
}

/// PSO over log10 (C, epsilon[, gamma]) minimizing the CV objective.
pub fn tune_svr(
    x: &[Vec<f64>],
    y: &[f64],
    family: KernelFamily,
    cfg: &PsoConfig,
    folds: usize,
) -> Result<(SvrParams, SearchResult)> {
    tune_svr_with(x, y, family, cfg, folds, &SolverOptions::default())
}

/// [`tune_svr`] with explicit solver settings for the fold fits.
pub fn tune_svr_with(
    x: &[Vec<f64>],
    y: &[f64],
    family: KernelFamily,
    cfg: &PsoConfig,
    folds: usize,
    opts: &SolverOptions,
) -> Result<(SvrParams, SearchResult)> {
    let mut cfg = cfg.clone();
    if family == KernelFamily::Linear {
        cfg.bounds.truncate(2);
    }
    // surface argument errors before searching
    let corner: Vec<f64> = cfg.bounds.iter().map(|b| b.0).collect();
    cv_objective_with(x, y, &params_from_position(family, &corner), folds, opts)?;
    let result = optimize(
        |pos| {
            cv_objective_with(x, y, &params_from_position(family, pos), folds, opts)
                .unwrap_or(f64::INFINITY)
        },
        &cfg,
    )?;
    Ok((params_from_position(family, &result.best_position), result))
}
