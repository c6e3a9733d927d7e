//! Decompose-model-aggregate forecaster: one RBF SVR per decomposed
//! component, combined by a linear-kernel SVR, with iterated multi-step
//! prediction at the component level.

use crate::emd::{decompose, SiftingConfig};
use crate::endcond::EndConditionMethod;
use crate::error::{arg, Error, Result};
use crate::features::{self, LagSet};
use crate::par;
use crate::preprocess::{PreprocessPipeline, DEFAULT_ALPHA};
use crate::pso::{self, KernelFamily, PsoConfig};
use crate::series::Series;
use crate::svr::{self, SolverOptions, SvrModel, SvrParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Shortest series [`fit`] accepts.
pub const MIN_FIT_LENGTH: usize = 60;

/// Which forecaster to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelSpec {
    /// Decomposition ensemble with the given end condition.
    Ensemble(EndConditionMethod),
    /// One SVR on the preprocessed series.
    Svr,
}

impl ModelSpec {
    /// Short label, e.g. `emd-sbm-svr` or `svr`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Ensemble(ec) => format!("emd-{}-svr", ec.name()),
            ModelSpec::Svr => "svr".to_string(),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Accepts a bare end-condition name, `svr`, or a full label.
impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "svr" {
            return Ok(ModelSpec::Svr);
        }
        let core = t
            .strip_prefix("emd-")
            .and_then(|r| r.strip_suffix("-svr"))
            .unwrap_or(&t);
        core.parse().map(ModelSpec::Ensemble)
    }
}

/// Knobs shared by every fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    pub period: usize,
    pub alpha: f64,
    pub max_lag: usize,
    pub folds: usize,
    pub passes_per_imf: usize,
    /// Swarm settings; the seed is overridden per fit.
    pub pso: PsoConfig,
    /// Solver settings for the cross-validation fits inside the search.
    /// Final models always use the default solver settings.
    pub search_solver: SolverOptions,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            period: 12,
            alpha: DEFAULT_ALPHA,
            max_lag: features::DEFAULT_MAX_LAG,
            folds: pso::DEFAULT_FOLDS,
            passes_per_imf: 10,
            pso: PsoConfig::default(),
            search_solver: SolverOptions::search(),
        }
    }
}

/// A fitted model for one component series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentModel {
    /// Lags actually used as inputs (never empty).
    pub lags: Vec<usize>,
    /// Raw selection output; may be empty.
    pub selection: Option<LagSet>,
    pub params: SvrParams,
    pub cv_score: f64,
    pub model: SvrModel,
}

impl ComponentModel {
    fn pattern(&self, window: &[f64], t: usize) -> Vec<f64> {
        self.lags.iter().map(|&l| window[t - l]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub spec: ModelSpec,
    pub pipeline: PreprocessPipeline,
    pub end_condition: Option<EndConditionMethod>,
    /// IMFs found at fit time; components are these plus the residue.
    pub n_imfs: usize,
    pub component_models: Vec<ComponentModel>,
    /// Linear-kernel combiner; absent for single-component models.
    pub aggregator: Option<SvrModel>,
    /// Set when an ensemble had to fall back to a single SVR.
    pub fallback: bool,
    pub max_lag: usize,
    pub passes_per_imf: usize,
    /// In-sample RMSE of the combined one-step output on the preprocessed scale.
    pub in_sample_rmse: f64,
}

impl EnsembleModel {
    pub fn n_components(&self) -> usize {
        self.component_models.len()
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn lag_patterns(values: &[f64], lags: &[usize], start: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    (start..values.len())
        .map(|t| (lags.iter().map(|&l| values[t - l]).collect(), values[t]))
        .unzip()
}

fn fit_component(values: &[f64], cfg: &ForecastConfig, seed: u64) -> Result<ComponentModel> {
    let selection = match features::select_inputs(values, cfg.max_lag, derive_seed(seed, 0)) {
        Ok(s) => Some(s),
        Err(err) => {
            log::debug!("lag selection failed ({err}); using lag 1");
            None
        }
    };
    let lags = match &selection {
        Some(s) if !s.lags.is_empty() => s.lags.clone(),
        _ => vec![1],
    };
    let (x, y) = lag_patterns(values, &lags, cfg.max_lag);
    let pso_cfg = PsoConfig {
        seed: derive_seed(seed, 1),
        ..cfg.pso.clone()
    };
    let (params, search) =
        pso::tune_svr_with(&x, &y, KernelFamily::Rbf, &pso_cfg, cfg.folds, &cfg.search_solver)?;
    let model = svr::train(&x, &y, &params)?;
    Ok(ComponentModel {
        lags,
        selection,
        params,
        cv_score: search.best_score,
        model,
    })
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let sse: f64 = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum();
    (sse / a.len() as f64).sqrt()
}

/// Fits the model described by `spec` on `s`.
pub fn fit_spec(s: &Series, spec: ModelSpec, cfg: &ForecastConfig, seed: u64) -> Result<EnsembleModel> {
    if s.len() < MIN_FIT_LENGTH.max(cfg.max_lag + cfg.folds + 2) {
        return arg(format!(
            "fitting needs at least {MIN_FIT_LENGTH} observations, got {}",
            s.len()
        ));
    }
    let pipeline = PreprocessPipeline::fit_auto(s, cfg.period, cfg.alpha)?;
    let p = pipeline.apply(s)?.into_values();
    let ec = match spec {
        ModelSpec::Ensemble(ec) => Some(ec),
        ModelSpec::Svr => None,
    };
    let decomposition = match ec {
        Some(ec) => {
            let sift = SiftingConfig {
                passes_per_imf: cfg.passes_per_imf,
                max_imfs: None,
                end_condition: ec,
            };
            Some(decompose(&Series::new(p.clone())?, &sift)?)
        }
        None => None,
    };
    let (components, n_imfs, fallback): (Vec<Vec<f64>>, usize, bool) = match &decomposition {
        Some(d) if d.n_imfs() > 0 => (
            d.components().into_iter().map(<[f64]>::to_vec).collect(),
            d.n_imfs(),
            false,
        ),
        Some(_) => {
            log::info!("{spec}: no IMFs extracted, falling back to a single SVR");
            (vec![p.clone()], 0, true)
        }
        None => (vec![p.clone()], 0, false),
    };
    let fitted: Vec<Result<ComponentModel>> = par::map_range(components.len(), |c| {
        fit_component(&components[c], cfg, derive_seed(seed, 16 + c as u64))
    });
    let component_models = fitted.into_iter().collect::<Result<Vec<_>>>()?;

    let start = cfg.max_lag;
    let target = &p[start..];
    let preds: Vec<Vec<f64>> = component_models
        .iter()
        .zip(&components)
        .map(|(cm, values)| {
            (start..values.len())
                .map(|t| cm.model.predict(&cm.pattern(values, t)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let (aggregator, combined) = if component_models.len() > 1 {
        let rows: Vec<Vec<f64>> = (0..target.len())
            .map(|t| preds.iter().map(|c| c[t]).collect())
            .collect();
        let pso_cfg = PsoConfig {
            seed: derive_seed(seed, 2),
            ..cfg.pso.clone()
        };
        let (params, _) = pso::tune_svr_with(
            &rows,
            target,
            KernelFamily::Linear,
            &pso_cfg,
            cfg.folds,
            &cfg.search_solver,
        )?;
        let agg = svr::train(&rows, target, &params)?;
        let combined = agg.predict_many(&rows)?;
        (Some(agg), combined)
    } else {
        (None, preds[0].clone())
    };
    Ok(EnsembleModel {
        spec,
        pipeline,
        end_condition: ec,
        n_imfs,
        in_sample_rmse: rmse(&combined, target),
        component_models,
        aggregator,
        fallback,
        max_lag: cfg.max_lag,
        passes_per_imf: cfg.passes_per_imf,
    })
}

/// Fits the decomposition ensemble with end condition `ec` and default settings.
pub fn fit(s: &Series, ec: EndConditionMethod, seed: u64) -> Result<EnsembleModel> {
    fit_spec(s, ModelSpec::Ensemble(ec), &ForecastConfig::default(), seed)
}

/// Component series of `s` on the preprocessed scale, conformed to the
/// model's component count.
fn components_for(m: &EnsembleModel, s: &Series) -> Result<Vec<Vec<f64>>> {
    let p = m.pipeline.apply(s)?.into_values();
    let Some(ec) = m.end_condition.filter(|_| !m.fallback) else {
        return Ok(vec![p]);
    };
    let sift = SiftingConfig {
        passes_per_imf: m.passes_per_imf,
        max_imfs: Some(m.n_imfs),
        end_condition: ec,
    };
    let d = decompose(&Series::new(p)?, &sift)?;
    let mut out: Vec<Vec<f64>> = d.imfs.into_iter().map(|imf| imf.values).collect();
    // fewer IMFs than at fit time: the missing fast modes are taken as zero
    out.resize(m.n_imfs, vec![0.0; d.source_length]);
    out.push(d.residue);
    Ok(out)
}

/// Iterated `h`-step forecast from the end of `s`, on the original scale.
pub fn forecast(m: &EnsembleModel, s: &Series, h: usize) -> Result<Vec<f64>> {
    if h < 1 {
        return arg("forecast horizon must be at least 1");
    }
    if s.len() <= m.max_lag {
        return arg(format!("need more than {} observations to forecast", m.max_lag));
    }
    let comps = components_for(m, s)?;
    let per_component: Vec<Vec<f64>> = m
        .component_models
        .iter()
        .zip(comps)
        .map(|(cm, mut window)| {
            let mut out = Vec::with_capacity(h);
            for _ in 0..h {
                let v = cm.model.predict(&cm.pattern(&window, window.len()))?;
                window.push(v);
                out.push(v);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let combined: Vec<f64> = match &m.aggregator {
        Some(agg) => (0..h)
            .map(|k| agg.predict(&per_component.iter().map(|c| c[k]).collect::<Vec<_>>()))
            .collect::<Result<_>>()?,
        None => per_component.into_iter().next().unwrap_or_default(),
    };
    let start = m.pipeline.start_index(s)? + s.len() as i64;
    Ok(m.pipeline.inverse_at(&combined, start))
}

/// Forecasts for the first `h`-aligned test points. `h == 1` rolls one step
/// at a time, appending each observed test value and re-decomposing (the
/// fitted SVRs are kept); `h > 1` is one iterated forecast from the end of
/// the training series.
pub fn rolling_forecasts(
    m: &EnsembleModel,
    s_train: &Series,
    s_test: &Series,
    h: usize,
) -> Result<Vec<f64>> {
    if h < 1 {
        return arg("forecast horizon must be at least 1");
    }
    if h > 1 {
        if h > s_test.len() {
            return arg(format!("horizon {h} exceeds the {} test points", s_test.len()));
        }
        return forecast(m, s_train, h);
    }
    (0..s_test.len())
        .map(|k| {
            let seen = s_train.extended(&s_test.values()[..k])?;
            Ok(forecast(m, &seen, 1)?[0])
        })
        .collect()
}

/// Fits on `s_train` and evaluates over `s_test` (see [`rolling_forecasts`]).
pub fn rolling_evaluate(
    s_train: &Series,
    s_test: &Series,
    ec: EndConditionMethod,
    h: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let m = fit(s_train, ec, seed)?;
    rolling_forecasts(&m, s_train, s_test, h)
}
