use crate::endcond::EndConditionMethod;
use crate::error::{arg, Error, Result};
use crate::forecast::{ForecastConfig, ModelSpec};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => arg(format!("unknown report format '{other}' (csv or json)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

/// Everything one experiment run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub input: Option<PathBuf>,
    pub holdout: usize,
    pub horizons: Vec<usize>,
    pub replications: usize,
    pub models: Vec<ModelSpec>,
    pub seed: u64,
    pub output: PathBuf,
    pub format: ReportFormat,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Significance level for ANOVA and Tukey HSD.
    pub test_alpha: f64,
    pub forecast: ForecastConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut models: Vec<ModelSpec> = EndConditionMethod::ALL
            .iter()
            .map(|&ec| ModelSpec::Ensemble(ec))
            .collect();
        models.push(ModelSpec::Svr);
        Self {
            input: None,
            holdout: 18,
            horizons: vec![1, 18],
            replications: 50,
            models,
            seed: 0,
            output: PathBuf::from("results"),
            format: ReportFormat::Csv,
            workers: 0,
            test_alpha: 0.05,
            forecast: ForecastConfig::default(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Argument(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Keys accepted by [`set`](Self::set), in documentation order.
    pub const KEYS: &'static [&'static str] = &[
        "input",
        "holdout",
        "horizons",
        "replications",
        "models",
        "seed",
        "out",
        "format",
        "workers",
        "test_alpha",
        "period",
        "trend_alpha",
        "max_lag",
        "folds",
        "swarm_size",
        "pso_iterations",
        "sift_passes",
        "search_iter_per_sample",
    ];

    /// Sets one option by its key (flag name without dashes; `-` and `_`
    /// are interchangeable).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "input" => self.input = Some(PathBuf::from(v)),
            "holdout" => self.holdout = parse_num(&key, v)?,
            "horizons" => self.horizons = parse_list(&key, v)?,
            "replications" => self.replications = parse_num(&key, v)?,
            "models" => {
                self.models = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "seed" => self.seed = parse_num(&key, v)?,
            "out" | "output" => self.output = PathBuf::from(v),
            "format" => self.format = v.parse()?,
            "workers" => self.workers = parse_num(&key, v)?,
            "test_alpha" => self.test_alpha = parse_num(&key, v)?,
            "period" => self.forecast.period = parse_num(&key, v)?,
            "trend_alpha" => self.forecast.alpha = parse_num(&key, v)?,
            "max_lag" => self.forecast.max_lag = parse_num(&key, v)?,
            "folds" => self.forecast.folds = parse_num(&key, v)?,
            "swarm_size" => self.forecast.pso.swarm_size = parse_num(&key, v)?,
            "pso_iterations" => self.forecast.pso.iterations = parse_num(&key, v)?,
            "sift_passes" => self.forecast.passes_per_imf = parse_num(&key, v)?,
            "search_iter_per_sample" => {
                self.forecast.search_solver.max_iter_per_sample = parse_num(&key, v)?
            }
            other => return arg(format!("unknown configuration key '{other}'")),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    row: no + 1,
                    column: 1,
                    message: format!("expected key=value, got '{line}'"),
                });
            };
            self.set(k, v).map_err(|e| Error::Parse {
                row: no + 1,
                column: 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return arg("replications must be at least 1");
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return arg("horizons must be a non-empty list of positive integers");
        }
        if self.holdout < self.max_horizon() {
            return arg(format!(
                "hold-out {} is shorter than the largest horizon {}",
                self.holdout,
                self.max_horizon()
            ));
        }
        if self.models.is_empty() {
            return arg("at least one model is required");
        }
        if !(self.test_alpha > 0.0 && self.test_alpha < 1.0) {
            return arg("test_alpha must lie in (0, 1)");
        }
        Ok(())
    }
}
