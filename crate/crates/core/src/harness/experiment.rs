use super::config::ExperimentConfig;
use super::data::{load_series, NamedSeries};
use crate::error::{arg, Result};
use crate::eval::{self, AccuracyReport, Anova, TukeyResult};
use crate::forecast::{self, EnsembleModel, ModelSpec};
use crate::par::{self, Execution};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

/// One (series, model, replication, horizon) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub series_id: String,
    pub model: String,
    pub replication: usize,
    pub horizon: usize,
    pub smape: f64,
    pub mase: f64,
    /// Seconds spent fitting and forecasting the cell. Kept out of the
    /// deterministic report files.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub series_id: String,
    pub model: String,
    pub replication: usize,
    pub error: String,
}

/// Forecast against the observed value at one hold-out position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastTrace {
    pub series_id: String,
    pub model: String,
    pub replication: usize,
    pub horizon: usize,
    /// 1-based position in the hold-out.
    pub step: usize,
    pub time: f64,
    pub actual: f64,
    pub forecast: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub series_id: String,
    pub model: String,
    pub horizon: usize,
    pub report: AccuracyReport,
}

/// Across-series summary for one model and horizon. Means are over all
/// successful records; standard deviations are over replications of the
/// across-series mean, using replications where every series succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub horizon: usize,
    pub report: AccuracyReport,
    pub complete_replications: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Smape,
    Mase,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Smape, Metric::Mase];

    fn of(&self, r: &RunRecord) -> f64 {
        match self {
            Metric::Smape => r.smape,
            Metric::Mase => r.mase,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Smape => "SMAPE",
            Metric::Mase => "MASE",
        })
    }
}

/// ANOVA across models for one (horizon, metric), followed by Tukey HSD when
/// the ANOVA is significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub horizon: usize,
    pub metric: Metric,
    /// Models in group order.
    pub models: Vec<String>,
    pub anova: Option<Anova>,
    pub tukey: Option<TukeyResult>,
    /// Models from best to worst, `*` marking significant adjacent pairs.
    pub rank_chain: Option<String>,
    pub notice: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub series: Vec<String>,
    pub models: Vec<String>,
    pub horizons: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub records: Vec<RunRecord>,
    pub failures: Vec<FailedRun>,
    pub forecasts: Vec<ForecastTrace>,
    pub series_summaries: Vec<SeriesSummary>,
    pub summaries: Vec<ModelSummary>,
    pub comparisons: Vec<Comparison>,
}

/// Identifies a grid cell for observers.
#[derive(Debug, Clone, Copy)]
pub struct CellContext<'a> {
    pub series_id: &'a str,
    pub model: ModelSpec,
    pub replication: usize,
    pub seed: u64,
}

type Observer<'a> = &'a (dyn Fn(&CellContext<'_>, &EnsembleModel, &Series) + Sync);

struct CellOutput {
    records: Vec<RunRecord>,
    traces: Vec<ForecastTrace>,
}

fn run_cell(
    cfg: &ExperimentConfig,
    ns: &NamedSeries,
    spec: ModelSpec,
    replication: usize,
    observer: Option<Observer<'_>>,
) -> Result<CellOutput> {
    let started = Instant::now();
    let (train, test) = ns.series.split_holdout(cfg.holdout)?;
    let seed = cfg.seed.wrapping_add(replication as u64);
    let model = forecast::fit_spec(&train, spec, &cfg.forecast, seed)?;
    if let Some(obs) = observer {
        let ctx = CellContext {
            series_id: &ns.id,
            model: spec,
            replication,
            seed,
        };
        obs(&ctx, &model, &train);
    }
    let label = spec.label();
    let mut out = CellOutput {
        records: Vec::new(),
        traces: Vec::new(),
    };
    for &h in &cfg.horizons {
        let f = forecast::rolling_forecasts(&model, &train, &test, h)?;
        let actual = &test.values()[..f.len()];
        let smape = eval::smape(actual, &f)?;
        let mase = eval::mase(actual, &f, train.values())?;
        if !(smape.is_finite() && mase.is_finite()) {
            return arg(format!("non-finite metric at horizon {h}"));
        }
        out.records.push(RunRecord {
            series_id: ns.id.clone(),
            model: label.clone(),
            replication,
            horizon: h,
            smape,
            mase,
            wall_time: 0.0,
        });
        for (k, (&a, &v)) in actual.iter().zip(&f).enumerate() {
            out.traces.push(ForecastTrace {
                series_id: ns.id.clone(),
                model: label.clone(),
                replication,
                horizon: h,
                step: k + 1,
                time: test.time(k),
                actual: a,
                forecast: v,
            });
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    for r in &mut out.records {
        r.wall_time = elapsed;
    }
    Ok(out)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Loads `cfg.input` and runs the full grid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let Some(path) = &cfg.input else {
        return arg("no input file configured");
    };
    let series = load_series(path)?;
    run_experiment_on(cfg, &series, None)
}

/// Runs the series x model x replication grid on already loaded series.
/// `observer`, when given, sees every fitted model with its training series.
pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    series: &[NamedSeries],
    observer: Option<Observer<'_>>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, usize)> = (0..series.len())
        .flat_map(|s| {
            (0..cfg.models.len())
                .flat_map(move |m| (0..cfg.replications).map(move |r| (s, m, r)))
        })
        .collect();
    let exec = Execution::from_workers(cfg.workers);
    let results: Vec<Result<CellOutput>> = exec.install(|| {
        par::map(&cells, |&(s, m, r)| {
            run_cell(cfg, &series[s], cfg.models[m], r, observer)
        })
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut forecasts = Vec::new();
    for (&(s, m, r), res) in cells.iter().zip(results) {
        match res {
            Ok(out) => {
                records.extend(out.records);
                forecasts.extend(out.traces);
            }
            Err(err) => {
                log::warn!(
                    "{} on {} (replication {r}) failed: {err}",
                    cfg.models[m],
                    series[s].id
                );
                failures.push(FailedRun {
                    series_id: series[s].id.clone(),
                    model: cfg.models[m].label(),
                    replication: r,
                    error: err.to_string(),
                });
            }
        }
    }
    let models: Vec<String> = cfg.models.iter().map(ModelSpec::label).collect();
    let series_ids: Vec<String> = series.iter().map(|s| s.id.clone()).collect();
    let (series_summaries, summaries, groups) = summarize(cfg, &series_ids, &models, &records)?;
    let comparisons = compare(cfg, &models, &groups)?;
    Ok(ExperimentOutcome {
        series: series_ids,
        models,
        horizons: cfg.horizons.clone(),
        replications: cfg.replications,
        seed: cfg.seed,
        records,
        failures,
        forecasts,
        series_summaries,
        summaries,
        comparisons,
    })
}

/// Per-replication across-series means keyed by (horizon, model index).
type Groups = BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)>;

fn summarize(
    cfg: &ExperimentConfig,
    series_ids: &[String],
    models: &[String],
    records: &[RunRecord],
) -> Result<(Vec<SeriesSummary>, Vec<ModelSummary>, Groups)> {
    let mut series_summaries = Vec::new();
    let mut summaries = Vec::new();
    let mut groups = Groups::new();
    for (mi, model) in models.iter().enumerate() {
        for &h in &cfg.horizons {
            let of_cell: Vec<&RunRecord> = records
                .iter()
                .filter(|r| &r.model == model && r.horizon == h)
                .collect();
            for sid in series_ids {
                let rs: Vec<&RunRecord> = of_cell.iter().copied().filter(|r| &r.series_id == sid).collect();
                if rs.is_empty() {
                    continue;
                }
                let sm: Vec<f64> = rs.iter().map(|r| r.smape).collect();
                let ms: Vec<f64> = rs.iter().map(|r| r.mase).collect();
                series_summaries.push(SeriesSummary {
                    series_id: sid.clone(),
                    model: model.clone(),
                    horizon: h,
                    report: AccuracyReport::from_values(&sm, &ms)?,
                });
            }
            if of_cell.is_empty() {
                continue;
            }
            let (mut rep_smape, mut rep_mase) = (Vec::new(), Vec::new());
            for rep in 0..cfg.replications {
                let rs: Vec<&RunRecord> = of_cell.iter().copied().filter(|r| r.replication == rep).collect();
                if rs.len() == series_ids.len() {
                    rep_smape.push(mean(&rs.iter().map(|r| r.smape).collect::<Vec<_>>()));
                    rep_mase.push(mean(&rs.iter().map(|r| r.mase).collect::<Vec<_>>()));
                }
            }
            let all_smape: Vec<f64> = of_cell.iter().map(|r| Metric::Smape.of(r)).collect();
            let all_mase: Vec<f64> = of_cell.iter().map(|r| Metric::Mase.of(r)).collect();
            summaries.push(ModelSummary {
                model: model.clone(),
                horizon: h,
                report: AccuracyReport {
                    smape_mean: mean(&all_smape),
                    smape_std: eval::std_dev(&rep_smape),
                    mase_mean: mean(&all_mase),
                    mase_std: eval::std_dev(&rep_mase),
                    count: of_cell.len(),
                },
                complete_replications: rep_smape.len(),
            });
            groups.insert((h, mi), (rep_smape, rep_mase));
        }
    }
    Ok((series_summaries, summaries, groups))
}

fn compare(cfg: &ExperimentConfig, models: &[String], groups: &Groups) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for &h in &cfg.horizons {
        for metric in Metric::ALL {
            let mut names = Vec::new();
            let mut data = Vec::new();
            for (mi, name) in models.iter().enumerate() {
                if let Some((s, m)) = groups.get(&(h, mi)) {
                    let v = if metric == Metric::Smape { s } else { m };
                    if v.len() >= 2 {
                        names.push(name.clone());
                        data.push(v.clone());
                    }
                }
            }
            let mut cmp = Comparison {
                horizon: h,
                metric,
                models: names.clone(),
                anova: None,
                tukey: None,
                rank_chain: None,
                notice: None,
            };
            if data.len() < 2 {
                cmp.notice = Some(if cfg.replications < 2 {
                    "ANOVA skipped: needs at least 2 replications per model".into()
                } else {
                    "ANOVA skipped: fewer than 2 models with 2 complete replications".into()
                });
                out.push(cmp);
                continue;
            }
            let anova = eval::anova_oneway(&data)?;
            cmp.anova = Some(anova);
            if anova.p < cfg.test_alpha {
                match eval::tukey_hsd(&data, cfg.test_alpha) {
                    Ok(t) => {
                        cmp.rank_chain = Some(t.rank_chain(&names));
                        cmp.tukey = Some(t);
                    }
                    Err(err) => cmp.notice = Some(format!("Tukey HSD skipped: {err}")),
                }
            } else {
                cmp.notice = Some(format!(
                    "ANOVA not significant (p = {:.4}); Tukey HSD not performed",
                    anova.p
                ));
            }
            out.push(cmp);
        }
    }
    Ok(out)
}
