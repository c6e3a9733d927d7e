//! `emdf`: decomposition, forecasting and experiment runner.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use emd_forecast::emd::{decompose, SiftingConfig};
use emd_forecast::forecast::{self, ForecastConfig, ModelSpec};
use emd_forecast::harness::{
    emit_report, load_series, run_experiment, synth, write_series_csv, ExperimentConfig,
    NamedSeries, ReportFormat, SynthConfig,
};
use emd_forecast::par::Execution;
use emd_forecast::{EndConditionMethod, Series};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "emdf", version, about = "EMD end conditions + SVR ensemble forecasting")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the IMFs and residue of one series.
    Decompose(DecomposeArgs),
    /// Fit one model on one series and forecast.
    Forecast(ForecastArgs),
    /// Run the series x model x replication comparison.
    Experiment(ExperimentArgs),
    /// Generate synthetic seasonal/trend/noise series.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SeriesSelect {
    /// Series CSV (header row, then `id,v1,v2,...` per row).
    #[arg(long)]
    input: PathBuf,
    /// Series id; defaults to the first series in the file.
    #[arg(long)]
    series: Option<String>,
}

impl SeriesSelect {
    fn pick(&self) -> Result<NamedSeries> {
        let all = load_series(&self.input)
            .with_context(|| format!("reading {}", self.input.display()))?;
        match &self.series {
            Some(id) => all
                .into_iter()
                .find(|s| &s.id == id)
                .with_context(|| format!("series '{id}' not found")),
            None => all.into_iter().next().context("input holds no usable series"),
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    select: SeriesSelect,
    /// none, mirror, coughlin, sbm or rato.
    #[arg(long, default_value = "rato")]
    end_condition: EndConditionMethod,
    /// Sifting passes per IMF.
    #[arg(long, default_value_t = 10)]
    passes: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    select: SeriesSelect,
    /// End-condition name (ensemble) or `svr`.
    #[arg(long, default_value = "sbm")]
    model: ModelSpec,
    #[arg(long, default_value_t = 18)]
    horizon: usize,
    /// Hold out this many trailing observations and report them alongside.
    #[arg(long, default_value_t = 0)]
    holdout: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    swarm_size: Option<usize>,
    #[arg(long)]
    pso_iterations: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    holdout: Option<String>,
    /// Comma-separated, e.g. 1,18.
    #[arg(long)]
    horizons: Option<String>,
    #[arg(long)]
    replications: Option<String>,
    /// Comma-separated from none,mirror,coughlin,sbm,rato,svr.
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    swarm_size: Option<String>,
    #[arg(long)]
    pso_iterations: Option<String>,
    #[arg(long)]
    folds: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 126)]
    length: usize,
    #[arg(long, default_value_t = 12)]
    period: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<()> {
    let ns = a.select.pick()?;
    let cfg = SiftingConfig {
        passes_per_imf: a.passes,
        max_imfs: None,
        end_condition: a.end_condition,
    };
    let d = decompose(&ns.series, &cfg)?;
    let text = match a.format {
        ReportFormat::Json => to_json(&d)?,
        ReportFormat::Csv => {
            let mut s = String::from("t,value");
            for imf in &d.imfs {
                let _ = write!(s, ",imf{}", imf.index);
            }
            s.push_str(",residue\n");
            for (i, v) in ns.series.values().iter().enumerate() {
                let _ = write!(s, "{},{v}", ns.series.time(i));
                for imf in &d.imfs {
                    let _ = write!(s, ",{}", imf.values[i]);
                }
                let _ = writeln!(s, ",{}", d.residue[i]);
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_forecast(a: &ForecastArgs) -> Result<()> {
    let ns = a.select.pick()?;
    if a.holdout > 0 && a.holdout < a.horizon {
        bail!("holdout {} is shorter than horizon {}", a.holdout, a.horizon);
    }
    let (train, test): (Series, Option<Series>) = if a.holdout > 0 {
        let (tr, te) = ns.series.split_holdout(a.holdout)?;
        (tr, Some(te))
    } else {
        (ns.series.clone(), None)
    };
    let mut cfg = ForecastConfig::default();
    if let Some(s) = a.swarm_size {
        cfg.pso.swarm_size = s;
    }
    if let Some(i) = a.pso_iterations {
        cfg.pso.iterations = i;
    }
    let (model, values) = Execution::from_workers(a.workers).install(|| {
        let m = forecast::fit_spec(&train, a.model, &cfg, a.seed)?;
        let f = forecast::forecast(&m, &train, a.horizon)?;
        Ok::<_, emd_forecast::Error>((m, f))
    })?;
    log::info!(
        "{}: {} IMFs, in-sample RMSE {:.4}{}",
        a.model,
        model.n_imfs,
        model.in_sample_rmse,
        if model.fallback { " (fallback)" } else { "" }
    );
    let actual = test.as_ref().map(|t| t.values().to_vec());
    let text = match a.format {
        ReportFormat::Json => to_json(&serde_json::json!({
            "series": ns.id,
            "model": a.model.label(),
            "horizon": a.horizon,
            "forecast": values,
            "actual": actual,
        }))?,
        ReportFormat::Csv => {
            let mut s = String::from(if actual.is_some() { "step,time,forecast,actual\n" } else { "step,time,forecast\n" });
            for (k, v) in values.iter().enumerate() {
                let time = train.t0() + (train.len() + k) as f64 * train.dt();
                let _ = write!(s, "{},{time},{v}", k + 1);
                match &actual {
                    Some(act) => {
                        let _ = writeln!(s, ",{}", act.get(k).map(|x| x.to_string()).unwrap_or_default());
                    }
                    None => s.push('\n'),
                }
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    let flags = [
        ("input", &a.input),
        ("holdout", &a.holdout),
        ("horizons", &a.horizons),
        ("replications", &a.replications),
        ("models", &a.models),
        ("seed", &a.seed),
        ("out", &a.out),
        ("format", &a.format),
        ("workers", &a.workers),
        ("swarm_size", &a.swarm_size),
        ("pso_iterations", &a.pso_iterations),
        ("folds", &a.folds),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).with_context(|| format!("--{key}"))?;
        }
    }
    cfg.validate()?;
    let outcome = run_experiment(&cfg)?;
    let files = emit_report(&outcome, &cfg.output, cfg.format)?;
    for f in &files.files {
        println!("{}", f.display());
    }
    println!("{}", files.timings.display());
    if !outcome.failures.is_empty() {
        eprintln!("{} run(s) failed; see the report", outcome.failures.len());
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let series = synth(&SynthConfig {
        count: a.count,
        length: a.length,
        period: a.period,
        seed: a.seed,
    })?;
    write_series_csv(&a.out, &series)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Forecast(a) => cmd_forecast(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Synth(a) => cmd_synth(a),
    }
}
