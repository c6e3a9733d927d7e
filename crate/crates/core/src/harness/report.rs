use super::config::ReportFormat;
use super::experiment::{Comparison, ExperimentOutcome};
use crate::error::Result;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub files: Vec<PathBuf>,
    /// Wall-clock timings; the only non-reproducible output.
    pub timings: PathBuf,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn runs_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from("series,model,replication,horizon,smape,mase\n");
    for r in &o.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            csv_field(&r.series_id),
            r.model,
            r.replication,
            r.horizon,
            r.smape,
            r.mase
        );
    }
    s
}

fn failures_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from("series,model,replication,error\n");
    for f in &o.failures {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            csv_field(&f.series_id),
            f.model,
            f.replication,
            csv_field(&f.error)
        );
    }
    s
}

fn summary_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from(
        "model,horizon,smape_mean,smape_std,mase_mean,mase_std,runs,complete_replications\n",
    );
    for m in &o.summaries {
        let r = &m.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            m.model, m.horizon, r.smape_mean, r.smape_std, r.mase_mean, r.mase_std, r.count,
            m.complete_replications
        );
    }
    s
}

fn series_summary_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from("series,model,horizon,smape_mean,smape_std,mase_mean,mase_std,runs\n");
    for m in &o.series_summaries {
        let r = &m.report;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            csv_field(&m.series_id),
            m.model,
            m.horizon,
            r.smape_mean,
            r.smape_std,
            r.mase_mean,
            r.mase_std,
            r.count
        );
    }
    s
}

fn forecasts_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from("series,model,replication,horizon,step,time,actual,forecast\n");
    for t in &o.forecasts {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            csv_field(&t.series_id),
            t.model,
            t.replication,
            t.horizon,
            t.step,
            t.time,
            t.actual,
            t.forecast
        );
    }
    s
}

fn comparison_block(c: &Comparison) -> String {
    let mut s = format!("H = {}\t{}\t", c.horizon, c.metric);
    match (&c.rank_chain, &c.anova) {
        (Some(chain), Some(a)) => {
            let _ = write!(s, "{chain}\t(ANOVA F = {:.4}, p = {:.4})", a.f, a.p);
        }
        (None, Some(a)) => {
            let _ = write!(s, "(ANOVA F = {:.4}, p = {:.4})", a.f, a.p);
        }
        _ => {}
    }
    if let Some(n) = &c.notice {
        let _ = write!(s, "\t{n}");
    }
    s
}

/// Table of ranked models per horizon and metric.
pub fn rank_chain_text(o: &ExperimentOutcome) -> String {
    let mut s = String::from(
        "Models ranked from best to worst by mean accuracy; '*' marks a significant\n\
         difference between adjacent models (Tukey HSD).\n",
    );
    for c in &o.comparisons {
        s.push_str(&comparison_block(c));
        s.push('\n');
    }
    if !o.failures.is_empty() {
        let _ = writeln!(s, "{} run(s) failed and are excluded; see failures.csv", o.failures.len());
    }
    s
}

fn timings_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from("series,model,replication,horizon,wall_time_s\n");
    for r in &o.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6}",
            csv_field(&r.series_id),
            r.model,
            r.replication,
            r.horizon,
            r.wall_time
        );
    }
    s
}

fn write(dir: &Path, name: &str, content: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, content)?;
    files.push(p);
    Ok(())
}

/// Writes the report files into `dir` (created if missing). Every file except
/// the timings file is a pure function of the outcome.
pub fn emit_report(outcome: &ExperimentOutcome, dir: &Path, format: ReportFormat) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match format {
        ReportFormat::Csv => {
            write(dir, "runs.csv", &runs_csv(outcome), &mut files)?;
            write(dir, "summary.csv", &summary_csv(outcome), &mut files)?;
            write(dir, "series_summary.csv", &series_summary_csv(outcome), &mut files)?;
            write(dir, "forecasts.csv", &forecasts_csv(outcome), &mut files)?;
            write(dir, "failures.csv", &failures_csv(outcome), &mut files)?;
        }
        ReportFormat::Json => {
            let json = serde_json::to_string_pretty(outcome)
                .map_err(|e| crate::error::Error::Io(e.to_string()))?;
            write(dir, "report.json", &(json + "\n"), &mut files)?;
        }
    }
    write(dir, "rank_chain.txt", &rank_chain_text(outcome), &mut files)?;
    let timings = dir.join("timings.csv");
    std::fs::write(&timings, timings_csv(outcome))?;
    Ok(ReportFiles { files, timings })
}
