//! Accuracy measures and equality-of-accuracy tests.

use crate::error::{arg, Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};
use statrs::function::gamma::ln_gamma;
use std::sync::OnceLock;

fn check_pair(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.is_empty() || actual.len() != forecast.len() {
        return arg(format!(
            "need equal non-empty lengths, got {} and {}",
            actual.len(),
            forecast.len()
        ));
    }
    Ok(())
}

fn smape_terms<'a>(actual: &'a [f64], forecast: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    actual.iter().zip(forecast).map(|(&x, &f)| {
        let denom = (x.abs() + f.abs()) / 2.0;
        if denom == 0.0 {
            0.0
        } else {
            (x - f).abs() / denom
        }
    })
}

/// Symmetric MAPE in percent; a `0/0` term counts as zero.
pub fn smape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_pair(actual, forecast)?;
    Ok(100.0 * smape_terms(actual, forecast).sum::<f64>() / actual.len() as f64)
}

/// SMAPE pooled over all `(series, t)` terms jointly.
pub fn smape_multi(actual: &[Vec<f64>], forecast: &[Vec<f64>]) -> Result<f64> {
    if actual.is_empty() || actual.len() != forecast.len() {
        return arg("need the same non-zero number of actual and forecast series");
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (a, f) in actual.iter().zip(forecast) {
        check_pair(a, f)?;
        sum += smape_terms(a, f).sum::<f64>();
        count += a.len();
    }
    Ok(100.0 * sum / count as f64)
}

/// Mean absolute error scaled by the in-sample mean absolute one-step change.
pub fn mase(actual: &[f64], forecast: &[f64], estimation_sample: &[f64]) -> Result<f64> {
    check_pair(actual, forecast)?;
    if estimation_sample.len() < 2 {
        return arg("MASE needs an estimation sample of at least two values");
    }
    let d = estimation_sample.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
        / (estimation_sample.len() - 1) as f64;
    if d == 0.0 {
        return Err(Error::UndefinedScale(
            "estimation sample is constant; MASE scale is zero".into(),
        ));
    }
    let mae = actual.iter().zip(forecast).map(|(x, f)| (x - f).abs()).sum::<f64>()
        / actual.len() as f64;
    Ok(mae / d)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Mean and spread of one model's metrics over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub smape_mean: f64,
    pub smape_std: f64,
    pub mase_mean: f64,
    pub mase_std: f64,
    pub count: usize,
}

impl AccuracyReport {
    pub fn from_values(smapes: &[f64], mases: &[f64]) -> Result<Self> {
        if smapes.is_empty() || smapes.len() != mases.len() {
            return arg("accuracy report needs matching non-empty metric lists");
        }
        Ok(Self {
            smape_mean: mean(smapes),
            smape_std: std_dev(smapes),
            mase_mean: mean(mases),
            mase_std: std_dev(mases),
            count: smapes.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ms_within: f64,
}

fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return arg("need at least two groups of at least two values");
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return arg("group values must be finite");
    }
    Ok(())
}

pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<Anova> {
    check_groups(groups)?;
    let k = groups.len();
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let (df1, df2) = (k - 1, n - k);
    let msw = ssw / df2 as f64;
    let msb = ssb / df1 as f64;
    // exact ties make tiny rounding residue meaningless
    let scale = groups.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let tiny = 1e-24 * scale * scale * n as f64;
    let (f, p) = if ssb <= tiny {
        (0.0, 1.0)
    } else if ssw <= tiny {
        (f64::INFINITY, 0.0)
    } else {
        let f = msb / msw;
        let dist = FisherSnedecor::new(df1 as f64, df2 as f64)
            .map_err(|e| Error::Argument(e.to_string()))?;
        (f, dist.sf(f))
    };
    Ok(Anova {
        f,
        p,
        df_between: df1,
        df_within: df2,
        ms_within: msw,
    })
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        const M: usize = 16;
        let mut out = Vec::with_capacity(M);
        for i in 0..M {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (M as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=M {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = M as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

fn integrate(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let nodes = gauss_legendre();
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        total += half * nodes.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>();
    }
    total
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// P(range of k iid standard normals <= w).
fn range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let nd = std_normal();
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let v = k as f64
        * integrate(-8.5, 8.5, 24, |z| {
            let inner = nd.cdf(z) - nd.cdf(z - w);
            phi(z) * inner.max(0.0).powi(k as i32 - 1)
        });
    v.clamp(0.0, 1.0)
}

/// CDF of the studentized range with `k` groups and `df` error degrees of freedom.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> Result<f64> {
    if k < 2 || !(df > 0.0) {
        return arg("studentized range needs k >= 2 and df > 0");
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    if df > 25_000.0 {
        return Ok(range_cdf(q, k));
    }
    // s = sqrt(chi2_df / df) has density c s^(df-1) exp(-df s^2 / 2)
    let log_c = (df / 2.0) * df.ln() - ln_gamma(df / 2.0) - (df / 2.0 - 1.0) * 2f64.ln();
    let spread = 9.0 / (2.0 * df).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread.max(0.0) + if df < 4.0 { 8.0 } else { 0.0 };
    let v = integrate(lo, hi, 32, |s| {
        if s <= 0.0 {
            return 0.0;
        }
        let log_density = log_c + (df - 1.0) * s.ln() - df * s * s / 2.0;
        log_density.exp() * range_cdf(q * s, k)
    });
    Ok(v.clamp(0.0, 1.0))
}

/// Upper-`alpha` critical value of the studentized range.
pub fn studentized_range_quantile(alpha: f64, k: usize, df: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return arg("alpha must lie in (0, 1)");
    }
    let target = 1.0 - alpha;
    let g = |q: f64| studentized_range_cdf(q, k, df).map(|c| c - target);
    let (mut a, mut b) = (0.0, 2.0);
    let (mut fa, mut fb) = (g(a)?, g(b)?);
    while fb < 0.0 {
        a = b;
        fa = fb;
        b *= 2.0;
        fb = g(b)?;
        if b > 1e4 {
            return arg("studentized range quantile did not bracket");
        }
    }
    // Illinois false position
    let mut side = 0;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = g(c)?;
        if fc.abs() < 1e-10 || (b - a).abs() < 1e-8 * c.abs() {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    Ok((a * fb - b * fa) / (fb - fa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDiff {
    /// mean(i) - mean(j)
    pub difference: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub means: Vec<f64>,
    pub pairwise: Vec<Vec<PairDiff>>,
    /// Group indices from best (smallest mean) to worst.
    pub ranks: Vec<usize>,
    pub q_critical: f64,
    /// Minimum significant difference.
    pub hsd: f64,
}

impl TukeyResult {
    /// `"A <* B < C"` with `*` marking significant adjacent pairs.
    pub fn rank_chain(&self, labels: &[impl AsRef<str>]) -> String {
        let mut out = String::new();
        for (pos, &g) in self.ranks.iter().enumerate() {
            if pos > 0 {
                let prev = self.ranks[pos - 1];
                out.push_str(if self.pairwise[prev][g].significant { " <* " } else { " < " });
            }
            out.push_str(labels[g].as_ref());
        }
        out
    }
}

/// Tukey honestly-significant-difference comparisons for balanced groups.
pub fn tukey_hsd(groups: &[Vec<f64>], alpha: f64) -> Result<TukeyResult> {
    check_groups(groups)?;
    let n = groups[0].len();
    if groups.iter().any(|g| g.len() != n) {
        return arg("Tukey HSD here requires equally sized groups");
    }
    let k = groups.len();
    let an = anova_oneway(groups)?;
    let q = studentized_range_quantile(alpha, k, an.df_within as f64)?;
    let hsd = q * (an.ms_within / n as f64).sqrt();
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let pairwise = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let difference = means[i] - means[j];
                    PairDiff {
                        difference,
                        significant: i != j && difference.abs() > hsd,
                    }
                })
                .collect()
        })
        .collect();
    let mut ranks: Vec<usize> = (0..k).collect();
    ranks.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    Ok(TukeyResult {
        means,
        pairwise,
        ranks,
        q_critical: q,
        hsd,
    })
}
