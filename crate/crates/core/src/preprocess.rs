//! Multiplicative deseasonalization and Mann-Kendall-gated polynomial detrending.

use crate::error::{arg, Result};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Seasonal indices, one per position in the cycle, with mean 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalModel {
    pub period: usize,
    pub indices: Vec<f64>,
}

impl SeasonalModel {
    /// Index for absolute sample position `i` (position 0 is the fit origin).
    pub fn index_at(&self, i: i64) -> f64 {
        self.indices[i.rem_euclid(self.period as i64) as usize]
    }
}

/// Polynomial trend in the sample index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub degree: usize,
    /// Coefficients in increasing power order.
    pub coefficients: Vec<f64>,
    pub present: bool,
}

impl TrendModel {
    pub fn eval(&self, i: i64) -> f64 {
        if !self.present {
            return 0.0;
        }
        let x = i as f64;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannKendall {
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub p: f64,
    pub trend_detected: bool,
}

/// Two-sided Mann-Kendall trend test with tie correction.
pub fn mann_kendall(values: &[f64], alpha: f64) -> Result<MannKendall> {
    let n = values.len();
    if n < 8 {
        return arg(format!("Mann-Kendall needs at least 8 values, got {n}"));
    }
    let mut s: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            s += match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let term = |k: f64| k * (k - 1.0) * (2.0 * k + 5.0);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        if j > i {
            ties += term((j - i + 1) as f64);
        }
        i = j + 1;
    }
    let var_s = (term(n as f64) - ties) / 18.0;
    let z = match s {
        0 => 0.0,
        _ if var_s <= 0.0 => 0.0,
        s if s > 0 => (s - 1) as f64 / var_s.sqrt(),
        s => (s + 1) as f64 / var_s.sqrt(),
    };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * normal.sf(z.abs())).clamp(0.0, 1.0);
    Ok(MannKendall {
        s,
        var_s,
        z,
        p,
        trend_detected: p < alpha,
    })
}

/// Centered moving average; even periods use the 2xP filter.
fn centered_moving_average(x: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = x.len();
    let half = period / 2;
    (0..n)
        .map(|t| {
            if t < half || t + half >= n {
                return None;
            }
            if period % 2 == 1 {
                Some(x[t - half..=t + half].iter().sum::<f64>() / period as f64)
            } else {
                let inner: f64 = x[t - half + 1..t + half].iter().sum();
                Some((inner + 0.5 * (x[t - half] + x[t + half])) / period as f64)
            }
        })
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median ratio-to-moving-average seasonal indices, renormalized to mean 1.
pub fn fit_seasonal(x: &[f64], period: usize) -> Result<SeasonalModel> {
    if period < 2 {
        return arg("seasonal period must be at least 2");
    }
    if x.len() < 2 * period {
        return arg(format!(
            "seasonal fit needs at least {} values, got {}",
            2 * period,
            x.len()
        ));
    }
    if x.iter().any(|&v| v <= 0.0) {
        return arg("multiplicative seasonality requires strictly positive values");
    }
    let cma = centered_moving_average(x, period);
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); period];
    for (t, m) in cma.iter().enumerate() {
        if let Some(m) = m {
            buckets[t % period].push(x[t] / m);
        }
    }
    let mut indices: Vec<f64> = buckets
        .iter_mut()
        .map(|b| if b.is_empty() { 1.0 } else { median(b) })
        .collect();
    let mean = indices.iter().sum::<f64>() / period as f64;
    indices.iter_mut().for_each(|v| *v /= mean);
    Ok(SeasonalModel { period, indices })
}

/// Least-squares polynomial in the sample index, coefficients in raw-index basis.
fn polyfit(y: &[f64], degree: usize) -> Vec<f64> {
    let n = y.len();
    let scale = n.max(1) as f64;
    let k = degree + 1;
    // normal equations on u = t / n
    let mut a = vec![vec![0.0; k + 1]; k];
    for (t, &yt) in y.iter().enumerate() {
        let u = t as f64 / scale;
        let pows: Vec<f64> = (0..k).map(|p| u.powi(p as i32)).collect();
        for r in 0..k {
            for c in 0..k {
                a[r][c] += pows[r] * pows[c];
            }
            a[r][k] += pows[r] * yt;
        }
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        a.swap(col, piv);
        for r in 0..k {
            if r != col && a[col][col] != 0.0 {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..k)
        .map(|p| {
            let c = if a[p][p] != 0.0 { a[p][k] / a[p][p] } else { 0.0 };
            c / scale.powi(p as i32)
        })
        .collect()
}

fn sse(y: &[f64], coef: &[f64]) -> f64 {
    let model = TrendModel {
        degree: coef.len() - 1,
        coefficients: coef.to_vec(),
        present: true,
    };
    y.iter()
        .enumerate()
        .map(|(t, v)| (v - model.eval(t as i64)).powi(2))
        .sum()
}

/// Degree 1 or 2 trend; degree 2 must cut the SSE by more than 1%.
pub fn fit_trend(y: &[f64]) -> TrendModel {
    let lin = polyfit(y, 1);
    let quad = polyfit(y, 2);
    let (degree, coefficients) = if sse(y, &quad) < 0.99 * sse(y, &lin) {
        (2, quad)
    } else {
        (1, lin)
    };
    TrendModel {
        degree,
        coefficients,
        present: true,
    }
}

/// Seasonal and trend transforms fitted on a training series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessPipeline {
    pub seasonal: Option<SeasonalModel>,
    pub trend: Option<TrendModel>,
    /// Time stamp of sample 0 and the step, for aligning later series.
    pub origin: f64,
    pub dt: f64,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

impl PreprocessPipeline {
    pub fn identity() -> Self {
        Self {
            seasonal: None,
            trend: None,
            origin: 0.0,
            dt: 1.0,
        }
    }

    /// Deseasonalizes multiplicatively, then detrends when Mann-Kendall
    /// rejects the no-trend hypothesis at `alpha`.
    pub fn fit(s: &Series, period: usize, alpha: f64) -> Result<Self> {
        let seasonal = fit_seasonal(s.values(), period)?;
        Self::fit_with(s, Some(seasonal), alpha)
    }

    /// Like [`fit`](Self::fit) but skips seasonality when the series is too
    /// short or not strictly positive.
    pub fn fit_auto(s: &Series, period: usize, alpha: f64) -> Result<Self> {
        let seasonal = fit_seasonal(s.values(), period).ok();
        Self::fit_with(s, seasonal, alpha)
    }

    fn fit_with(s: &Series, seasonal: Option<SeasonalModel>, alpha: f64) -> Result<Self> {
        let mut p = Self {
            seasonal,
            trend: None,
            origin: s.t0(),
            dt: s.dt(),
        };
        let deseasonalized = p.apply(s)?;
        if deseasonalized.len() >= 8 {
            let mk = mann_kendall(deseasonalized.values(), alpha)?;
            if mk.trend_detected {
                p.trend = Some(fit_trend(deseasonalized.values()));
            }
        }
        Ok(p)
    }

    /// Index of the first sample of `s` on the fit axis.
    pub fn start_index(&self, s: &Series) -> Result<i64> {
        let offset = (s.t0() - self.origin) / self.dt;
        let idx = offset.round();
        if (offset - idx).abs() > 1e-6 || (s.dt() - self.dt).abs() > 1e-9 * self.dt {
            return arg(format!(
                "series at t0={} is not aligned with the pipeline axis",
                s.t0()
            ));
        }
        Ok(idx as i64)
    }

    pub fn forward_at(&self, values: &[f64], start: i64) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let i = start + k as i64;
                let mut out = v;
                if let Some(sm) = &self.seasonal {
                    out /= sm.index_at(i);
                }
                if let Some(tm) = &self.trend {
                    out -= tm.eval(i);
                }
                out
            })
            .collect()
    }

    pub fn inverse_at(&self, values: &[f64], start: i64) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let i = start + k as i64;
                let mut out = v;
                if let Some(tm) = &self.trend {
                    out += tm.eval(i);
                }
                if let Some(sm) = &self.seasonal {
                    out *= sm.index_at(i);
                }
                out
            })
            .collect()
    }

    /// Forward transform of a series on (or continuing) the fit axis.
    pub fn apply(&self, s: &Series) -> Result<Series> {
        let start = self.start_index(s)?;
        s.with_values(self.forward_at(s.values(), start))
    }

    /// Restores the original scale of values placed on the fit axis.
    pub fn invert(&self, s: &Series) -> Result<Series> {
        let start = self.start_index(s)?;
        s.with_values(self.inverse_at(s.values(), start))
    }
}
