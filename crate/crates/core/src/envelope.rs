//! Extrema detection and natural cubic-spline envelopes.

use crate::error::{arg, Error, Result};
use serde::{Deserialize, Serialize};

/// A (possibly synthetic) extremum at an integer sample index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: i64,
    pub value: f64,
}

impl Extremum {
    pub fn new(t: i64, value: f64) -> Self {
        Self { t, value }
    }
}

/// Local maxima and minima, each ordered by strictly increasing `t`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtremaSet {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
}

impl ExtremaSet {
    pub fn negated(&self) -> ExtremaSet {
        let neg = |v: &[Extremum]| -> Vec<Extremum> {
            v.iter().map(|e| Extremum::new(e.t, -e.value)).collect()
        };
        ExtremaSet {
            maxima: neg(&self.minima),
            minima: neg(&self.maxima),
        }
    }
}

/// Interior strict local extrema of `values`.
///
/// A plateau of equal values bounded on both sides by lower (higher) samples
/// counts as one maximum (minimum) at its midpoint, rounded down. Runs that
/// touch either end of the series are never reported.
pub fn find_extrema(values: &[f64]) -> ExtremaSet {
    let n = values.len();
    let mut out = ExtremaSet::default();
    if n < 3 {
        return out;
    }
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[end + 1] == values[start] {
            end += 1;
        }
        if start > 0 && end + 1 < n {
            let v = values[start];
            let (left, right) = (values[start - 1], values[end + 1]);
            let mid = ((start + end) / 2) as i64;
            if left < v && right < v {
                out.maxima.push(Extremum::new(mid, v));
            } else if left > v && right > v {
                out.minima.push(Extremum::new(mid, v));
            }
        }
        start = end + 1;
    }
    out
}

/// Natural cubic spline through knots with strictly increasing abscissae.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return arg("a spline needs at least two knots");
        }
        if knots.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
            return arg("spline knots must be finite");
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return arg("spline knot abscissae must be strictly increasing");
        }
        let t: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let y: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let n = t.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = t[i + 1] - t[i];
                let h1 = t[i + 2] - t[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = t[i + 1] - t[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { t, y, m })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    /// Evaluates the spline; `x` must lie inside the knot span.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return arg(format!("query {x} outside knot span [{lo}, {hi}]"));
        }
        let i = match self.t.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= self.t.len() => self.t.len() - 2,
            p => p - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        Ok(a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0)
    }
}

/// Evaluates the natural cubic spline through `knots` at each query point.
pub fn spline_interpolate(knots: &[(f64, f64)], query: &[f64]) -> Result<Vec<f64>> {
    let spline = NaturalSpline::new(knots)?;
    query.iter().map(|&x| spline.eval(x)).collect()
}

fn envelope(knots: &[Extremum], n: usize, label: &str) -> Result<Vec<f64>> {
    if knots.len() < 2 {
        return Err(Error::DegenerateEnvelope(format!(
            "{label} envelope needs two knots, found {}",
            knots.len()
        )));
    }
    let pts: Vec<(f64, f64)> = knots.iter().map(|e| (e.t as f64, e.value)).collect();
    let spline = NaturalSpline::new(&pts)?;
    (0..n).map(|i| spline.eval(i as f64)).collect()
}

/// Upper and lower envelopes sampled at every index `0..n`.
///
/// The extrema must already be extended so that both knot lists cover `[0, n-1]`.
pub fn build_envelopes(n: usize, ext: &ExtremaSet) -> Result<(Vec<f64>, Vec<f64>)> {
    let upper = envelope(&ext.maxima, n, "upper")?;
    let lower = envelope(&ext.minima, n, "lower")?;
    Ok((upper, lower))
}
