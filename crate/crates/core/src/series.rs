//! Uniformly sampled series and the IMF/residue decomposition container.

use crate::error::{arg, Error, Result};
use serde::{Deserialize, Serialize};

/// Uniformly sampled, finite real observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    t0: f64,
    dt: f64,
}

impl Series {
    /// Builds a series with origin 0 and unit step.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_axis(values, 0.0, 1.0)
    }

    pub fn with_axis(values: Vec<f64>, t0: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return arg(format!("time step must be positive and finite, got dt={dt}"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return arg(format!("non-finite value at index {i}"));
        }
        Ok(Self { values, t0, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Time stamp of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    /// Series sharing this axis but holding new values.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::with_axis(values, self.t0, self.dt)
    }

    /// Appends observations, keeping the time axis.
    pub fn extended(&self, more: &[f64]) -> Result<Self> {
        let mut values = self.values.clone();
        values.extend_from_slice(more);
        self.with_values(values)
    }

    /// Splits off the last `h` points as a hold-out sample.
    pub fn split_holdout(&self, h: usize) -> Result<(Series, Series)> {
        let n = self.len();
        if h == 0 || h >= n {
            return arg(format!("hold-out size {h} must lie in 1..{n}"));
        }
        let cut = n - h;
        let head = Self::with_axis(self.values[..cut].to_vec(), self.t0, self.dt)?;
        let tail = Self::with_axis(self.values[cut..].to_vec(), self.time(cut), self.dt)?;
        Ok((head, tail))
    }
}

/// One intrinsic mode function with its 1-based extraction order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imf {
    pub index: usize,
    pub values: Vec<f64>,
}

/// IMFs in extraction order plus the residue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub imfs: Vec<Imf>,
    pub residue: Vec<f64>,
    pub source_length: usize,
}

impl Decomposition {
    pub fn n_imfs(&self) -> usize {
        self.imfs.len()
    }

    /// All components, IMFs first and the residue last.
    pub fn components(&self) -> Vec<&[f64]> {
        self.imfs
            .iter()
            .map(|imf| imf.values.as_slice())
            .chain(std::iter::once(self.residue.as_slice()))
            .collect()
    }

    /// Element-wise sum of every IMF and the residue.
    pub fn reconstruct(&self) -> Result<Series> {
        let n = self.residue.len();
        if n != self.source_length {
            return Err(Error::Structure {
                expected: self.source_length,
                found: n,
            });
        }
        let mut out = vec![0.0; n];
        for imf in &self.imfs {
            if imf.values.len() != n {
                return Err(Error::Structure {
                    expected: n,
                    found: imf.values.len(),
                });
            }
            for (o, v) in out.iter_mut().zip(&imf.values) {
                *o += v;
            }
        }
        for (o, r) in out.iter_mut().zip(&self.residue) {
            *o += r;
        }
        Series::new(out)
    }
}
