//! Sifting with a pluggable end condition.

use crate::endcond::{extend, EndConditionMethod};
use crate::envelope::{build_envelopes, find_extrema};
use crate::error::{arg, Error, Result};
use crate::series::{Decomposition, Imf, Series};
use serde::{Deserialize, Serialize};

/// Sifting controls. `max_imfs = None` means `floor(log2 N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftingConfig {
    pub passes_per_imf: usize,
    pub max_imfs: Option<usize>,
    pub end_condition: EndConditionMethod,
}

impl Default for SiftingConfig {
    fn default() -> Self {
        Self {
            passes_per_imf: 10,
            max_imfs: None,
            end_condition: EndConditionMethod::Rato,
        }
    }
}

impl SiftingConfig {
    pub fn with_end_condition(end_condition: EndConditionMethod) -> Self {
        Self {
            end_condition,
            ..Self::default()
        }
    }

    /// Effective IMF cap for a series of length `n`.
    pub fn imf_cap(&self, n: usize) -> usize {
        self.max_imfs.unwrap_or_else(|| floor_log2(n)).min(floor_log2(n))
    }
}

pub(crate) fn floor_log2(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

/// One sifting pass: `h` minus the mean of its extended envelopes.
pub fn sift_pass(h: &[f64], ec: EndConditionMethod) -> Result<Vec<f64>> {
    if h.len() < 4 {
        return arg("sifting needs at least 4 samples");
    }
    if h.iter().all(|&v| v == 0.0) {
        return Ok(h.to_vec());
    }
    let ext = extend(ec, h, &find_extrema(h))?;
    let (upper, lower) = build_envelopes(h.len(), &ext.as_set())?;
    Ok(h
        .iter()
        .zip(upper.iter().zip(&lower))
        .map(|(v, (u, l))| v - 0.5 * (u + l))
        .collect())
}

fn is_residue(values: &[f64]) -> bool {
    let e = find_extrema(values);
    e.maxima.len() < 2 || e.minima.len() < 2
}

/// Decomposes `s` into IMFs and a residue.
///
/// Each IMF is the result of exactly `passes_per_imf` sifting passes. A pass
/// that cannot build envelopes ends sifting for that IMF early; if it happens
/// on the first pass the running residue is final.
pub fn decompose(s: &Series, cfg: &SiftingConfig) -> Result<Decomposition> {
    let x = s.values();
    let n = x.len();
    if n < 8 {
        return arg(format!("decomposition needs at least 8 samples, got {n}"));
    }
    if cfg.passes_per_imf == 0 || cfg.max_imfs == Some(0) {
        return arg("passes_per_imf and max_imfs must be at least 1");
    }
    let cap = cfg.imf_cap(n);
    let mut residue = x.to_vec();
    let mut imfs: Vec<Imf> = Vec::new();
    while imfs.len() < cap && !is_residue(&residue) {
        let mut h = residue.clone();
        let mut passes = 0;
        for _ in 0..cfg.passes_per_imf {
            match sift_pass(&h, cfg.end_condition) {
                Ok(next) => {
                    h = next;
                    passes += 1;
                }
                Err(Error::DegenerateEnvelope(_)) => break,
                Err(e) => return Err(e),
            }
        }
        if passes == 0 {
            break;
        }
        for (r, v) in residue.iter_mut().zip(&h) {
            *r -= v;
        }
        imfs.push(Imf {
            index: imfs.len() + 1,
            values: h,
        });
    }
    // residue by subtraction from the source keeps reconstruction exact
    let mut residue = x.to_vec();
    for imf in &imfs {
        for (r, v) in residue.iter_mut().zip(&imf.values) {
            *r -= v;
        }
    }
    Ok(Decomposition {
        imfs,
        residue,
        source_length: n,
    })
}

/// Count of sign changes, ignoring exact zeros.
pub fn zero_crossings(values: &[f64]) -> usize {
    let signs: Vec<bool> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
