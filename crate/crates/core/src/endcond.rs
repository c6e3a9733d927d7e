//! Boundary extension strategies applied before envelope construction.
//!
//! Every method synthesizes extrema beyond both ends of the series so that
//! the upper and lower spline envelopes span `[0, N-1]`. Start-side rules are
//! written once; the end side runs the same rule on the time-reflected
//! extrema (`t -> N-1-t`) and maps the result back.

use crate::envelope::{find_extrema, ExtremaSet, Extremum};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndConditionMethod {
    /// Clamp both envelopes to the observed endpoints.
    None,
    Mirror,
    Coughlin,
    #[serde(rename = "sbm")]
    SlopeBased,
    Rato,
}

impl EndConditionMethod {
    pub const ALL: [EndConditionMethod; 5] = [
        EndConditionMethod::None,
        EndConditionMethod::Mirror,
        EndConditionMethod::Coughlin,
        EndConditionMethod::SlopeBased,
        EndConditionMethod::Rato,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EndConditionMethod::None => "none",
            EndConditionMethod::Mirror => "mirror",
            EndConditionMethod::Coughlin => "coughlin",
            EndConditionMethod::SlopeBased => "sbm",
            EndConditionMethod::Rato => "rato",
        }
    }

    /// Minimum count of interior maxima (and of minima) the method needs.
    pub fn min_extrema(self) -> usize {
        match self {
            EndConditionMethod::Coughlin | EndConditionMethod::SlopeBased => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for EndConditionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EndConditionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EndConditionMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Argument(format!("unknown end condition '{s}'")))
    }
}

/// Interior extrema plus the synthetic extrema added at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedExtrema {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
}

impl ExtendedExtrema {
    pub fn as_set(&self) -> ExtremaSet {
        ExtremaSet {
            maxima: self.maxima.clone(),
            minima: self.minima.clone(),
        }
    }

    /// True when both knot lists reach `t <= 0` and `t >= n-1`.
    pub fn covers(&self, n: usize) -> bool {
        let last = n as i64 - 1;
        [&self.maxima, &self.minima].iter().all(|v| {
            matches!((v.first(), v.last()), (Some(a), Some(b)) if a.t <= 0 && b.t >= last)
        })
    }
}

/// Extends `ext` (the interior extrema of `values`) at both ends.
pub fn extend(
    method: EndConditionMethod,
    values: &[f64],
    ext: &ExtremaSet,
) -> Result<ExtendedExtrema> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Argument("series too short to extend".into()));
    }
    let need = method.min_extrema();
    if ext.maxima.len() < need || ext.minima.len() < need {
        return Err(Error::DegenerateEnvelope(format!(
            "{method} needs {need} maxima and minima, found {} and {}",
            ext.maxima.len(),
            ext.minima.len()
        )));
    }
    let (head_max, head_min) = extend_start(method, ext, values[0])?;
    let reflected = reflect(ext, n);
    let (tail_max, tail_min) = extend_start(method, &reflected, values[n - 1])?;
    let back = |v: Vec<Extremum>| -> Vec<Extremum> {
        v.into_iter()
            .rev()
            .map(|e| Extremum::new(n as i64 - 1 - e.t, e.value))
            .collect()
    };
    let join = |head: Vec<Extremum>, body: &[Extremum], tail: Vec<Extremum>| {
        let mut out = head;
        out.extend_from_slice(body);
        out.extend(back(tail));
        out
    };
    Ok(ExtendedExtrema {
        maxima: join(head_max, &ext.maxima, tail_max),
        minima: join(head_min, &ext.minima, tail_min),
    })
}

pub fn extend_none(values: &[f64], ext: &ExtremaSet) -> Result<ExtendedExtrema> {
    extend(EndConditionMethod::None, values, ext)
}

pub fn extend_mirror(values: &[f64], ext: &ExtremaSet) -> Result<ExtendedExtrema> {
    extend(EndConditionMethod::Mirror, values, ext)
}

pub fn extend_coughlin(values: &[f64], ext: &ExtremaSet) -> Result<ExtendedExtrema> {
    extend(EndConditionMethod::Coughlin, values, ext)
}

pub fn extend_sbm(values: &[f64], ext: &ExtremaSet) -> Result<ExtendedExtrema> {
    extend(EndConditionMethod::SlopeBased, values, ext)
}

pub fn extend_rato(values: &[f64], ext: &ExtremaSet) -> Result<ExtendedExtrema> {
    extend(EndConditionMethod::Rato, values, ext)
}

/// Maps `t -> n-1-t`, keeping each list in increasing order.
fn reflect(ext: &ExtremaSet, n: usize) -> ExtremaSet {
    let flip = |v: &[Extremum]| -> Vec<Extremum> {
        v.iter()
            .rev()
            .map(|e| Extremum::new(n as i64 - 1 - e.t, e.value))
            .collect()
    };
    ExtremaSet {
        maxima: flip(&ext.maxima),
        minima: flip(&ext.minima),
    }
}

/// Synthetic extrema to prepend before `t = 0`, in increasing order.
///
/// Rules that do not reach `t <= 0` for both types in one application are
/// re-applied on the growing set until they do.
fn extend_start(
    method: EndConditionMethod,
    ext: &ExtremaSet,
    boundary_value: f64,
) -> Result<(Vec<Extremum>, Vec<Extremum>)> {
    if method == EndConditionMethod::None {
        let e = Extremum::new(0, boundary_value);
        return Ok((vec![e], vec![e]));
    }
    // Working lists stored outermost-last so prepending is a push.
    let mut max_rev: Vec<Extremum> = ext.maxima.iter().rev().copied().collect();
    let mut min_rev: Vec<Extremum> = ext.minima.iter().rev().copied().collect();
    let (n_max, n_min) = (max_rev.len(), min_rev.len());
    let span = ext
        .maxima
        .iter()
        .chain(&ext.minima)
        .map(|e| e.t.unsigned_abs())
        .max()
        .unwrap_or(0) as usize;
    let mut rounds = 0;
    let mut slopes: Option<(f64, f64)> = None;
    while max_rev.last().map_or(true, |e| e.t > 0) || min_rev.last().map_or(true, |e| e.t > 0) {
        rounds += 1;
        if rounds > 2 * span + 8 {
            return Err(Error::DegenerateEnvelope(format!(
                "{method} extension failed to reach the boundary"
            )));
        }
        let first_max = *max_rev.last().expect("non-empty");
        let first_min = *min_rev.last().expect("non-empty");
        match method {
            EndConditionMethod::None => unreachable!(),
            EndConditionMethod::Mirror => {
                // Reflect the outer extremum of one type across the
                // boundary-nearest extremum of the other type.
                if first_max.t < first_min.t {
                    min_rev.push(Extremum::new(2 * first_max.t - first_min.t, first_min.value));
                } else {
                    max_rev.push(Extremum::new(2 * first_min.t - first_max.t, first_max.value));
                }
            }
            EndConditionMethod::Rato => {
                min_rev.push(Extremum::new(-first_max.t, first_min.value));
                max_rev.push(Extremum::new(-first_min.t, first_max.value));
            }
            EndConditionMethod::SlopeBased => {
                let second_max = max_rev[max_rev.len() - 2];
                let second_min = min_rev[min_rev.len() - 2];
                let (t_max_0, t_min_0, p0, q0, used) =
                    slope_based_step(first_max, second_max, first_min, second_min, slopes)?;
                slopes = Some(used);
                min_rev.push(Extremum::new(t_min_0, q0));
                max_rev.push(Extremum::new(t_max_0, p0));
            }
            EndConditionMethod::Coughlin => {
                let (wave_max, wave_min) = coughlin_wave_extrema(first_max, first_min)?;
                max_rev.extend(wave_max.into_iter().rev());
                min_rev.extend(wave_min.into_iter().rev());
            }
        }
    }
    let added = |mut v: Vec<Extremum>, base: usize| -> Vec<Extremum> {
        v.drain(..base);
        v.reverse();
        v
    };
    Ok((added(max_rev, n_max), added(min_rev, n_min)))
}

/// One slope-based step: returns `(t(Max0), t(Min0), P(0), Q(0), (s1, s2))`.
///
/// Synthetic extrema from an earlier round may share a time stamp; those
/// rounds reuse the `previous` slopes.
fn slope_based_step(
    max1: Extremum,
    max2: Extremum,
    min1: Extremum,
    min2: Extremum,
    previous: Option<(f64, f64)>,
) -> Result<(i64, i64, f64, f64, (f64, f64))> {
    let (s1, s2) = if max2.t == min1.t || min1.t == max1.t {
        previous.ok_or_else(|| Error::Argument("coincident extrema times".into()))?
    } else {
        (
            (max2.value - min1.value) / (max2.t - min1.t) as f64,
            (min1.value - max1.value) / (min1.t - max1.t) as f64,
        )
    };
    let dt_max = max2.t - max1.t;
    let dt_min = min2.t - min1.t;
    let t_min_0 = min1.t - dt_min;
    let t_max_0 = max1.t - dt_max;
    let q0 = max1.value - s1 * (max1.t - t_min_0) as f64;
    let p0 = q0 - s2 * (t_min_0 - t_max_0) as f64;
    Ok((t_max_0, t_min_0, p0, q0, (s1, s2)))
}

/// Amplitude, period and local mean of the typical boundary wave.
pub(crate) fn coughlin_parameters(max1: Extremum, min1: Extremum) -> Result<(f64, i64, f64)> {
    let amplitude = (max1.value - min1.value).abs();
    let period = 2 * (max1.t - min1.t).abs();
    if period == 0 {
        return Err(Error::Argument("coincident extrema times".into()));
    }
    Ok((amplitude, period, 0.5 * (max1.value + min1.value)))
}

/// Extrema of one period of the sinusoidal wave continued outward from the
/// boundary-nearest extremum, ordered by increasing `t`.
fn coughlin_wave_extrema(
    max1: Extremum,
    min1: Extremum,
) -> Result<(Vec<Extremum>, Vec<Extremum>)> {
    let (amplitude, period, mean) = coughlin_parameters(max1, min1)?;
    let (anchor, phase) = if max1.t < min1.t {
        (max1.t, FRAC_PI_2)
    } else {
        (min1.t, -FRAC_PI_2)
    };
    // boundary sits at min(anchor, 0); sample one extra point so the
    // outermost wave extremum is interior to the sampled window
    let lo = anchor.min(0) - period - 1;
    let wave: Vec<f64> = (lo..=anchor)
        .map(|t| {
            let arg = 2.0 * PI * (t - anchor) as f64 / period as f64 + phase;
            0.5 * amplitude * arg.sin() + mean
        })
        .collect();
    let found = find_extrema(&wave);
    let shift = |v: Vec<Extremum>| -> Vec<Extremum> {
        v.into_iter().map(|e| Extremum::new(e.t + lo, e.value)).collect()
    };
    Ok((shift(found.maxima), shift(found.minima)))
}
