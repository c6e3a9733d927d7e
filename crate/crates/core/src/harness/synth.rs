use super::data::NamedSeries;
use crate::error::{arg, Result};
use crate::series::Series;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Monthly-style series: level x (trend) x seasonal profile + AR(1) noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub count: usize,
    pub length: usize,
    pub period: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            count: 10,
            length: 126,
            period: 12,
            seed: 0,
        }
    }
}

/// Generates strictly positive nonstationary series.
pub fn synth(cfg: &SynthConfig) -> Result<Vec<NamedSeries>> {
    if cfg.length < 2 || cfg.period < 2 {
        return arg("synthetic series need length >= 2 and period >= 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|i| {
            let level = rng.gen_range(50.0..500.0);
            let slope = rng.gen_range(-0.002..0.008) * level;
            let curve = rng.gen_range(-2e-5..4e-5) * level;
            let amp = rng.gen_range(0.05..0.3);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let harmonic = rng.gen_range(0.0..0.4);
            let phi: f64 = rng.gen_range(0.3..0.8);
            let sigma = rng.gen_range(0.01..0.05) * level;
            let mut noise = 0.0;
            let values = (0..cfg.length)
                .map(|t| {
                    let tf = t as f64;
                    let w = 2.0 * PI * tf / cfg.period as f64 + phase;
                    let season = 1.0 + amp * (w.sin() + harmonic * (2.0 * w).cos());
                    let trend = level + slope * tf + curve * tf * tf;
                    let e: f64 = StandardNormal.sample(&mut rng);
                    noise = phi * noise + sigma * e;
                    (trend.max(0.2 * level) * season + noise).max(0.01 * level)
                })
                .collect();
            Ok(NamedSeries {
                id: format!("syn{:03}", i + 1),
                series: Series::new(values)?,
            })
        })
        .collect()
}
