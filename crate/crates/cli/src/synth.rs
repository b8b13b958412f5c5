//! Synthetic corpus generator: AR(2) series with regime switches and an
//! optional seasonal component, for protocol tests and desk-scale runs.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fcomb_core::rng::{derive_seed, seeded_rng};
use fcomb_core::series::TimeSeries;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub n_series: usize,
    pub length: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            n_series: 20,
            length: 1100,
            seed: 7,
        }
    }
}

struct Regime {
    intercept: f64,
    phi1: f64,
    phi2: f64,
    noise_sd: f64,
}

/// Draws AR(2) coefficients inside the stationarity triangle with margin.
fn draw_regime(rng: &mut ChaCha8Rng) -> Regime {
    loop {
        let phi1: f64 = rng.random_range(-1.1..1.1);
        let phi2: f64 = rng.random_range(-0.8..0.8);
        if phi1 + phi2 < 0.92 && phi2 - phi1 < 0.92 && phi2.abs() < 0.92 {
            return Regime {
                intercept: rng.random_range(-1.5..1.5),
                phi1,
                phi2,
                noise_sd: rng.random_range(0.4..1.2),
            };
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per draw keeps this dependency-free.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    let radius: f64 = (-2.0 * u1.ln()).sqrt();
    radius * (std::f64::consts::TAU * u2).cos()
}

/// One AR(2) series with 2-4 regimes and, for two thirds of the series, an
/// additive seasonal cycle.
pub fn generate_series(id: &str, length: usize, seed: u64) -> TimeSeries {
    let mut rng = seeded_rng(seed);
    let n_regimes = rng.random_range(2..=4usize);
    let mut switch_points: Vec<usize> = (0..n_regimes - 1)
        .map(|_| rng.random_range(length / 5..length * 4 / 5))
        .collect();
    switch_points.sort_unstable();

    let period = match rng.random_range(0..3u32) {
        0 => None,
        1 => Some(12),
        _ => Some(24),
    };
    let seasonal_amp = if period.is_some() {
        rng.random_range(0.5..3.0)
    } else {
        0.0
    };

    let mut regime = draw_regime(&mut rng);
    let mut next_switch = 0usize;
    let mut values = Vec::with_capacity(length);
    let (mut prev1, mut prev2) = (0.0, 0.0);
    for t in 0..length {
        if next_switch < switch_points.len() && t == switch_points[next_switch] {
            regime = draw_regime(&mut rng);
            next_switch += 1;
        }
        let seasonal = match period {
            Some(p) => seasonal_amp * (std::f64::consts::TAU * t as f64 / p as f64).sin(),
            None => 0.0,
        };
        let value = regime.intercept
            + regime.phi1 * prev1
            + regime.phi2 * prev2
            + seasonal
            + regime.noise_sd * gaussian(&mut rng);
        values.push(value);
        prev2 = prev1;
        prev1 = value;
    }
    TimeSeries::new(id, values, period).expect("generated values are finite")
}

pub fn generate_suite(options: &SynthOptions) -> Vec<TimeSeries> {
    (0..options.n_series)
        .map(|i| {
            let id = format!("synth{i:02}");
            let seed = derive_seed(options.seed, &id);
            generate_series(&id, options.length, seed)
        })
        .collect()
}

/// Writes one `<id>.csv` (with `value` header) plus a `<id>.json` manifest
/// per series.
pub fn write_corpus(dir: &Path, series: &[TimeSeries]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for s in series {
        let mut text = String::from("value\n");
        for v in &s.values {
            text.push_str(&format!("{v}\n"));
        }
        std::fs::write(dir.join(format!("{}.csv", s.id)), text)?;
        let manifest = serde_json::json!({ "id": s.id, "period": s.period });
        std::fs::write(
            dir.join(format!("{}.json", s.id)),
            serde_json::to_string_pretty(&manifest)?,
        )?;
    }
    Ok(())
}
