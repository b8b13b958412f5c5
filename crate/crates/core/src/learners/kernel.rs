//! Kernel ridge regression in the dual: features are standardized, targets
//! centered, and the coefficients solve `(K + penalty * I) alpha = y`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::linalg::solve_spd;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "kebab-case")]
pub enum Kernel {
    Rbf {
        gamma: f64,
    },
    Laplace {
        gamma: f64,
    },
    Polynomial {
        degree: u32,
        offset: f64,
        scale: f64,
    },
}

impl Kernel {
    pub fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Kernel::Rbf { gamma } | Kernel::Laplace { gamma } => {
                if !(gamma.is_finite() && *gamma > 0.0) {
                    return Err("kernel gamma must be finite and > 0".into());
                }
            }
            Kernel::Polynomial {
                degree,
                offset,
                scale,
            } => {
                if *degree < 1 {
                    return Err("polynomial degree must be >= 1".into());
                }
                if !offset.is_finite() || !scale.is_finite() || *scale <= 0.0 {
                    return Err("polynomial offset/scale must be finite, scale > 0".into());
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Laplace { gamma } => {
                let d1: f64 = u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum();
                (-gamma * d1).exp()
            }
            Kernel::Polynomial {
                degree,
                offset,
                scale,
            } => {
                let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                (offset + scale * dot).powi(*degree as i32)
            }
        }
    }
}

fn standardize(row: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(mean)
        .zip(scale)
        .map(|((v, m), s)| (v - m) / s)
        .collect()
}

pub fn fit(
    kernel: &Kernel,
    penalty: f64,
    features: &[Vec<f64>],
    targets: &[f64],
) -> Option<ModelParams> {
    let n = targets.len();
    let p = features.first()?.len();

    let mut x_mean = vec![0.0; p];
    for row in features {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut x_mean {
        *m /= n as f64;
    }
    let mut x_scale = vec![0.0; p];
    for row in features {
        for ((s, v), m) in x_scale.iter_mut().zip(row).zip(&x_mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut x_scale {
        *s = (*s / n as f64).sqrt();
        if *s <= 0.0 {
            *s = 1.0;
        }
    }
    let y_mean = targets.iter().sum::<f64>() / n as f64;

    let support: Vec<Vec<f64>> = features
        .iter()
        .map(|r| standardize(r, &x_mean, &x_scale))
        .collect();

    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(&support[i], &support[j]);
            gram[(i, j)] = k;
            gram[(j, i)] = k;
        }
        // A small floor keeps the dual solvable even with penalty = 0.
        gram[(i, i)] += penalty.max(1e-10);
    }
    let y_centered = DVector::from_iterator(n, targets.iter().map(|y| y - y_mean));
    let alphas = solve_spd(gram, y_centered)?;
    if alphas.iter().any(|a| !a.is_finite()) {
        return None;
    }

    Some(ModelParams::Kernel {
        kernel: kernel.clone(),
        alphas: alphas.as_slice().to_vec(),
        support,
        x_mean,
        x_scale,
        y_mean,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn predict_row(
    kernel: &Kernel,
    alphas: &[f64],
    support: &[Vec<f64>],
    x_mean: &[f64],
    x_scale: &[f64],
    y_mean: f64,
    row: &[f64],
) -> f64 {
    let z = standardize(row, x_mean, x_scale);
    let dot: f64 = alphas
        .iter()
        .zip(support)
        .map(|(a, s)| a * kernel.eval(&z, s))
        .sum();
    y_mean + dot
}
