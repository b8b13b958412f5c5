//! Thin wrappers over nalgebra for the dense solves used by ridge fits,
//! kernel duals, and the ridge combiner.

use nalgebra::{DMatrix, DVector};

/// Solves the symmetric positive (semi-)definite system `A x = b` via
/// Cholesky, falling back to an SVD least-squares solution when the
/// factorization fails (singular or indefinite input).
pub fn solve_spd(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    let dim = a.nrows();
    if dim == 0 {
        return Some(DVector::zeros(0));
    }
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(&b));
    }
    a.svd(true, true).solve(&b, 1e-12).ok()
}

/// Ridge regression with an unpenalized intercept: minimizes
/// `sum (y - w.x - c)^2 + penalty * |w|^2`. Returns `(weights, intercept)`.
/// Centering the design keeps the intercept out of the penalty.
pub fn ridge_fit(rows: &[Vec<f64>], targets: &[f64], penalty: f64) -> Option<(Vec<f64>, f64)> {
    let n = rows.len();
    if n == 0 || n != targets.len() {
        return None;
    }
    let p = rows[0].len();
    if p == 0 {
        let mean = targets.iter().sum::<f64>() / n as f64;
        return Some((Vec::new(), mean));
    }
    let mut x_mean = vec![0.0; p];
    for row in rows {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut x_mean {
        *m /= n as f64;
    }
    let y_mean = targets.iter().sum::<f64>() / n as f64;

    let mut gram = DMatrix::zeros(p, p);
    let mut moment = DVector::zeros(p);
    for (row, &y) in rows.iter().zip(targets) {
        let centered: Vec<f64> = row.iter().zip(&x_mean).map(|(v, m)| v - m).collect();
        let yc = y - y_mean;
        for i in 0..p {
            moment[i] += centered[i] * yc;
            for j in i..p {
                gram[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
        gram[(i, i)] += penalty;
    }
    let weights = solve_spd(gram, moment)?;
    if weights.iter().any(|w| !w.is_finite()) {
        return None;
    }
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    if !intercept.is_finite() {
        return None;
    }
    Some((weights.as_slice().to_vec(), intercept))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_interpolates_exact_line() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let targets: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let (w, c) = ridge_fit(&rows, &targets, 0.0).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-9);
        assert!((c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn heavy_penalty_shrinks_weights_toward_zero() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let x = i as f64 / 7.5 - 2.0;
                vec![x, x * x]
            })
            .collect();
        let targets: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] - 0.5 * r[1]).collect();
        let norm = |penalty: f64| {
            let (w, _) = ridge_fit(&rows, &targets, penalty).unwrap();
            w.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let n0 = norm(0.0);
        let n1 = norm(1.0);
        let n2 = norm(1e6);
        assert!(n0 >= n1 && n1 >= n2);
        assert!(n2 < 1e-2 * n0.max(1.0));
    }

    #[test]
    fn singular_design_still_solves() {
        // Duplicate columns with zero penalty: SVD fallback returns a
        // minimum-norm solution that still fits the targets.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let targets: Vec<f64> = (0..10).map(|i| 4.0 * i as f64).collect();
        let (w, c) = ridge_fit(&rows, &targets, 0.0).unwrap();
        for (row, &y) in rows.iter().zip(&targets) {
            let pred = w[0] * row[0] + w[1] * row[1] + c;
            assert!((pred - y).abs() < 1e-6);
        }
    }
}
