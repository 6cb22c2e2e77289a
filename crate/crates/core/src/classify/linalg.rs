//! Dense symmetric linear algebra for the discriminant models: sample
//! means/covariances and Cholesky-based inversion with log-determinant.
//! Matrices are row-major `Vec<f64>` of size p*p; p stays small (<= ~40).

use crate::{Error, Result};

/// Mean of the rows `data[indices]` of an n x p row-major matrix.
pub(crate) fn mean_of_rows(data: &[f64], p: usize, indices: &[usize]) -> Vec<f64> {
    let mut mean = vec![0.0; p];
    for &i in indices {
        for (m, v) in mean.iter_mut().zip(&data[i * p..(i + 1) * p]) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= indices.len() as f64;
    }
    mean
}

/// Accumulates sum_{i in indices} (x_i - mean)(x_i - mean)^T into `acc`.
pub(crate) fn accumulate_scatter(
    data: &[f64],
    p: usize,
    indices: &[usize],
    mean: &[f64],
    acc: &mut [f64],
) {
    let mut centered = vec![0.0; p];
    for &i in indices {
        for (c, (x, m)) in centered
            .iter_mut()
            .zip(data[i * p..(i + 1) * p].iter().zip(mean))
        {
            *c = x - m;
        }
        for r in 0..p {
            let cr = centered[r];
            for c in 0..p {
                acc[r * p + c] += cr * centered[c];
            }
        }
    }
}

pub(crate) fn trace(a: &[f64], p: usize) -> f64 {
    (0..p).map(|i| a[i * p + i]).sum()
}

pub(crate) fn add_ridge(a: &mut [f64], p: usize, ridge: f64) {
    for i in 0..p {
        a[i * p + i] += ridge;
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Returns None when a pivot fails, meaning the matrix is not (numerically)
/// positive definite.
pub(crate) fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i * p + j];
            for k in 0..j {
                sum -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * p + i] = sum.sqrt();
            } else {
                l[i * p + j] = sum / l[j * p + j];
            }
        }
    }
    Some(l)
}

/// log(det(A)) from its Cholesky factor.
pub(crate) fn log_det_from_cholesky(l: &[f64], p: usize) -> f64 {
    2.0 * (0..p).map(|i| l[i * p + i].ln()).sum::<f64>()
}

/// A^{-1} from the Cholesky factor of A, via two triangular solves per
/// unit vector. p is small, so O(p^3) with no blocking is fine.
pub(crate) fn inverse_from_cholesky(l: &[f64], p: usize) -> Vec<f64> {
    let mut inv = vec![0.0; p * p];
    let mut y = vec![0.0; p];
    for col in 0..p {
        // L y = e_col
        for i in 0..p {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i * p + k] * y[k];
            }
            y[i] = sum / l[i * p + i];
        }
        // L^T x = y
        for i in (0..p).rev() {
            let mut sum = y[i];
            for k in i + 1..p {
                sum -= l[k * p + i] * inv[k * p + col];
            }
            inv[i * p + col] = sum / l[i * p + i];
        }
    }
    // enforce exact symmetry against rounding drift
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (inv[i * p + j] + inv[j * p + i]);
            inv[i * p + j] = v;
            inv[j * p + i] = v;
        }
    }
    inv
}

/// Numerical rank via Gaussian elimination with partial pivoting; used only
/// to name the deficient dimension count in error messages.
pub(crate) fn estimate_rank(a: &[f64], p: usize) -> usize {
    let mut m = a.to_vec();
    let scale = trace(&m, p).abs().max(1.0);
    let tol = 1e-12 * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..p {
        let (mut best, mut best_abs) = (row, 0.0);
        for r in row..p {
            let v = m[r * p + col].abs();
            if v > best_abs {
                best = r;
                best_abs = v;
            }
        }
        if best_abs <= tol {
            continue;
        }
        for c in 0..p {
            m.swap(row * p + c, best * p + c);
        }
        for r in row + 1..p {
            let f = m[r * p + col] / m[row * p + col];
            for c in col..p {
                m[r * p + c] -= f * m[row * p + c];
            }
        }
        rank += 1;
        row += 1;
        if row == p {
            break;
        }
    }
    rank
}

/// x^T A y for row-major A.
pub(crate) fn bilinear(a: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let p = x.len();
    let mut total = 0.0;
    for r in 0..p {
        let mut acc = 0.0;
        for c in 0..p {
            acc += a[r * p + c] * y[c];
        }
        total += x[r] * acc;
    }
    total
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Data(format!(
            "query has dimension {}, model expects {expected}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("query contains non-finite values".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_inverts_known_matrix() {
        // A = [[4, 2], [2, 3]], det = 8, inv = [[3, -2], [-2, 4]] / 8
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let l = cholesky(&a, 2).unwrap();
        let inv = inverse_from_cholesky(&l, 2);
        let expect = [0.375, -0.25, -0.25, 0.5];
        for (x, e) in inv.iter().zip(expect) {
            assert!((x - e).abs() < 1e-14, "{x} vs {e}");
        }
        assert!((log_det_from_cholesky(&l, 2) - 8.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut rng = crate::rng::SplitMix64::new(17);
        let p = 13;
        // build SPD as B^T B + I
        let b: Vec<f64> = (0..p * p).map(|_| rng.range_f64(-1.0, 1.0)).collect();
        let mut a = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                let mut acc = if i == j { 1.0 } else { 0.0 };
                for k in 0..p {
                    acc += b[k * p + i] * b[k * p + j];
                }
                a[i * p + j] = acc;
            }
        }
        let l = cholesky(&a, p).unwrap();
        let inv = inverse_from_cholesky(&l, p);
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..p {
                    acc += a[i * p + k] * inv[k * p + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-9, "({i},{j}) = {acc}");
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        assert!(cholesky(&a, 2).is_none());
    }

    #[test]
    fn rank_of_degenerate_matrix() {
        // rank-1 outer product
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(estimate_rank(&a, 2), 1);
        let id = vec![1.0, 0.0, 0.0, 1.0];
        assert_eq!(estimate_rank(&id, 2), 2);
        assert_eq!(estimate_rank(&vec![0.0; 9], 3), 0);
    }
}
