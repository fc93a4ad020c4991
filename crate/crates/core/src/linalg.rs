//! Small dense symmetric positive-definite solver.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Solves `a * x = b` for symmetric positive-definite `a` (row-major, `n x n`).
///
/// The system is Jacobi-scaled to unit diagonal before the Cholesky
/// factorisation; a pivot below `1e-12` after scaling is reported as
/// [`Error::IllConditioned`].
pub(crate) fn solve_spd(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let d = a[i * n + i];
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::IllConditioned);
        }
        scale.push(1.0 / libm::sqrt(d));
    }

    // Lower-triangular factor of the scaled matrix, stored row-major.
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j] * scale[i] * scale[j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum.partial_cmp(&1e-12) != Some(core::cmp::Ordering::Greater) {
                    return Err(Error::IllConditioned);
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }

    let mut y: Vec<f64> = b.iter().zip(&scale).map(|(v, s)| v * s).collect();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Ok(y.iter().zip(&scale).map(|(v, s)| v * s).collect())
}
