//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Iteration cap for [`spectral_norm`].
pub const POWER_ITERATIONS: usize = 100;
/// Relative change at which [`spectral_norm`] stops early.
pub const POWER_TOLERANCE: f64 = 1e-8;

/// Estimates `||A||_2` by power iteration on `A^T A`.
///
/// The start vector is deterministic so repeated calls agree bit-for-bit.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension("empty matrix".into()));
    }
    // Slightly non-uniform start so it is unlikely to be orthogonal to the top singular vector.
    let mut v = Vector::from_fn(n, |i, _| 1.0 + 1e-3 * ((i % 7) as f64));
    v /= v.norm();
    let mut estimate = 0.0_f64;
    for _ in 0..POWER_ITERATIONS {
        let av = a * &v;
        let mut w = a.tr_mul(&av);
        let wn = w.norm();
        if !wn.is_finite() {
            return Err(Error::Numeric("non-finite value in power iteration".into()));
        }
        if wn == 0.0 {
            // v lies in the null space; A may still be nonzero elsewhere.
            if a.iter().all(|x| *x == 0.0) {
                return Ok(0.0);
            }
            v = Vector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
            continue;
        }
        w /= wn;
        let next = wn.sqrt();
        v = w;
        if (next - estimate).abs() <= POWER_TOLERANCE * next {
            estimate = next;
            break;
        }
        estimate = next;
    }
    if !(estimate.is_finite() && estimate > 0.0) {
        return Err(Error::Numeric("spectral norm estimate failed".into()));
    }
    // Power iteration approaches from below; a hair of inflation keeps 1/L steps safe.
    Ok(estimate * (1.0 + 1e-6))
}

/// Median of a slice; NaN entries are not expected.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
