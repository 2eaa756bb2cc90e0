//! Seeded Gaussian ensembles and the chi-distribution mean.
//!
//! Every draw comes from a ChaCha8 stream selected by `(master_seed,
//! stream_index)`. ChaCha exposes 2^64 independent streams per seed, so a
//! trial can own its stream without any shared generator state.
//!
//! Within one trial stream the experiments consume draws in a fixed order:
//! the measurement matrix `G` (row-major), the noise `z`, then the auxiliary
//! draws `g`, `h` and the scalar paired with the noise column.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::linalg::{Matrix, Vector};
use crate::{Error, Result};

/// Identifies one reproducible stream of standard normal draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Opens the stream at its first draw.
    pub fn stream(&self) -> GaussianStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        GaussianStream { rng }
    }
}

/// Stateful cursor over a [`RandomSource`]; successive calls continue the stream.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn vector(&mut self, dim: usize) -> Result<Vector> {
        if dim == 0 {
            return Err(Error::InvalidDimension("vector dimension must be >= 1".into()));
        }
        Ok(Vector::from_fn(dim, |_, _| self.next_normal()))
    }

    /// Draws a `rows x cols` matrix, filling row by row.
    pub fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix shape {rows}x{cols} has a zero dimension"
            )));
        }
        let data: Vec<f64> = (0..rows * cols).map(|_| self.next_normal()).collect();
        Ok(Matrix::from_row_slice(rows, cols, &data))
    }
}

pub fn sample_gaussian_vector(source: RandomSource, dim: usize) -> Result<Vector> {
    source.stream().vector(dim)
}

pub fn sample_gaussian_matrix(source: RandomSource, rows: usize, cols: usize) -> Result<Matrix> {
    source.stream().matrix(rows, cols)
}

/// `gamma_m = E ||g||_2` for `g ~ N(0, I_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiMean {
    pub m: usize,
    pub value: f64,
}

/// Exact mean of the chi distribution with `m` degrees of freedom,
/// `sqrt(2) * Gamma((m+1)/2) / Gamma(m/2)`, evaluated in log space.
pub fn gamma_m(m: usize) -> Result<ChiMean> {
    if m == 0 {
        return Err(Error::InvalidDimension("gamma_m needs m >= 1".into()));
    }
    let half = m as f64 / 2.0;
    let log_ratio = ln_gamma(half + 0.5) - ln_gamma(half);
    let value = std::f64::consts::SQRT_2 * log_ratio.exp();
    Ok(ChiMean { m, value })
}
