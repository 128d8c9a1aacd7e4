//! Seeded Monte Carlo estimation.
//!
//! Sample `i` of a run with master seed `s` always draws from the ChaCha20
//! stream `(s, i)`, and per-sample values are reduced in index order, so an
//! estimate is bit-identical for any number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::pairwise_sum;

/// Acceptance threshold for statistical comparisons, in standard errors.
pub const SIGMA_THRESHOLD: f64 = 4.0;

/// Independent random stream for one sample.
pub fn stream_rng(master_seed: u64, sample_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(sample_index);
    rng
}

/// Haar code ensemble parameters for a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub ambient_dim: usize,
    pub code_dim: usize,
    pub sample_count: usize,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(ambient_dim: usize, code_dim: usize, sample_count: usize, master_seed: u64) -> Result<Self> {
        if code_dim == 0 || code_dim > ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "code dimension {code_dim} must lie in 1..={ambient_dim}"
            )));
        }
        if sample_count == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        Ok(EnsembleSpec {
            ambient_dim,
            code_dim,
            sample_count,
            master_seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(sample_count)`; zero for one sample.
    pub std_error: f64,
    pub sample_count: usize,
    pub master_seed: u64,
}

impl EnsembleEstimate {
    pub fn from_samples(values: &[f64], master_seed: u64) -> Self {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let std_error = if n > 1 {
            let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&sq) / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        EnsembleEstimate {
            mean,
            std_error,
            sample_count: n,
            master_seed,
        }
    }

    /// Signed distance to `target` in standard errors. Exact agreement
    /// with zero error counts as 0; any disagreement with zero error is infinite.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if diff == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            diff.signum() * f64::INFINITY
        } else {
            diff / self.std_error
        }
    }

    pub fn agrees_with(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target).abs() <= sigmas
    }
}

/// Evaluates `f` on `samples` independent streams and summarises the results.
pub fn estimate<F>(samples: usize, master_seed: u64, f: F) -> EnsembleEstimate
where
    F: Fn(&mut ChaCha20Rng) -> f64 + Sync,
{
    let values = sample_values(samples, master_seed, |rng| vec![f(rng)]);
    EnsembleEstimate::from_samples(&values[0], master_seed)
}

/// Like [`estimate`] for `f` returning several statistics per sample.
pub fn estimate_many<F>(samples: usize, master_seed: u64, f: F) -> Vec<EnsembleEstimate>
where
    F: Fn(&mut ChaCha20Rng) -> Vec<f64> + Sync,
{
    sample_values(samples, master_seed, f)
        .iter()
        .map(|column| EnsembleEstimate::from_samples(column, master_seed))
        .collect()
}

/// Per-statistic columns of sample values, in sample order.
pub fn sample_values<F>(samples: usize, master_seed: u64, f: F) -> Vec<Vec<f64>>
where
    F: Fn(&mut ChaCha20Rng) -> Vec<f64> + Sync,
{
    let rows: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| f(&mut stream_rng(master_seed, i)))
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    (0..width).map(|k| rows.iter().map(|r| r[k]).collect()).collect()
}
