//! Exact sampling of stationary Gaussian sequences by circulant embedding.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Eigenvalues below `-EIGEN_TOL · γ(0)` abort; smaller negatives are clipped.
pub const EIGEN_TOL: f64 = 1e-9;

/// Sampler for a centered stationary sequence with autocovariance `gamma`.
#[derive(Clone)]
pub struct CirculantSampler {
    n: usize,
    scale: Vec<f64>,
    fft: Option<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("n", &self.n)
            .field("embedding", &self.scale.len())
            .finish()
    }
}

impl CirculantSampler {
    /// Build from `gamma[0..n]`; the embedding has size `2(n - 1)`.
    pub fn new(gamma: &[f64]) -> Result<Self> {
        let n = gamma.len();
        if n == 0 {
            return Err(Error::Domain("empty covariance sequence".into()));
        }
        if n == 1 {
            return Ok(CirculantSampler {
                n,
                scale: vec![gamma[0].max(0.0).sqrt()],
                fft: None,
            });
        }
        let size = 2 * (n - 1);
        let mut row: Vec<Complex64> = (0..size)
            .map(|k| {
                let lag = if k < n { k } else { size - k };
                Complex64::new(gamma[lag], 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);
        let floor = -EIGEN_TOL * gamma[0].abs().max(f64::MIN_POSITIVE);
        let min_eigenvalue = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min_eigenvalue < floor {
            return Err(Error::EmbeddingFailed { min_eigenvalue });
        }
        let scale = row.iter().map(|c| (c.re.max(0.0) / size as f64).sqrt()).collect();
        Ok(CirculantSampler {
            n,
            scale,
            fft: Some(fft),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Two independent draws from one transform.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let Some(fft) = &self.fft else {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            return (vec![self.scale[0] * a], vec![self.scale[0] * b]);
        };
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        fft.process(&mut buf);
        let first = buf[..self.n].iter().map(|c| c.re).collect();
        let second = buf[..self.n].iter().map(|c| c.im).collect();
        (first, second)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_pair(rng).0
    }
}
