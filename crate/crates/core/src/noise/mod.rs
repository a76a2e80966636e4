//! Gaussian noise masses for the characteristic lattice.

mod circulant;
mod exact;
mod fine;
mod lattice;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use circulant::{CirculantSampler, EIGEN_TOL};
pub use exact::{sample_diamonds_exact, slab_autocovariance, ExactSampler};
pub use fine::{
    aggregate_covariance, aggregate_to_diamonds, sample_fgn_row, sample_fine_field, AggregateSampler, FgnSampler,
    FineGridSpec, LatticeRegion,
};
pub use lattice::{BackendTag, DiamondField, DiamondLatticeSpec, SeedInfo};

use crate::error::{Error, Result};
use crate::kernels::HurstParam;
use crate::rng::RngStream;

/// Noise backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Exact,
    Aggregate {
        refinement: usize,
    },
}

impl FromStr for Backend {
    type Err = Error;

    /// `exact` or `aggregate:R`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exact" {
            return Ok(Backend::Exact);
        }
        if let Some(r) = s.strip_prefix("aggregate:") {
            let refinement: usize = r
                .trim()
                .parse()
                .map_err(|_| Error::invalid("backend", format!("bad refinement `{r}`")))?;
            if refinement < 2 {
                return Err(Error::invalid("backend", "refinement must be ≥ 2"));
            }
            return Ok(Backend::Aggregate { refinement });
        }
        Err(Error::invalid(
            "backend",
            format!("expected `exact` or `aggregate:R`, got `{s}`"),
        ))
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Aggregate { refinement } => write!(f, "aggregate:{refinement}"),
        }
    }
}

/// A backend prepared for repeated sampling on one lattice.
#[derive(Debug, Clone)]
pub enum NoiseGenerator {
    Exact(ExactSampler),
    Aggregate(AggregateSampler),
}

impl NoiseGenerator {
    pub fn new(lattice: DiamondLatticeSpec, hurst: HurstParam, backend: Backend) -> Result<Self> {
        Ok(match backend {
            Backend::Exact => NoiseGenerator::Exact(ExactSampler::new(lattice, hurst)?),
            Backend::Aggregate { refinement } => {
                NoiseGenerator::Aggregate(AggregateSampler::new(lattice, hurst, refinement)?)
            }
        })
    }

    pub fn sample(&self, stream: RngStream) -> Result<DiamondField> {
        match self {
            NoiseGenerator::Exact(s) => Ok(s.sample(stream)),
            NoiseGenerator::Aggregate(s) => s.sample(stream),
        }
    }
}
