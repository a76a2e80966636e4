//! Exact backend: lattice masses as sums of independent slab triangles.
//!
//! Lines `i + j = d` of the lattice sit at `t = d s` with `s = h/√2`, so the time
//! band `[k s, (k+1) s]` (slab `k`) contains the lower halves of the cells on
//! anti-diagonal `k` and the upper halves of the cells on anti-diagonal `k - 1`
//! (the boundary triangles when `k = 0`). The noise is white in time, so slabs
//! are independent. Inside a slab the halves alternate, apex-down and apex-up,
//! with centers `s` apart; time reversal swaps the two shapes and reflection in
//! `x` reverses the order, so the sequence of half-masses is stationary and is
//! sampled exactly by circulant embedding.

use rand::Rng;
use rand_distr::StandardNormal;

use super::circulant::CirculantSampler;
use super::lattice::{BackendTag, DiamondField, DiamondLatticeSpec, SeedInfo};
use crate::error::Result;
use crate::kernels::{trapezoid_covariance, HurstParam, Trapezoid};
use crate::rng::RngStream;

/// Unit-height triangle in a slab centered at `center`; `up` means apex at the top.
fn unit_half(center: f64, up: bool) -> Trapezoid {
    if up {
        Trapezoid {
            t0: 0.0,
            t1: 1.0,
            left0: center - 1.0,
            left_slope: 1.0,
            right0: center + 1.0,
            right_slope: -1.0,
        }
    } else {
        Trapezoid {
            t0: 0.0,
            t1: 1.0,
            left0: center,
            left_slope: -1.0,
            right0: center,
            right_slope: 1.0,
        }
    }
}

/// Autocovariance of the alternating half-mass sequence in a slab of unit height.
pub fn slab_autocovariance(len: usize, hurst: HurstParam) -> Vec<f64> {
    let origin = unit_half(0.0, false);
    (0..len)
        .map(|l| trapezoid_covariance(&origin, &unit_half(l as f64, l % 2 == 1), hurst))
        .collect()
}

/// Precomputed exact sampler for one lattice and Hurst index.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    lattice: DiamondLatticeSpec,
    hurst: HurstParam,
    slab: Option<CirculantSampler>,
    scale: f64,
}

impl ExactSampler {
    pub fn new(lattice: DiamondLatticeSpec, hurst: HurstParam) -> Result<Self> {
        let s = lattice.slab_height();
        let scale = s.powf(hurst.value() + 0.5);
        let slab = if hurst.is_white() {
            None
        } else {
            let gamma = slab_autocovariance(4 * lattice.half_width - 1, hurst);
            Some(CirculantSampler::new(&gamma)?)
        };
        Ok(ExactSampler {
            lattice,
            hurst,
            slab,
            scale,
        })
    }

    pub fn lattice(&self) -> &DiamondLatticeSpec {
        &self.lattice
    }

    pub fn sample(&self, stream: RngStream) -> DiamondField {
        let mut rng = stream.generator();
        let mut field = DiamondField::zeros(self.lattice, self.hurst, SeedInfo::new(stream, BackendTag::Exact));
        let slabs = 2 * self.lattice.half_width;
        for k in (0..slabs).step_by(2) {
            let (a, b) = self.draw_pair(&mut rng);
            self.deposit(&mut field, k as i64, &a);
            self.deposit(&mut field, k as i64 + 1, &b);
        }
        field
    }

    fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        match &self.slab {
            Some(sampler) => sampler.sample_pair(rng),
            None => {
                // Apex-up and apex-down triangles have disjoint interiors: white noise
                // makes them independent with variance equal to their area.
                let n = 4 * self.lattice.half_width - 1;
                let mut draw = || (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let a = draw();
                let b = draw();
                (a, b)
            }
        }
    }

    /// Add slab `k`'s half-masses; `seq[p]` sits at center `x = (p - (2m - 1)) s`.
    fn deposit(&self, field: &mut DiamondField, k: i64, seq: &[f64]) {
        let m = self.lattice.m();
        let side = self.lattice.cell_side();
        let scale = self.scale;
        for x in (k - 2 * m + 1)..=(2 * m - k - 1) {
            let w = scale * seq[(x + 2 * m - 1) as usize];
            if (x - k).rem_euclid(2) == 0 {
                let i = (k - x) / 2;
                let j = k - i;
                field.masses_mut()[(i + m) as usize * side + (j + m) as usize] += w;
            } else {
                let i = (k - 1 - x) / 2;
                if k == 0 {
                    field.boundary_mut()[(i + m) as usize] += w;
                } else {
                    let j = k - 1 - i;
                    field.masses_mut()[(i + m) as usize * side + (j + m) as usize] += w;
                }
            }
        }
    }
}

/// Sample every lattice mass exactly in distribution.
pub fn sample_diamonds_exact(
    lattice: &DiamondLatticeSpec,
    hurst: HurstParam,
    stream: RngStream,
) -> Result<DiamondField> {
    Ok(ExactSampler::new(*lattice, hurst)?.sample(stream))
}
