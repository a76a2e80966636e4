//! Reference backend: fractional Gaussian noise on a fine square grid, summed
//! over lattice regions by cell center.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::circulant::CirculantSampler;
use super::lattice::{BackendTag, DiamondField, DiamondLatticeSpec, SeedInfo};
use crate::error::{Error, Result};
use crate::kernels::{fgn_covariance, HurstParam};
use crate::rng::RngStream;

/// A grid of `t_cells × x_cells` cells of size `dt × dx`, starting at `t = 0`
/// and `x = x_origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineGridSpec {
    pub dt: f64,
    pub dx: f64,
    pub t_cells: usize,
    pub x_cells: usize,
    pub x_origin: f64,
}

impl FineGridSpec {
    pub fn new(dt: f64, dx: f64, t_cells: usize, x_cells: usize, x_origin: f64) -> Result<Self> {
        if !(dt > 0.0 && dx > 0.0 && dt.is_finite() && dx.is_finite()) {
            return Err(Error::Config(format!(
                "cell sizes must be positive, got dt={dt} dx={dx}"
            )));
        }
        if t_cells == 0 || x_cells == 0 {
            return Err(Error::Config("fine grid must have at least one cell".into()));
        }
        if !x_origin.is_finite() {
            return Err(Error::Config(format!("x_origin must be finite, got {x_origin}")));
        }
        Ok(FineGridSpec {
            dt,
            dx,
            t_cells,
            x_cells,
            x_origin,
        })
    }

    /// Square cells `refinement` to a slab height, covering the lattice footprint.
    ///
    /// The grid is offset by half a cell so that no cell center lies on a
    /// lattice edge; every diamond then receives exactly `2r²` cells and every
    /// boundary triangle `r²`.
    pub fn for_lattice(lattice: &DiamondLatticeSpec, refinement: usize) -> Result<Self> {
        if refinement < 2 {
            return Err(Error::Config(format!("refinement must be ≥ 2, got {refinement}")));
        }
        let d = lattice.slab_height() / refinement as f64;
        let cells = 2 * lattice.half_width * refinement;
        Self::new(d, d, cells, 2 * cells + 1, -(cells as f64 + 0.5) * d)
    }
}

/// Reusable sampler of fGn rows of fixed length and cell width.
#[derive(Debug, Clone)]
pub struct FgnSampler {
    inner: CirculantSampler,
}

impl FgnSampler {
    pub fn new(n: usize, dx: f64, hurst: HurstParam) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("fGn row length must be ≥ 1".into()));
        }
        let gamma: Vec<f64> = (0..n as u64).map(|k| fgn_covariance(k, dx, hurst)).collect();
        Ok(FgnSampler {
            inner: CirculantSampler::new(&gamma)?,
        })
    }

    pub fn sample(&self, stream: RngStream) -> Vec<f64> {
        self.inner.sample(&mut stream.generator())
    }

    pub fn sample_pair(&self, stream: RngStream) -> (Vec<f64>, Vec<f64>) {
        self.inner.sample_pair(&mut stream.generator())
    }
}

/// One row of fractional Gaussian noise with `Cov(out_j, out_k) = fgn_covariance(|j-k|, dx, H)`.
pub fn sample_fgn_row(n: usize, dx: f64, hurst: HurstParam, stream: RngStream) -> Result<Vec<f64>> {
    Ok(FgnSampler::new(n, dx, hurst)?.sample(stream))
}

/// Noise masses of every fine cell; row `k` uses substream `k` of `stream`.
pub fn sample_fine_field(spec: &FineGridSpec, hurst: HurstParam, stream: RngStream) -> Result<Array2<f64>> {
    let sampler = FgnSampler::new(spec.x_cells, spec.dx, hurst)?;
    Ok(fine_field_with(&sampler, spec, stream))
}

fn fine_field_with(sampler: &FgnSampler, spec: &FineGridSpec, stream: RngStream) -> Array2<f64> {
    let scale = spec.dt.sqrt();
    let mut out = Array2::zeros((spec.t_cells, spec.x_cells));
    for (k, mut row) in out.rows_mut().into_iter().enumerate() {
        let sample = sampler.sample(stream.substream(k as u64));
        row.iter_mut().zip(sample).for_each(|(o, v)| *o = scale * v);
    }
    out
}

/// Geometry of a fine grid relative to a lattice, in units of `dx/2`.
struct Alignment {
    refinement: i64,
    u0: i64,
    t_used: usize,
}

fn align(spec: &FineGridSpec, lattice: &DiamondLatticeSpec) -> Result<Alignment> {
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !rel(spec.dt, spec.dx) {
        return Err(Error::Config(format!(
            "aggregation needs square cells, got dt={} dx={}",
            spec.dt, spec.dx
        )));
    }
    let ratio = lattice.slab_height() / spec.dx;
    let refinement = ratio.round();
    if refinement < 2.0 || !rel(ratio, refinement) {
        return Err(Error::Config(format!(
            "slab height / dx must be an integer ≥ 2, got {ratio}"
        )));
    }
    let u0f = 2.0 * spec.x_origin / spec.dx;
    let u0 = u0f.round();
    if (u0f - u0).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "x_origin must be a multiple of dx/2, got {} / {}",
            spec.x_origin, spec.dx
        )));
    }
    let refinement = refinement as i64;
    let u0 = u0 as i64;
    let reach = 2 * lattice.m() * refinement;
    if spec.t_cells < reach as usize || u0 > -2 * reach || u0 + 2 * (spec.x_cells as i64) < 2 * reach {
        return Err(Error::Config(format!(
            "fine grid ({} × {} cells from x = {}) does not cover the lattice footprint",
            spec.t_cells, spec.x_cells, spec.x_origin
        )));
    }
    Ok(Alignment {
        refinement,
        u0,
        t_used: reach as usize,
    })
}

/// Sum fine-cell masses into lattice cells and boundary triangles by cell center.
///
/// Cell `(k, c)` has center `((k + ½) dx, x_origin + (c + ½) dx)`. In units of
/// `dx/2` both coordinates are integers `v = 2k + 1` and `u = u0 + 2c + 1`, so
/// the rotated coordinates are `(v - u)/(4r)` and `(v + u)/(4r)` lattice steps
/// and the assignment is exact integer arithmetic. Centers on a lattice edge go
/// to the cell above it. Cells whose centers fall outside the lattice footprint
/// are ignored.
pub fn aggregate_to_diamonds(
    fine: &Array2<f64>,
    spec: &FineGridSpec,
    lattice: &DiamondLatticeSpec,
    hurst: HurstParam,
    seed_info: SeedInfo,
) -> Result<DiamondField> {
    if fine.dim() != (spec.t_cells, spec.x_cells) {
        return Err(Error::Config(format!(
            "fine field shape {:?} does not match spec {} × {}",
            fine.dim(),
            spec.t_cells,
            spec.x_cells
        )));
    }
    let a = align(spec, lattice)?;
    let four_r = 4 * a.refinement;
    let m = lattice.m();
    let mut field = DiamondField::zeros(*lattice, hurst, seed_info);
    let side = lattice.cell_side();
    for (k, row) in fine.rows().into_iter().take(a.t_used).enumerate() {
        let v = 2 * k as i64 + 1;
        for (c, &w) in row.iter().enumerate() {
            let u = a.u0 + 2 * c as i64 + 1;
            let i = (v - u).div_euclid(four_r);
            let j = (v + u).div_euclid(four_r);
            if i >= m || j >= m {
                continue;
            }
            if i + j >= 0 {
                let idx = (i + m) as usize * side + (j + m) as usize;
                field.masses_mut()[idx] += w;
            } else {
                field.boundary_mut()[(i + m) as usize] += w;
            }
        }
    }
    Ok(field)
}

/// A lattice cell or boundary triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeRegion {
    Cell(i64, i64),
    Boundary(i64),
}

/// Exact covariance of two aggregated masses under the fine grid of
/// [`FineGridSpec::for_lattice`].
///
/// Rows are independent, and within a row each region collects a contiguous run
/// of cells, so each row contributes `dt dx^{2H}` times the fBm increment
/// covariance of two integer intervals.
pub fn aggregate_covariance(
    lattice: &DiamondLatticeSpec,
    refinement: usize,
    hurst: HurstParam,
    a: LatticeRegion,
    b: LatticeRegion,
) -> Result<f64> {
    for r in [a, b] {
        let ok = match r {
            LatticeRegion::Cell(i, j) => lattice.contains_cell(i, j),
            LatticeRegion::Boundary(i) => lattice.contains_boundary(i),
        };
        if !ok {
            return Err(Error::Config(format!("{r:?} is not part of the lattice")));
        }
    }
    let spec = FineGridSpec::for_lattice(lattice, refinement)?;
    let al = align(&spec, lattice)?;
    let four_r = 4 * al.refinement;
    let region_of = |k: i64, c: i64| {
        let v = 2 * k + 1;
        let u = al.u0 + 2 * c + 1;
        let i = (v - u).div_euclid(four_r);
        let j = (v + u).div_euclid(four_r);
        if i + j >= 0 {
            LatticeRegion::Cell(i, j)
        } else {
            LatticeRegion::Boundary(i)
        }
    };
    let mut total = 0.0;
    for k in 0..al.t_used as i64 {
        let mut run_a: Option<(i64, i64)> = None;
        let mut run_b: Option<(i64, i64)> = None;
        for c in 0..spec.x_cells as i64 {
            let r = region_of(k, c);
            for (target, run) in [(a, &mut run_a), (b, &mut run_b)] {
                if r == target {
                    *run = Some(run.map_or((c, c), |(lo, _)| (lo, c)));
                }
            }
        }
        if let (Some((a0, a1)), Some((b0, b1))) = (run_a, run_b) {
            total += crate::kernels::interval_cross_covariance(
                a0 as f64,
                (a1 + 1) as f64,
                b0 as f64,
                (b1 + 1) as f64,
                hurst,
            );
        }
    }
    Ok(total * spec.dt * spec.dx.powf(hurst.two_h()))
}

/// Fine-grid aggregation end to end.
#[derive(Debug, Clone)]
pub struct AggregateSampler {
    lattice: DiamondLatticeSpec,
    hurst: HurstParam,
    spec: FineGridSpec,
    rows: FgnSampler,
    refinement: usize,
}

impl AggregateSampler {
    pub fn new(lattice: DiamondLatticeSpec, hurst: HurstParam, refinement: usize) -> Result<Self> {
        let spec = FineGridSpec::for_lattice(&lattice, refinement)?;
        let rows = FgnSampler::new(spec.x_cells, spec.dx, hurst)?;
        Ok(AggregateSampler {
            lattice,
            hurst,
            spec,
            rows,
            refinement,
        })
    }

    pub fn spec(&self) -> &FineGridSpec {
        &self.spec
    }

    pub fn sample(&self, stream: RngStream) -> Result<DiamondField> {
        let fine = fine_field_with(&self.rows, &self.spec, stream);
        let info = SeedInfo::new(
            stream,
            BackendTag::Aggregate {
                refinement: self.refinement,
            },
        );
        aggregate_to_diamonds(&fine, &self.spec, &self.lattice, self.hurst, info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> SeedInfo {
        SeedInfo::new(RngStream::new(0, 0), BackendTag::Aggregate { refinement: 4 })
    }

    #[test]
    fn counting_with_unit_field() {
        let lattice = DiamondLatticeSpec::new(4, 2).unwrap();
        let spec = FineGridSpec::for_lattice(&lattice, 4).unwrap();
        let ones = Array2::ones((spec.t_cells, spec.x_cells));
        let f = aggregate_to_diamonds(&ones, &spec, &lattice, HurstParam::WHITE, info()).unwrap();
        // A diamond has area 2r² fine cells, a boundary triangle r².
        for (i, j) in lattice.cells() {
            assert_eq!(f.mass(i, j), Some(32.0), "cell ({i}, {j})");
        }
        for i in -2..2 {
            assert_eq!(f.boundary_mass(i), Some(16.0), "triangle {i}");
        }
        let footprint = (lattice.cell_count() * 32 + lattice.cell_side() * 16) as f64;
        assert_eq!(f.total_mass(), footprint);
    }

    #[test]
    fn total_is_preserved() {
        let lattice = DiamondLatticeSpec::new(8, 3).unwrap();
        let spec = FineGridSpec::for_lattice(&lattice, 3).unwrap();
        let fine = sample_fine_field(&spec, HurstParam::new(0.7).unwrap(), RngStream::new(4, 1)).unwrap();
        let f = aggregate_to_diamonds(&fine, &spec, &lattice, HurstParam::new(0.7).unwrap(), info()).unwrap();
        // Footprint: t ≥ 0 and |x| ≤ 2 m s - t, checked in floating point on cell centers.
        let reach = 6.0 * lattice.slab_height();
        let mut inside = 0.0;
        for ((k, c), &w) in fine.indexed_iter() {
            let t = (k as f64 + 0.5) * spec.dt;
            let x = spec.x_origin + (c as f64 + 0.5) * spec.dx;
            if x.abs() < reach - t {
                inside += w;
            }
        }
        assert!((f.total_mass() - inside).abs() < 1e-12 * fine.len() as f64);
    }

    #[test]
    fn rejects_bad_geometry() {
        let lattice = DiamondLatticeSpec::new(4, 2).unwrap();
        let good = FineGridSpec::for_lattice(&lattice, 4).unwrap();
        let ones = Array2::ones((good.t_cells, good.x_cells));
        let mut short = good;
        short.t_cells -= 1;
        let short_field = Array2::ones((short.t_cells, short.x_cells));
        assert!(aggregate_to_diamonds(&short_field, &short, &lattice, HurstParam::WHITE, info()).is_err());
        let mut skew = good;
        skew.dt *= 1.5;
        assert!(aggregate_to_diamonds(&ones, &skew, &lattice, HurstParam::WHITE, info()).is_err());
        let mut shifted = good;
        shifted.x_origin += good.dx;
        let mut offgrid = good;
        offgrid.x_origin += 0.3 * good.dx;
        assert!(aggregate_to_diamonds(&ones, &offgrid, &lattice, HurstParam::WHITE, info()).is_err());
        assert!(aggregate_to_diamonds(&ones, &shifted, &lattice, HurstParam::WHITE, info()).is_err());
        assert!(FineGridSpec::for_lattice(&lattice, 1).is_err());
        assert!(aggregate_to_diamonds(&ones, &short, &lattice, HurstParam::WHITE, info()).is_err());
    }

    #[test]
    fn rows_are_deterministic() {
        let h = HurstParam::new(0.75).unwrap();
        let a = sample_fgn_row(64, 0.5, h, RngStream::new(9, 9)).unwrap();
        let b = sample_fgn_row(64, 0.5, h, RngStream::new(9, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert!(sample_fgn_row(0, 0.5, h, RngStream::new(9, 9)).is_err());
    }
}
