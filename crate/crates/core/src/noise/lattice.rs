//! The characteristic lattice and the noise masses attached to its cells.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Diamond, HurstParam, Region};
use crate::rng::RngStream;

/// Rotated lattice `τ_i = i h`, `λ_j = j h` with `h = 1/n_sim`.
///
/// Nodes are `(i, j)` with `-m ≤ i, j ≤ m` and `i + j ≥ 0`, where `m` is the
/// half-width. Cell `(i, j)` is the diamond with lower-left node `(i, j)`; cells
/// exist for `-m ≤ i, j ≤ m - 1`, `i + j ≥ 0`. The cells on `i + j = -1` straddle
/// `t = 0`; only their upper halves, the boundary triangles, carry noise.
/// With `m ≥ n_sim` the lattice covers the unit square in rotated coordinates
/// together with its whole domain of dependence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiamondLatticeSpec {
    pub n_sim: usize,
    pub half_width: usize,
}

impl DiamondLatticeSpec {
    pub fn new(n_sim: usize, half_width: usize) -> Result<Self> {
        if n_sim == 0 || half_width == 0 {
            return Err(Error::Config(format!(
                "lattice needs n_sim ≥ 1 and half_width ≥ 1, got {n_sim} and {half_width}"
            )));
        }
        Ok(DiamondLatticeSpec { n_sim, half_width })
    }

    /// Smallest lattice containing the unit square's domain of dependence.
    pub fn cone(n_sim: usize) -> Result<Self> {
        Self::new(n_sim, n_sim)
    }

    /// Rotated step.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n_sim as f64
    }

    /// Height of one time slab, `h/√2`.
    #[inline]
    pub fn slab_height(&self) -> f64 {
        self.h() * FRAC_1_SQRT_2
    }

    #[inline]
    pub fn m(&self) -> i64 {
        self.half_width as i64
    }

    pub fn covers_unit_square(&self) -> bool {
        self.half_width >= self.n_sim
    }

    pub fn contains_node(&self, i: i64, j: i64) -> bool {
        let m = self.m();
        (-m..=m).contains(&i) && (-m..=m).contains(&j) && i + j >= 0
    }

    pub fn contains_cell(&self, i: i64, j: i64) -> bool {
        let m = self.m();
        (-m..m).contains(&i) && (-m..m).contains(&j) && i + j >= 0
    }

    /// Boundary triangles are indexed by the `i` of their straddling cell `(i, -1-i)`.
    pub fn contains_boundary(&self, i: i64) -> bool {
        (-self.m()..self.m()).contains(&i)
    }

    /// Side length of the cell grid, `2m`.
    #[inline]
    pub fn cell_side(&self) -> usize {
        2 * self.half_width
    }

    /// Side length of the node grid, `2m + 1`.
    #[inline]
    pub fn node_side(&self) -> usize {
        2 * self.half_width + 1
    }

    #[inline]
    pub(crate) fn cell_index(&self, i: i64, j: i64) -> usize {
        let m = self.m();
        ((i + m) as usize) * self.cell_side() + (j + m) as usize
    }

    #[inline]
    pub(crate) fn node_index(&self, i: i64, j: i64) -> usize {
        let m = self.m();
        ((i + m) as usize) * self.node_side() + (j + m) as usize
    }

    pub fn cell_count(&self) -> usize {
        let m = self.half_width;
        2 * m * m - m
    }

    /// In-domain cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let m = self.m();
        (-m..m).flat_map(move |i| ((-i).max(-m)..m).map(move |j| (i, j)))
    }

    pub fn diamond(&self, i: i64, j: i64) -> Result<Diamond> {
        if !self.contains_cell(i, j) {
            return Err(Error::Index {
                i,
                j,
                reason: "cell outside lattice".into(),
            });
        }
        let h = self.h();
        Diamond::new(i as f64 * h, j as f64 * h, h)
    }

    pub fn boundary_region(&self, i: i64) -> Result<Region> {
        if !self.contains_boundary(i) {
            return Err(Error::Index {
                i,
                j: -1 - i,
                reason: "boundary triangle outside lattice".into(),
            });
        }
        let h = self.h();
        Region::initial_triangle((i + 1) as f64 * h, -i as f64 * h)
    }
}

/// Which backend produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendTag {
    Aggregate { refinement: usize },
    Exact,
}

impl std::fmt::Display for BackendTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendTag::Aggregate { refinement } => write!(f, "aggregate:{refinement}"),
            BackendTag::Exact => f.write_str("exact"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub seed: u64,
    pub stream_id: u64,
    pub backend: BackendTag,
}

impl SeedInfo {
    pub fn new(stream: RngStream, backend: BackendTag) -> Self {
        SeedInfo {
            seed: stream.seed,
            stream_id: stream.stream_id,
            backend,
        }
    }
}

/// Noise masses of every lattice cell and boundary triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondField {
    lattice: DiamondLatticeSpec,
    hurst: HurstParam,
    masses: Vec<f64>,
    boundary: Vec<f64>,
    seed_info: SeedInfo,
}

impl DiamondField {
    /// All-zero field, for synthetic inputs.
    pub fn zeros(lattice: DiamondLatticeSpec, hurst: HurstParam, seed_info: SeedInfo) -> Self {
        DiamondField {
            lattice,
            hurst,
            masses: vec![0.0; lattice.cell_side() * lattice.cell_side()],
            boundary: vec![0.0; lattice.cell_side()],
            seed_info,
        }
    }

    pub fn lattice(&self) -> &DiamondLatticeSpec {
        &self.lattice
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn seed_info(&self) -> SeedInfo {
        self.seed_info
    }

    pub fn mass(&self, i: i64, j: i64) -> Option<f64> {
        self.lattice
            .contains_cell(i, j)
            .then(|| self.masses[self.lattice.cell_index(i, j)])
    }

    pub fn boundary_mass(&self, i: i64) -> Option<f64> {
        self.lattice
            .contains_boundary(i)
            .then(|| self.boundary[(i + self.lattice.m()) as usize])
    }

    pub fn set_mass(&mut self, i: i64, j: i64, value: f64) -> Result<()> {
        if !self.lattice.contains_cell(i, j) {
            return Err(Error::Index {
                i,
                j,
                reason: "cell outside lattice".into(),
            });
        }
        let k = self.lattice.cell_index(i, j);
        self.masses[k] = value;
        Ok(())
    }

    pub fn set_boundary_mass(&mut self, i: i64, value: f64) -> Result<()> {
        if !self.lattice.contains_boundary(i) {
            return Err(Error::Index {
                i,
                j: -1 - i,
                reason: "boundary triangle outside lattice".into(),
            });
        }
        self.boundary[(i + self.lattice.m()) as usize] = value;
        Ok(())
    }

    #[inline]
    pub(crate) fn mass_unchecked(&self, i: i64, j: i64) -> f64 {
        self.masses[self.lattice.cell_index(i, j)]
    }

    #[inline]
    pub(crate) fn masses_mut(&mut self) -> &mut [f64] {
        &mut self.masses
    }

    #[inline]
    pub(crate) fn boundary_mut(&mut self) -> &mut [f64] {
        &mut self.boundary
    }

    /// Multiply every mass by `c`.
    pub fn scaled(&self, c: f64) -> DiamondField {
        let mut out = self.clone();
        out.masses.iter_mut().for_each(|w| *w *= c);
        out.boundary.iter_mut().for_each(|w| *w *= c);
        out
    }

    /// Sum of every cell and boundary mass, in row-major order.
    pub fn total_mass(&self) -> f64 {
        let cells: f64 = self.lattice.cells().map(|(i, j)| self.mass_unchecked(i, j)).sum();
        cells + self.boundary.iter().sum::<f64>()
    }

    /// CSV with columns `i,j,mass`; boundary triangles appear as cells on `i + j = -1`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# h={} H={} seed={} stream={} backend={}",
            self.lattice.h(),
            self.hurst,
            self.seed_info.seed,
            self.seed_info.stream_id,
            self.seed_info.backend
        )?;
        writeln!(out, "i,j,mass")?;
        let m = self.lattice.m();
        for i in -m..m {
            writeln!(out, "{},{},{}", i, -1 - i, self.boundary[(i + m) as usize])?;
        }
        for (i, j) in self.lattice.cells() {
            writeln!(out, "{},{},{}", i, j, self.mass_unchecked(i, j))?;
        }
        Ok(())
    }
}
