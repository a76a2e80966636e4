//! Light-cone scheme for the stochastic wave equation in rotated coordinates.
//!
//! With `v(τ, λ) = u(t, x)`, the mild solution satisfies, over every lattice cell,
//!
//! ```text
//! v(i+1, j+1) - v(i+1, j) - v(i, j+1) + v(i, j) ≈ ½ θ F(v(i, j)) W(D_ij)
//! ```
//!
//! with the coefficient frozen at the lower-left node. For the linear equation
//! (`θ F ≡ 1`) the identity is exact.

use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use crate::coords::{to_original, to_rotated};
use crate::error::{Error, Result};
use crate::kernels::HurstParam;
use crate::noise::{DiamondField, DiamondLatticeSpec, SeedInfo};

/// Shape of the diffusion coefficient `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionKind {
    Constant(f64),
    /// `F(u) = a u + b`.
    Affine {
        a: f64,
        b: f64,
    },
    /// `F(u) = 1 + sin u`.
    OnePlusSin,
}

impl DiffusionKind {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            DiffusionKind::Constant(c) => c,
            DiffusionKind::Affine { a, b } => a * u + b,
            DiffusionKind::OnePlusSin => 1.0 + u.sin(),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            DiffusionKind::Constant(_) => 0.0,
            DiffusionKind::Affine { a, .. } => a.abs(),
            DiffusionKind::OnePlusSin => 1.0,
        }
    }
}

impl std::fmt::Display for DiffusionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiffusionKind::Constant(c) => write!(f, "constant({c})"),
            DiffusionKind::Affine { a, b } => write!(f, "affine({a},{b})"),
            DiffusionKind::OnePlusSin => f.write_str("one_plus_sin"),
        }
    }
}

impl FromStr for DiffusionKind {
    type Err = Error;

    /// `one_plus_sin`, `constant(c)` or `affine(a,b)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::invalid(
                "f_kind",
                format!("expected one_plus_sin, constant(c) or affine(a,b), got `{s}`"),
            )
        };
        if s == "one_plus_sin" {
            return Ok(DiffusionKind::OnePlusSin);
        }
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        match (name.trim(), nums.as_slice()) {
            ("constant", &[c]) => Ok(DiffusionKind::Constant(c)),
            ("affine", &[a, b]) => Ok(DiffusionKind::Affine { a, b }),
            _ => Err(bad()),
        }
    }
}

/// Diffusion `θ F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub kind: DiffusionKind,
    pub theta: f64,
}

impl DiffusionSpec {
    pub fn new(kind: DiffusionKind, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::invalid(
                "f_theta",
                format!("must be finite and ≥ 0, got {theta}"),
            ));
        }
        Ok(DiffusionSpec { kind, theta })
    }

    /// The additive-noise equation, `θ F ≡ 1`.
    pub const LINEAR: DiffusionSpec = DiffusionSpec {
        kind: DiffusionKind::Constant(1.0),
        theta: 1.0,
    };

    /// `θ F(u)`.
    #[inline]
    pub fn effective(&self, u: f64) -> f64 {
        self.theta * self.kind.eval(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Nonlinear,
    Linear,
    Synthetic,
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FieldKind::Nonlinear => "nonlinear",
            FieldKind::Linear => "linear",
            FieldKind::Synthetic => "synthetic",
        })
    }
}

/// Values at the lattice nodes `(τ_i, λ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    lattice: DiamondLatticeSpec,
    hurst: HurstParam,
    diffusion: DiffusionSpec,
    kind: FieldKind,
    seed_info: SeedInfo,
    values: Vec<f64>,
}

impl LatticeField {
    fn zeros(noise: &DiamondField, diffusion: DiffusionSpec, kind: FieldKind) -> Self {
        let side = noise.lattice().node_side();
        LatticeField {
            lattice: *noise.lattice(),
            hurst: noise.hurst(),
            diffusion,
            kind,
            seed_info: noise.seed_info(),
            values: vec![0.0; side * side],
        }
    }

    /// Synthetic field `f(τ, λ)` on every node.
    pub fn from_fn(
        lattice: DiamondLatticeSpec,
        hurst: HurstParam,
        seed_info: SeedInfo,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let side = lattice.node_side();
        let m = lattice.m();
        let h = lattice.h();
        let mut values = vec![0.0; side * side];
        for i in -m..=m {
            for j in (-i).max(-m)..=m {
                values[lattice.node_index(i, j)] = f(i as f64 * h, j as f64 * h);
            }
        }
        LatticeField {
            lattice,
            hurst,
            diffusion: DiffusionSpec::LINEAR,
            kind: FieldKind::Synthetic,
            seed_info,
            values,
        }
    }

    pub fn lattice(&self) -> &DiamondLatticeSpec {
        &self.lattice
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn diffusion(&self) -> DiffusionSpec {
        self.diffusion
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn seed_info(&self) -> SeedInfo {
        self.seed_info
    }

    pub fn get(&self, i: i64, j: i64) -> Option<f64> {
        self.lattice
            .contains_node(i, j)
            .then(|| self.values[self.lattice.node_index(i, j)])
    }

    pub fn at(&self, i: i64, j: i64) -> Result<f64> {
        self.get(i, j).ok_or_else(|| Error::Index {
            i,
            j,
            reason: "node outside lattice".into(),
        })
    }

    /// `f(i+di, j+dj) - f(i+di, j) - f(i, j+dj) + f(i, j)`, i.e. `δ^{(1)}_{di h} δ^{(2)}_{dj h} f`.
    pub fn rect_increment(&self, i: i64, j: i64, di: i64, dj: i64) -> Result<f64> {
        let a = self.at(i + di, j + dj)?;
        let b = self.at(i + di, j)?;
        let c = self.at(i, j + dj)?;
        let d = self.at(i, j)?;
        Ok(a - b - c + d)
    }

    /// Every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> LatticeField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Largest absolute value, for diagnostics.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// CSV with columns `i,j,tau,lambda,t,x,value` after a metadata comment line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# N_sim={} H={} F={} theta={} seed={} stream={} backend={} kind={}",
            self.lattice.n_sim,
            self.hurst,
            self.diffusion.kind,
            self.diffusion.theta,
            self.seed_info.seed,
            self.seed_info.stream_id,
            self.seed_info.backend,
            self.kind
        )?;
        writeln!(out, "i,j,tau,lambda,t,x,value")?;
        let m = self.lattice.m();
        let h = self.lattice.h();
        for i in -m..=m {
            for j in (-i).max(-m)..=m {
                let (tau, lambda) = (i as f64 * h, j as f64 * h);
                let (t, x) = to_original(tau, lambda);
                let v = self.values[self.lattice.node_index(i, j)];
                writeln!(out, "{i},{j},{tau},{lambda},{t},{x},{v}")?;
            }
        }
        Ok(())
    }
}

fn kind_for(diffusion: &DiffusionSpec) -> FieldKind {
    if *diffusion == DiffusionSpec::LINEAR {
        FieldKind::Linear
    } else {
        FieldKind::Nonlinear
    }
}

/// Zero on `i + j = 0` and `½ θ F(0) w` on `i + j = 1`, where `w` is the mass of
/// the boundary triangle below the node. All other nodes are left at zero.
pub fn initialize_first_lines(noise: &DiamondField, diffusion: &DiffusionSpec) -> Result<LatticeField> {
    let mut field = LatticeField::zeros(noise, *diffusion, kind_for(diffusion));
    let lattice = *noise.lattice();
    let coeff = 0.5 * diffusion.effective(0.0);
    let m = lattice.m();
    for a in (1 - m)..=m {
        let w = noise
            .boundary_mass(a - 1)
            .ok_or_else(|| Error::Config(format!("missing boundary triangle below node ({a}, {})", 1 - a)))?;
        field.values[lattice.node_index(a, 1 - a)] = coeff * w;
    }
    Ok(field)
}

/// March the scheme over every lattice cell.
///
/// Cells are visited row by row. Each new node reads only nodes written before
/// it, so the result is bit-identical to any other dependency-respecting order,
/// including increasing anti-diagonals. The coefficient multiplying the mass of
/// cell `(i, j)` depends only on masses of cells `(i', j')` with `i' < i` and
/// `j' < j`, which lie at least two anti-diagonals earlier and are independent
/// of it.
pub fn march(noise: &DiamondField, diffusion: &DiffusionSpec) -> Result<LatticeField> {
    let mut field = initialize_first_lines(noise, diffusion)?;
    let lattice = *noise.lattice();
    let m = lattice.m();
    let ns = lattice.node_side() as i64;
    let half_theta = 0.5 * diffusion.theta;
    let kind = diffusion.kind;
    let v = &mut field.values;
    for i in -m..m {
        for j in (-i).max(-m)..m {
            let base = (i + m) * ns + (j + m);
            let a = v[base as usize];
            let b = v[(base + ns) as usize];
            let c = v[(base + 1) as usize];
            let w = noise.mass_unchecked(i, j);
            let next = b + c - a + half_theta * kind.eval(a) * w;
            if !next.is_finite() {
                return Err(Error::NumericalBlowup { i: i + 1, j: j + 1 });
            }
            v[(base + ns + 1) as usize] = next;
        }
    }
    Ok(field)
}

/// Nonlinear and linear solutions on the same noise.
pub fn simulate_pair(noise: &DiamondField, diffusion: &DiffusionSpec) -> Result<(LatticeField, LatticeField)> {
    let v = march(noise, diffusion)?;
    let big_v = march(noise, &DiffusionSpec::LINEAR)?;
    Ok((v, big_v))
}

/// Values on the observation grid `(a N_sim/N_obs, b N_sim/N_obs)`, `0 ≤ a, b ≤ N_obs`.
pub fn restrict(field: &LatticeField, n_obs: usize) -> Result<Array2<f64>> {
    let lattice = field.lattice();
    if !lattice.covers_unit_square() {
        return Err(Error::Config(format!(
            "lattice half-width {} does not cover the unit square at N_sim = {}",
            lattice.half_width, lattice.n_sim
        )));
    }
    if n_obs == 0 || lattice.n_sim % n_obs != 0 {
        return Err(Error::Config(format!(
            "N_obs = {n_obs} does not divide N_sim = {}",
            lattice.n_sim
        )));
    }
    let step = (lattice.n_sim / n_obs) as i64;
    Ok(Array2::from_shape_fn((n_obs + 1, n_obs + 1), |(a, b)| {
        field.values[lattice.node_index(a as i64 * step, b as i64 * step)]
    }))
}
