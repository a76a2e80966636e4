//! Second differences, quadratic variation, the θ estimator, local-linearization
//! remainders and log-log rate fits.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::coords::to_rotated;
use crate::error::{Error, Result};
use crate::kernels::{qv_limit_constant, ConstantMode, HurstParam};
use crate::wave::{DiffusionKind, DiffusionSpec, LatticeField};

/// `f(i+m, j+m) - f(i+m, j) - f(i, j+m) + f(i, j)` on an observation grid.
pub fn second_diff(field: &Array2<f64>, i: usize, j: usize, m: usize) -> Result<f64> {
    let (rows, cols) = field.dim();
    if m == 0 || i + m >= rows || j + m >= cols {
        return Err(Error::Index {
            i: i as i64,
            j: j as i64,
            reason: format!("step {m} leaves the {rows} × {cols} grid"),
        });
    }
    Ok(field[[i + m, j + m]] - field[[i + m, j]] - field[[i, j + m]] + field[[i, j]])
}

/// Value of a lattice field at the original-coordinate point `(t, x)`, which must be a node.
fn at_point(field: &LatticeField, t: f64, x: f64) -> Result<f64> {
    let h = field.lattice().h();
    let (tau, lambda) = to_rotated(t, x);
    let (fi, fj) = (tau / h, lambda / h);
    let (i, j) = (fi.round(), fj.round());
    if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 {
        return Err(Error::Index {
            i: i as i64,
            j: j as i64,
            reason: format!("point ({t}, {x}) is not a lattice node"),
        });
    }
    field.at(i as i64, j as i64)
}

/// `Δ^{(1)}_ε f(t,x) = f(t, x+2ε) - f(t-ε, x+ε) - f(t+ε, x+ε) + f(t, x)` at the image of
/// node `(i, j)`, with `ε = k h/√2` so that the stencil lands on lattice nodes.
pub fn original_diff_1(field: &LatticeField, i: i64, j: i64, k: i64) -> Result<f64> {
    let h = field.lattice().h();
    let (t, x) = crate::coords::to_original(i as f64 * h, j as f64 * h);
    let e = k as f64 * h * std::f64::consts::FRAC_1_SQRT_2;
    Ok(
        at_point(field, t, x + 2.0 * e)? - at_point(field, t - e, x + e)? - at_point(field, t + e, x + e)?
            + at_point(field, t, x)?,
    )
}

/// `Δ^{(2)}_ε f(t,x) = f(t+2ε, x) - f(t+ε, x-ε) - f(t+ε, x+ε) + f(t, x)`, `ε = k h/√2`.
pub fn original_diff_2(field: &LatticeField, i: i64, j: i64, k: i64) -> Result<f64> {
    let h = field.lattice().h();
    let (t, x) = crate::coords::to_original(i as f64 * h, j as f64 * h);
    let e = k as f64 * h * std::f64::consts::FRAC_1_SQRT_2;
    Ok(
        at_point(field, t + 2.0 * e, x)? - at_point(field, t + e, x - e)? - at_point(field, t + e, x + e)?
            + at_point(field, t, x)?,
    )
}

fn grid_size(field: &Array2<f64>) -> Result<usize> {
    let (rows, cols) = field.dim();
    if rows != cols || rows < 2 {
        return Err(Error::Domain(format!(
            "observation grid must be (N+1) × (N+1) with N ≥ 1, got {rows} × {cols}"
        )));
    }
    Ok(rows - 1)
}

/// `Q_N = N^{2H-1} Σ_{i,j<N} Δ_{i,j}²`, summed row-major.
pub fn qvar(field: &Array2<f64>, hurst: HurstParam) -> Result<f64> {
    let n = grid_size(field)?;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = field[[i + 1, j + 1]] - field[[i + 1, j]] - field[[i, j + 1]] + field[[i, j]];
            acc += d * d;
        }
    }
    Ok((n as f64).powf(hurst.two_h() - 1.0) * acc)
}

/// `N^{-2} Σ_{i,j<N} F(field_{i,j})²`, with θ excluded.
pub fn riemann_f2(field: &Array2<f64>, kind: &DiffusionKind) -> Result<f64> {
    let n = grid_size(field)?;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let f = kind.eval(field[[i, j]]);
            acc += f * f;
        }
    }
    Ok(acc / (n * n) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QVarReport {
    pub n: usize,
    pub hurst: HurstParam,
    pub q_value: f64,
    pub riemann_f2: f64,
    pub limit_constant: f64,
    pub constant_mode: ConstantMode,
}

impl QVarReport {
    pub fn compute(field: &Array2<f64>, kind: &DiffusionKind, hurst: HurstParam, mode: ConstantMode) -> Result<Self> {
        Ok(QVarReport {
            n: grid_size(field)?,
            hurst,
            q_value: qvar(field, hurst)?,
            riemann_f2: riemann_f2(field, kind)?,
            limit_constant: qv_limit_constant(hurst, mode),
            constant_mode: mode,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub n: usize,
    pub theta_hat: f64,
    pub inputs: QVarReport,
}

/// `θ̂ = sqrt(Q_N / (c · N^{-2} Σ F²))`.
pub fn estimate_theta(
    field: &Array2<f64>,
    diffusion: &DiffusionSpec,
    hurst: HurstParam,
    mode: ConstantMode,
) -> Result<ThetaEstimate> {
    let inputs = QVarReport::compute(field, &diffusion.kind, hurst, mode)?;
    if inputs.riemann_f2 <= 0.0 {
        return Err(Error::DegenerateDiffusion);
    }
    Ok(ThetaEstimate {
        n: inputs.n,
        theta_hat: (inputs.q_value / (inputs.limit_constant * inputs.riemann_f2)).sqrt(),
        inputs,
    })
}

/// `R^±_ε = δ^{(1)}_{±ε} δ^{(2)}_ε v - θ F(v) δ^{(1)}_{±ε} δ^{(2)}_ε V` at node `(i, j)`, `ε = m h`.
pub fn remainder(
    v: &LatticeField,
    big_v: &LatticeField,
    diffusion: &DiffusionSpec,
    node: (i64, i64),
    m: i64,
    sign: i64,
) -> Result<f64> {
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("sign must be ±1, got {sign}")));
    }
    let (i, j) = node;
    let dv = v.rect_increment(i, j, sign * m, m)?;
    let dbig = big_v.rect_increment(i, j, sign * m, m)?;
    Ok(dv - diffusion.effective(v.at(i, j)?) * dbig)
}

/// `(mean |s|^p)^{1/p}`.
pub fn lp_norm_mc(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("p must be ≥ 1, got {p}")));
    }
    let mean = samples.iter().map(|s| s.abs().powf(p)).sum::<f64>() / samples.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// Least-squares line through `(ln scale, ln error)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub levels: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn rate_fit(levels: &[(f64, f64)]) -> Result<RateFit> {
    if levels.len() < 3 {
        return Err(Error::Domain(format!(
            "rate fit needs ≥ 3 levels, got {}",
            levels.len()
        )));
    }
    if let Some(&(s, e)) = levels
        .iter()
        .find(|(s, e)| !(*s > 0.0 && *e > 0.0 && s.is_finite() && e.is_finite()))
    {
        return Err(Error::Domain(format!(
            "rate fit needs positive finite levels, got ({s}, {e})"
        )));
    }
    let n = levels.len() as f64;
    let xs: Vec<f64> = levels.iter().map(|l| l.0.ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fit needs at least two distinct scales".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        levels: levels.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}
