use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Study};
use super::report::{Check, FitSummary, LevelStats, PlotTable, StudyReport};
use crate::error::{Error, Result};
use crate::kernels::{diamond_covariance, diamond_variance, fgn_covariance, qv_limit_constant, region_covariance};
use crate::noise::{
    aggregate_covariance, AggregateSampler, Backend, DiamondField, DiamondLatticeSpec, ExactSampler, FgnSampler,
    LatticeRegion, NoiseGenerator,
};
use crate::qvar::{estimate_theta, lp_norm_mc, qvar, rate_fit, remainder, riemann_f2};
use crate::rng::RngStream;
use crate::wave::{march, restrict, simulate_pair, DiffusionSpec};
use crate::ARTIFACT_VERSION;

/// Refinement used for the aggregate-versus-exact comparison when the
/// configured backend is exact.
const DEFAULT_REFINEMENT: usize = 32;

fn require(cfg: &ExperimentConfig, study: Study) -> Result<()> {
    if cfg.study != study {
        return Err(Error::Config(format!(
            "configuration is for study `{}`, not `{study}`",
            cfg.study
        )));
    }
    cfg.validate()
}

fn replicate_stream(cfg: &ExperimentConfig, r: usize) -> RngStream {
    RngStream::new(cfg.seed, r as u64)
}

/// Run `f` on every replicate in parallel and return results in replicate order.
fn replicate_map<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RngStream) -> Result<T> + Sync + Send,
{
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| f(replicate_stream(cfg, r)))
        .collect()
}

fn new_report(cfg: &ExperimentConfig) -> StudyReport {
    StudyReport {
        artifact_version: ARTIFACT_VERSION.to_string(),
        study: cfg.study,
        config: cfg.clone(),
        replicate_streams: (0..cfg.replicates).map(|r| replicate_stream(cfg, r)).collect(),
        levels: Vec::new(),
        fits: Vec::new(),
        checks: Vec::new(),
        plots: BTreeMap::new(),
        wall_time_secs: 0.0,
    }
}

fn simulation_noise(cfg: &ExperimentConfig) -> Result<NoiseGenerator> {
    NoiseGenerator::new(DiamondLatticeSpec::cone(cfg.n_sim)?, cfg.hurst, cfg.backend)
}

/// Column `k` of a replicate-major table.
fn column<T: Copy>(rows: &[Vec<T>], k: usize) -> Vec<T> {
    rows.iter().map(|r| r[k]).collect()
}

fn fit_series(series: &str, quantity: &str, points: Vec<(f64, f64)>, target_slope: Option<f64>) -> FitSummary {
    let (fit, note) = if points.iter().all(|p| p.1 == 0.0) {
        (None, Some("errors vanish identically; slope undefined".to_string()))
    } else {
        match rate_fit(&points) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    FitSummary {
        series: series.to_string(),
        quantity: quantity.to_string(),
        fit,
        target_slope,
        note,
    }
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Nodes `(a K, b K)` with `K = k_max` and `K ≤ a K, b K ≤ N_sim - K`.
pub fn probe_nodes(n_sim: usize, k_max: usize) -> Vec<(i64, i64)> {
    let k = k_max as i64;
    let hi = n_sim as i64 - k;
    let coords: Vec<i64> = (1..).map(|a| a * k).take_while(|&x| x <= hi).collect();
    coords
        .iter()
        .flat_map(|&i| coords.iter().map(move |&j| (i, j)))
        .collect()
}

fn z_check(name: &str, samples: &[f64], reference: f64, limit: f64) -> Check {
    let stats = LevelStats::from_samples(name, 0.0, samples, samples);
    let z = if stats.mc_se > 0.0 {
        (stats.mean - reference) / stats.mc_se
    } else if stats.mean == reference {
        0.0
    } else {
        f64::INFINITY
    };
    Check {
        name: name.to_string(),
        value: stats.mean,
        reference,
        z_score: Some(z),
        passed: z.abs() < limit,
    }
}

/// Quadratic variation of the linear solution against its limit constant.
pub fn run_linear_qv(cfg: &ExperimentConfig) -> Result<StudyReport> {
    require(cfg, Study::LinearQv)?;
    let start = Instant::now();
    let gen = simulation_noise(cfg)?;
    let rows = replicate_map(cfg, |stream| {
        let big_v = march(&gen.sample(stream)?, &DiffusionSpec::LINEAR)?;
        cfg.n_obs_levels
            .iter()
            .map(|&n| qvar(&restrict(&big_v, n)?, cfg.hurst))
            .collect::<Result<Vec<f64>>>()
    })?;
    let c = qv_limit_constant(cfg.hurst, cfg.constant_mode);
    let mut report = new_report(cfg);
    let mut points = Vec::new();
    for (k, &n) in cfg.n_obs_levels.iter().enumerate() {
        let q = column(&rows, k);
        let err: Vec<f64> = q.iter().map(|x| x - c).collect();
        let stats = LevelStats::from_samples("q_linear", n as f64, &q, &err);
        let mse = stats.l2_err * stats.l2_err;
        points.push((n as f64, mse));
        report
            .checks
            .push(z_check(&format!("mean_within_3se_n{n}"), &q, c, 3.0));
        report
            .levels
            .push(stats.with_extra("limit", c).with_extra("sq_l2_err", mse));
    }
    report
        .fits
        .push(fit_series("q_linear", "sq_l2_err", points, Some(-1.0)));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Quadratic variation of the nonlinear solution against `c θ² ∬ F²(v)`, the
/// integral taken as the Riemann sum on the simulation grid.
pub fn run_qv_convergence(cfg: &ExperimentConfig) -> Result<StudyReport> {
    require(cfg, Study::QvConvergence)?;
    let start = Instant::now();
    let gen = simulation_noise(cfg)?;
    let c = qv_limit_constant(cfg.hurst, cfg.constant_mode);
    let theta2 = cfg.diffusion.theta * cfg.diffusion.theta;
    let rows = replicate_map(cfg, |stream| {
        let v = march(&gen.sample(stream)?, &cfg.diffusion)?;
        let target = c * theta2 * riemann_f2(&restrict(&v, cfg.n_sim)?, &cfg.diffusion.kind)?;
        let mut out = vec![target];
        for &n in &cfg.n_obs_levels {
            out.push(qvar(&restrict(&v, n)?, cfg.hurst)?);
        }
        Ok(out)
    })?;
    let targets = column(&rows, 0);
    let mut report = new_report(cfg);
    let mut points = Vec::new();
    let mut l1 = Vec::new();
    for (k, &n) in cfg.n_obs_levels.iter().enumerate() {
        let q = column(&rows, k + 1);
        let err: Vec<f64> = q.iter().zip(&targets).map(|(x, t)| x - t).collect();
        let stats = LevelStats::from_samples("q_nonlinear", n as f64, &q, &err);
        points.push((n as f64, stats.l1_err));
        l1.push(stats.l1_err);
        report.levels.push(stats);
    }
    let mean_target = targets.iter().sum::<f64>() / targets.len() as f64;
    report.levels.iter_mut().for_each(|l| {
        l.extra.insert("mean_limit".into(), mean_target);
    });
    report.checks.push(Check {
        name: "l1_error_decreasing".into(),
        value: l1.last().copied().unwrap_or(0.0),
        reference: l1.first().copied().unwrap_or(0.0),
        z_score: None,
        passed: strictly_decreasing(&l1),
    });
    report
        .fits
        .push(fit_series("q_nonlinear", "l1_err", points, Some(-cfg.hurst.value())));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Norms of the local-linearization remainders `R^±_ε` over a fixed set of
/// interior nodes of the unit square.
pub fn run_remainder_rate(cfg: &ExperimentConfig) -> Result<StudyReport> {
    require(cfg, Study::RemainderRate)?;
    let start = Instant::now();
    let gen = simulation_noise(cfg)?;
    let k_max = *cfg.eps_levels.last().expect("validated non-empty");
    let nodes = probe_nodes(cfg.n_sim, k_max);
    let signs = [1i64, -1];
    let rows = replicate_map(cfg, |stream| {
        let (v, big_v) = simulate_pair(&gen.sample(stream)?, &cfg.diffusion)?;
        let mut out = Vec::with_capacity(2 * cfg.eps_levels.len() * nodes.len());
        for sign in signs {
            for &k in &cfg.eps_levels {
                for &node in &nodes {
                    out.push(remainder(&v, &big_v, &cfg.diffusion, node, k as i64, sign)?);
                }
            }
        }
        Ok(out)
    })?;
    let h = 1.0 / cfg.n_sim as f64;
    let mut report = new_report(cfg);
    let block = nodes.len();
    for (si, sign) in signs.iter().enumerate() {
        let series = if *sign > 0 { "plus" } else { "minus" };
        let mut points = Vec::new();
        for (ki, &k) in cfg.eps_levels.iter().enumerate() {
            let offset = (si * cfg.eps_levels.len() + ki) * block;
            let samples: Vec<f64> = rows
                .iter()
                .flat_map(|r| r[offset..offset + block].iter().copied())
                .collect();
            let stats = LevelStats::from_samples(series, k as f64, &samples, &samples);
            let l4 = lp_norm_mc(&samples, 4.0)?;
            points.push((k as f64 * h, stats.l2_err));
            report
                .levels
                .push(stats.with_extra("eps", k as f64 * h).with_extra("l4_err", l4));
        }
        report
            .fits
            .push(fit_series(series, "l2_err", points, Some(cfg.hurst.two_h() + 0.5)));
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The θ estimator at every observation level.
pub fn run_estimator(cfg: &ExperimentConfig) -> Result<StudyReport> {
    require(cfg, Study::Estimator)?;
    let start = Instant::now();
    let gen = simulation_noise(cfg)?;
    let rows = replicate_map(cfg, |stream| {
        let v = march(&gen.sample(stream)?, &cfg.diffusion)?;
        cfg.n_obs_levels
            .iter()
            .map(|&n| Ok(estimate_theta(&restrict(&v, n)?, &cfg.diffusion, cfg.hurst, cfg.constant_mode)?.theta_hat))
            .collect::<Result<Vec<f64>>>()
    })?;
    let theta = cfg.diffusion.theta;
    let mut report = new_report(cfg);
    let mut abs_err = Vec::new();
    let mut summary = Vec::new();
    let mut realization = Vec::new();
    for (k, &n) in cfg.n_obs_levels.iter().enumerate() {
        let est = column(&rows, k);
        let err: Vec<f64> = est.iter().map(|x| x - theta).collect();
        let mut stats = LevelStats::from_samples("theta_hat", n as f64, &est, &err);
        let rel = if theta > 0.0 { stats.l1_err / theta } else { 0.0 };
        stats = stats.with_extra("rel_err", rel);
        abs_err.push(stats.l1_err);
        summary.push(vec![n as f64, stats.mean, stats.sd, stats.l1_err, rel]);
        realization.push(vec![n as f64, est[0]]);
        report.levels.push(stats);
    }
    report.checks.push(Check {
        name: "mean_abs_error_decreasing".into(),
        value: abs_err.last().copied().unwrap_or(0.0),
        reference: abs_err.first().copied().unwrap_or(0.0),
        z_score: None,
        passed: strictly_decreasing(&abs_err),
    });
    report.plots.insert(
        "estimator".into(),
        PlotTable {
            columns: ["n", "mean_theta_hat", "sd_theta_hat", "abs_err", "rel_err"]
                .map(String::from)
                .to_vec(),
            rows: summary,
        },
    );
    report.plots.insert(
        "realization".into(),
        PlotTable {
            columns: ["n", "theta_hat"].map(String::from).to_vec(),
            rows: realization,
        },
    );
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Second-moment scaling of increments of the nonlinear solution in `λ` and in `x`.
pub fn run_holder(cfg: &ExperimentConfig) -> Result<StudyReport> {
    require(cfg, Study::Holder)?;
    let start = Instant::now();
    let gen = simulation_noise(cfg)?;
    let k_max = *cfg.eps_levels.last().expect("validated non-empty");
    let nodes = probe_nodes(cfg.n_sim, k_max);
    let rows = replicate_map(cfg, |stream| {
        let v = march(&gen.sample(stream)?, &cfg.diffusion)?;
        let mut out = Vec::with_capacity(2 * cfg.eps_levels.len() * nodes.len());
        for &k in &cfg.eps_levels {
            let k = k as i64;
            for &(i, j) in &nodes {
                out.push(v.at(i, j + k)? - v.at(i, j)?);
            }
        }
        for &k in &cfg.eps_levels {
            let k = k as i64;
            for &(i, j) in &nodes {
                out.push(v.at(i - k, j + k)? - v.at(i, j)?);
            }
        }
        Ok(out)
    })?;
    let h = 1.0 / cfg.n_sim as f64;
    let block = nodes.len();
    let mut report = new_report(cfg);
    for (si, (series, unit)) in [("rotated", h), ("spatial", SQRT_2 * h)].into_iter().enumerate() {
        let mut points = Vec::new();
        for (ki, &k) in cfg.eps_levels.iter().enumerate() {
            let offset = (si * cfg.eps_levels.len() + ki) * block;
            let samples: Vec<f64> = rows
                .iter()
                .flat_map(|r| r[offset..offset + block].iter().copied())
                .collect();
            let stats = LevelStats::from_samples(series, k as f64, &samples, &samples);
            points.push((k as f64 * unit, stats.l2_err));
            report.levels.push(stats.with_extra("distance", k as f64 * unit));
        }
        report
            .fits
            .push(fit_series(series, "l2_err", points, Some(cfg.hurst.value())));
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Distributional checks of fGn rows, the exact lattice backend and the fine-grid
/// aggregation.
pub fn run_noise_validate(cfg: &ExperimentConfig) -> Result<StudyReport> {
    require(cfg, Study::NoiseValidate)?;
    let start = Instant::now();
    let hurst = cfg.hurst;
    let n = cfg.n_sim;
    let dx = 1.0 / n as f64;
    let max_lag = 8usize;
    let rows_sampler = FgnSampler::new(n, dx, hurst)?;
    let lattice = DiamondLatticeSpec::new(n, 2)?;
    let exact = ExactSampler::new(lattice, hurst)?;
    let refinement = match cfg.backend {
        Backend::Aggregate { refinement } => refinement,
        Backend::Exact => DEFAULT_REFINEMENT,
    };
    let aggregate = AggregateSampler::new(lattice, hurst, refinement)?;
    let aggregate_reps = cfg.replicates.min(2000);

    use LatticeRegion::{Boundary, Cell};
    let pairs: [(&str, LatticeRegion, LatticeRegion); 6] = [
        ("var_cell_0_0", Cell(0, 0), Cell(0, 0)),
        ("var_cell_1_1", Cell(1, 1), Cell(1, 1)),
        ("cov_same_antidiagonal", Cell(1, 0), Cell(0, 1)),
        ("cov_next_antidiagonal", Cell(0, 0), Cell(1, 0)),
        ("cov_gap_two", Cell(0, 0), Cell(1, 1)),
        ("var_boundary_0", Boundary(0), Boundary(0)),
    ];
    let mass = |f: &DiamondField, r: LatticeRegion| match r {
        Cell(i, j) => f.mass(i, j).expect("cell in lattice"),
        Boundary(i) => f.boundary_mass(i).expect("triangle in lattice"),
    };
    let region = |r: LatticeRegion| match r {
        Cell(i, j) => lattice.diamond(i, j).map(|d| d.region()),
        Boundary(i) => lattice.boundary_region(i),
    };

    let rows = replicate_map(cfg, |stream| {
        let row = rows_sampler.sample(stream.substream(0));
        let mut out: Vec<f64> = (0..=max_lag)
            .map(|lag| {
                let m = n - lag;
                (0..m).map(|j| row[j] * row[j + lag]).sum::<f64>() / m as f64
            })
            .collect();
        let field = exact.sample(stream.substream(1));
        out.extend(pairs.iter().map(|(_, a, b)| mass(&field, *a) * mass(&field, *b)));
        if (stream.stream_id as usize) < aggregate_reps {
            let agg = aggregate.sample(stream.substream(2))?;
            out.extend(pairs.iter().map(|(_, a, b)| mass(&agg, *a) * mass(&agg, *b)));
        }
        Ok(out)
    })?;

    let mut report = new_report(cfg);
    for lag in 0..=max_lag {
        let samples = column(&rows, lag);
        let target = fgn_covariance(lag as u64, dx, hurst);
        let err: Vec<f64> = samples.iter().map(|s| s - target).collect();
        report
            .levels
            .push(LevelStats::from_samples("fgn_covariance", lag as f64, &samples, &err).with_extra("target", target));
        report
            .checks
            .push(z_check(&format!("fgn_lag_{lag}"), &samples, target, 4.0));
    }
    let scale = diamond_variance(lattice.h(), hurst);
    for (p, (name, a, b)) in pairs.iter().enumerate() {
        let exact_value = region_covariance(&region(*a)?, &region(*b)?, hurst);
        if let (Cell(i, j), Cell(k, l)) = (a, b) {
            let via_diamonds = diamond_covariance(&lattice.diamond(*i, *j)?, &lattice.diamond(*k, *l)?, hurst);
            debug_assert!((via_diamonds - exact_value).abs() <= 1e-12 * scale);
        }
        let samples = column(&rows, max_lag + 1 + p);
        report
            .checks
            .push(z_check(&format!("exact_{name}"), &samples, exact_value, 4.0));
        let agg_value = aggregate_covariance(&lattice, refinement, hurst, *a, *b)?;
        let rel = (agg_value - exact_value).abs() / scale;
        report.checks.push(Check {
            name: format!("aggregate_r{refinement}_{name}_within_3pct"),
            value: agg_value,
            reference: exact_value,
            z_score: None,
            passed: rel <= 0.03,
        });
        let agg_samples: Vec<f64> = rows[..aggregate_reps]
            .iter()
            .map(|r| r[max_lag + 1 + pairs.len() + p])
            .collect();
        report.checks.push(z_check(
            &format!("aggregate_r{refinement}_{name}_mc"),
            &agg_samples,
            agg_value,
            4.0,
        ));
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Dispatch on `cfg.study`.
pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    match cfg.study {
        Study::NoiseValidate => run_noise_validate(cfg),
        Study::LinearQv => run_linear_qv(cfg),
        Study::QvConvergence => run_qv_convergence(cfg),
        Study::RemainderRate => run_remainder_rate(cfg),
        Study::Estimator => run_estimator(cfg),
        Study::Holder => run_holder(cfg),
    }
}
