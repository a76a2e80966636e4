//! `stochwave` command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use stochwave::experiments::{preset, preset_text, run_study, ExperimentConfig, StudyReport, PRESETS};
use stochwave::noise::{DiamondField, DiamondLatticeSpec, NoiseGenerator};
use stochwave::qvar::{estimate_theta, QVarReport};
use stochwave::wave::{restrict, simulate_pair, LatticeField};
use stochwave::{RngStream, ARTIFACT_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "stochwave",
    version,
    about = "Lattice simulation and statistics of the stochastic wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one realization of the nonlinear and linear solutions.
    Simulate(RunArgs),
    /// Sample one realization of the lattice noise masses.
    Noise(RunArgs),
    /// Quadratic variation of one realization at every observation level.
    Qvar(RunArgs),
    /// θ estimate of one realization at every observation level.
    Estimate(RunArgs),
    /// Run the configured Monte Carlo study.
    Study(RunArgs),
    /// List shipped presets.
    Presets {
        /// Print the configuration text of one preset.
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    config: Option<PathBuf>,
    /// Name of a shipped preset.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, env = "STOCHWAVE_OUT", default_value = "out")]
    out: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicate index of the realization for single-path subcommands.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Replace existing artifacts.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Debug)]
enum CliError {
    Core(stochwave::Error),
    Exists(PathBuf),
}

impl From<stochwave::Error> for CliError {
    fn from(e: stochwave::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Exists(p) => write!(f, "{} exists; pass --overwrite to replace it", p.display()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_config(args: &RunArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_file(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Comment lines identifying the build and the resolved configuration.
fn provenance(cfg: &ExperimentConfig) -> String {
    format!("# {ARTIFACT_VERSION}\n# {}\n", cfg.to_line())
}

/// Write every artifact, refusing to replace existing files unless `overwrite` is set.
fn write_artifacts(dir: &Path, artifacts: &[(String, String)], overwrite: bool) -> CliResult<()> {
    if !overwrite {
        if let Some((name, _)) = artifacts.iter().find(|(name, _)| dir.join(name).exists()) {
            return Err(CliError::Exists(dir.join(name)));
        }
    }
    fs::create_dir_all(dir)?;
    for (name, contents) in artifacts {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn sample_noise(cfg: &ExperimentConfig, replicate: u64) -> CliResult<DiamondField> {
    let lattice = DiamondLatticeSpec::cone(cfg.n_sim)?;
    let generator = NoiseGenerator::new(lattice, cfg.hurst, cfg.backend)?;
    Ok(generator.sample(RngStream::new(cfg.seed, replicate))?)
}

fn field_csv(cfg: &ExperimentConfig, field: &LatticeField) -> CliResult<String> {
    let mut buf = provenance(cfg).into_bytes();
    field.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn cmd_noise(cfg: &ExperimentConfig, args: &RunArgs) -> CliResult<Vec<(String, String)>> {
    let noise = sample_noise(cfg, args.replicate)?;
    let mut buf = provenance(cfg).into_bytes();
    noise.write_csv(&mut buf)?;
    println!(
        "noise h={} cells={} total_mass={}",
        noise.lattice().h(),
        noise.lattice().cell_count(),
        noise.total_mass()
    );
    Ok(vec![(
        "noise.csv".into(),
        String::from_utf8(buf).expect("CSV output is UTF-8"),
    )])
}

fn cmd_simulate(cfg: &ExperimentConfig, args: &RunArgs) -> CliResult<Vec<(String, String)>> {
    let noise = sample_noise(cfg, args.replicate)?;
    let (v, big_v) = simulate_pair(&noise, &cfg.diffusion)?;
    println!("solution N_sim={} max_abs={}", cfg.n_sim, v.max_abs());
    println!("linear N_sim={} max_abs={}", cfg.n_sim, big_v.max_abs());
    Ok(vec![
        ("solution.csv".into(), field_csv(cfg, &v)?),
        ("linear.csv".into(), field_csv(cfg, &big_v)?),
    ])
}

fn observed_solution(cfg: &ExperimentConfig, args: &RunArgs) -> CliResult<LatticeField> {
    let noise = sample_noise(cfg, args.replicate)?;
    Ok(stochwave::wave::march(&noise, &cfg.diffusion)?)
}

fn cmd_qvar(cfg: &ExperimentConfig, args: &RunArgs) -> CliResult<Vec<(String, String)>> {
    let v = observed_solution(cfg, args)?;
    let mut reports = Vec::new();
    let mut csv = provenance(cfg);
    csv.push_str("n,q_value,riemann_f2,limit_constant,target\n");
    let theta2 = cfg.diffusion.theta * cfg.diffusion.theta;
    for &n in &cfg.n_obs_levels {
        let r = QVarReport::compute(&restrict(&v, n)?, &cfg.diffusion.kind, cfg.hurst, cfg.constant_mode)?;
        let target = r.limit_constant * theta2 * r.riemann_f2;
        println!("N={n} Q_N={} target={target}", r.q_value);
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            n, r.q_value, r.riemann_f2, r.limit_constant, target
        );
        reports.push(r);
    }
    let doc = json!({
        "artifact_version": ARTIFACT_VERSION,
        "config": cfg,
        "replicate": args.replicate,
        "levels": reports,
    });
    Ok(vec![
        ("qvar.json".into(), serde_json::to_string_pretty(&doc)? + "\n"),
        ("qvar.csv".into(), csv),
    ])
}

fn cmd_estimate(cfg: &ExperimentConfig, args: &RunArgs) -> CliResult<Vec<(String, String)>> {
    let v = observed_solution(cfg, args)?;
    let mut estimates = Vec::new();
    let mut csv = provenance(cfg);
    csv.push_str("n,theta_hat,abs_err,rel_err\n");
    let theta = cfg.diffusion.theta;
    for &n in &cfg.n_obs_levels {
        let e = estimate_theta(&restrict(&v, n)?, &cfg.diffusion, cfg.hurst, cfg.constant_mode)?;
        let abs_err = (e.theta_hat - theta).abs();
        let rel_err = if theta > 0.0 { abs_err / theta } else { 0.0 };
        println!("N={n} theta_hat={} abs_err={abs_err}", e.theta_hat);
        let _ = writeln!(csv, "{n},{},{abs_err},{rel_err}", e.theta_hat);
        estimates.push(e);
    }
    let doc = json!({
        "artifact_version": ARTIFACT_VERSION,
        "config": cfg,
        "replicate": args.replicate,
        "levels": estimates,
    });
    Ok(vec![
        ("estimate.json".into(), serde_json::to_string_pretty(&doc)? + "\n"),
        ("estimate.csv".into(), csv),
    ])
}

fn print_study(report: &StudyReport) {
    for l in &report.levels {
        println!(
            "{} level={} mean={} mc_se={} l1_err={} l2_err={}",
            l.series, l.level, l.mean, l.mc_se, l.l1_err, l.l2_err
        );
    }
    for f in &report.fits {
        match (&f.fit, &f.note) {
            (Some(fit), _) => println!(
                "fit {} {} slope={} r2={} target={}",
                f.series,
                f.quantity,
                fit.slope,
                fit.r_squared,
                f.target_slope.map_or("-".to_string(), |t| t.to_string())
            ),
            (None, note) => println!(
                "fit {} {} {}",
                f.series,
                f.quantity,
                note.as_deref().unwrap_or("unavailable")
            ),
        }
    }
    for c in &report.checks {
        println!("check {} {}", c.name, if c.passed { "pass" } else { "fail" });
    }
    eprintln!("wall time {:.2}s", report.wall_time_secs);
}

fn cmd_study(cfg: &ExperimentConfig) -> CliResult<Vec<(String, String)>> {
    let report = run_study(cfg)?;
    print_study(&report);
    Ok(report.artifacts()?)
}

fn cmd_presets(show: Option<&str>) -> CliResult<()> {
    match show {
        Some(name) => print!("{}", preset_text(name)?),
        None => {
            for (name, description, _) in PRESETS {
                println!("{name:<22} {description}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let (args, primary): (RunArgs, &str) = match cli.command {
        Command::Presets { show } => return cmd_presets(show.as_deref()),
        Command::Simulate(args) => (args, "solution.csv"),
        Command::Noise(args) => (args, "noise.csv"),
        Command::Qvar(args) => (args, "qvar.json"),
        Command::Estimate(args) => (args, "estimate.json"),
        Command::Study(args) => (args, "report.json"),
    };
    let cfg = load_config(&args)?;
    let target = args.out.join(primary);
    if !args.overwrite && target.exists() {
        return Err(CliError::Exists(target));
    }
    let artifacts = match primary {
        "solution.csv" => cmd_simulate(&cfg, &args)?,
        "noise.csv" => cmd_noise(&cfg, &args)?,
        "qvar.json" => cmd_qvar(&cfg, &args)?,
        "estimate.json" => cmd_estimate(&cfg, &args)?,
        _ => cmd_study(&cfg)?,
    };
    write_artifacts(&args.out, &artifacts, args.overwrite)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
