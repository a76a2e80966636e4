//! Flat `key = value` study configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{ConstantMode, HurstParam};
use crate::noise::Backend;
use crate::wave::{DiffusionKind, DiffusionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    NoiseValidate,
    LinearQv,
    QvConvergence,
    RemainderRate,
    Estimator,
    Holder,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::NoiseValidate,
        Study::LinearQv,
        Study::QvConvergence,
        Study::RemainderRate,
        Study::Estimator,
        Study::Holder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::NoiseValidate => "noise_validate",
            Study::LinearQv => "linear_qv",
            Study::QvConvergence => "qv_convergence",
            Study::RemainderRate => "remainder_rate",
            Study::Estimator => "estimator",
            Study::Holder => "holder",
        }
    }
}

impl std::fmt::Display for Study {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Study::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| {
            let names: Vec<_> = Study::ALL.iter().map(|s| s.name()).collect();
            Error::invalid(
                "study",
                format!("unknown study `{s}`; expected one of {}", names.join(", ")),
            )
        })
    }
}

/// Smallest `ε/h` allowed in remainder studies, and the factor by which `N_sim`
/// must exceed the largest.
pub const REMAINDER_MIN_EPS: usize = 8;

/// A validated study configuration.
///
/// | key | meaning | default |
/// |---|---|---|
/// | `study` | one of the [`Study`] names | required |
/// | `hurst` | Hurst index in `[0.5, 1)` | `0.5` |
/// | `f_kind` | `one_plus_sin`, `constant(c)` or `affine(a,b)` | `one_plus_sin` |
/// | `f_theta` | multiplier `θ ≥ 0` | `1` |
/// | `n_sim` | simulation lattice resolution `N_sim` | `128` |
/// | `n_obs_levels` | observation resolutions, each dividing `n_sim` | `[16, 32, 64, 128]` |
/// | `eps_levels` | increment scales in lattice steps | `[8, 16, 32, 64]` |
/// | `replicates` | Monte Carlo replicates | `100` |
/// | `seed` | 64-bit master seed | `0` |
/// | `backend` | `exact` or `aggregate:R` | `exact` |
/// | `constant_mode` | `derived_normalization` or `paper_lemma` | `derived_normalization` |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: Study,
    pub hurst: HurstParam,
    pub diffusion: DiffusionSpec,
    pub n_sim: usize,
    pub n_obs_levels: Vec<usize>,
    pub eps_levels: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub backend: Backend,
    pub constant_mode: ConstantMode,
}

const KEYS: [&str; 11] = [
    "study",
    "hurst",
    "f_kind",
    "f_theta",
    "n_sim",
    "n_obs_levels",
    "eps_levels",
    "replicates",
    "seed",
    "backend",
    "constant_mode",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .unwrap_or(value);
    inner
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn format_list(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

impl ExperimentConfig {
    /// Configuration with every optional key at its default.
    pub fn with_defaults(study: Study) -> Self {
        ExperimentConfig {
            study,
            hurst: HurstParam::WHITE,
            diffusion: DiffusionSpec {
                kind: DiffusionKind::OnePlusSin,
                theta: 1.0,
            },
            n_sim: 128,
            n_obs_levels: vec![16, 32, 64, 128],
            eps_levels: vec![8, 16, 32, 64],
            replicates: 100,
            seed: 0,
            backend: Backend::Exact,
            constant_mode: ConstantMode::DerivedNormalization,
        }
    }

    /// Parse and validate a `key = value` document; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("unknown key `{key}`"),
                });
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            entries.push((key, value));
        }
        let study = entries
            .iter()
            .find(|(k, _)| *k == "study")
            .ok_or_else(|| Error::invalid("study", "missing required key"))?
            .1
            .parse::<Study>()?;
        let mut cfg = Self::with_defaults(study);
        let mut kind = cfg.diffusion.kind;
        let mut theta = cfg.diffusion.theta;
        for (key, value) in entries {
            match key {
                "study" => {}
                "hurst" => {
                    let h: f64 = parse_num(key, value)?;
                    cfg.hurst = HurstParam::new(h).map_err(|e| Error::invalid(key, e.to_string()))?;
                }
                "f_kind" => kind = value.parse()?,
                "f_theta" => theta = parse_num(key, value)?,
                "n_sim" => cfg.n_sim = parse_num(key, value)?,
                "n_obs_levels" => cfg.n_obs_levels = parse_list(key, value)?,
                "eps_levels" => cfg.eps_levels = parse_list(key, value)?,
                "replicates" => cfg.replicates = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "backend" => cfg.backend = value.parse()?,
                "constant_mode" => {
                    cfg.constant_mode = match value {
                        "derived_normalization" => ConstantMode::DerivedNormalization,
                        "paper_lemma" => ConstantMode::PaperLemma,
                        _ => {
                            return Err(Error::invalid(
                                key,
                                format!("expected derived_normalization or paper_lemma, got `{value}`"),
                            ))
                        }
                    }
                }
                _ => unreachable!("key list checked above"),
            }
        }
        cfg.diffusion = DiffusionSpec::new(kind, theta)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "must be ≥ 1"));
        }
        if self.n_sim == 0 {
            return Err(Error::invalid("n_sim", "must be ≥ 1"));
        }
        if self.eps_levels.contains(&0) {
            return Err(Error::invalid("eps_levels", "every multiple must be ≥ 1"));
        }
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&self.n_obs_levels) {
            return Err(Error::invalid("n_obs_levels", "must be strictly increasing"));
        }
        if !sorted(&self.eps_levels) {
            return Err(Error::invalid("eps_levels", "must be strictly increasing"));
        }
        match self.study {
            Study::LinearQv | Study::QvConvergence | Study::Estimator => {
                if self.n_obs_levels.is_empty() {
                    return Err(Error::invalid("n_obs_levels", "at least one level required"));
                }
                if let Some(bad) = self.n_obs_levels.iter().find(|&&n| n == 0 || self.n_sim % n != 0) {
                    return Err(Error::invalid(
                        "n_obs_levels",
                        format!("{bad} does not divide n_sim = {}", self.n_sim),
                    ));
                }
            }
            Study::RemainderRate => {
                let (Some(&lo), Some(&hi)) = (self.eps_levels.first(), self.eps_levels.last()) else {
                    return Err(Error::invalid("eps_levels", "at least one level required"));
                };
                if lo < REMAINDER_MIN_EPS || REMAINDER_MIN_EPS * hi > self.n_sim {
                    return Err(Error::invalid(
                        "eps_levels",
                        format!(
                            "remainder window needs {REMAINDER_MIN_EPS} ≤ eps and {REMAINDER_MIN_EPS}·max eps ≤ n_sim = {}",
                            self.n_sim
                        ),
                    ));
                }
            }
            Study::Holder => {
                let Some(&hi) = self.eps_levels.last() else {
                    return Err(Error::invalid("eps_levels", "at least one level required"));
                };
                if 2 * hi > self.n_sim {
                    return Err(Error::invalid(
                        "eps_levels",
                        format!("2·max eps must not exceed n_sim = {}", self.n_sim),
                    ));
                }
            }
            Study::NoiseValidate => {
                if self.n_sim < 9 {
                    return Err(Error::invalid("n_sim", "noise validation needs rows of length ≥ 9"));
                }
            }
        }
        Ok(())
    }

    /// The configuration as a `key = value` document that parses back to itself.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mode = match self.constant_mode {
            ConstantMode::DerivedNormalization => "derived_normalization",
            ConstantMode::PaperLemma => "paper_lemma",
        };
        let _ = writeln!(s, "study = {}", self.study);
        let _ = writeln!(s, "hurst = {}", self.hurst);
        let _ = writeln!(s, "f_kind = {}", self.diffusion.kind);
        let _ = writeln!(s, "f_theta = {}", self.diffusion.theta);
        let _ = writeln!(s, "n_sim = {}", self.n_sim);
        let _ = writeln!(s, "n_obs_levels = {}", format_list(&self.n_obs_levels));
        let _ = writeln!(s, "eps_levels = {}", format_list(&self.eps_levels));
        let _ = writeln!(s, "replicates = {}", self.replicates);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "backend = {}", self.backend);
        let _ = writeln!(s, "constant_mode = {mode}");
        s
    }

    /// Single-line form of [`to_text`](Self::to_text), for CSV headers.
    pub fn to_line(&self) -> String {
        self.to_text().lines().collect::<Vec<_>>().join("; ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let cfg = ExperimentConfig::parse(
            "# estimator run\nstudy = estimator\nhurst=0.55\nf_kind = constant(2)\nf_theta = 0.5 # trailing\n\
             n_sim = 60\nn_obs_levels = [20, 30, 60]\nreplicates = 7\nseed = 99\nbackend = aggregate:4\n\
             constant_mode = paper_lemma\n",
        )
        .unwrap();
        assert_eq!(cfg.study, Study::Estimator);
        assert_eq!(cfg.hurst.value(), 0.55);
        assert_eq!(cfg.diffusion.kind, DiffusionKind::Constant(2.0));
        assert_eq!(cfg.diffusion.theta, 0.5);
        assert_eq!(cfg.n_obs_levels, vec![20, 30, 60]);
        assert_eq!(cfg.backend, Backend::Aggregate { refinement: 4 });
        assert_eq!(cfg.constant_mode, ConstantMode::PaperLemma);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn defaults_apply() {
        let cfg = ExperimentConfig::parse("study = linear_qv").unwrap();
        assert_eq!(cfg, ExperimentConfig::with_defaults(Study::LinearQv));
    }

    #[test]
    fn rejections() {
        let err = |t: &str| ExperimentConfig::parse(t).unwrap_err();
        assert!(matches!(err("study = estimator\nhurst = 0.4"), Error::InvalidKey { key, .. } if key == "hurst"));
        assert!(matches!(
            err("study = estimator\nn_sim = 100\nn_obs_levels = [40]"),
            Error::InvalidKey { key, .. } if key == "n_obs_levels"
        ));
        assert!(matches!(
            err("study = estimator\ncolour = red"),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            err("study = estimator\n\nseed 4"),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(
            err("study = estimator\nseed = 1\nseed = 2"),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(err("hurst = 0.5"), Error::InvalidKey { key, .. } if key == "study"));
        assert!(matches!(err("study = nope"), Error::InvalidKey { key, .. } if key == "study"));
        assert!(
            matches!(err("study = estimator\nreplicates = 0"), Error::InvalidKey { key, .. } if key == "replicates")
        );
        assert!(matches!(err("study = estimator\nf_theta = -1"), Error::InvalidKey { key, .. } if key == "f_theta"));
        assert!(matches!(
            err("study = remainder_rate\nn_sim = 256\neps_levels = [8, 16, 64]"),
            Error::InvalidKey { key, .. } if key == "eps_levels"
        ));
        assert!(matches!(
            err("study = remainder_rate\nn_sim = 512\neps_levels = [4, 8]"),
            Error::InvalidKey { key, .. } if key == "eps_levels"
        ));
        assert!(matches!(
            err("study = estimator\nn_obs_levels = [64, 32]"),
            Error::InvalidKey { key, .. } if key == "n_obs_levels"
        ));
    }
}
