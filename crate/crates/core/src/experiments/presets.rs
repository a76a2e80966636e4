//! Shipped study configurations.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// `(name, description, config text)`.
pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "paper_h05_estimator",
        "θ estimator, H = 0.5, F = 1 + sin u, θ = 2, N ∈ {20, 40, 60}",
        "study = estimator\nhurst = 0.5\nf_kind = one_plus_sin\nf_theta = 2\nn_sim = 120\n\
         n_obs_levels = [20, 40, 60]\nreplicates = 100\nseed = 20240501\n",
    ),
    (
        "paper_h055_estimator",
        "θ estimator, H = 0.55, F = 1 + sin u, θ = 2, N ∈ {30, 45, 60}",
        "study = estimator\nhurst = 0.55\nf_kind = one_plus_sin\nf_theta = 2\nn_sim = 180\n\
         n_obs_levels = [30, 45, 60]\nreplicates = 100\nseed = 20240502\n",
    ),
    (
        "linear_qv_h05",
        "quadratic variation of the linear solution, H = 0.5",
        "study = linear_qv\nhurst = 0.5\nn_sim = 128\nn_obs_levels = [16, 32, 64, 128]\n\
         replicates = 2000\nseed = 1001\n",
    ),
    (
        "linear_qv_h075",
        "quadratic variation of the linear solution, H = 0.75",
        "study = linear_qv\nhurst = 0.75\nn_sim = 128\nn_obs_levels = [16, 32, 64, 128]\n\
         replicates = 2000\nseed = 1002\n",
    ),
    (
        "qv_convergence_h05",
        "quadratic variation of the nonlinear solution, H = 0.5, F = 1 + sin u, θ = 1",
        "study = qv_convergence\nhurst = 0.5\nf_kind = one_plus_sin\nf_theta = 1\nn_sim = 256\n\
         n_obs_levels = [16, 32, 64, 128]\nreplicates = 500\nseed = 2001\n",
    ),
    (
        "remainder_h05",
        "local-linearization remainder, H = 0.5, F = 1 + sin u",
        "study = remainder_rate\nhurst = 0.5\nf_kind = one_plus_sin\nf_theta = 1\nn_sim = 512\n\
         eps_levels = [8, 16, 32, 64]\nreplicates = 500\nseed = 3001\n",
    ),
    (
        "remainder_h075",
        "local-linearization remainder, H = 0.75, F = 1 + sin u",
        "study = remainder_rate\nhurst = 0.75\nf_kind = one_plus_sin\nf_theta = 1\nn_sim = 512\n\
         eps_levels = [8, 16, 32, 64]\nreplicates = 500\nseed = 3002\n",
    ),
    (
        "holder_h05",
        "increment moment scaling of the nonlinear solution, H = 0.5",
        "study = holder\nhurst = 0.5\nf_kind = one_plus_sin\nf_theta = 1\nn_sim = 256\n\
         eps_levels = [4, 8, 16, 32, 64]\nreplicates = 200\nseed = 4001\n",
    ),
    (
        "holder_h075",
        "increment moment scaling of the nonlinear solution, H = 0.75",
        "study = holder\nhurst = 0.75\nf_kind = one_plus_sin\nf_theta = 1\nn_sim = 256\n\
         eps_levels = [4, 8, 16, 32, 64]\nreplicates = 200\nseed = 4002\n",
    ),
    (
        "noise_h05",
        "distributional checks of both noise backends, H = 0.5",
        "study = noise_validate\nhurst = 0.5\nn_sim = 64\nreplicates = 20000\nseed = 5001\n",
    ),
    (
        "noise_h075",
        "distributional checks of both noise backends, H = 0.75",
        "study = noise_validate\nhurst = 0.75\nn_sim = 64\nreplicates = 20000\nseed = 5002\n",
    ),
];

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, text)| *text)
        .ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|p| p.0).collect();
            Error::Config(format!("unknown preset `{name}`; available: {}", names.join(", ")))
        })
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(preset_text(name)?)
}
