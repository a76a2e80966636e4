//! Study reports and their JSON/CSV artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Study};
use crate::error::Result;
use crate::qvar::RateFit;
use crate::rng::RngStream;

/// Monte Carlo summary of one level of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub series: String,
    pub level: f64,
    pub n_samples: usize,
    pub mean: f64,
    pub sd: f64,
    pub mc_se: f64,
    /// Mean absolute deviation from the study's target.
    pub l1_err: f64,
    /// Root-mean-square deviation from the study's target.
    pub l2_err: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl LevelStats {
    /// Statistics of `samples`, with errors `errors[k]` measured against each sample's target.
    pub fn from_samples(series: &str, level: f64, samples: &[f64], errors: &[f64]) -> Self {
        debug_assert_eq!(samples.len(), errors.len());
        let n = samples.len();
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let sd = if n > 1 {
            (samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        LevelStats {
            series: series.to_string(),
            level,
            n_samples: n,
            mean,
            sd,
            mc_se: sd / nf.sqrt(),
            l1_err: errors.iter().map(|e| e.abs()).sum::<f64>() / nf,
            l2_err: (errors.iter().map(|e| e * e).sum::<f64>() / nf).sqrt(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

/// A log-log fit of one error measure against scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub series: String,
    pub quantity: String,
    pub fit: Option<RateFit>,
    pub target_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A pass/fail distributional check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub passed: bool,
}

/// Columns of numbers emitted as a plot-data CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub artifact_version: String,
    pub study: Study,
    pub config: ExperimentConfig,
    pub replicate_streams: Vec<RngStream>,
    pub levels: Vec<LevelStats>,
    pub fits: Vec<FitSummary>,
    pub checks: Vec<Check>,
    pub plots: BTreeMap<String, PlotTable>,
    /// Not serialized, so that artifacts of identical runs are byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl StudyReport {
    pub fn series(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for l in &self.levels {
            if !out.contains(&l.series.as_str()) {
                out.push(&l.series);
            }
        }
        out
    }

    pub fn series_levels<'a>(&'a self, series: &'a str) -> impl Iterator<Item = &'a LevelStats> + 'a {
        self.levels.iter().filter(move |l| l.series == series)
    }

    pub fn fit(&self, series: &str) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.series == series)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn csv_header(&self) -> String {
        format!("# {}\n# {}\n", self.artifact_version, self.config.to_line())
    }

    /// `(file name, contents)` of every artifact: `report.json`, one level CSV per
    /// series, and one CSV per plot table.
    pub fn artifacts(&self) -> Result<Vec<(String, String)>> {
        let mut out = vec![("report.json".to_string(), serde_json::to_string_pretty(self)? + "\n")];
        let series = self.series();
        for s in &series {
            let mut csv = self.csv_header();
            csv.push_str("level,mean,sd,mc_se,l1_err,l2_err\n");
            for l in self.series_levels(s) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    l.level, l.mean, l.sd, l.mc_se, l.l1_err, l.l2_err
                );
            }
            let name = if series.len() == 1 {
                "levels.csv".to_string()
            } else {
                format!("levels_{s}.csv")
            };
            out.push((name, csv));
        }
        for (name, table) in &self.plots {
            let mut csv = self.csv_header();
            csv.push_str(&table.columns.join(","));
            csv.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            out.push((format!("plot_{name}.csv"), csv));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_statistics() {
        let s = LevelStats::from_samples("x", 4.0, &[1.0, 2.0, 3.0, 6.0], &[-1.0, 0.0, 1.0, 4.0]);
        assert_eq!(s.mean, 3.0);
        assert!((s.sd - (14.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.mc_se - s.sd / 2.0).abs() < 1e-15);
        assert_eq!(s.l1_err, 1.5);
        assert!((s.l2_err - 18f64.sqrt() / 2.0).abs() < 1e-15);
        let one = LevelStats::from_samples("x", 1.0, &[5.0], &[0.0]);
        assert_eq!((one.sd, one.mc_se), (0.0, 0.0));
    }
}
