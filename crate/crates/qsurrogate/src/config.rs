//! TOML experiment configuration. Every table rejects unknown keys.
//!
//! ```toml
//! seed = 7
//! replicates = 5
//! output_dir = "out"
//!
//! [data]
//! benchmark = "griewank"      # or: csv = "colorbob.csv"
//! interval = [-5.0, 5.0]
//! grid = 20
//! dim = 2
//! noise = 0.5
//!
//! [qnn]
//! replication = 2
//! layers = 20
//! schedule = "alternating"    # circuit11_only | circuit9_only
//! max_evals = 3000
//!
//! [ann]
//! epochs = 5000
//! learning_rate = 0.01
//!
//! [sweep]
//! grid_sizes = [10, 20, 30, 40, 50]
//! noise_factors = [0.1, 0.2, 0.3, 0.4, 0.5]
//! workers = 4
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qsurrogate_core::ann::AnnConfig;
use qsurrogate_core::bench::Benchmark;
use qsurrogate_core::circuit::{AnsatzSchedule, QnnArchitecture};
use qsurrogate_core::qnn::{Readout, TrainConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Seeds per sweep cell.
    pub replicates: usize,
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub qnn: QnnConfig,
    pub ann: AnnSection,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 5,
            output_dir: None,
            data: DataConfig::default(),
            qnn: QnnConfig::default(),
            ann: AnnSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub benchmark: Benchmark,
    /// Overrides the benchmark grid with a CSV file.
    pub csv: Option<PathBuf>,
    pub features: Option<Vec<String>>,
    pub target: Option<String>,
    /// Defaults to the benchmark's standard interval.
    pub interval: Option<(f64, f64)>,
    pub grid: usize,
    pub dim: usize,
    pub noise: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            benchmark: Benchmark::Griewank,
            csv: None,
            features: None,
            target: None,
            interval: None,
            grid: 20,
            dim: 2,
            noise: 0.0,
        }
    }
}

impl DataConfig {
    pub fn interval(&self) -> (f64, f64) {
        self.interval.unwrap_or_else(|| self.benchmark.default_interval())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QnnConfig {
    pub replication: usize,
    pub layers: usize,
    pub schedule: AnsatzSchedule,
    pub reupload: bool,
    pub feature_scale: f64,
    pub max_evals: usize,
    pub rhobeg: f64,
    pub rhoend: f64,
    pub readout: Readout,
    pub init_range: (f64, f64),
}

impl Default for QnnConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            replication: 2,
            layers: 20,
            schedule: AnsatzSchedule::Alternating,
            reupload: true,
            feature_scale: 1.0,
            max_evals: t.max_evals,
            rhobeg: t.rhobeg,
            rhoend: t.rhoend,
            readout: t.readout,
            init_range: t.init_range,
        }
    }
}

impl QnnConfig {
    pub fn architecture(&self, n_features: usize) -> QnnArchitecture {
        QnnArchitecture {
            reupload: self.reupload,
            feature_scale: self.feature_scale,
            ..QnnArchitecture::new(n_features, self.replication, self.layers, self.schedule)
        }
    }

    pub fn train_config(&self, init_seed: u64) -> TrainConfig {
        TrainConfig {
            max_evals: self.max_evals,
            rhobeg: self.rhobeg,
            rhoend: self.rhoend,
            init_seed,
            init_range: self.init_range,
            readout: self.readout,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnSection {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for AnnSection {
    fn default() -> Self {
        let a = AnnConfig::default();
        Self {
            epochs: a.epochs,
            learning_rate: a.learning_rate,
        }
    }
}

impl AnnSection {
    pub fn train_config(&self, seed: u64) -> AnnConfig {
        AnnConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub grid_sizes: Vec<usize>,
    pub noise_factors: Vec<f64>,
    /// Explicit `"g:delta"` cells; replaces the Cartesian product.
    pub cells: Option<Vec<String>>,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            grid_sizes: vec![10, 20, 30, 40, 50],
            noise_factors: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            cells: None,
            workers: 0,
        }
    }
}

/// Parses `"20:0.5"`.
pub fn parse_cell(text: &str) -> Result<(usize, f64)> {
    let bad = || Error::Config(format!("cell '{text}' is not of the form GRID:NOISE, e.g. 20:0.5"));
    let (g, d) = text.split_once(':').ok_or_else(bad)?;
    let g = g.trim().parse().map_err(|_| bad())?;
    let d: f64 = d.trim().parse().map_err(|_| bad())?;
    Ok((g, d))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks every precondition before any work starts.
    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        if d.csv.is_none() {
            if d.grid < 2 {
                return Err(Error::Config(format!("data.grid must be >= 2, got {}", d.grid)));
            }
            if d.dim == 0 {
                return Err(Error::Config("data.dim must be >= 1".into()));
            }
            let (lo, hi) = d.interval();
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "data.interval [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        if !(d.noise.is_finite() && d.noise >= 0.0) {
            return Err(Error::Config(format!("data.noise must be >= 0, got {}", d.noise)));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if d.csv.is_some() {
            // the feature count is only known once the file is read
            if self.qnn.replication == 0 || self.qnn.layers == 0 {
                return Err(Error::Config("qnn.replication and qnn.layers must be >= 1".into()));
            }
        } else {
            self.qnn.architecture(d.dim).validate()?;
        }
        self.qnn.train_config(0).validate()?;
        if self.ann.epochs == 0 || !(self.ann.learning_rate > 0.0) {
            return Err(Error::Config(
                "ann.epochs must be >= 1 and ann.learning_rate > 0".into(),
            ));
        }
        let s = &self.sweep;
        match &s.cells {
            Some(cells) => {
                for c in cells {
                    parse_cell(c)?;
                }
            }
            None if s.grid_sizes.is_empty() || s.noise_factors.is_empty() => {
                return Err(Error::Config(
                    "sweep.grid_sizes and sweep.noise_factors must be non-empty".into(),
                ));
            }
            None => {}
        }
        if s.noise_factors.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("sweep.noise_factors must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn sweep_cells(&self) -> Result<Vec<(usize, f64)>> {
        match &self.sweep.cells {
            Some(cells) => cells.iter().map(|c| parse_cell(c)).collect(),
            None => Ok(crate::sweep::SweepPlan::grid(
                &self.sweep.grid_sizes,
                &self.sweep.noise_factors,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let text = include_str!("config.rs")
            .lines()
            .take_while(|l| l.starts_with("//!"))
            .filter_map(|l| l.strip_prefix("//! "))
            .skip_while(|l| !l.starts_with("```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("```"))
            .collect::<Vec<_>>()
            .join("\n");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.data.noise, 0.5);
        assert_eq!(cfg.sweep.workers, 4);
        assert_eq!(cfg.sweep_cells().unwrap().len(), 25);
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sed = 1").is_err());
        assert!(ExperimentConfig::from_toml("[qnn]\nlayer = 3").is_err());
        assert!(ExperimentConfig::from_toml("[data]\nbenchmark = \"rastrigin\"").is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = ExperimentConfig::default();
        cfg.data.grid = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.qnn.layers = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.cells = Some(vec!["20-0.5".into()]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cells() {
        assert_eq!(parse_cell("10:0.5").unwrap(), (10, 0.5));
        assert_eq!(parse_cell(" 20 : 0 ").unwrap(), (20, 0.0));
        assert!(parse_cell("x:1").is_err());
    }
}
