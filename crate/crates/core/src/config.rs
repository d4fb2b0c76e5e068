//! Experiment configuration: one JSON document per experiment, with every
//! seed explicit so reruns are byte-identical.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fleet::FleetSpec;
use crate::predict::{FitOptions, TimingDataSpec};
use crate::sim::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// How many calibration cycles feed the fidelity dataset
    /// (None = all generated cycles).
    pub cycles: Option<usize>,
    pub options: FitOptions,
    pub timing: TimingDataSpec,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            cycles: None,
            options: FitOptions::default(),
            timing: TimingDataSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub out_dir: String,
    pub fleet: FleetSpec,
    pub fit: FitConfig,
    pub scenario: Scenario,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            out_dir: "out".into(),
            fleet: FleetSpec::default(),
            fit: FitConfig::default(),
            scenario: Scenario::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.fleet.validate()?;
        self.scenario.validate()?;
        if self.scenario.job_count == 0 {
            return Err(Error::invalid("config", "scenario.job_count must be >= 1"));
        }
        if let Some(c) = self.fit.cycles {
            if c == 0 {
                return Err(Error::invalid("config", "fit.cycles must be >= 1 when set"));
            }
        }
        Ok(())
    }

    pub fn fleet_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("fleet.json")
    }

    pub fn fidelity_model_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("fidelity_model.json")
    }

    pub fn runtime_model_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("runtime_model.json")
    }

    pub fn correlations_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("correlations.json")
    }

    pub fn metrics_csv_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("metrics.csv")
    }

    pub fn aggregates_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("aggregates.json")
    }

    pub fn series_path(&self) -> PathBuf {
        Path::new(&self.out_dir).join("series.json")
    }

    /// Derives every seed in the experiment from one master seed, the
    /// `--seed` flag behavior.
    pub fn reseed(&mut self, master: u64) {
        self.fleet.rng_seed = master;
        self.scenario.benchmark_seed = master.wrapping_add(1);
        self.scenario.arrival_seed = master.wrapping_add(2);
        self.scenario.load.filler_seed = master.wrapping_add(3);
        self.scenario.noise_seed = master.wrapping_add(4);
        self.fit.options.split_seed = master.wrapping_add(5);
        self.fit.timing.seed = master.wrapping_add(6);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_roundtrips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"out_dir": "elsewhere"}"#).unwrap();
        assert_eq!(cfg.out_dir, "elsewhere");
        assert_eq!(cfg.fleet, FleetSpec::default());
    }

    #[test]
    fn reseed_touches_every_stream() {
        let mut cfg = ExperimentConfig::default();
        cfg.reseed(1000);
        assert_eq!(cfg.fleet.rng_seed, 1000);
        assert_eq!(cfg.scenario.benchmark_seed, 1001);
        assert_eq!(cfg.scenario.arrival_seed, 1002);
        assert_eq!(cfg.scenario.load.filler_seed, 1003);
        assert_eq!(cfg.scenario.noise_seed, 1004);
        assert_eq!(cfg.fit.options.split_seed, 1005);
        assert_eq!(cfg.fit.timing.seed, 1006);
    }

    #[test]
    fn malformed_config_is_a_parse_error() {
        let dir = std::env::temp_dir().join(format!("qsched-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, "{ not json").unwrap();
        let err = ExperimentConfig::load(&path).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
        // serde_json reports line/column context
        assert!(err.to_string().contains("line"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }
}
