//! Run configuration: a human-editable TOML file plus CLI overrides, echoed
//! verbatim into the run manifest.

use anyhow::{bail, Context, Result};
use ness_core::numeric::logspace;
use ness_core::{sigma_for_sparsity, BathSpec, ChainSpec};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Which steady-state picture to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Stochastic,
    Quantum,
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Picture::Stochastic => write!(f, "stochastic"),
            Picture::Quantum => write!(f, "quantum"),
        }
    }
}

impl FromStr for Picture {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stochastic" => Ok(Picture::Stochastic),
            "quantum" => Ok(Picture::Quantum),
            other => bail!("unknown picture `{other}` (expected stochastic or quantum)"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub n_levels: usize,
    pub delta0: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection {
            n_levels: 25,
            delta0: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub temperature: f64,
    pub w_beta: f64,
    pub gamma_phi: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        BathSection {
            temperature: 10.0,
            w_beta: 0.1,
            gamma_phi: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    /// Explicit drive amplitudes; empty means the automatic grid.
    pub epsilon_grid: Vec<f64>,
    /// Point count of the automatic log-spaced grid.
    pub epsilon_points: usize,
    /// Log-normal dispersions to scan.
    pub sigma_list: Vec<f64>,
    /// Disorder realizations.
    pub seeds: Vec<u64>,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            epsilon_grid: Vec::new(),
            epsilon_points: 60,
            sigma_list: vec![0.0, 1.0, 2.0, sigma_for_sparsity(1e-5)],
            seeds: vec![1, 2, 3],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub pictures: Vec<Picture>,
    /// Worker threads; 0 means available parallelism.
    pub workers: usize,
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            pictures: vec![Picture::Stochastic, Picture::Quantum],
            workers: 0,
            out_dir: "out".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Drive amplitudes (nearest grid point) for which per-level population
    /// and eigenbasis data are written.
    pub detail_epsilons: Vec<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            detail_epsilons: vec![9.3],
        }
    }
}

/// The full sweep configuration.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub chain: ChainSection,
    pub bath: BathSection,
    pub drive: DriveSection,
    pub run: RunSection,
    pub outputs: OutputSection,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: SweepConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        ChainSpec::uniform(self.chain.n_levels, self.chain.delta0)
            .map_err(|e| anyhow::anyhow!("chain: {e}"))?;
        BathSpec::new(self.bath.temperature, self.bath.w_beta, self.bath.gamma_phi)
            .map_err(|e| anyhow::anyhow!("bath: {e}"))?;
        if self.drive.sigma_list.is_empty() {
            bail!("drive.sigma_list must be non-empty");
        }
        if self.drive.sigma_list.iter().any(|s| !s.is_finite() || *s < 0.0) {
            bail!("drive.sigma_list entries must be finite and nonnegative");
        }
        if self.drive.seeds.is_empty() {
            bail!("drive.seeds must be non-empty");
        }
        if self.run.pictures.is_empty() {
            bail!("run.pictures must be non-empty");
        }
        let grid = self.epsilon_grid();
        if grid.is_empty() {
            bail!("epsilon grid is empty");
        }
        if grid.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            bail!("epsilon grid entries must be finite and positive");
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            bail!("epsilon grid must be strictly increasing");
        }
        Ok(())
    }

    /// The resolved drive-amplitude grid.
    ///
    /// The automatic grid spans the two crossover scales — where the mean and
    /// the harmonic mean of the couplings cross the bath rate — extended by
    /// three decades on both sides.
    pub fn epsilon_grid(&self) -> Vec<f64> {
        if !self.drive.epsilon_grid.is_empty() {
            return self.drive.epsilon_grid.clone();
        }
        let wb = self.bath.w_beta.max(1e-12);
        let sigma_max = self
            .drive
            .sigma_list
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        let s_min = (-sigma_max * sigma_max).exp();
        let lo = wb.sqrt() * 1e-3;
        let hi = (wb / s_min).sqrt() * 1e3;
        logspace(lo, hi, self.drive.epsilon_points.max(2))
    }

    pub fn chain_spec(&self) -> ChainSpec {
        ChainSpec::uniform(self.chain.n_levels, self.chain.delta0).expect("validated")
    }

    pub fn bath_spec(&self) -> BathSpec {
        BathSpec::new(self.bath.temperature, self.bath.w_beta, self.bath.gamma_phi)
            .expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_with_paper_parameters() {
        let c = SweepConfig::default();
        c.validate().unwrap();
        assert_eq!(c.chain.n_levels, 25);
        assert_eq!(c.bath.temperature, 10.0);
        assert_eq!(c.bath.w_beta, 0.1);
        let grid = c.epsilon_grid();
        assert_eq!(grid.len(), 60);
        // +-3 decades around the crossover scales sqrt(0.1) and sqrt(0.1/1e-5)
        assert!((grid[0] - 0.1f64.sqrt() * 1e-3).abs() < 1e-12);
        assert!((grid[59] - (0.1f64 / 1e-5).sqrt() * 1e3).abs() < 1e-6);
    }

    #[test]
    fn toml_round_trip_and_unknown_fields() {
        let c = SweepConfig::default();
        let text = toml::to_string_pretty(&c).unwrap();
        let back: SweepConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.drive.sigma_list, c.drive.sigma_list);
        let bad: std::result::Result<SweepConfig, _> = toml::from_str("[chain]\nlevels = 3\n");
        assert!(bad.is_err(), "unknown fields must be rejected");
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut c = SweepConfig::default();
        c.drive.epsilon_grid = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        let mut c = SweepConfig::default();
        c.drive.sigma_list = vec![];
        assert!(c.validate().is_err());
        let mut c = SweepConfig::default();
        c.bath.temperature = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn picture_parse_round_trip() {
        assert_eq!(Picture::from_str("quantum").unwrap(), Picture::Quantum);
        assert_eq!(
            Picture::from_str("Stochastic").unwrap(),
            Picture::Stochastic
        );
        assert!(Picture::from_str("classical").is_err());
        assert_eq!(Picture::Quantum.to_string(), "quantum");
    }
}
