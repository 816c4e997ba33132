//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, dbm_to_watts, ArrayDims, ChannelConfig};
use crate::error::{Error, Result};
use crate::link::ImpairmentParams;
use crate::optimizer::{OptimizerConfig, Problem, SystemParams};
use crate::scenario::{Placement, ScenarioConfig};
use crate::surfaces::SurfacesConfig;

/// Transmit powers and hardware impairments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentsConfig {
    pub p_max_dbm: f64,
    /// Jamming power of each active eavesdropper.
    pub p_jam_dbm: f64,
    /// Transmitter and receiver EVM, dB.
    pub kappa_t_db: f64,
    pub kappa_r_db: f64,
}

impl Default for ImpairmentsConfig {
    fn default() -> Self {
        ImpairmentsConfig { p_max_dbm: 30.0, p_jam_dbm: 10.0, kappa_t_db: -28.0, kappa_r_db: -30.0 }
    }
}

impl ImpairmentsConfig {
    pub fn params(&self) -> ImpairmentParams {
        ImpairmentParams {
            kappa_t: db_to_linear(self.kappa_t_db),
            kappa_r: db_to_linear(self.kappa_r_db),
            jam_power: dbm_to_watts(self.p_jam_dbm),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsConfig {
    /// Minimum secrecy rate, bit/s/Hz.
    pub r_sec_min: f64,
    /// Minimum legitimate rate, bit/s/Hz.
    pub r_qos: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// User weights; `1/K` each when absent.
    pub weights: Option<Vec<f64>>,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        ThresholdsConfig { r_sec_min: 0.5, r_qos: 1.0, epsilon: 0.05, delta: 0.05, weights: None }
    }
}

/// Sweep variable of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Iteration history of the proposed scheme.
    Convergence,
    /// `p_max_dbm`.
    Power,
    /// `r_sec_min`.
    SecrecyRate,
    /// `r_qos`.
    QosRate,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Convergence => "convergence",
            SweepKind::Power => "power",
            SweepKind::SecrecyRate => "secrecy-rate",
            SweepKind::QosRate => "qos-rate",
        }
    }
}

/// Optimization schemes compared by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Proposed,
    RandomPhase,
    AoLs,
    UavOnly,
    RisOnly,
    StarOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [Scheme::Proposed, Scheme::RandomPhase, Scheme::AoLs, Scheme::UavOnly, Scheme::RisOnly, Scheme::StarOnly];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::RandomPhase => "random-phase",
            Scheme::AoLs => "ao-ls",
            Scheme::UavOnly => "uav-only",
            Scheme::RisOnly => "ris-only",
            Scheme::StarOnly => "star-only",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    /// Monte-Carlo trials per grid point, split evenly over the drops.
    pub trials: usize,
    /// Independent placements/channel drops per grid point; each drop is
    /// optimized separately.
    pub drops: usize,
    pub seed: u64,
    /// Schemes besides the proposed one.
    pub baselines: Vec<Scheme>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: SweepKind::Power,
            grid: vec![0.0, 10.0, 20.0, 30.0, 40.0],
            trials: 10_000,
            drops: 10,
            seed: 1,
            baselines: vec![Scheme::RandomPhase, Scheme::AoLs],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Replace the desk-scale dimensions by the full-size ones
    /// (16 BS antennas, 80/256/1024 surface elements).
    pub full_scale: bool,
    pub scenario: ScenarioConfig,
    pub channel: ChannelConfig,
    pub surfaces: SurfacesConfig,
    pub impairments: ImpairmentsConfig,
    pub thresholds: ThresholdsConfig,
    pub optimizer: OptimizerConfig,
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.full_scale {
            cfg.apply_full_scale();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply_full_scale(&mut self) {
        self.channel.bs_antennas = 16;
        self.surfaces.m_uav = 80;
        self.surfaces.m_star = 256;
        self.surfaces.m_holo = 1024;
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.channel.validate()?;
        self.surfaces.validate()?;
        self.optimizer.validate()?;
        let t = &self.thresholds;
        if !(t.r_sec_min >= 0.0 && t.r_qos >= 0.0) {
            return Err(Error::Config("thresholds: rates must be >= 0".into()));
        }
        for (name, v) in [("epsilon", t.epsilon), ("delta", t.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("thresholds.{name} must lie in (0,1)")));
            }
        }
        if let Some(w) = &t.weights {
            if w.len() != self.user_count() || w.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::Config("thresholds.weights: one non-negative weight per user".into()));
            }
        }
        self.impairments.params().validate().map_err(|e| Error::Config(e.to_string()))?;
        let e = &self.experiment;
        if e.trials == 0 || e.drops == 0 {
            return Err(Error::Config("experiment.trials and experiment.drops must be >= 1".into()));
        }
        if e.grid.is_empty() && e.kind != SweepKind::Convergence {
            return Err(Error::Config("experiment.grid must not be empty".into()));
        }
        if e.baselines.contains(&Scheme::Proposed) {
            return Err(Error::Config("experiment.baselines lists baselines only".into()));
        }
        Ok(())
    }

    /// Users per drop; 0 when the placement is random.
    pub fn user_count(&self) -> usize {
        match &self.scenario.placement {
            Placement::Fixed { outdoor_users, indoor_users, .. } => outdoor_users + indoor_users,
            Placement::Ppp { .. } => 0,
        }
    }

    pub fn dims(&self) -> ArrayDims {
        ArrayDims { bs: self.channel.bs_antennas, uav: self.surfaces.m_uav, star: self.surfaces.m_star, holo: self.surfaces.m_holo }
    }

    /// Problem constants for a drop with `n_users` users.
    pub fn problem(&self, n_users: usize) -> Problem {
        let t = &self.thresholds;
        let weights = match &t.weights {
            Some(w) if w.len() == n_users => w.clone(),
            _ => vec![1.0 / n_users.max(1) as f64; n_users],
        };
        Problem {
            params: SystemParams {
                p_max: dbm_to_watts(self.impairments.p_max_dbm),
                imp: self.impairments.params(),
                r_sec_min: t.r_sec_min,
                r_qos: t.r_qos,
                epsilon: t.epsilon,
                delta: t.delta,
                jam_tail: self.optimizer.jam_tail,
                weights,
            },
            region: self.scenario.uav_region.clone(),
            bits: self.surfaces.bits,
        }
    }

    /// Copy with the sweep variable set to `value`.
    pub fn at_grid_point(&self, value: f64) -> RunConfig {
        let mut c = self.clone();
        match self.experiment.kind {
            SweepKind::Power => c.impairments.p_max_dbm = value,
            SweepKind::SecrecyRate => c.thresholds.r_sec_min = value,
            SweepKind::QosRate => c.thresholds.r_qos = value,
            SweepKind::Convergence => {}
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        assert_eq!(c.user_count(), 4);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = RunConfig::from_toml("[impairments]\np_max_dbm = 20.0\n[experiment]\nkind = \"secrecy-rate\"\ngrid = [0.5, 1.0]\n").unwrap();
        assert_eq!(c.impairments.p_max_dbm, 20.0);
        assert_eq!(c.experiment.kind, SweepKind::SecrecyRate);
        assert_eq!(c.surfaces, SurfacesConfig::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml("[impairments]\npmax = 1.0\n").is_err());
        assert!(RunConfig::from_toml("[thresholds]\nepsilon = 1.5\n").is_err());
        assert!(RunConfig::from_toml("[experiment]\ntrials = 0\n").is_err());
    }

    #[test]
    fn full_scale_dimensions() {
        let c = RunConfig::from_toml("full_scale = true\n").unwrap();
        assert_eq!(c.dims(), ArrayDims { bs: 16, uav: 80, star: 256, holo: 1024 });
    }

    #[test]
    fn table_one_values() {
        let p = RunConfig::default().problem(4);
        assert!((p.params.p_max - 1.0).abs() < 1e-12);
        assert!((p.params.imp.jam_power - 0.01).abs() < 1e-12);
        assert!((p.params.imp.kappa_t - 10f64.powf(-2.8)).abs() < 1e-15);
        assert_eq!(p.params.weights, vec![0.25; 4]);
    }
}
