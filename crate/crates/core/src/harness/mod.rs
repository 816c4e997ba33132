//! Experiment harness: drops, schemes, Monte-Carlo outage, sweeps and the
//! command-line front end.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod io;
pub mod outage;
pub mod sweep;
pub mod validation;

pub use cli::cli_main;
pub use baselines::{random_phase_design, run_baseline, SchemeResult};
pub use config::{ExperimentConfig, ImpairmentsConfig, OutputConfig, RunConfig, Scheme, SweepKind, ThresholdsConfig};
pub use outage::{estimate_outage, outage_trials, OutageEstimate};
pub use sweep::{schemes_of, sweep, PointResult, SweepResult, Trace};

use crate::channel::{realize_ensemble, LinkEnsemble};
use crate::error::Result;
use crate::rng::{derive_key, label};
use crate::scenario::Scenario;

/// One placement with its channel realization.
#[derive(Clone, Debug)]
pub struct DropRealization {
    pub scenario: Scenario,
    pub ensemble: LinkEnsemble,
    pub seed: u64,
}

/// Drop `index` of master seed `seed`. Drops depend only on the seed and
/// index, so every grid point and scheme sees the same channels.
pub fn realize_drop(cfg: &RunConfig, seed: u64, index: u64) -> Result<DropRealization> {
    let s = derive_key(seed, &[label("drop"), index]);
    let scenario = Scenario::sample(&cfg.scenario, s)?;
    let ensemble = realize_ensemble(&scenario, &cfg.channel, &cfg.dims(), s)?;
    Ok(DropRealization { scenario, ensemble, seed: s })
}
