//! The proposed scheme and its baselines on one drop.

use crate::channel::LinkEnsemble;
use crate::error::Result;
use crate::link::Design;
use crate::optimizer::{initial_design, mrt_beams, random_surfaces, run_sca_ao, OptimizerConfig, Receivers, SolveReport, SurfaceUpdate};
use crate::rng::{label, substream};
use crate::surfaces::SurfaceSet;

use super::config::{RunConfig, Scheme};

/// Design of a scheme, with the optimizer report when one ran.
#[derive(Clone, Debug)]
pub struct SchemeResult {
    pub design: Design,
    pub report: Option<SolveReport>,
}

impl Scheme {
    /// Surfaces taking part in the scheme.
    pub fn surfaces(self) -> SurfaceSet {
        match self {
            Scheme::UavOnly => SurfaceSet { uav: true, star: false, holo: false },
            Scheme::RisOnly => SurfaceSet { uav: false, star: true, holo: true },
            Scheme::StarOnly => SurfaceSet { uav: false, star: true, holo: false },
            _ => SurfaceSet::ALL,
        }
    }

    pub fn optimizer(self, base: &OptimizerConfig) -> OptimizerConfig {
        let mut c = base.clone();
        match self {
            Scheme::AoLs => c.surface_update = SurfaceUpdate::LocalSearch,
            Scheme::RisOnly | Scheme::StarOnly => c.optimize_uav = false,
            _ => {}
        }
        c
    }
}

/// Random quantized surfaces, balanced STAR split, UAV at the region center
/// and equal-power MRT.
pub fn random_phase_design(ens: &LinkEnsemble, cfg: &RunConfig, seed: u64) -> Result<Design> {
    let problem = cfg.problem(ens.user_count());
    let mut rng = substream(seed, &[label("init")]);
    let mut d = random_surfaces(ens, cfg.surfaces.bits, cfg.surfaces.alpha_max, &problem.region, SurfaceSet::ALL, &mut rng);
    let moved = ens.relocate_uav(&d.uav_position)?;
    let rx = Receivers::build(&moved, &d.coefficients(), &problem.params)?;
    d.beamformers = mrt_beams(&rx, problem.params.p_max);
    Ok(d)
}

/// Runs `scheme` on the drop `ens`. All optimized schemes start from the
/// same random surface draw as the random-phase baseline.
pub fn run_baseline(scheme: Scheme, ens: &LinkEnsemble, cfg: &RunConfig, seed: u64) -> Result<SchemeResult> {
    if scheme == Scheme::RandomPhase {
        return Ok(SchemeResult { design: random_phase_design(ens, cfg, seed)?, report: None });
    }
    let problem = cfg.problem(ens.user_count());
    let opt = scheme.optimizer(&cfg.optimizer);
    let mut rng = substream(seed, &[label("init")]);
    let init = initial_design(ens, &problem, cfg.surfaces.alpha_max, scheme.surfaces(), &opt, &mut rng)?;
    let report = run_sca_ao(&init, ens, &problem, &opt)?;
    Ok(SchemeResult { design: report.design.clone(), report: Some(report) })
}
