//! Alternating SCA optimization of beamformers, surfaces and UAV position
//! against a smooth surrogate of the weighted secrecy-outage cost.
//!
//! Each outer iteration runs a threshold update, the beamforming block, the
//! surface block and the UAV block. Steps are driven by a working model
//! (relaxed violation probabilities early on, annealed temperature) but
//! accepted only when the target surrogate does not increase, so the
//! reported cost sequence is monotone.

pub mod bf;
pub mod pg;
pub mod ris;
pub mod surrogate;
pub mod uav;
#[cfg(test)]
mod testutil;

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::LinkEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::link::{Coefficients, Design, EffectiveEstimate};
use crate::robust::{choose_thresholds, SecrecyThresholds, SinrCoefficients};
use crate::scenario::UavRegion;
use crate::surfaces::{HoloRisConfig, StarRisConfig, SurfaceSet, UavRisConfig};
use crate::Complex64;

pub use bf::{solve_bf_block, BfInput, BfOutcome};
pub use pg::PgOptions;
pub use ris::{local_search_pass, solve_ris_block, RisInput, RisOutcome};
pub use surrogate::{
    block_eval, block_specs, evaluate, sca_lower_bound_signal, softplus, surrogate_cost, BlockKind, BlockSpec, Grad,
    ModelParams, Receivers, SystemParams,
};
pub use uav::{solve_uav_block, UavOptions, UavOutcome};

/// How the surface block updates coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceUpdate {
    /// Relaxation, unit-modulus penalty, projection and quantization.
    Relaxed,
    /// One coordinate pass over the quantized phase grid.
    LocalSearch,
    /// Surfaces stay as initialized.
    Fixed,
}

/// Optimizer section of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub eps_stop: f64,
    pub max_iter: usize,
    pub trust_radius: f64,
    pub min_trust_radius: f64,
    pub uav_retries: usize,
    /// Initial unit-modulus penalty weight and its per-iteration growth.
    pub mu0: f64,
    pub mu_growth: f64,
    pub mu_max: f64,
    pub temperature: f64,
    pub anneal_every: usize,
    pub anneal_factor: f64,
    pub min_temperature: f64,
    /// Violation probabilities start at this multiple of their targets.
    pub continuation_factor: f64,
    pub continuation_iters: usize,
    pub restoration_weight: f64,
    /// Tail probability reserved for the jamming-power bound.
    pub jam_tail: f64,
    pub inner_iters: usize,
    pub surface_update: SurfaceUpdate,
    pub optimize_uav: bool,
    /// Grid resolution of the local search when phases are continuous.
    pub search_bits: u32,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            eps_stop: 1e-4,
            max_iter: 100,
            trust_radius: 10.0,
            min_trust_radius: 0.5,
            uav_retries: 5,
            mu0: 0.1,
            mu_growth: 2.0,
            mu_max: 1e6,
            temperature: 0.1,
            anneal_every: 10,
            anneal_factor: 0.5,
            min_temperature: 1e-3,
            continuation_factor: 4.0,
            continuation_iters: 8,
            restoration_weight: 1e3,
            jam_tail: 1e-3,
            inner_iters: 100,
            surface_update: SurfaceUpdate::Relaxed,
            optimize_uav: true,
            search_bits: 3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("optimizer.{m}")));
        if !(self.eps_stop >= 0.0) {
            return bad("eps_stop must be >= 0");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        if !(self.trust_radius > 0.0 && self.min_trust_radius > 0.0 && self.min_trust_radius <= self.trust_radius) {
            return bad("trust radii must satisfy 0 < min_trust_radius <= trust_radius");
        }
        if !(self.temperature > 0.0 && self.min_temperature > 0.0) {
            return bad("temperatures must be positive");
        }
        if !(self.anneal_factor > 0.0 && self.anneal_factor <= 1.0) {
            return bad("anneal_factor must lie in (0,1]");
        }
        if !(self.continuation_factor >= 1.0) {
            return bad("continuation_factor must be >= 1");
        }
        if !(self.mu0 >= 0.0 && self.mu_growth >= 1.0) {
            return bad("penalty schedule must be non-negative and non-decreasing");
        }
        if !(self.jam_tail > 0.0 && self.jam_tail < 1.0) {
            return bad("jam_tail must lie in (0,1)");
        }
        if self.search_bits == 0 || self.search_bits > 8 {
            return bad("search_bits must lie in 1..=8");
        }
        Ok(())
    }

    /// Working model at outer iteration `t`.
    pub fn working_model(&self, t: usize) -> ModelParams {
        let eps_scale = if t < self.continuation_iters {
            self.continuation_factor.powf(1.0 - t as f64 / self.continuation_iters as f64)
        } else {
            1.0
        };
        let steps = if self.anneal_every == 0 { 0 } else { t / self.anneal_every };
        let temperature = (self.temperature * self.anneal_factor.powi(steps as i32)).max(self.min_temperature);
        ModelParams { eps_scale, temperature }
    }

    pub fn target_model(&self) -> ModelParams {
        ModelParams::target(self.temperature)
    }

    fn inner(&self) -> PgOptions {
        PgOptions { max_iter: self.inner_iters, ..PgOptions::default() }
    }
}

/// Everything that defines the optimization problem apart from the channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub params: SystemParams,
    pub region: UavRegion,
    pub bits: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockStatus {
    Accepted,
    /// Accepted while some blocks were infeasible at the linearization
    /// point and carried hinge penalties.
    Restoration,
    Rejected,
    Skipped,
}

impl BlockStatus {
    pub fn name(self) -> &'static str {
        match self {
            BlockStatus::Accepted => "accepted",
            BlockStatus::Restoration => "restoration",
            BlockStatus::Rejected => "rejected",
            BlockStatus::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Target surrogate cost after the iteration.
    pub cost: f64,
    pub eps_scale: f64,
    pub temperature: f64,
    pub mu: f64,
    pub thresholds: BlockStatus,
    pub bf: BlockStatus,
    pub ris: BlockStatus,
    pub uav: BlockStatus,
    pub step_bf: f64,
    pub step_ris: f64,
    pub step_uav: f64,
    pub tangency_error: f64,
}

/// Step lengths of one extra round of block solves at the returned design.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    pub bf: f64,
    /// Movement of the penalized relaxed solution.
    pub ris_relaxed: f64,
    /// Movement after projection and quantization.
    pub ris_projected: f64,
    pub uav: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    pub design: Design,
    pub thresholds: Vec<SecrecyThresholds>,
    /// Per-user target-model block margins at the returned design.
    pub margins: Vec<Vec<f64>>,
    /// Users whose robust blocks all hold at the returned design.
    pub certified: Vec<bool>,
    pub stationarity: Option<Stationarity>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Iterate history as CSV.
    pub fn write_history<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "iteration", "cost", "thresholds", "bf", "ris", "uav", "step_bf", "step_ris", "step_uav", "eps_scale", "temperature",
        ])?;
        for r in &self.history {
            out.write_record([
                r.iteration.to_string(),
                format!("{:.12e}", r.cost),
                r.thresholds.name().into(),
                r.bf.name().into(),
                r.ris.name().into(),
                r.uav.name().into(),
                format!("{:.6e}", r.step_bf),
                format!("{:.6e}", r.step_ris),
                format!("{:.6e}", r.step_uav),
                format!("{}", r.eps_scale),
                format!("{}", r.temperature),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn flatten(beams: &[CVec]) -> CVec {
    CVec::from_iterator(beams.iter().map(|w| w.len()).sum(), beams.iter().flat_map(|w| w.iter().copied()))
}

pub(crate) fn unflatten(x: &CVec, k: usize, n: usize) -> Vec<CVec> {
    (0..k).map(|i| x.rows(i * n, n).into_owned()).collect()
}

/// Equal-power maximum-ratio transmission on the estimated channels.
pub fn mrt_beams(rx: &Receivers, p_max: f64) -> Vec<CVec> {
    let k = rx.users.len();
    let share = Complex64::from((p_max / k.max(1) as f64).sqrt());
    rx.users
        .iter()
        .map(|u| {
            let n = u.h_hat.norm();
            if n > 0.0 {
                &u.h_hat * (share / n)
            } else {
                CVec::zeros(u.h_hat.len())
            }
        })
        .collect()
}

/// Equal-power regularized zero forcing on the estimated channels.
pub fn rzf_beams(rx: &Receivers, p_max: f64) -> Vec<CVec> {
    let k = rx.users.len();
    if k == 0 {
        return Vec::new();
    }
    let n = rx.users[0].h_hat.len();
    let h = CMat::from_columns(&rx.users.iter().map(|u| u.h_hat.clone()).collect::<Vec<_>>());
    let sigma = rx.user_floor.iter().sum::<f64>() / k as f64;
    let reg = if p_max > 0.0 { k as f64 * sigma / p_max } else { 1.0 };
    let gram = h.adjoint() * &h + CMat::identity(k, k) * Complex64::from(reg);
    let Some(inv) = gram.try_inverse() else {
        return mrt_beams(rx, p_max);
    };
    let w = &h * inv;
    let share = (p_max / k as f64).sqrt();
    (0..k)
        .map(|i| {
            let c = w.column(i).into_owned();
            let nn = c.norm();
            if nn > 0.0 {
                c * Complex64::from(share / nn)
            } else {
                CVec::zeros(n)
            }
        })
        .collect()
}

/// Second-moment eavesdropper SINR of user `k` summed over eavesdroppers.
fn eve_sinr_estimate(rx: &Receivers, beams: &[CVec], k: usize) -> f64 {
    let power = |e: &EffectiveEstimate, w: &CVec| e.h_hat.dotc(w).norm_sqr() + w.dotc(&(&e.cov * w)).re;
    rx.eves
        .iter()
        .map(|e| {
            let num = power(e, &beams[k]);
            let den: f64 = beams.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, w)| power(e, w)).sum::<f64>() + rx.eve_floor;
            num / den
        })
        .sum()
}

/// Per-user secrecy thresholds balancing the legitimate and eavesdropper
/// blocks under `model`, together with the feasibility of each choice.
pub fn choose_all_thresholds(rx: &Receivers, beams: &[CVec], params: &SystemParams, model: &ModelParams) -> Result<Vec<(SecrecyThresholds, bool)>> {
    let k_users = rx.users.len();
    let n_eves = rx.eves.len();
    if params.r_sec_min <= 0.0 {
        let t = SecrecyThresholds { gamma_l: 0.0, gamma_e: 0.0, eps_l: 0.5 * params.epsilon, eps_e: 0.5 * params.epsilon };
        return Ok(vec![(t, true); k_users]);
    }
    let mut out = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let scale = |e: f64| (e * model.eps_scale).min(0.5);
        let legit = |g: f64, eps: f64| {
            let spec = BlockSpec {
                user: k,
                kind: BlockKind::SecrecyLegit,
                coeffs: SinrCoefficients::legitimate(k_users, k, g, rx.user_floor[k], &params.imp),
                epsilon: scale(eps),
                trivial: g <= 0.0,
            };
            block_eval(&spec, beams, &rx.users[k], None, Grad::None).margin
        };
        let eve = |g: f64, eps: f64| {
            (0..n_eves)
                .map(|e| {
                    let spec = BlockSpec {
                        user: k,
                        kind: BlockKind::SecrecyEve(e),
                        coeffs: SinrCoefficients::eavesdropper(k_users, k, g / n_eves as f64, rx.eve_floor, &params.imp),
                        epsilon: scale(eps / n_eves as f64),
                        trivial: false,
                    };
                    block_eval(&spec, beams, &rx.eves[e], None, Grad::None).margin
                })
                .fold(1.0, f64::min)
        };
        let mut g_hat = eve_sinr_estimate(rx, beams, k);
        if n_eves > 0 {
            let eps_e = 0.5 * params.epsilon;
            let mut tries = 0;
            while eve(2.0 * g_hat, eps_e) < 0.0 && tries < 40 {
                g_hat = (2.0 * g_hat).max(1e-9);
                tries += 1;
            }
        }
        let t = match choose_thresholds(params.r_sec_min, params.epsilon, g_hat, legit, eve)? {
            Ok(t) => (t, true),
            Err(inf) => (inf.best, false),
        };
        out.push(t);
    }
    Ok(out)
}

/// Target-model surrogate cost of `design` on `ens`.
pub fn design_surrogate(ens: &LinkEnsemble, design: &Design, thresholds: &[SecrecyThresholds], params: &SystemParams, model: &ModelParams) -> Result<f64> {
    let rx = Receivers::build(ens, &design.coefficients(), params)?;
    let specs = block_specs(rx.users.len(), rx.eves.len(), thresholds, &rx.user_floor, rx.eve_floor, params, model);
    Ok(evaluate(&specs, &design.beamformers, &rx, &params.weights, model.temperature, None, Grad::None, None).cost)
}

/// Random quantized surface phases, balanced STAR split, full H-RIS
/// amplitude and the UAV at the center of its region; beamformers empty.
pub fn random_surfaces<R: Rng + ?Sized>(
    ens: &LinkEnsemble,
    bits: Option<u32>,
    alpha_max: f64,
    region: &UavRegion,
    surfaces: SurfaceSet,
    rng: &mut R,
) -> Design {
    let d = ens.dims;
    let mut star = StarRisConfig::random(d.star, bits, rng);
    star.rho = vec![std::f64::consts::FRAC_1_SQRT_2; d.star];
    let mut hris = HoloRisConfig::random(d.holo, alpha_max, bits, rng);
    hris.alpha = vec![alpha_max; d.holo];
    Design {
        beamformers: Vec::new(),
        uav_ris: UavRisConfig::random(d.uav, bits, rng),
        star,
        hris,
        uav_position: region.center(),
        surfaces,
    }
}

/// Initial point: random surfaces and the better of MRT and RZF by the
/// target surrogate.
pub fn initial_design<R: Rng + ?Sized>(
    ens: &LinkEnsemble,
    problem: &Problem,
    alpha_max: f64,
    surfaces: SurfaceSet,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<Design> {
    let mut d = random_surfaces(ens, problem.bits, alpha_max, &problem.region, surfaces, rng);
    let ens = ens.relocate_uav(&d.uav_position)?;
    let params = &problem.params;
    let rx = Receivers::build(&ens, &d.coefficients(), params)?;
    let model = cfg.target_model();
    let mut best: Option<(f64, Vec<CVec>)> = None;
    for beams in [mrt_beams(&rx, params.p_max), rzf_beams(&rx, params.p_max)] {
        let th: Vec<_> = choose_all_thresholds(&rx, &beams, params, &model)?.into_iter().map(|t| t.0).collect();
        d.beamformers = beams.clone();
        let c = design_surrogate(&ens, &d, &th, params, &model)?;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, beams));
        }
    }
    d.beamformers = best.map(|b| b.1).unwrap_or_default();
    Ok(d)
}

struct State {
    design: Design,
    ens: LinkEnsemble,
    thresholds: Vec<SecrecyThresholds>,
    cost: f64,
}

fn block_list(rx: &Receivers, th: &[SecrecyThresholds], params: &SystemParams, model: &ModelParams) -> Vec<BlockSpec> {
    block_specs(rx.users.len(), rx.eves.len(), th, &rx.user_floor, rx.eve_floor, params, model)
}

fn coefficient_norm(c: &Coefficients) -> f64 {
    (c.uav.norm_squared() + c.t.norm_squared() + c.r.norm_squared() + c.holo.norm_squared()).sqrt()
}

/// One AO iteration; returns the record of each block.
fn iterate(state: &mut State, base: &LinkEnsemble, problem: &Problem, cfg: &OptimizerConfig, t: usize, mu: f64) -> Result<IterationRecord> {
    let params = &problem.params;
    let target = cfg.target_model();
    let working = cfg.working_model(t);

    // Thresholds.
    let rx = Receivers::build(&state.ens, &state.design.coefficients(), params)?;
    let th_new: Vec<_> = choose_all_thresholds(&rx, &state.design.beamformers, params, &target)?.into_iter().map(|t| t.0).collect();
    let mut th_status = BlockStatus::Rejected;
    if th_new != state.thresholds {
        let c = design_surrogate(&state.ens, &state.design, &th_new, params, &target)?;
        if c <= state.cost {
            state.thresholds = th_new;
            state.cost = c;
            th_status = BlockStatus::Accepted;
        }
    } else {
        th_status = BlockStatus::Skipped;
    }

    // Beamforming.
    let specs_t = block_list(&rx, &state.thresholds, params, &target);
    let specs_w = block_list(&rx, &state.thresholds, params, &working);
    let same = working == target;
    let input = BfInput {
        rx: &rx,
        specs: if same { &specs_t } else { &specs_w },
        temperature: working.temperature,
        target_specs: &specs_t,
        target_temperature: target.temperature,
        weights: &params.weights,
        p_max: params.p_max,
        restoration_weight: cfg.restoration_weight,
        inner: cfg.inner(),
    };
    let bf = solve_bf_block(&input, &state.design.beamformers);
    debug_assert!(bf.tangency_error <= 1e-8 * (1.0 + state.cost), "majorizer not tangent: {}", bf.tangency_error);
    state.design.beamformers = bf.beams.clone();
    state.cost = bf.cost;

    // Surfaces.
    let (ris_status, ris_step) = match cfg.surface_update {
        SurfaceUpdate::Fixed => (BlockStatus::Skipped, 0.0),
        SurfaceUpdate::Relaxed => {
            let input = RisInput {
                ens: &state.ens,
                params,
                specs: if same { &specs_t } else { &specs_w },
                temperature: working.temperature,
                target_specs: &specs_t,
                target_temperature: target.temperature,
                mu,
                bits: problem.bits,
                inner: cfg.inner(),
            };
            let out = solve_ris_block(&input, &state.design)?;
            state.design = out.design;
            state.cost = out.cost;
            (out.status, out.step_norm)
        }
        SurfaceUpdate::LocalSearch => {
            let bits = problem.bits.unwrap_or(cfg.search_bits);
            let out = local_search_pass(&state.ens, &state.design, params, &specs_t, target.temperature, bits)?;
            state.design = out.design;
            state.cost = out.cost;
            (out.status, out.step_norm)
        }
    };

    // UAV.
    let (uav_status, uav_step) = if cfg.optimize_uav {
        let th = state.thresholds.clone();
        let cost = |e: &LinkEnsemble, d: &Design| design_surrogate(e, d, &th, params, &target);
        let opts = UavOptions { trust_radius: cfg.trust_radius, min_radius: cfg.min_trust_radius, retries: cfg.uav_retries, ..UavOptions::default() };
        let out = solve_uav_block(base, &state.design, &problem.region, cost, state.cost, &opts)?;
        if let Some(ens) = out.ensemble {
            state.design.uav_position = out.position;
            state.ens = ens;
            state.cost = out.cost;
        }
        (out.status, out.step_norm)
    } else {
        (BlockStatus::Skipped, 0.0)
    };

    let scale = coefficient_norm(&state.design.coefficients()).max(1.0);
    Ok(IterationRecord {
        iteration: t + 1,
        cost: state.cost,
        eps_scale: working.eps_scale,
        temperature: working.temperature,
        mu,
        thresholds: th_status,
        bf: bf.status,
        ris: ris_status,
        uav: uav_status,
        step_bf: bf.step_norm / params.p_max.sqrt().max(1e-300),
        step_ris: ris_step / scale,
        step_uav: uav_step,
        tangency_error: bf.tangency_error,
    })
}

fn check_dims(design: &Design, ens: &LinkEnsemble, problem: &Problem, cfg: &OptimizerConfig) -> Result<()> {
    cfg.validate()?;
    if problem.params.weights.len() != ens.user_count() {
        return Err(Error::param("one weight per user required"));
    }
    if design.beamformers.len() != ens.user_count() {
        return Err(Error::param("one beamformer per user required"));
    }
    Ok(())
}

/// Runs the alternating optimization from `initial` on the drop `ens`.
pub fn run_sca_ao(initial: &Design, ens: &LinkEnsemble, problem: &Problem, cfg: &OptimizerConfig) -> Result<SolveReport> {
    let start = Instant::now();
    check_dims(initial, ens, problem, cfg)?;
    let params = &problem.params;
    let mut design = initial.clone();
    design.uav_position = problem.region.clamp(&design.uav_position);
    let cur = ens.relocate_uav(&design.uav_position)?;
    let target = cfg.target_model();
    let rx = Receivers::build(&cur, &design.coefficients(), params)?;
    let thresholds: Vec<_> = choose_all_thresholds(&rx, &design.beamformers, params, &target)?.into_iter().map(|t| t.0).collect();
    let cost = design_surrogate(&cur, &design, &thresholds, params, &target)?;
    let state = State { design, ens: cur, thresholds, cost };
    solve(state, ens, problem, cfg, cfg.mu0, start)
}

/// Continues from a previous report: same design, thresholds and penalty
/// weight, on the target model from the first iteration.
pub fn resume_sca_ao(report: &SolveReport, ens: &LinkEnsemble, problem: &Problem, cfg: &OptimizerConfig) -> Result<SolveReport> {
    let start = Instant::now();
    check_dims(&report.design, ens, problem, cfg)?;
    if report.thresholds.len() != ens.user_count() {
        return Err(Error::param("one threshold pair per user required"));
    }
    let cfg = OptimizerConfig { continuation_iters: 0, anneal_every: 0, ..cfg.clone() };
    let mut design = report.design.clone();
    design.uav_position = problem.region.clamp(&design.uav_position);
    let cur = ens.relocate_uav(&design.uav_position)?;
    let cost = design_surrogate(&cur, &design, &report.thresholds, &problem.params, &cfg.target_model())?;
    let state = State { design, ens: cur, thresholds: report.thresholds.clone(), cost };
    let mu = report.history.last().map_or(cfg.mu0, |r| (r.mu * cfg.mu_growth).min(cfg.mu_max));
    solve(state, ens, problem, &cfg, mu, start)
}

fn solve(mut state: State, ens: &LinkEnsemble, problem: &Problem, cfg: &OptimizerConfig, mut mu: f64, start: Instant) -> Result<SolveReport> {
    let params = &problem.params;
    let target = cfg.target_model();
    let initial_cost = state.cost;
    let mut history = Vec::new();
    let mut converged = false;
    for t in 0..cfg.max_iter {
        let before = state.cost;
        let rec = iterate(&mut state, ens, problem, cfg, t, mu)?;
        history.push(rec);
        mu = (mu * cfg.mu_growth).min(cfg.mu_max);
        if (before - state.cost).abs() <= cfg.eps_stop {
            converged = true;
            break;
        }
    }
    let rx = Receivers::build(&state.ens, &state.design.coefficients(), params)?;
    let specs = block_list(&rx, &state.thresholds, params, &target);
    let ev = evaluate(&specs, &state.design.beamformers, &rx, &params.weights, target.temperature, None, Grad::None, None);
    let certified = ev.margins.iter().map(|m| m.iter().all(|v| *v >= 0.0)).collect();
    Ok(SolveReport {
        initial_cost,
        final_cost: state.cost,
        iterations: history.len(),
        converged,
        history,
        design: state.design,
        thresholds: state.thresholds,
        margins: ev.margins,
        certified,
        stationarity: None,
        wall_time: start.elapsed(),
    })
}

/// Re-solves each block once on the target model at `report.design` and
/// records how far each would move.
pub fn stationarity(report: &SolveReport, ens: &LinkEnsemble, problem: &Problem, cfg: &OptimizerConfig) -> Result<Stationarity> {
    let params = &problem.params;
    let target = cfg.target_model();
    let d = &report.design;
    let cur = ens.relocate_uav(&d.uav_position)?;
    let rx = Receivers::build(&cur, &d.coefficients(), params)?;
    let specs = block_list(&rx, &report.thresholds, params, &target);
    let input = BfInput {
        rx: &rx,
        specs: &specs,
        temperature: target.temperature,
        target_specs: &specs,
        target_temperature: target.temperature,
        weights: &params.weights,
        p_max: params.p_max,
        restoration_weight: cfg.restoration_weight,
        inner: cfg.inner(),
    };
    let bf = solve_bf_block(&input, &d.beamformers);
    let mu = report.history.last().map_or(cfg.mu0, |r| (r.mu * cfg.mu_growth).min(cfg.mu_max));
    let scale = coefficient_norm(&d.coefficients()).max(1.0);
    let (ris_relaxed, ris_projected) = if cfg.surface_update == SurfaceUpdate::Relaxed {
        let (_, x_ref, x) = ris::relaxed_solution(&cur, d, params, &specs, target.temperature, mu, &cfg.inner())?;
        let input = RisInput {
            ens: &cur,
            params,
            specs: &specs,
            temperature: target.temperature,
            target_specs: &specs,
            target_temperature: target.temperature,
            mu,
            bits: problem.bits,
            inner: cfg.inner(),
        };
        let out = solve_ris_block(&input, d)?;
        ((&x - &x_ref).norm() / scale, out.step_norm / scale)
    } else {
        (0.0, 0.0)
    };
    let uav = if cfg.optimize_uav {
        let cost = |e: &LinkEnsemble, dd: &Design| design_surrogate(e, dd, &report.thresholds, params, &target);
        let opts = UavOptions { trust_radius: cfg.trust_radius, min_radius: cfg.min_trust_radius, retries: cfg.uav_retries, ..UavOptions::default() };
        solve_uav_block(ens, d, &problem.region, cost, report.final_cost, &opts)?.step_norm
    } else {
        0.0
    };
    Ok(Stationarity { bf: bf.step_norm / params.p_max.sqrt().max(1e-300), ris_relaxed, ris_projected, uav })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{realize_drop, run_baseline, RunConfig, Scheme};

    #[test]
    fn default_drop_descends_and_reruns_at_a_fixed_point() {
        let cfg = RunConfig::default();
        let drop = realize_drop(&cfg, 1, 0).unwrap();
        let problem = cfg.problem(drop.ensemble.user_count());
        let rep = run_baseline(Scheme::Proposed, &drop.ensemble, &cfg, drop.seed).unwrap().report.unwrap();
        assert!(rep.converged && rep.iterations <= 30);
        let mut prev = rep.initial_cost;
        for r in &rep.history {
            assert!(r.cost <= prev + 1e-8, "{} > {prev}", r.cost);
            assert!(r.tangency_error <= 1e-8 * (1.0 + r.cost));
            prev = r.cost;
        }
        assert!(rep.design.total_power() <= problem.params.p_max * (1.0 + 1e-12));
        assert!(problem.region.contains(&rep.design.uav_position));
        assert!(rep.design.star.energy_error() < 1e-12);

        let again = resume_sca_ao(&rep, &drop.ensemble, &problem, &cfg.optimizer).unwrap();
        assert!(again.iterations <= 2, "{} iterations {:#?} {:?}", again.iterations, again.history, rep.history.iter().map(|r| r.cost).collect::<Vec<_>>());
        assert!((again.initial_cost - rep.final_cost).abs() <= 1e-9 * (1.0 + rep.final_cost));
        assert!(again.final_cost <= rep.final_cost + 1e-12);
    }

    #[test]
    fn config_rejects_bad_schedules() {
        let mut c = OptimizerConfig::default();
        c.validate().unwrap();
        c.anneal_factor = 1.5;
        assert!(c.validate().is_err());
        let c = OptimizerConfig { search_bits: 0, ..OptimizerConfig::default() };
        assert!(c.validate().is_err());
    }
}
