//! Parameter sweeps over independent drops with common random numbers.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::optimizer::IterationRecord;

use super::baselines::run_baseline;
use super::config::{RunConfig, Scheme, SweepKind};
use super::outage::{outage_trials, OutageEstimate, TrialFlags};
use super::realize_drop;

/// Aggregated outcome of one scheme at one grid point.
#[derive(Clone, Debug, Serialize)]
pub struct PointResult {
    pub grid: f64,
    pub scheme: Scheme,
    pub estimate: Option<OutageEstimate>,
    /// Mean optimizer iterations over drops (0 for non-iterative schemes).
    pub iterations: f64,
    /// Fraction of users whose robust blocks all hold at the returned design.
    pub certified: f64,
    pub drops: usize,
    /// First failure at this point, if any drop failed.
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Convergence trace of one scheme on one drop.
#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub scheme: Scheme,
    pub drop: usize,
    pub initial_cost: f64,
    pub history: Vec<IterationRecord>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
    pub traces: Vec<Trace>,
}

struct Job {
    flags: Vec<TrialFlags>,
    weights: Vec<f64>,
    iterations: usize,
    certified: usize,
    users: usize,
    history: Option<(f64, Vec<IterationRecord>)>,
    wall: Duration,
}

fn run_job(cfg: &RunConfig, seed: u64, drop: usize, scheme: Scheme, trials: usize, keep_history: bool) -> Result<Job> {
    let start = Instant::now();
    let d = realize_drop(cfg, seed, drop as u64)?;
    let res = run_baseline(scheme, &d.ensemble, cfg, d.seed)?;
    let problem = cfg.problem(d.ensemble.user_count());
    let flags = outage_trials(&res.design, &d.ensemble, &problem.params, trials, d.seed, &[])?;
    let (iterations, certified, history) = match &res.report {
        Some(r) => (
            r.iterations,
            r.certified.iter().filter(|c| **c).count(),
            keep_history.then(|| (r.initial_cost, r.history.clone())),
        ),
        None => (0, 0, None),
    };
    Ok(Job { flags, weights: problem.params.weights, iterations, certified, users: d.ensemble.user_count(), history, wall: start.elapsed() })
}

/// Schemes of a sweep: the proposed one followed by the configured
/// baselines.
pub fn schemes_of(cfg: &RunConfig) -> Vec<Scheme> {
    let mut s = vec![Scheme::Proposed];
    for b in &cfg.experiment.baselines {
        if !s.contains(b) {
            s.push(*b);
        }
    }
    s
}

/// Optimizes every scheme on every drop of every grid point and estimates
/// its outage. Drop `d` and its Monte-Carlo trials are identical across grid
/// points and schemes. Results are independent of the worker count.
pub fn sweep(cfg: &RunConfig) -> SweepResult {
    let e = &cfg.experiment;
    let schemes = schemes_of(cfg);
    let grid: Vec<f64> = if e.kind == SweepKind::Convergence { vec![f64::NAN] } else { e.grid.clone() };
    let trials = e.trials.div_ceil(e.drops);
    let keep_history = e.kind == SweepKind::Convergence;
    let mut jobs = Vec::new();
    for (gi, g) in grid.iter().enumerate() {
        for (si, s) in schemes.iter().enumerate() {
            for d in 0..e.drops {
                jobs.push((gi, *g, si, *s, d));
            }
        }
    }
    let outcomes: Vec<Result<Job>> = jobs
        .par_iter()
        .map(|&(_, g, _, s, d)| {
            let point = if g.is_nan() { cfg.clone() } else { cfg.at_grid_point(g) };
            run_job(&point, e.seed, d, s, trials, keep_history)
        })
        .collect();

    let mut result = SweepResult::default();
    let mut it = jobs.iter().zip(outcomes).peekable();
    while let Some(&(&(gi, g, si, s, _), _)) = it.peek() {
        let mut drops = Vec::new();
        let mut error = None;
        let (mut iters, mut cert, mut users, mut wall) = (0usize, 0usize, 0usize, Duration::ZERO);
        while let Some((&(gj, _, sj, _, d), out)) = it.next_if(|(j, _)| j.0 == gi && j.2 == si) {
            debug_assert!(gj == gi && sj == si);
            match out {
                Ok(job) => {
                    iters += job.iterations;
                    cert += job.certified;
                    users += job.users;
                    wall += job.wall;
                    if let Some((c0, h)) = job.history {
                        result.traces.push(Trace { scheme: s, drop: d, initial_cost: c0, history: h });
                    }
                    drops.push((job.flags, job.weights));
                }
                Err(err) => {
                    error.get_or_insert_with(|| format!("drop {d}: {err}"));
                }
            }
        }
        let n = drops.len();
        let estimate = if n > 0 { OutageEstimate::from_drops(&drops).ok() } else { None };
        result.points.push(PointResult {
            grid: g,
            scheme: s,
            estimate,
            iterations: if n > 0 { iters as f64 / n as f64 } else { 0.0 },
            certified: if users > 0 { cert as f64 / users as f64 } else { 0.0 },
            drops: n,
            error,
            wall_time: wall,
        });
    }
    result
}
