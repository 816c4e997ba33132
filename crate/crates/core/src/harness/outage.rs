//! Monte-Carlo secrecy-outage estimation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::LinkEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_sqrt, CMat, CVec};
use crate::link::{effective_estimate, outage_indicator, ChannelSnapshot, Design, OutageFlags};
use crate::optimizer::SystemParams;
use crate::rng::{complex_normal, label, substream};
use crate::scenario::{LinkId, Node};

/// Per-trial outage flags, one entry per user.
pub type TrialFlags = Vec<OutageFlags>;

/// Draws `n_trials` channel realizations around the estimates of `ens`
/// (effective CSI errors and jamming-link errors) and records every user's
/// outage flags. Trial `i` uses substream `(seed, "csi", stream.., i)`, so
/// the result does not depend on the worker count.
pub fn outage_trials(design: &Design, ens: &LinkEnsemble, params: &SystemParams, n_trials: usize, seed: u64, stream: &[u64]) -> Result<Vec<TrialFlags>> {
    let ens = if design.uav_position != ens.uav_position { std::borrow::Cow::Owned(ens.relocate_uav(&design.uav_position)?) } else { std::borrow::Cow::Borrowed(ens) };
    let ens = ens.as_ref();
    let receivers = |node: fn(usize) -> Node, n: usize| -> Result<Vec<(CVec, CMat)>> {
        (0..n)
            .map(|i| {
                let e = effective_estimate(ens, design, node(i))?;
                Ok((e.h_hat, hermitian_sqrt(&e.cov)))
            })
            .collect()
    };
    let users = receivers(Node::User, ens.user_count())?;
    let eves = receivers(Node::Eve, ens.eve_count())?;
    let active: Vec<usize> = ens.active_eves().collect();
    let mut jam = Vec::new();
    for k in 0..ens.user_count() {
        let mut row = Vec::new();
        for &e in &active {
            let l = ens.link(LinkId::new(Node::Eve(e), Node::User(k)))?;
            row.push((l.estimate[(0, 0)], l.error_power));
        }
        jam.push(row);
    }
    let mut path = vec![label("csi")];
    path.extend_from_slice(stream);
    let noise = ens.noise_power;
    let draw = |(h, l): &(CVec, CMat), rng: &mut crate::rng::StreamRng| {
        let z = CVec::from_fn(h.len(), |_, _| complex_normal(rng, 1.0));
        h + l * z
    };
    let trials = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut p = path.clone();
            p.push(i as u64);
            let mut rng = substream(seed, &p);
            let snap = ChannelSnapshot {
                users: users.iter().map(|r| draw(r, &mut rng)).collect(),
                eves: eves.iter().map(|r| draw(r, &mut rng)).collect(),
                jam: jam.iter().map(|row| row.iter().map(|(h, var)| (h + complex_normal(&mut rng, *var)).norm_sqr()).collect()).collect(),
                noise,
            };
            snap.metrics(&design.beamformers, &params.imp)
                .iter()
                .map(|m| outage_indicator(m, params.r_sec_min, params.r_qos))
                .collect()
        })
        .collect();
    Ok(trials)
}

/// Empirical outage statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub trials: usize,
    pub p_out: Vec<f64>,
    pub p_out_stderr: Vec<f64>,
    pub secrecy: Vec<f64>,
    pub secrecy_stderr: Vec<f64>,
    pub qos: Vec<f64>,
    pub qos_stderr: Vec<f64>,
    /// `sum_k w_k p_out_k`.
    pub weighted: f64,
    pub weighted_stderr: f64,
}

fn binomial(count: usize, n: usize) -> (f64, f64) {
    let p = count as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

impl OutageEstimate {
    /// Aggregates per-trial flags of one or more drops, in order. Each drop
    /// carries its own user weights; per-user statistics are reported only
    /// when every drop has the same number of users.
    pub fn from_drops(drops: &[(Vec<TrialFlags>, Vec<f64>)]) -> Result<Self> {
        let n: usize = drops.iter().map(|d| d.0.len()).sum();
        if n == 0 {
            return Err(Error::param("at least one trial required"));
        }
        let k = drops[0].1.len();
        let uniform = drops.iter().all(|d| d.1.len() == k);
        let mut out = [vec![0usize; k], vec![0usize; k], vec![0usize; k]];
        let (mut s1, mut s2) = (0.0, 0.0);
        for (trials, weights) in drops {
            for t in trials {
                if t.len() != weights.len() {
                    return Err(Error::param("trial flags do not match the weights"));
                }
                let mut x = 0.0;
                for (j, f) in t.iter().enumerate() {
                    if uniform {
                        out[0][j] += f.outage() as usize;
                        out[1][j] += f.secrecy as usize;
                        out[2][j] += f.qos as usize;
                    }
                    if f.outage() {
                        x += weights[j];
                    }
                }
                s1 += x;
                s2 += x * x;
            }
        }
        if !uniform {
            out = [Vec::new(), Vec::new(), Vec::new()];
        }
        let split = |c: &[usize]| -> (Vec<f64>, Vec<f64>) { c.iter().map(|&c| binomial(c, n)).unzip() };
        let (p_out, p_out_stderr) = split(&out[0]);
        let (secrecy, secrecy_stderr) = split(&out[1]);
        let (qos, qos_stderr) = split(&out[2]);
        let mean = s1 / n as f64;
        let var = if n > 1 { ((s2 - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0) } else { 0.0 };
        Ok(OutageEstimate {
            trials: n,
            p_out,
            p_out_stderr,
            secrecy,
            secrecy_stderr,
            qos,
            qos_stderr,
            weighted: mean,
            weighted_stderr: (var / n as f64).sqrt(),
        })
    }
}

/// Outage of a fixed design on one drop.
pub fn estimate_outage(design: &Design, ens: &LinkEnsemble, params: &SystemParams, n_trials: usize, seed: u64) -> Result<OutageEstimate> {
    if n_trials == 0 {
        return Err(Error::param("n_trials must be >= 1"));
    }
    let trials = outage_trials(design, ens, params, n_trials, seed, &[])?;
    OutageEstimate::from_drops(&[(trials, params.weights.clone())])
}
