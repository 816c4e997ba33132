//! Effective-channel composition, SINRs, secrecy rate and the outage event.

use serde::{Deserialize, Serialize};

use crate::channel::{LinkEnsemble, PathKind};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::scenario::{LinkId, Node, Position, UavRegion};
use crate::surfaces::{HoloRisConfig, StarRisConfig, SurfaceSet, UavRisConfig};

/// Joint design: per-user beamformers, the three surface configurations
/// and the UAV position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub beamformers: Vec<CVec>,
    pub uav_ris: UavRisConfig,
    pub star: StarRisConfig,
    pub hris: HoloRisConfig,
    pub uav_position: Position,
    /// Surfaces taking part in the effective channel.
    #[serde(default)]
    pub surfaces: SurfaceSet,
}

impl Design {
    pub fn total_power(&self) -> f64 {
        self.beamformers.iter().map(|w| w.norm_squared()).sum()
    }

    pub fn coefficients(&self) -> Coefficients {
        let mask = |on: bool, v: CVec| if on { v } else { CVec::zeros(v.len()) };
        Coefficients {
            uav: mask(self.surfaces.uav, self.uav_ris.coefficients()),
            t: mask(self.surfaces.star, self.star.transmission()),
            r: mask(self.surfaces.star, self.star.reflection()),
            holo: mask(self.surfaces.holo && self.surfaces.star, self.hris.coefficients()),
        }
    }

    /// Power budget, surface feasibility and UAV region, to tolerance `tol`.
    pub fn check_feasible(&self, p_max: f64, region: &UavRegion, tol: f64) -> Result<()> {
        if self.total_power() > p_max * (1.0 + tol) + tol {
            return Err(Error::param(format!("power {} exceeds budget {p_max}", self.total_power())));
        }
        if self.star.energy_error() > 1e-12 || self.star.rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::param("STAR coefficients violate energy conservation"));
        }
        if !self.hris.is_feasible() {
            return Err(Error::param("H-RIS amplitude exceeds alpha_max"));
        }
        if !region.contains(&self.uav_position) {
            return Err(Error::param("UAV outside its feasible region"));
        }
        Ok(())
    }
}

/// Diagonals of the surface matrices as used by the composition. Relaxed
/// (non-feasible) coefficients are allowed here.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub uav: CVec,
    pub t: CVec,
    pub r: CVec,
    pub holo: CVec,
}

/// Hardware impairments and jamming.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentParams {
    pub kappa_t: f64,
    pub kappa_r: f64,
    /// Jamming power of each active eavesdropper, watts.
    pub jam_power: f64,
}

impl ImpairmentParams {
    pub const IDEAL: ImpairmentParams = ImpairmentParams { kappa_t: 0.0, kappa_r: 0.0, jam_power: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if self.kappa_t < 0.0 || self.kappa_r < 0.0 || self.jam_power < 0.0 {
            return Err(Error::param("impairment parameters must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    True,
    Estimate,
}

fn vector(ens: &LinkEnsemble, id: LinkId, which: Which) -> Result<CVec> {
    let l = ens.link(id)?;
    Ok(match which {
        Which::True => l.h(),
        Which::Estimate => l.h_hat(),
    })
}

/// `G^H (conj(theta) .* v)`.
fn cascade(g: &CMat, theta: &CVec, v: &CVec) -> CVec {
    let scaled = CVec::from_iterator(v.len(), theta.iter().zip(v.iter()).map(|(a, b)| a.conj() * b));
    g.ad_mul(&scaled)
}

fn compose(ens: &LinkEnsemble, c: &Coefficients, rx: Node, which: Which) -> Result<CVec> {
    let mut h = CVec::zeros(ens.dims.bs);
    for path in ens.paths_of(rx) {
        match path {
            PathKind::Direct => h += vector(ens, LinkId::new(Node::Bs, rx), which)?,
            PathKind::Uav => {
                let g = &ens.link(LinkId::new(Node::Bs, Node::Uav))?.channel;
                h += cascade(g, &c.uav, &vector(ens, LinkId::new(Node::Uav, rx), which)?);
            }
            PathKind::StarT | PathKind::StarR => {
                let g = &ens.link(LinkId::new(Node::Bs, Node::Star))?.channel;
                let theta = if *path == PathKind::StarT { &c.t } else { &c.r };
                h += cascade(g, theta, &vector(ens, LinkId::new(Node::Star, rx), which)?);
            }
            PathKind::Holo => {
                let g_s = &ens.link(LinkId::new(Node::Bs, Node::Star))?.channel;
                let g_sh = &ens.link(LinkId::new(Node::Star, Node::Holo))?.channel;
                let at_star = cascade(g_sh, &c.holo, &vector(ens, LinkId::new(Node::Holo, rx), which)?);
                h += cascade(g_s, &c.t, &at_star);
            }
        }
    }
    Ok(h)
}

/// True effective channel vector of `rx` (received sample `h^H x`).
pub fn effective_channel(ens: &LinkEnsemble, design: &Design, rx: Node) -> Result<CVec> {
    compose(ens, &design.coefficients(), rx, Which::True)
}

/// Estimated effective channel together with the covariance of its error.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveEstimate {
    pub h_hat: CVec,
    pub cov: CMat,
}

/// Maps each path's last-hop error to the effective error:
/// `dh_eff = sum_p M_p dh_p`.
pub fn path_maps(ens: &LinkEnsemble, c: &Coefficients, rx: Node) -> Result<Vec<(LinkId, CMat)>> {
    let diag_conj = |theta: &CVec| CMat::from_diagonal(&theta.map(|z| z.conj()));
    let mut out = Vec::new();
    for path in ens.paths_of(rx) {
        match path {
            PathKind::Direct => out.push((LinkId::new(Node::Bs, rx), CMat::identity(ens.dims.bs, ens.dims.bs))),
            PathKind::Uav => {
                let g = &ens.link(LinkId::new(Node::Bs, Node::Uav))?.channel;
                out.push((LinkId::new(Node::Uav, rx), g.adjoint() * diag_conj(&c.uav)));
            }
            PathKind::StarT | PathKind::StarR => {
                let g = &ens.link(LinkId::new(Node::Bs, Node::Star))?.channel;
                let theta = if *path == PathKind::StarT { &c.t } else { &c.r };
                out.push((LinkId::new(Node::Star, rx), g.adjoint() * diag_conj(theta)));
            }
            PathKind::Holo => {
                let g_s = &ens.link(LinkId::new(Node::Bs, Node::Star))?.channel;
                let g_sh = &ens.link(LinkId::new(Node::Star, Node::Holo))?.channel;
                let m = g_s.adjoint() * diag_conj(&c.t) * g_sh.adjoint() * diag_conj(&c.holo);
                out.push((LinkId::new(Node::Holo, rx), m));
            }
        }
    }
    Ok(out)
}

pub fn effective_estimate_with(ens: &LinkEnsemble, c: &Coefficients, rx: Node) -> Result<EffectiveEstimate> {
    let h_hat = compose(ens, c, rx, Which::Estimate)?;
    let n = ens.dims.bs;
    let mut cov = CMat::zeros(n, n);
    for (id, m) in path_maps(ens, c, rx)? {
        let cp = &ens.link(id)?.error_cov;
        if cp.nrows() > 0 {
            cov += &m * cp * m.adjoint();
        }
    }
    Ok(EffectiveEstimate { h_hat, cov })
}

pub fn effective_estimate(ens: &LinkEnsemble, design: &Design, rx: Node) -> Result<EffectiveEstimate> {
    effective_estimate_with(ens, &design.coefficients(), rx)
}

/// `|h^H w|^2`.
pub fn signal_power(h: &CVec, w: &CVec) -> f64 {
    h.dotc(w).norm_sqr()
}

/// Transmitter plus receiver EVM distortion power at a receiver with
/// channel `h`.
pub fn distortion_power(h: &CVec, beams: &[CVec], imp: &ImpairmentParams) -> f64 {
    let mut tx = 0.0;
    let mut rx = 0.0;
    for w in beams {
        tx += h.iter().zip(w.iter()).map(|(a, b)| a.norm_sqr() * b.norm_sqr()).sum::<f64>();
        rx += signal_power(h, w);
    }
    imp.kappa_t * tx + imp.kappa_r * rx
}

/// SINR of user `k` with channel `h`. `jam_gains` are `|h_{e->k}|^2` of the
/// active eavesdroppers.
pub fn sinr_legitimate(h: &CVec, beams: &[CVec], k: usize, noise: f64, imp: &ImpairmentParams, jam_gains: &[f64]) -> f64 {
    let desired = signal_power(h, &beams[k]);
    let interference: f64 = beams.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, w)| signal_power(h, w)).sum();
    let jam = imp.jam_power * jam_gains.iter().sum::<f64>();
    desired / (interference + noise + distortion_power(h, beams, imp) + jam)
}

/// SINR of eavesdropper channel `h` on user `k`'s stream.
pub fn sinr_eavesdropper(h: &CVec, beams: &[CVec], k: usize, noise: f64, imp: &ImpairmentParams) -> f64 {
    sinr_legitimate(h, beams, k, noise, imp, &[])
}

/// Colluding aggregate: sum of per-eavesdropper SINRs.
pub fn sinr_colluding(eves: &[CVec], beams: &[CVec], k: usize, noise: f64, imp: &ImpairmentParams) -> f64 {
    eves.iter().map(|h| sinr_eavesdropper(h, beams, k, noise, imp)).sum()
}

pub fn rate(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

pub fn secrecy_rate(gamma_l: f64, gamma_e: f64) -> f64 {
    (rate(gamma_l) - rate(gamma_e)).max(0.0)
}

/// Per-user metrics of one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub gamma_l: f64,
    pub rate_l: f64,
    pub gamma_ke: Vec<f64>,
    pub gamma_e: f64,
    pub rate_e: f64,
    pub secrecy_rate: f64,
}

impl LinkMetrics {
    pub fn new(gamma_l: f64, gamma_ke: Vec<f64>) -> Self {
        let gamma_e: f64 = gamma_ke.iter().sum();
        LinkMetrics {
            gamma_l,
            rate_l: rate(gamma_l),
            gamma_e,
            rate_e: rate(gamma_e),
            secrecy_rate: secrecy_rate(gamma_l, gamma_e),
            gamma_ke,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutageFlags {
    pub secrecy: bool,
    pub qos: bool,
}

impl OutageFlags {
    pub fn outage(&self) -> bool {
        self.secrecy || self.qos
    }
}

pub fn outage_indicator(m: &LinkMetrics, r_sec_min: f64, r_qos: f64) -> OutageFlags {
    OutageFlags { secrecy: m.secrecy_rate < r_sec_min, qos: m.rate_l < r_qos }
}

/// Channels of one realization in effective form.
#[derive(Clone, Debug)]
pub struct ChannelSnapshot {
    pub users: Vec<CVec>,
    pub eves: Vec<CVec>,
    /// `jam[k]` holds `|h_{e->k}|^2` for every active eavesdropper.
    pub jam: Vec<Vec<f64>>,
    pub noise: f64,
}

impl ChannelSnapshot {
    pub fn metrics(&self, beams: &[CVec], imp: &ImpairmentParams) -> Vec<LinkMetrics> {
        (0..self.users.len())
            .map(|k| {
                let gl = sinr_legitimate(&self.users[k], beams, k, self.noise, imp, &self.jam[k]);
                let ge = self.eves.iter().map(|h| sinr_eavesdropper(h, beams, k, self.noise, imp)).collect();
                LinkMetrics::new(gl, ge)
            })
            .collect()
    }
}

/// Effective true channels of every receiver.
pub fn true_snapshot(ens: &LinkEnsemble, design: &Design) -> Result<ChannelSnapshot> {
    let users = (0..ens.user_count()).map(|k| effective_channel(ens, design, Node::User(k))).collect::<Result<_>>()?;
    let eves = (0..ens.eve_count()).map(|e| effective_channel(ens, design, Node::Eve(e))).collect::<Result<_>>()?;
    let jam = (0..ens.user_count())
        .map(|k| {
            ens.active_eves()
                .map(|e| ens.link(LinkId::new(Node::Eve(e), Node::User(k))).map(|l| l.channel[(0, 0)].norm_sqr()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ChannelSnapshot { users, eves, jam, noise: ens.noise_power })
}

/// Metrics of every user under the true channels of `ens`.
pub fn evaluate_metrics(ens: &LinkEnsemble, design: &Design, imp: &ImpairmentParams) -> Result<Vec<LinkMetrics>> {
    Ok(true_snapshot(ens, design)?.metrics(&design.beamformers, imp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(x: f64) -> crate::Complex64 {
        crate::Complex64::new(x, 0.0)
    }

    fn v(x: &[f64]) -> CVec {
        CVec::from_iterator(x.len(), x.iter().map(|&a| c64(a)))
    }

    #[test]
    fn single_user_snr() {
        let p: f64 = 7.0;
        let g = sinr_legitimate(&v(&[1.0, 0.0]), &[v(&[p.sqrt(), 0.0])], 0, 1.0, &ImpairmentParams::IDEAL, &[]);
        assert!((g - p).abs() < 1e-12);
    }

    #[test]
    fn receiver_distortion_ceiling() {
        let imp = ImpairmentParams { kappa_t: 0.0, kappa_r: 0.01, jam_power: 0.0 };
        for p in [1.0, 1e3, 1e9] {
            let g = sinr_legitimate(&v(&[1.0, 0.0]), &[v(&[f64::sqrt(p), 0.0])], 0, 1.0, &imp, &[]);
            assert!((g - p / (1.0 + 0.01 * p)).abs() <= 1e-9 * g);
            assert!(g < 100.0);
        }
    }

    #[test]
    fn jamming_doubles_denominator() {
        let imp = ImpairmentParams { kappa_t: 0.0, kappa_r: 0.0, jam_power: 1.0 };
        let g = sinr_legitimate(&v(&[1.0, 0.0]), &[v(&[2.0, 0.0])], 0, 1.0, &imp, &[1.0]);
        assert!((g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn secrecy_examples() {
        assert!((secrecy_rate(7.0, 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(secrecy_rate(1.0, 7.0), 0.0);
        assert_eq!(secrecy_rate(3.0, 3.0), 0.0);
    }

    #[test]
    fn outage_examples() {
        let mut m = LinkMetrics::new(0.0, vec![]);
        m.secrecy_rate = 0.6;
        m.rate_l = 1.2;
        assert!(!outage_indicator(&m, 0.5, 1.0).outage());
        m.secrecy_rate = 0.4;
        let f = outage_indicator(&m, 0.5, 1.0);
        assert!(f.outage() && f.secrecy && !f.qos);
        m.secrecy_rate = 0.0;
        m.rate_l = 0.0;
        assert!(!outage_indicator(&m, 0.0, 0.0).outage());
    }

    #[test]
    fn colluding_sum_and_empty() {
        let beams = [v(&[1.0])];
        let eves = [v(&[f64::sqrt(0.5)]), v(&[0.5])];
        let g = sinr_colluding(&eves, &beams, 0, 1.0, &ImpairmentParams::IDEAL);
        assert!((g - 0.75).abs() < 1e-12);
        assert_eq!(sinr_colluding(&[], &beams, 0, 1.0, &ImpairmentParams::IDEAL), 0.0);
        let m = LinkMetrics::new(1.0, vec![]);
        assert_eq!(m.rate_e, 0.0);
    }
}
