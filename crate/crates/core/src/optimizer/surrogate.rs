//! Robust-block margins, the smooth outage surrogate and their gradients.
//!
//! Every Bernstein block is written as `V = P - N` where `P` collects the
//! positive-coefficient power terms and `N` the negative ones together with
//! the slack penalty `kappa * tau`. The normalized margin
//! `m = (P - N) / (P + N)` lies in `[-1, 1]`, is invariant to scaling of the
//! constraint and is non-negative exactly when the block is feasible.

use serde::{Deserialize, Serialize};

use crate::channel::LinkEnsemble;
use crate::error::Result;
use crate::linalg::{CMat, CVec};
use crate::link::{effective_estimate_with, Coefficients, EffectiveEstimate, ImpairmentParams};
use crate::robust::{bernstein_kappa, gain_upper_bound, SecrecyThresholds, SinrCoefficients};
use crate::scenario::{LinkId, Node};
use crate::Complex64;

/// SCA minorant of `|h^H w|^2` at `w_ref`:
/// `w_ref^H H w_ref + 2 Re{(H w_ref)^H (w - w_ref)}` with `H = h h^H`.
pub fn sca_lower_bound_signal(h: &CVec, w: &CVec, w_ref: &CVec) -> f64 {
    let r = h.dotc(w_ref);
    let hw = h.dotc(w);
    // (H w_ref)^H (w - w_ref) = conj(h^H w_ref) (h^H w - h^H w_ref)
    r.norm_sqr() + 2.0 * (r.conj() * (hw - r)).re
}

/// Same minorant for a general PSD weight `Q`.
pub(crate) fn sca_quadratic(q: &CMat, w: &CVec, w_ref: &CVec) -> (f64, CVec) {
    let qr = q * w_ref;
    let base = w_ref.dotc(&qr).re;
    (base + 2.0 * qr.dotc(&(w - w_ref)).re, qr)
}

/// Problem constants shared by every block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub p_max: f64,
    pub imp: ImpairmentParams,
    pub r_sec_min: f64,
    pub r_qos: f64,
    /// Secrecy violation probability per user.
    pub epsilon: f64,
    /// QoS violation probability per user.
    pub delta: f64,
    /// Tail probability allotted to the jamming-power bound.
    pub jam_tail: f64,
    pub weights: Vec<f64>,
}

impl SystemParams {
    pub fn gamma_qos(&self) -> f64 {
        2f64.powf(self.r_qos) - 1.0
    }
}

/// Which constraint a block encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    Qos,
    SecrecyLegit,
    SecrecyEve(usize),
}

#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub user: usize,
    pub kind: BlockKind,
    pub coeffs: SinrCoefficients,
    pub epsilon: f64,
    /// Threshold zero: the chance constraint holds surely.
    pub trivial: bool,
}

impl BlockSpec {
    pub fn receiver(&self) -> Rx {
        match self.kind {
            BlockKind::SecrecyEve(e) => Rx::Eve(e),
            _ => Rx::User(self.user),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rx {
    User(usize),
    Eve(usize),
}

/// Estimated effective channels and noise floors for one surface
/// configuration.
#[derive(Clone, Debug)]
pub struct Receivers {
    pub users: Vec<EffectiveEstimate>,
    pub eves: Vec<EffectiveEstimate>,
    /// Thermal noise plus the jamming bound of each user.
    pub user_floor: Vec<f64>,
    pub eve_floor: f64,
}

impl Receivers {
    pub fn build(ens: &LinkEnsemble, c: &Coefficients, params: &SystemParams) -> Result<Self> {
        let users = (0..ens.user_count()).map(|k| effective_estimate_with(ens, c, Node::User(k))).collect::<Result<_>>()?;
        let eves = (0..ens.eve_count()).map(|e| effective_estimate_with(ens, c, Node::Eve(e))).collect::<Result<_>>()?;
        Ok(Receivers { users, eves, user_floor: user_floors(ens, params)?, eve_floor: ens.noise_power })
    }

    pub fn get(&self, rx: Rx) -> &EffectiveEstimate {
        match rx {
            Rx::User(k) => &self.users[k],
            Rx::Eve(e) => &self.eves[e],
        }
    }
}

pub(crate) fn user_floors(ens: &LinkEnsemble, params: &SystemParams) -> Result<Vec<f64>> {
    let active: Vec<usize> = ens.active_eves().collect();
    (0..ens.user_count())
        .map(|k| {
            let mut jam = 0.0;
            for &e in &active {
                let l = ens.link(LinkId::new(Node::Eve(e), Node::User(k)))?;
                let tail = params.jam_tail / active.len() as f64;
                jam += gain_upper_bound(l.estimate[(0, 0)].norm_sqr(), l.error_power, tail);
            }
            Ok(ens.noise_power + params.imp.jam_power * jam)
        })
        .collect()
}

/// Margin model: violation-probability scale and softness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps_scale: f64,
    pub temperature: f64,
}

impl ModelParams {
    pub fn target(temperature: f64) -> Self {
        ModelParams { eps_scale: 1.0, temperature }
    }
}

fn scaled_eps(eps: f64, scale: f64) -> f64 {
    (eps * scale).min(0.5)
}

/// Blocks of every user for the given thresholds.
pub fn block_specs(
    n_users: usize,
    n_eves: usize,
    thresholds: &[SecrecyThresholds],
    floors: &[f64],
    eve_floor: f64,
    params: &SystemParams,
    model: &ModelParams,
) -> Vec<BlockSpec> {
    let mut specs = Vec::new();
    let gq = params.gamma_qos();
    for k in 0..n_users {
        specs.push(BlockSpec {
            user: k,
            kind: BlockKind::Qos,
            coeffs: SinrCoefficients::legitimate(n_users, k, gq, floors[k], &params.imp),
            epsilon: scaled_eps(params.delta, model.eps_scale),
            trivial: gq <= 0.0,
        });
        let th = &thresholds[k];
        specs.push(BlockSpec {
            user: k,
            kind: BlockKind::SecrecyLegit,
            coeffs: SinrCoefficients::legitimate(n_users, k, th.gamma_l, floors[k], &params.imp),
            epsilon: scaled_eps(th.eps_l, model.eps_scale),
            trivial: th.gamma_l <= 0.0,
        });
        if params.r_sec_min > 0.0 {
            for e in 0..n_eves {
                let g = th.gamma_e / n_eves as f64;
                specs.push(BlockSpec {
                    user: k,
                    kind: BlockKind::SecrecyEve(e),
                    coeffs: SinrCoefficients::eavesdropper(n_users, k, g, eve_floor, &params.imp),
                    epsilon: scaled_eps(th.eps_e / n_eves as f64, model.eps_scale),
                    trivial: false,
                });
            }
        }
    }
    specs
}

/// Margin of one block and, optionally, its derivatives.
#[derive(Clone, Debug, Default)]
pub struct BlockEval {
    pub margin: f64,
    pub positive: f64,
    pub negative: f64,
    /// `dm/d conj(w_i)`.
    pub grad_w: Option<Vec<CVec>>,
    /// `dm/d conj(h_hat)` and the covariance sensitivity `G_C`
    /// (`dm = 2 Re{g^H dh} + tr(G_C dC)`).
    pub grad_h: Option<(CVec, CMat)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grad {
    None,
    Beams,
    Channel,
}

fn diag_weights(h: &CVec, cov: &CMat) -> Vec<f64> {
    (0..h.len()).map(|n| h[n].norm_sqr() + cov[(n, n)].re).collect()
}

/// Evaluates the normalized margin of `spec`. With `lin = Some(w_ref)` the
/// positive power terms are replaced by their tangent minorants at `w_ref`.
pub fn block_eval(spec: &BlockSpec, beams: &[CVec], est: &EffectiveEstimate, lin: Option<&[CVec]>, grad: Grad) -> BlockEval {
    let n_users = beams.len();
    let n = est.h_hat.len();
    if spec.trivial {
        return BlockEval {
            margin: 1.0,
            positive: 1.0,
            negative: 0.0,
            grad_w: (grad == Grad::Beams).then(|| vec![CVec::zeros(n); n_users]),
            grad_h: (grad == Grad::Channel).then(|| (CVec::zeros(n), CMat::zeros(n, n))),
        };
    }
    let h = &est.h_hat;
    let cov = &est.cov;
    let q = h * h.adjoint() + cov;
    let delta = diag_weights(h, cov);
    let kappa = bernstein_kappa(spec.epsilon);
    let co = &spec.coeffs;

    let mut pos = co.constant.max(0.0);
    let mut neg = (-co.constant).max(0.0);
    // dP/dconj(w_i), dN/dconj(w_i)
    let mut dp: Vec<CVec> = Vec::new();
    let mut dn: Vec<CVec> = Vec::new();
    if grad == Grad::Beams {
        dp = vec![CVec::zeros(n); n_users];
        dn = vec![CVec::zeros(n); n_users];
    }
    for i in 0..n_users {
        let w = &beams[i];
        let (a, d) = (co.a[i], co.d[i]);
        if a != 0.0 {
            if a > 0.0 {
                if let Some(r) = lin {
                    let (val, qr) = sca_quadratic(&q, w, &r[i]);
                    if val > 0.0 {
                        pos += a * val;
                        if grad == Grad::Beams {
                            dp[i] += qr * Complex64::from(a);
                        }
                    }
                } else {
                    let qw = &q * w;
                    pos += a * w.dotc(&qw).re;
                    if grad == Grad::Beams {
                        dp[i] += qw * Complex64::from(a);
                    }
                }
            } else {
                let qw = &q * w;
                neg += -a * w.dotc(&qw).re;
                if grad == Grad::Beams {
                    dn[i] += qw * Complex64::from(-a);
                }
            }
        }
        if d != 0.0 {
            let dw = CVec::from_fn(n, |j, _| w[j] * delta[j]);
            if d > 0.0 {
                if let Some(r) = lin {
                    let dr = CVec::from_fn(n, |j, _| r[i][j] * delta[j]);
                    let base = r[i].dotc(&dr).re;
                    let val = base + 2.0 * dr.dotc(&(w - &r[i])).re;
                    if val > 0.0 {
                        pos += d * val;
                        if grad == Grad::Beams {
                            dp[i] += dr * Complex64::from(d);
                        }
                    }
                } else {
                    pos += d * w.dotc(&dw).re;
                    if grad == Grad::Beams {
                        dp[i] += dw * Complex64::from(d);
                    }
                }
            } else {
                neg += -d * w.dotc(&dw).re;
                if grad == Grad::Beams {
                    dn[i] += dw * Complex64::from(-d);
                }
            }
        }
    }

    // Slack: tau = max(||C^1/2 A C^1/2||_F, sqrt(2) ||C^1/2 A h||).
    let a_mat = co.matrix(beams);
    let ac = &a_mat * cov;
    let f2 = crate::linalg::re_trace_product(&ac, &ac).max(0.0);
    let u = &a_mat * h;
    let z = cov * &u;
    let n2 = u.dotc(&z).re.max(0.0);
    let f = f2.sqrt();
    let nn = n2.sqrt();
    let use_frob = f >= 2f64.sqrt() * nn;
    let tau = if use_frob { f } else { 2f64.sqrt() * nn };
    neg += kappa * tau;

    let total = pos + neg;
    let margin = if total > 0.0 { (pos - neg) / total } else { 0.0 };
    let mut out = BlockEval { margin, positive: pos, negative: neg, grad_w: None, grad_h: None };
    if total <= 0.0 || grad == Grad::None {
        if grad == Grad::Beams {
            out.grad_w = Some(vec![CVec::zeros(n); n_users]);
        } else if grad == Grad::Channel {
            out.grad_h = Some((CVec::zeros(n), CMat::zeros(n, n)));
        }
        return out;
    }
    let denom = total * total;
    let cp = 2.0 * neg / denom;
    let cn = -2.0 * pos / denom;

    match grad {
        Grad::Beams => {
            let mut g = Vec::with_capacity(n_users);
            let cac = if use_frob && f > 0.0 { Some(cov * &a_mat * cov) } else { None };
            for i in 0..n_users {
                let w = &beams[i];
                let (a, d) = (co.a[i], co.d[i]);
                let mut dtau = CVec::zeros(n);
                if tau > 0.0 {
                    if let Some(m) = &cac {
                        dtau = (m * w) * Complex64::from(a / f);
                        for j in 0..n {
                            dtau[j] += w[j] * (d * m[(j, j)].re / f);
                        }
                    } else if nn > 0.0 {
                        let hw = h.dotc(w);
                        let zw = z.dotc(w);
                        let mut gn2 = &z * (hw * a) + h * (zw * a);
                        for j in 0..n {
                            gn2[j] += w[j] * (2.0 * d * (z[j].conj() * h[j]).re);
                        }
                        dtau = gn2 * Complex64::from(2f64.sqrt() / (2.0 * nn));
                    }
                }
                let dneg = &dn[i] + dtau * Complex64::from(kappa);
                g.push(&dp[i] * Complex64::from(cp) + dneg * Complex64::from(cn));
            }
            out.grad_w = Some(g);
        }
        Grad::Channel => {
            // X_P and X_N with X_P - X_N = A.
            let mut xp = CMat::zeros(n, n);
            let mut xn = CMat::zeros(n, n);
            for i in 0..n_users {
                let w = &beams[i];
                let (a, d) = (co.a[i], co.d[i]);
                if a != 0.0 {
                    let ww = w * w.adjoint();
                    if a > 0.0 {
                        xp += ww * Complex64::from(a);
                    } else {
                        xn += ww * Complex64::from(-a);
                    }
                }
                if d != 0.0 {
                    for j in 0..n {
                        let v = Complex64::from(d.abs() * w[j].norm_sqr());
                        if d > 0.0 {
                            xp[(j, j)] += v;
                        } else {
                            xn[(j, j)] += v;
                        }
                    }
                }
            }
            let (mut gh_tau, mut gc_tau) = (CVec::zeros(n), CMat::zeros(n, n));
            if tau > 0.0 {
                if use_frob {
                    gc_tau = (&a_mat * cov * &a_mat) * Complex64::from(1.0 / f);
                } else {
                    let s = 2f64.sqrt() / (2.0 * nn);
                    gh_tau = (&a_mat * &z) * Complex64::from(s);
                    gc_tau = (&u * u.adjoint()) * Complex64::from(s);
                }
            }
            let gh = (&xp * h) * Complex64::from(cp) + (&xn * h + gh_tau * Complex64::from(kappa)) * Complex64::from(cn);
            let gc = &xp * Complex64::from(cp) + (&xn + gc_tau * Complex64::from(kappa)) * Complex64::from(cn);
            out.grad_h = Some((gh, gc));
        }
        Grad::None => {}
    }
    out
}

/// Weighted log-sum-exp soft-min of block margins:
/// `sum_k w_k ln(1 + sum_b exp(-m_b / T))`.
pub fn surrogate_cost(margins: &[Vec<f64>], weights: &[f64], temperature: f64) -> f64 {
    margins.iter().zip(weights).map(|(m, w)| w * softmin_penalty(m, temperature).0).sum()
}

/// `ln(1 + sum exp(-m_b/T))` and `d/dm_b`.
pub(crate) fn softmin_penalty(margins: &[f64], t: f64) -> (f64, Vec<f64>) {
    let xs: Vec<f64> = margins.iter().map(|m| -m / t).collect();
    let mx = xs.iter().copied().fold(0.0f64, f64::max);
    let e0 = (-mx).exp();
    let es: Vec<f64> = xs.iter().map(|x| (x - mx).exp()).collect();
    let s = e0 + es.iter().sum::<f64>();
    let val = mx + s.ln();
    let d = es.iter().map(|e| -e / (s * t)).collect();
    (val, d)
}

/// `softplus(x) = ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Cost, margins and (optionally) gradients for a fixed block list.
pub struct Evaluation {
    pub cost: f64,
    /// Margins grouped per user, in block order.
    pub margins: Vec<Vec<f64>>,
    /// Margins in `specs` order.
    pub block_margins: Vec<f64>,
    pub grad_w: Option<Vec<CVec>>,
    /// Per-user and per-eve `(g_h, G_C)`.
    pub grad_users: Option<Vec<(CVec, CMat)>>,
    pub grad_eves: Option<Vec<(CVec, CMat)>>,
}

/// Optional hinge penalty `weight * sum max(0, -m_b)` on selected blocks.
pub struct Hinge<'a> {
    pub weight: f64,
    pub blocks: &'a [bool],
}

#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    specs: &[BlockSpec],
    beams: &[CVec],
    rx: &Receivers,
    weights: &[f64],
    temperature: f64,
    lin: Option<&[CVec]>,
    grad: Grad,
    hinge: Option<&Hinge<'_>>,
) -> Evaluation {
    let n_users = weights.len();
    let n = beams.first().map_or(0, |w| w.len());
    let evals: Vec<BlockEval> = specs.iter().map(|s| block_eval(s, beams, rx.get(s.receiver()), lin, grad)).collect();
    let mut margins = vec![Vec::new(); n_users];
    let mut idx = vec![Vec::new(); n_users];
    for (b, (s, e)) in specs.iter().zip(&evals).enumerate() {
        margins[s.user].push(e.margin);
        idx[s.user].push(b);
    }
    let mut cost = 0.0;
    let mut dcost = vec![0.0; specs.len()];
    for k in 0..n_users {
        let (v, d) = softmin_penalty(&margins[k], temperature);
        cost += weights[k] * v;
        for (j, &b) in idx[k].iter().enumerate() {
            dcost[b] += weights[k] * d[j];
        }
    }
    if let Some(h) = hinge {
        for (b, (s, e)) in specs.iter().zip(&evals).enumerate() {
            if h.blocks[b] && e.margin < 0.0 {
                cost += h.weight * weights[s.user] * -e.margin;
                dcost[b] -= h.weight * weights[s.user];
            }
        }
    }
    let block_margins = evals.iter().map(|e| e.margin).collect();
    let mut out = Evaluation { cost, margins, block_margins, grad_w: None, grad_users: None, grad_eves: None };
    match grad {
        Grad::Beams => {
            let mut g = vec![CVec::zeros(n); beams.len()];
            for (b, e) in evals.iter().enumerate() {
                if dcost[b] == 0.0 {
                    continue;
                }
                for (gi, ei) in g.iter_mut().zip(e.grad_w.as_ref().unwrap()) {
                    *gi += ei * Complex64::from(dcost[b]);
                }
            }
            out.grad_w = Some(g);
        }
        Grad::Channel => {
            let zero = || (CVec::zeros(n), CMat::zeros(n, n));
            let mut gu: Vec<(CVec, CMat)> = (0..rx.users.len()).map(|_| zero()).collect();
            let mut ge: Vec<(CVec, CMat)> = (0..rx.eves.len()).map(|_| zero()).collect();
            for (b, (s, e)) in specs.iter().zip(&evals).enumerate() {
                if dcost[b] == 0.0 {
                    continue;
                }
                let (gh, gc) = e.grad_h.as_ref().unwrap();
                let slot = match s.receiver() {
                    Rx::User(k) => &mut gu[k],
                    Rx::Eve(j) => &mut ge[j],
                };
                slot.0 += gh * Complex64::from(dcost[b]);
                slot.1 += gc * Complex64::from(dcost[b]);
            }
            out.grad_users = Some(gu);
            out.grad_eves = Some(ge);
        }
        Grad::None => {}
    }
    out
}
