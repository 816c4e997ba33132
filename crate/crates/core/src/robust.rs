//! Bernstein-type deterministic surrogates of quadratic chance constraints.
//!
//! A constraint `Pr{ Z(dh) >= 0 } >= 1 - eps` with
//! `Z = dh^H A dh + 2 Re{b^H dh} + c` and `dh ~ CN(0, C)` is replaced by
//! `tr(AC) + c >= tau sqrt(2 ln(1/eps))`,
//! `tau = max(||C^{1/2} A C^{1/2}||_F, sqrt(2) ||C^{1/2} b||)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diagonal, hermitian_sqrt, is_hermitian, quad_form, re_trace_product, stack, CMat, CVec};
use crate::link::ImpairmentParams;
use crate::rng::{complex_normal, substream};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub a: CMat,
    pub b: CVec,
    pub c: f64,
    pub cov: CMat,
    pub epsilon: f64,
}

impl QuadraticForm {
    /// Always-satisfied form on an empty error vector.
    pub fn trivial(epsilon: f64) -> Self {
        QuadraticForm { a: CMat::zeros(0, 0), b: CVec::zeros(0), c: 1.0, cov: CMat::zeros(0, 0), epsilon }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(format!("violation probability must lie in (0,1), got {}", self.epsilon)));
        }
        let n = self.b.len();
        if self.a.shape() != (n, n) || self.cov.shape() != (n, n) {
            return Err(Error::param("quadratic form dimensions disagree"));
        }
        let scale = self.a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if !is_hermitian(&self.a, 1e-10 * scale) {
            return Err(Error::param("A is not Hermitian"));
        }
        Ok(())
    }

    /// `Z(dh)`.
    pub fn evaluate(&self, dh: &CVec) -> f64 {
        quad_form(&self.a, dh) + 2.0 * self.b.dotc(dh).re + self.c
    }

    pub fn scaled(&self, t: f64) -> Self {
        QuadraticForm {
            a: &self.a * Complex64::from(t),
            b: &self.b * Complex64::from(t),
            c: self.c * t,
            cov: self.cov.clone(),
            epsilon: self.epsilon,
        }
    }
}

/// The three deterministic conditions of one chance constraint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustBlock {
    /// `tr(AC) + c`.
    pub trace_term: f64,
    /// `||C^{1/2} A C^{1/2}||_F`.
    pub frobenius: f64,
    /// `||C^{1/2} b||`.
    pub norm: f64,
    /// Smallest admissible slack.
    pub tau: f64,
    pub epsilon: f64,
}

impl RobustBlock {
    pub fn kappa(&self) -> f64 {
        bernstein_kappa(self.epsilon)
    }

    /// `tr(AC) + c - tau sqrt(2 ln(1/eps))`; feasible iff non-negative.
    pub fn slack(&self) -> f64 {
        self.trace_term - self.tau * self.kappa()
    }

    pub fn is_feasible(&self) -> bool {
        self.slack() >= 0.0
    }

    /// Checks the three conditions for an explicit slack value.
    pub fn holds_with(&self, tau: f64) -> bool {
        self.trace_term >= tau * self.kappa() && self.frobenius <= tau && self.norm * 2f64.sqrt() <= tau
    }
}

pub fn bernstein_kappa(epsilon: f64) -> f64 {
    (2.0 * (1.0 / epsilon).ln()).sqrt()
}

/// Feasibility boundary `c >= sqrt(2 ln(1/eps)) - 1` of the scalar block
/// `A = 1, b = 0, C = 1`.
pub fn scalar_boundary(epsilon: f64) -> f64 {
    bernstein_kappa(epsilon) - 1.0
}

pub fn bernstein_block(q: &QuadraticForm) -> Result<RobustBlock> {
    q.validate()?;
    let ac = &q.a * &q.cov;
    let trace_term = (0..ac.nrows()).map(|i| ac[(i, i)].re).sum::<f64>() + q.c;
    // ||C^{1/2} A C^{1/2}||_F^2 = tr(ACAC) and ||C^{1/2} b||^2 = b^H C b.
    let frobenius = re_trace_product(&ac, &ac).max(0.0).sqrt();
    let norm = quad_form(&q.cov, &q.b).max(0.0).sqrt();
    Ok(RobustBlock { trace_term, frobenius, norm, tau: frobenius.max(2f64.sqrt() * norm), epsilon: q.epsilon })
}

/// Coefficients of a SINR-type quadratic `h^H A h + constant` with
/// `A = sum_i a_i w_i w_i^H + d_i diag(|w_i|^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrCoefficients {
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub constant: f64,
}

impl SinrCoefficients {
    /// `gamma_l >= gamma` for user `k`, with EVM distortion folded in
    /// exactly. `sigma2` is the noise-plus-jamming floor.
    pub fn legitimate(n_users: usize, k: usize, gamma: f64, sigma2: f64, imp: &ImpairmentParams) -> Self {
        let a = (0..n_users)
            .map(|i| if i == k { 1.0 - gamma * imp.kappa_r } else { -gamma * (1.0 + imp.kappa_r) })
            .collect();
        SinrCoefficients { a, d: vec![-gamma * imp.kappa_t; n_users], constant: -gamma * sigma2 }
    }

    /// `gamma_{k,e} <= gamma` for one eavesdropper.
    pub fn eavesdropper(n_users: usize, k: usize, gamma: f64, sigma2: f64, imp: &ImpairmentParams) -> Self {
        let a = (0..n_users)
            .map(|i| if i == k { gamma * imp.kappa_r - 1.0 } else { gamma * (1.0 + imp.kappa_r) })
            .collect();
        SinrCoefficients { a, d: vec![gamma * imp.kappa_t; n_users], constant: gamma * sigma2 }
    }

    pub fn matrix(&self, beams: &[CVec]) -> CMat {
        let n = beams.first().map_or(0, |w| w.len());
        let mut a = CMat::zeros(n, n);
        for (i, w) in beams.iter().enumerate() {
            if self.a[i] != 0.0 {
                a += (w * w.adjoint()) * Complex64::from(self.a[i]);
            }
            if self.d[i] != 0.0 {
                for j in 0..n {
                    a[(j, j)] += Complex64::from(self.d[i] * w[j].norm_sqr());
                }
            }
        }
        a
    }

    /// Form in the error `dh` around the estimate `h_hat`.
    pub fn form(&self, beams: &[CVec], h_hat: &CVec, cov: &CMat, epsilon: f64) -> QuadraticForm {
        let a = self.matrix(beams);
        let b = &a * h_hat;
        let c = h_hat.dotc(&b).re + self.constant;
        QuadraticForm { a, b, c, cov: cov.clone(), epsilon }
    }
}

/// QoS form for user `k`: `A = w_k w_k^H - gamma sum_{i != k} w_i w_i^H`
/// (plus distortion terms), `b = A h_hat`,
/// `c = h_hat^H A h_hat - gamma sigma_eff^2`.
#[allow(clippy::too_many_arguments)]
pub fn qos_quadratic(
    beams: &[CVec],
    k: usize,
    h_hat: &CVec,
    cov: &CMat,
    gamma: f64,
    sigma_eff2: f64,
    imp: &ImpairmentParams,
    epsilon: f64,
) -> Result<QuadraticForm> {
    if !(gamma >= 0.0) {
        return Err(Error::param("SINR threshold must be >= 0"));
    }
    Ok(SinrCoefficients::legitimate(beams.len(), k, gamma, sigma_eff2, imp).form(beams, h_hat, cov, epsilon))
}

/// One eavesdropper's constraint `gamma_{k,e} <= gamma_sec_e / |E|`.
pub struct EveInput<'a> {
    pub h_hat: &'a CVec,
    pub cov: &'a CMat,
    pub sigma2: f64,
}

/// Per-eavesdropper forms under the split `gamma_{k,e} <= gamma_sec_e/|E|`,
/// each at violation probability `epsilon/|E|`. Jointly they imply
/// `sum_e gamma_{k,e} <= gamma_sec_e` with probability `>= 1 - epsilon`.
pub fn eve_quadratics(
    beams: &[CVec],
    k: usize,
    eves: &[EveInput<'_>],
    gamma_sec_e: f64,
    imp: &ImpairmentParams,
    epsilon: f64,
) -> Result<Vec<QuadraticForm>> {
    if !(gamma_sec_e >= 0.0) {
        return Err(Error::param("eavesdropper threshold must be >= 0"));
    }
    let n = eves.len().max(1) as f64;
    Ok(eves
        .iter()
        .map(|e| SinrCoefficients::eavesdropper(beams.len(), k, gamma_sec_e / n, e.sigma2, imp).form(beams, e.h_hat, e.cov, epsilon / n))
        .collect())
}

/// Stacked block-diagonal form over all eavesdroppers' errors. An empty
/// set yields the trivially satisfied form.
pub fn eve_quadratic(
    beams: &[CVec],
    k: usize,
    eves: &[EveInput<'_>],
    gamma_sec_e: f64,
    imp: &ImpairmentParams,
    epsilon: f64,
) -> Result<QuadraticForm> {
    if eves.is_empty() {
        return Ok(QuadraticForm::trivial(epsilon));
    }
    let parts = eve_quadratics(beams, k, eves, gamma_sec_e, imp, epsilon)?;
    let a: Vec<CMat> = parts.iter().map(|p| p.a.clone()).collect();
    let b: Vec<CVec> = parts.iter().map(|p| p.b.clone()).collect();
    let cov: Vec<CMat> = parts.iter().map(|p| p.cov.clone()).collect();
    Ok(QuadraticForm {
        a: block_diagonal(&a),
        b: stack(&b),
        c: parts.iter().map(|p| p.c).sum(),
        cov: block_diagonal(&cov),
        epsilon,
    })
}

/// Conservative upper bound on `|h|^2` for `h = h_hat + dh`,
/// `dh ~ CN(0, var)`, exceeded with probability at most `p`.
pub fn gain_upper_bound(h_hat_gain: f64, var: f64, p: f64) -> f64 {
    let r = (var * (1.0 / p).ln()).sqrt();
    (h_hat_gain.sqrt() + r).powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyThresholds {
    pub gamma_l: f64,
    pub gamma_e: f64,
    pub eps_l: f64,
    pub eps_e: f64,
}

impl SecrecyThresholds {
    pub fn from_eve(r_sec_min: f64, gamma_e: f64, eps: f64) -> Self {
        SecrecyThresholds {
            gamma_l: 2f64.powf(r_sec_min) * (1.0 + gamma_e) - 1.0,
            gamma_e,
            eps_l: 0.5 * eps,
            eps_e: 0.5 * eps,
        }
    }

    pub fn log_gap(&self) -> f64 {
        (1.0 + self.gamma_l).log2() - (1.0 + self.gamma_e).log2()
    }
}

/// No threshold pair in the search interval keeps both blocks feasible;
/// `best` is the pair with the largest worst-side margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdInfeasible {
    pub best: SecrecyThresholds,
    pub margin: f64,
}

/// Picks the eavesdropper threshold in `[0, 2 gamma_e_hat]` that balances
/// the legitimate-side margin (at `gamma_l = 2^R (1 + gamma_e) - 1`) against
/// the eavesdropper-side margin. Margins are positive when feasible; the
/// eavesdropper margin must be non-decreasing and the legitimate margin
/// non-increasing in `gamma_e`.
pub fn choose_thresholds(
    r_sec_min: f64,
    eps: f64,
    gamma_e_hat: f64,
    legit_margin: impl Fn(f64, f64) -> f64,
    eve_margin: impl Fn(f64, f64) -> f64,
) -> Result<std::result::Result<SecrecyThresholds, ThresholdInfeasible>> {
    if !(r_sec_min >= 0.0) {
        return Err(Error::param("secrecy rate target must be >= 0"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("violation probability must lie in (0,1)"));
    }
    let at = |g: f64| {
        let t = SecrecyThresholds::from_eve(r_sec_min, g, eps);
        let (l, e) = (legit_margin(t.gamma_l, t.eps_l), eve_margin(t.gamma_e, t.eps_e));
        (t, l, e)
    };
    let hi0 = 2.0 * gamma_e_hat.max(0.0);
    let (mut lo, mut hi) = (0.0, hi0);
    let (_, l_hi, e_hi) = at(hi);
    let (_, l_lo, e_lo) = at(lo);
    let g = if e_hi - l_hi <= 0.0 {
        hi
    } else if e_lo - l_lo >= 0.0 {
        lo
    } else {
        while hi - lo > 1e-4 * hi {
            let mid = 0.5 * (lo + hi);
            let (_, l, e) = at(mid);
            if e - l < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Endpoint with the larger worst-side margin.
        let (_, l1, e1) = at(lo);
        let (_, l2, e2) = at(hi);
        if l1.min(e1) >= l2.min(e2) {
            lo
        } else {
            hi
        }
    };
    let (t, l, e) = at(g);
    let m = l.min(e);
    Ok(if m >= 0.0 { Ok(t) } else { Err(ThresholdInfeasible { best: t, margin: m }) })
}

/// Fraction of `n_samples` draws `dh ~ CN(0, C)` with `Z(dh) < 0`.
pub fn validate_block_mc(q: &QuadraticForm, n_samples: usize, seed: u64) -> Result<f64> {
    q.validate()?;
    if n_samples < 10_000 {
        return Err(Error::param("Monte-Carlo validation needs at least 10^4 samples"));
    }
    let root = hermitian_sqrt(&q.cov);
    let n = q.b.len();
    const CHUNK: usize = 4096;
    let chunks = n_samples.div_ceil(CHUNK);
    let violations: usize = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = substream(seed, &[ci as u64]);
            let count = CHUNK.min(n_samples - ci * CHUNK);
            let mut z = CVec::zeros(n);
            (0..count)
                .filter(|_| {
                    for x in z.iter_mut() {
                        *x = complex_normal(&mut rng, 1.0);
                    }
                    q.evaluate(&(&root * &z)) < 0.0
                })
                .count()
        })
        .sum();
    Ok(violations as f64 / n_samples as f64)
}
