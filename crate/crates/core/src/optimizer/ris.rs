//! Surface block: relaxed coefficients over the convex hulls of the
//! feasibility sets with a linearized unit-modulus penalty, followed by
//! projection and quantization. Also hosts the grid local search used by
//! the AO+LS baseline.

use std::f64::consts::TAU;
use std::ops::Range;

use super::pg::{minimize, PgOptions};
use super::surrogate::{evaluate, BlockSpec, Grad, Receivers, SystemParams};
use super::BlockStatus;
use crate::channel::{LinkEnsemble, PathKind};
use crate::error::Result;
use crate::linalg::{CMat, CVec};
use crate::link::{Coefficients, Design};
use crate::scenario::{LinkId, Node};
use crate::surfaces::{project_holo, project_star, project_uav};
use crate::Complex64;

/// Positions of each active surface inside the stacked variable.
#[derive(Clone, Debug, Default)]
pub struct Layout {
    pub uav: Option<Range<usize>>,
    pub t: Option<Range<usize>>,
    pub r: Option<Range<usize>>,
    pub holo: Option<Range<usize>>,
    pub len: usize,
    pub alpha_max: f64,
}

impl Layout {
    pub fn of(design: &Design) -> Self {
        let mut l = Layout { alpha_max: design.hris.alpha_max, ..Default::default() };
        let mut take = |n: usize, on: bool| {
            on.then(|| {
                let r = l.len..l.len + n;
                l.len += n;
                r
            })
        };
        let s = design.surfaces;
        let uav = take(design.uav_ris.len(), s.uav);
        let t = take(design.star.len(), s.star);
        let r = take(design.star.len(), s.star);
        let holo = take(design.hris.len(), s.star && s.holo);
        Layout { uav, t, r, holo, ..l }
    }

    pub fn pack(&self, c: &Coefficients) -> CVec {
        let mut x = CVec::zeros(self.len);
        for (range, v) in [(&self.uav, &c.uav), (&self.t, &c.t), (&self.r, &c.r), (&self.holo, &c.holo)] {
            if let Some(range) = range {
                x.rows_mut(range.start, range.len()).copy_from(v);
            }
        }
        x
    }

    pub fn unpack(&self, x: &CVec, design: &Design) -> Coefficients {
        let get = |range: &Option<Range<usize>>, n: usize| match range {
            Some(r) => x.rows(r.start, r.len()).into_owned(),
            None => CVec::zeros(n),
        };
        Coefficients {
            uav: get(&self.uav, design.uav_ris.len()),
            t: get(&self.t, design.star.len()),
            r: get(&self.r, design.star.len()),
            holo: get(&self.holo, design.hris.len()),
        }
    }

    /// Projection onto the relaxed sets.
    pub fn project(&self, x: &mut CVec) {
        if let Some(r) = &self.uav {
            for i in r.clone() {
                let a = x[i].norm();
                if a > 1.0 {
                    x[i] /= a;
                }
            }
        }
        if let (Some(t), Some(r)) = (&self.t, &self.r) {
            for (i, j) in t.clone().zip(r.clone()) {
                let e = x[i].norm_sqr() + x[j].norm_sqr();
                if e > 1.0 {
                    let s = e.sqrt();
                    x[i] /= s;
                    x[j] /= s;
                }
            }
        }
        if let Some(r) = &self.holo {
            for i in r.clone() {
                let a = x[i].norm();
                if a > self.alpha_max {
                    x[i] *= self.alpha_max / a;
                }
            }
        }
    }

    /// `sum (1 - Re{x_ref^* x})` over the unit-modulus (UAV) and
    /// energy-conserving (STAR) entries, with its gradient.
    fn dc_penalty(&self, x: &CVec, x_ref: &CVec) -> (f64, CVec) {
        let mut v = 0.0;
        let mut g = CVec::zeros(x.len());
        let mut add = |range: &Range<usize>, count: bool| {
            for i in range.clone() {
                v += if count { 1.0 } else { 0.0 } - (x_ref[i].conj() * x[i]).re;
                g[i] = -x_ref[i] * 0.5;
            }
        };
        if let Some(r) = &self.uav {
            add(r, true);
        }
        if let Some(r) = &self.t {
            add(r, true);
        }
        if let Some(r) = &self.r {
            add(r, false);
        }
        (v, g)
    }
}

/// Gradient of a real function of the effective estimate through one
/// cascaded term `h = G^H (conj(theta) .* v)` with error covariance
/// `M C_p M^H`, `M = G^H diag(conj(theta))`. Adds `df/dconj(theta)` to `out`.
fn chain(g: &CMat, theta: &CVec, v: &CVec, cp: &CMat, gh: &CVec, gc: &CMat, out: &mut [Complex64]) {
    let ggh = g * gh;
    for m in 0..theta.len() {
        out[m] += ggh[m].conj() * v[m];
    }
    if cp.nrows() == 0 {
        return;
    }
    let m_len = theta.len();
    let is_diag = (0..m_len).all(|i| (0..m_len).all(|j| i == j || cp[(i, j)] == Complex64::from(0.0)));
    let gg = g * gc;
    if is_diag {
        for m in 0..m_len {
            let p_mm = gg.row(m).dot(&g.row(m).map(|z| z.conj()));
            out[m] += cp[(m, m)] * theta[m] * p_mm;
        }
    } else {
        let p = &gg * g.adjoint();
        for m in 0..m_len {
            let mut acc = Complex64::from(0.0);
            for j in 0..m_len {
                acc += cp[(m, j)] * theta[j] * p[(j, m)];
            }
            out[m] += acc;
        }
    }
}

/// Accumulates `df/dconj(x)` for the stacked surface variable given the
/// per-receiver sensitivities `(g_h, G_C)`.
pub(crate) fn coefficient_gradient(
    ens: &LinkEnsemble,
    layout: &Layout,
    c: &Coefficients,
    rx: Node,
    gh: &CVec,
    gc: &CMat,
    out: &mut CVec,
) -> Result<()> {
    let slice = |out: &mut CVec, r: &Range<usize>| -> Vec<Complex64> { out.rows(r.start, r.len()).iter().copied().collect() };
    let store = |out: &mut CVec, r: &Range<usize>, v: Vec<Complex64>| {
        for (i, z) in r.clone().zip(v) {
            out[i] = z;
        }
    };
    for path in ens.paths_of(rx) {
        match path {
            PathKind::Direct => {}
            PathKind::Uav => {
                if let Some(r) = &layout.uav {
                    let g = &ens.link(LinkId::new(Node::Bs, Node::Uav))?.channel;
                    let last = ens.link(LinkId::new(Node::Uav, rx))?;
                    let mut acc = slice(out, r);
                    chain(g, &c.uav, &last.h_hat(), &last.error_cov, gh, gc, &mut acc);
                    store(out, r, acc);
                }
            }
            PathKind::StarT | PathKind::StarR => {
                let range = if *path == PathKind::StarT { &layout.t } else { &layout.r };
                let theta = if *path == PathKind::StarT { &c.t } else { &c.r };
                if let Some(r) = range {
                    let g = &ens.link(LinkId::new(Node::Bs, Node::Star))?.channel;
                    let last = ens.link(LinkId::new(Node::Star, rx))?;
                    let mut acc = slice(out, r);
                    chain(g, theta, &last.h_hat(), &last.error_cov, gh, gc, &mut acc);
                    store(out, r, acc);
                }
            }
            PathKind::Holo => {
                let g_s = &ens.link(LinkId::new(Node::Bs, Node::Star))?.channel;
                let g_sh = &ens.link(LinkId::new(Node::Star, Node::Holo))?.channel;
                let last = ens.link(LinkId::new(Node::Holo, rx))?;
                let v = last.h_hat();
                if let Some(r) = &layout.t {
                    // Holo term as a STAR-transmission cascade of q.
                    let eta_conj = CMat::from_diagonal(&c.holo.map(|z| z.conj()));
                    let x = g_sh.adjoint() * &eta_conj;
                    let q = &x * &v;
                    let cq = if last.error_cov.nrows() > 0 { &x * &last.error_cov * x.adjoint() } else { CMat::zeros(0, 0) };
                    let mut acc = slice(out, r);
                    chain(g_s, &c.t, &q, &cq, gh, gc, &mut acc);
                    store(out, r, acc);
                }
                if let Some(r) = &layout.holo {
                    let g_eff = g_sh * CMat::from_diagonal(&c.t) * g_s;
                    let mut acc = slice(out, r);
                    chain(&g_eff, &c.holo, &v, &last.error_cov, gh, gc, &mut acc);
                    store(out, r, acc);
                }
            }
        }
    }
    Ok(())
}

/// Cost of relaxed coefficients `x` (without penalty), optionally with its
/// gradient.
pub(crate) struct RisObjective<'a> {
    pub ens: &'a LinkEnsemble,
    pub design: &'a Design,
    pub layout: &'a Layout,
    pub params: &'a SystemParams,
    pub specs: &'a [BlockSpec],
    pub temperature: f64,
}

impl RisObjective<'_> {
    pub fn value(&self, x: &CVec) -> Result<f64> {
        let c = self.layout.unpack(x, self.design);
        let rx = Receivers::build(self.ens, &c, self.params)?;
        Ok(evaluate(self.specs, &self.design.beamformers, &rx, &self.params.weights, self.temperature, None, Grad::None, None).cost)
    }

    pub fn value_grad(&self, x: &CVec) -> Result<(f64, CVec)> {
        let c = self.layout.unpack(x, self.design);
        let rx = Receivers::build(self.ens, &c, self.params)?;
        let e = evaluate(self.specs, &self.design.beamformers, &rx, &self.params.weights, self.temperature, None, Grad::Channel, None);
        let mut g = CVec::zeros(x.len());
        for (k, (gh, gc)) in e.grad_users.unwrap().iter().enumerate() {
            coefficient_gradient(self.ens, self.layout, &c, Node::User(k), gh, gc, &mut g)?;
        }
        for (j, (gh, gc)) in e.grad_eves.unwrap().iter().enumerate() {
            coefficient_gradient(self.ens, self.layout, &c, Node::Eve(j), gh, gc, &mut g)?;
        }
        Ok((e.cost, g))
    }
}

/// Projects relaxed coefficients to the feasible (and, with `bits`,
/// quantized) configurations.
pub fn realize(layout: &Layout, x: &CVec, design: &Design, bits: Option<u32>) -> Design {
    let c = layout.unpack(x, design);
    let mut out = design.clone();
    if layout.uav.is_some() {
        out.uav_ris = project_uav(&c.uav);
    }
    if layout.t.is_some() {
        out.star = project_star(&c.t, &c.r);
    }
    if layout.holo.is_some() {
        out.hris = project_holo(&c.holo, design.hris.alpha_max);
    }
    if let Some(b) = bits {
        if layout.uav.is_some() {
            out.uav_ris = out.uav_ris.quantized(b);
        }
        if layout.t.is_some() {
            out.star = out.star.quantized(b);
        }
        if layout.holo.is_some() {
            out.hris = out.hris.quantized(b);
        }
    }
    out
}

pub struct RisInput<'a> {
    pub ens: &'a LinkEnsemble,
    pub params: &'a SystemParams,
    pub specs: &'a [BlockSpec],
    pub temperature: f64,
    pub target_specs: &'a [BlockSpec],
    pub target_temperature: f64,
    pub mu: f64,
    pub bits: Option<u32>,
    pub inner: PgOptions,
}

#[derive(Clone, Debug)]
pub struct RisOutcome {
    pub design: Design,
    pub status: BlockStatus,
    pub cost: f64,
    /// Distance moved by the relaxed (penalized) solution.
    pub relaxed_step: f64,
    /// Distance between the accepted and previous coefficients.
    pub step_norm: f64,
}

/// Minimizer of `cost + mu * penalty` over the relaxed sets from `design`.
pub fn relaxed_solution(
    ens: &LinkEnsemble,
    design: &Design,
    params: &SystemParams,
    specs: &[BlockSpec],
    temperature: f64,
    mu: f64,
    inner: &PgOptions,
) -> Result<(Layout, CVec, CVec)> {
    let layout = Layout::of(design);
    let x_ref = layout.pack(&design.coefficients());
    let obj = RisObjective { ens, design, layout: &layout, params, specs, temperature };
    let err = std::cell::Cell::new(None);
    let value = |x: &CVec| match obj.value(x) {
        Ok(v) => v + mu * layout.dc_penalty(x, &x_ref).0,
        Err(e) => {
            err.set(Some(e));
            f64::INFINITY
        }
    };
    let value_grad = |x: &CVec| match obj.value_grad(x) {
        Ok((v, g)) => {
            let (pv, pg) = layout.dc_penalty(x, &x_ref);
            (v + mu * pv, g + pg * Complex64::from(mu))
        }
        Err(e) => {
            err.set(Some(e));
            (f64::INFINITY, CVec::zeros(x.len()))
        }
    };
    let res = minimize(&x_ref, value, value_grad, |x| layout.project(x), inner);
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok((layout, x_ref, res.x))
}

fn coefficient_distance(a: &Design, b: &Design) -> f64 {
    let (x, y) = (a.coefficients(), b.coefficients());
    ((&x.uav - &y.uav).norm_squared() + (&x.t - &y.t).norm_squared() + (&x.r - &y.r).norm_squared() + (&x.holo - &y.holo).norm_squared()).sqrt()
}

pub(crate) fn design_cost(ens: &LinkEnsemble, design: &Design, params: &SystemParams, specs: &[BlockSpec], t: f64) -> Result<f64> {
    let rx = Receivers::build(ens, &design.coefficients(), params)?;
    Ok(evaluate(specs, &design.beamformers, &rx, &params.weights, t, None, Grad::None, None).cost)
}

/// One surface update. Accepted only if the projected, quantized design
/// does not increase the target cost.
pub fn solve_ris_block(input: &RisInput<'_>, design: &Design) -> Result<RisOutcome> {
    let cost0 = design_cost(input.ens, design, input.params, input.target_specs, input.target_temperature)?;
    let skipped = |relaxed_step| RisOutcome { design: design.clone(), status: BlockStatus::Skipped, cost: cost0, relaxed_step, step_norm: 0.0 };
    if Layout::of(design).len == 0 {
        return Ok(skipped(0.0));
    }
    let mut models = vec![(input.specs, input.temperature)];
    if !std::ptr::eq(input.specs, input.target_specs) || input.temperature != input.target_temperature {
        models.push((input.target_specs, input.target_temperature));
    }
    let mut relaxed_step = 0.0;
    for (specs, t) in models {
        let Ok((layout, x_ref, x)) = relaxed_solution(input.ens, design, input.params, specs, t, input.mu, &input.inner) else {
            return Ok(skipped(0.0));
        };
        relaxed_step = (&x - &x_ref).norm();
        let cand = realize(&layout, &x, design, input.bits);
        let c = design_cost(input.ens, &cand, input.params, input.target_specs, input.target_temperature)?;
        if c <= cost0 {
            let step_norm = coefficient_distance(&cand, design);
            return Ok(RisOutcome { design: cand, status: BlockStatus::Accepted, cost: c, relaxed_step, step_norm });
        }
    }
    Ok(RisOutcome { design: design.clone(), status: BlockStatus::Rejected, cost: cost0, relaxed_step, step_norm: 0.0 })
}

/// One coordinate pass over the quantized phase grid (`2^bits` levels):
/// each element phase in turn is set to the level with the lowest cost.
pub fn local_search_pass(
    ens: &LinkEnsemble,
    design: &Design,
    params: &SystemParams,
    specs: &[BlockSpec],
    t: f64,
    bits: u32,
) -> Result<RisOutcome> {
    let levels: Vec<f64> = (0..1u32 << bits).map(|i| TAU * i as f64 / (1u64 << bits) as f64).collect();
    let mut best = design.clone();
    let cost0 = design_cost(ens, design, params, specs, t)?;
    let mut best_cost = cost0;
    let s = design.surfaces;
    // (surface, element) coordinates: 0 UAV, 1 STAR-T, 2 STAR-R, 3 H-RIS.
    let mut coords = Vec::new();
    if s.uav {
        coords.extend((0..design.uav_ris.len()).map(|m| (0, m)));
    }
    if s.star {
        coords.extend((0..design.star.len()).map(|m| (1, m)));
        coords.extend((0..design.star.len()).map(|m| (2, m)));
        if s.holo {
            coords.extend((0..design.hris.len()).map(|m| (3, m)));
        }
    }
    for (surface, m) in coords {
        for &phase in &levels {
            let mut cand = best.clone();
            let slot = match surface {
                0 => &mut cand.uav_ris.phases[m],
                1 => &mut cand.star.theta_t[m],
                2 => &mut cand.star.theta_r[m],
                _ => &mut cand.hris.theta[m],
            };
            if *slot == phase {
                continue;
            }
            *slot = phase;
            let c = design_cost(ens, &cand, params, specs, t)?;
            if c < best_cost {
                best_cost = c;
                best = cand;
            }
        }
    }
    let step_norm = coefficient_distance(&best, design);
    let status = if step_norm > 0.0 { BlockStatus::Accepted } else { BlockStatus::Rejected };
    Ok(RisOutcome { design: best, status, cost: best_cost, relaxed_step: 0.0, step_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayDims, PathKind};
    use crate::linalg::CMat;
    use crate::optimizer::surrogate::{block_specs, ModelParams};
    use crate::optimizer::testutil::{ensemble, fixed_link, params, scalar, uav_design, zero_thresholds};
    use crate::rng::{complex_normal, substream};
    use crate::scenario::Position;

    fn toy(n: usize, m: usize, seed: u64, with_error: bool) -> (LinkEnsemble, Design) {
        let mut rng = substream(seed, &[]);
        let mut rnd = |r, c| CMat::from_fn(r, c, |_, _| complex_normal(&mut rng, 1.0));
        let dims = ArrayDims { bs: n, uav: m, star: 0, holo: 0 };
        let mut direct = fixed_link(Node::Bs, Node::User(0), rnd(1, n));
        let g = fixed_link(Node::Bs, Node::Uav, rnd(m, n));
        let mut v = fixed_link(Node::Uav, Node::User(0), rnd(1, m));
        if with_error {
            direct.error_cov = CMat::identity(n, n) * Complex64::from(0.05);
            v.error_cov = CMat::identity(m, m) * Complex64::from(0.02);
        }
        let ens = ensemble(dims, 1, vec![direct, g, v], vec![(Node::User(0), vec![PathKind::Direct, PathKind::Uav])], 1.0);
        let mut rng = substream(seed, &[1]);
        let w = CVec::from_fn(n, |_, _| complex_normal(&mut rng, 0.5));
        let phases = (0..m).map(|i| 0.7 * i as f64).collect();
        (ens.clone(), uav_design(dims, vec![w], phases, ens.uav_position))
    }

    fn specs_for(ens: &LinkEnsemble, d: &Design, p: &SystemParams) -> Vec<BlockSpec> {
        let rx = Receivers::build(ens, &d.coefficients(), p).unwrap();
        block_specs(1, 0, &zero_thresholds(1), &rx.user_floor, rx.eve_floor, p, &ModelParams::target(0.1))
    }

    #[test]
    fn coefficient_gradient_matches_finite_differences() {
        let (ens, d) = toy(2, 3, 5, true);
        let p = params(1, 1.0, 1.0);
        let specs = specs_for(&ens, &d, &p);
        let layout = Layout::of(&d);
        let obj = RisObjective { ens: &ens, design: &d, layout: &layout, params: &p, specs: &specs, temperature: 0.1 };
        let x = layout.pack(&d.coefficients()) * Complex64::from(0.8);
        let (_, g) = obj.value_grad(&x).unwrap();
        let h = 1e-6;
        for i in 0..x.len() {
            for (dir, part) in [(Complex64::new(h, 0.0), g[i].re), (Complex64::new(0.0, h), g[i].im)] {
                let mut xp = x.clone();
                xp[i] += dir;
                let mut xm = x.clone();
                xm[i] -= dir;
                let fd = (obj.value(&xp).unwrap() - obj.value(&xm).unwrap()) / (2.0 * h);
                assert!((fd - 2.0 * part).abs() < 1e-6 * (1.0 + fd.abs()), "{i}: fd {fd} vs {}", 2.0 * part);
            }
        }
    }

    #[test]
    fn single_element_aligns_cascade_with_direct_path() {
        let hd = Complex64::from_polar(1.0, 0.3);
        let g = Complex64::from_polar(0.8, 1.1);
        let v = Complex64::from_polar(0.6, -0.4);
        let dims = ArrayDims { bs: 1, uav: 1, star: 0, holo: 0 };
        let ens = ensemble(
            dims,
            1,
            vec![fixed_link(Node::Bs, Node::User(0), scalar(hd.conj())), fixed_link(Node::Bs, Node::Uav, scalar(g)), fixed_link(Node::Uav, Node::User(0), scalar(v.conj()))],
            vec![(Node::User(0), vec![PathKind::Direct, PathKind::Uav])],
            2.0,
        );
        let d = uav_design(dims, vec![CVec::from_element(1, Complex64::from(1.0))], vec![0.0], Position::new(0.0, 0.0, 80.0));
        let p = params(1, 1.0, 1.0);
        let specs = specs_for(&ens, &d, &p);
        let inp = RisInput { ens: &ens, params: &p, specs: &specs, temperature: 0.1, target_specs: &specs, target_temperature: 0.1, mu: 0.1, bits: None, inner: PgOptions::default() };
        let mut design = d;
        for _ in 0..10 {
            design = solve_ris_block(&inp, &design).unwrap().design;
        }
        // h = h_d + conj(g) conj(theta) v: aligned when arg(theta) = arg(conj(g) v) - arg(h_d).
        let want = (g.conj() * v).arg() - hd.arg();
        let got = design.uav_ris.phases[0];
        let err = (got - want).sin().atan2((got - want).cos()).abs();
        assert!(err < 1e-3, "phase error {err}");
        let h = crate::link::effective_channel(&ens, &design, Node::User(0)).unwrap();
        assert!((h[0].norm() - (hd.norm() + g.norm() * v.norm())).abs() < 1e-6);
    }

    #[test]
    fn large_penalty_keeps_unit_modulus() {
        let (ens, d) = toy(2, 4, 9, false);
        let p = params(1, 1.0, 1.0);
        let specs = specs_for(&ens, &d, &p);
        let (_, _, x) = relaxed_solution(&ens, &d, &p, &specs, 0.1, 1e6, &PgOptions::default()).unwrap();
        assert!(x.iter().all(|z| (z.norm() - 1.0).abs() < 1e-3));
    }

    #[test]
    fn unit_modulus_relaxation_is_left_unchanged() {
        let (_, d) = toy(2, 4, 9, false);
        let layout = Layout::of(&d);
        let x = layout.pack(&d.coefficients());
        let mut y = x.clone();
        layout.project(&mut y);
        assert_eq!(x, y);
        let out = realize(&layout, &x, &d, None);
        assert!((out.uav_ris.coefficients() - d.uav_ris.coefficients()).norm() < 1e-12);
    }
}
