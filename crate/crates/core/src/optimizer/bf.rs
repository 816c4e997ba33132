//! Beamforming block: SCA majorizer of the outage surrogate minimized over
//! the power ball, with blocks that are feasible at the linearization point
//! kept as hard constraints.

use super::pg::{minimize, PgOptions};
use super::surrogate::{evaluate, BlockSpec, Grad, Hinge, Receivers};
use super::{flatten, unflatten, BlockStatus};
use crate::linalg::CVec;
use crate::Complex64;

pub struct BfInput<'a> {
    pub rx: &'a Receivers,
    /// Working model blocks and temperature.
    pub specs: &'a [BlockSpec],
    pub temperature: f64,
    /// Target model used for acceptance.
    pub target_specs: &'a [BlockSpec],
    pub target_temperature: f64,
    pub weights: &'a [f64],
    pub p_max: f64,
    pub restoration_weight: f64,
    pub inner: PgOptions,
}

#[derive(Clone, Debug)]
pub struct BfOutcome {
    pub beams: Vec<CVec>,
    pub status: BlockStatus,
    /// Target surrogate cost after the block.
    pub cost: f64,
    pub step_norm: f64,
    /// `|majorizer - surrogate|` at the linearization point.
    pub tangency_error: f64,
}

pub(crate) fn project_power(x: &mut CVec, p_max: f64) {
    let e = x.norm_squared();
    if e > p_max {
        let s = if p_max > 0.0 { (p_max / e).sqrt() } else { 0.0 };
        *x *= Complex64::from(s);
    }
}

struct Sub {
    beams: Vec<CVec>,
    restoration: bool,
    tangency: f64,
}

fn sca_step(input: &BfInput<'_>, specs: &[BlockSpec], t: f64, beams_ref: &[CVec], allow_hinge: bool) -> Sub {
    let rx = input.rx;
    let k = beams_ref.len();
    let n = beams_ref.first().map_or(0, |w| w.len());
    let lin = beams_ref;
    let at_ref = evaluate(specs, beams_ref, rx, input.weights, t, Some(lin), Grad::None, None);
    let exact = evaluate(specs, beams_ref, rx, input.weights, t, None, Grad::None, None);
    let tangency = (at_ref.cost - exact.cost).abs();
    let hard: Vec<bool> = at_ref.block_margins.iter().map(|m| *m >= 0.0).collect();
    let soft: Vec<bool> = hard.iter().map(|h| !h).collect();
    let restoration = allow_hinge && soft.iter().any(|s| *s);
    let hinge = Hinge { weight: input.restoration_weight, blocks: &soft };
    let hinge = restoration.then_some(&hinge);

    let value = |x: &CVec| {
        let w = unflatten(x, k, n);
        let e = evaluate(specs, &w, rx, input.weights, t, Some(lin), Grad::None, hinge);
        if e.block_margins.iter().zip(&hard).any(|(m, h)| *h && *m < 0.0) {
            f64::INFINITY
        } else {
            e.cost
        }
    };
    let value_grad = |x: &CVec| {
        let w = unflatten(x, k, n);
        let e = evaluate(specs, &w, rx, input.weights, t, Some(lin), Grad::Beams, hinge);
        (e.cost, flatten(&e.grad_w.unwrap()))
    };
    let p_max = input.p_max;
    let res = minimize(&flatten(beams_ref), value, value_grad, |x| project_power(x, p_max), &input.inner);
    Sub { beams: unflatten(&res.x, k, n), restoration, tangency }
}

fn target_cost(input: &BfInput<'_>, beams: &[CVec]) -> f64 {
    evaluate(input.target_specs, beams, input.rx, input.weights, input.target_temperature, None, Grad::None, None).cost
}

fn step_norm(a: &[CVec], b: &[CVec]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum::<f64>().sqrt()
}

/// One beamforming update from `beams_ref`. The result never increases the
/// target surrogate cost: a working-model step that would is replaced by a
/// pure majorize-minimize step on the target model, and failing that the
/// block is skipped.
pub fn solve_bf_block(input: &BfInput<'_>, beams_ref: &[CVec]) -> BfOutcome {
    let mut start = beams_ref.to_vec();
    let mut start_cost = target_cost(input, beams_ref);
    let mut projected = false;
    // Start from a power-feasible point.
    if beams_ref.iter().map(|w| w.norm_squared()).sum::<f64>() > input.p_max {
        let k = beams_ref.len();
        let n = beams_ref.first().map_or(0, |w| w.len());
        let mut x = flatten(beams_ref);
        project_power(&mut x, input.p_max);
        start = unflatten(&x, k, n);
        start_cost = target_cost(input, &start);
        projected = true;
    }
    let same_model = std::ptr::eq(input.specs, input.target_specs) && input.temperature == input.target_temperature;
    let first = sca_step(input, input.specs, input.temperature, &start, true);
    let tangency = first.tangency;
    let c1 = target_cost(input, &first.beams);
    if c1 <= start_cost {
        let status = if first.restoration { BlockStatus::Restoration } else { BlockStatus::Accepted };
        return BfOutcome { step_norm: step_norm(&first.beams, beams_ref), beams: first.beams, status, cost: c1, tangency_error: tangency };
    }
    if !same_model || first.restoration {
        let second = sca_step(input, input.target_specs, input.target_temperature, &start, false);
        let c2 = target_cost(input, &second.beams);
        if c2 <= start_cost {
            return BfOutcome {
                step_norm: step_norm(&second.beams, beams_ref),
                beams: second.beams,
                status: BlockStatus::Accepted,
                cost: c2,
                tangency_error: tangency.max(second.tangency),
            };
        }
    }
    let status = if projected { BlockStatus::Accepted } else { BlockStatus::Rejected };
    BfOutcome { step_norm: step_norm(&start, beams_ref), beams: start, status, cost: start_cost, tangency_error: tangency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use crate::link::EffectiveEstimate;
    use crate::optimizer::surrogate::{block_specs, ModelParams, SystemParams};
    use crate::optimizer::testutil::{params, zero_thresholds};
    use crate::rng::{complex_normal, substream};

    fn single_user(h: CVec, floor: f64) -> Receivers {
        let n = h.len();
        Receivers { users: vec![EffectiveEstimate { h_hat: h, cov: CMat::zeros(n, n) }], eves: Vec::new(), user_floor: vec![floor], eve_floor: floor }
    }

    fn input<'a>(rx: &'a Receivers, specs: &'a [BlockSpec], weights: &'a [f64], p_max: f64) -> BfInput<'a> {
        BfInput {
            rx,
            specs,
            temperature: 0.1,
            target_specs: specs,
            target_temperature: 0.1,
            weights,
            p_max,
            restoration_weight: 1e3,
            inner: PgOptions::default(),
        }
    }

    fn setup(p_max: f64, r_qos: f64) -> (Receivers, Vec<BlockSpec>, SystemParams) {
        let mut rng = substream(21, &[]);
        let h = CVec::from_fn(4, |_, _| complex_normal(&mut rng, 1.0));
        let p = params(1, p_max, r_qos);
        let rx = single_user(h, 1.0);
        let specs = block_specs(1, 0, &zero_thresholds(1), &rx.user_floor, rx.eve_floor, &p, &ModelParams::target(0.1));
        (rx, specs, p)
    }

    #[test]
    fn single_user_converges_to_mrt() {
        let (rx, specs, p) = setup(1.0, 0.2);
        let inp = input(&rx, &specs, &p.weights, p.p_max);
        let mut w = vec![CVec::from_element(4, Complex64::new(0.1, 0.0))];
        for _ in 0..30 {
            w = solve_bf_block(&inp, &w).beams;
        }
        let h = &rx.users[0].h_hat;
        let cos = h.dotc(&w[0]).norm() / (h.norm() * w[0].norm());
        let angle = cos.min(1.0).acos();
        assert!(angle < 1e-4, "angle {angle}");
        assert!((w[0].norm_squared() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_power_gives_zero_beams() {
        let (rx, specs, p) = setup(0.0, 0.2);
        let inp = input(&rx, &specs, &p.weights, 0.0);
        let out = solve_bf_block(&inp, &[CVec::from_element(4, Complex64::new(1.0, 0.0))]);
        assert_eq!(out.beams[0].norm(), 0.0);
        // Feasible only with zero thresholds.
        let m = evaluate(&specs, &out.beams, &rx, &p.weights, 0.1, None, Grad::None, None).block_margins;
        assert!(m[0] < 0.0);
        let (rx0, specs0, p0) = setup(0.0, 0.0);
        let m0 = evaluate(&specs0, &out.beams, &rx0, &p0.weights, 0.1, None, Grad::None, None).block_margins;
        assert!(m0.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn resolve_from_own_solution_is_a_fixed_point() {
        let (rx, specs, p) = setup(1.0, 1.0);
        let inp = input(&rx, &specs, &p.weights, p.p_max);
        let mut w = vec![CVec::from_element(4, Complex64::new(0.3, 0.1))];
        let mut cost = f64::INFINITY;
        for _ in 0..30 {
            let out = solve_bf_block(&inp, &w);
            assert!(out.cost <= cost + 1e-12);
            cost = out.cost;
            w = out.beams;
        }
        let again = solve_bf_block(&inp, &w);
        assert!(cost - again.cost <= 1e-6);
        assert!(again.tangency_error <= 1e-8);
    }
}
