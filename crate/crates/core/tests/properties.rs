use std::f64::consts::TAU;

use proptest::prelude::*;
use ris_secrecy::channel::{los_probability, pathloss_db, Environment, PathlossKind};
use ris_secrecy::link::{distortion_power, rate, secrecy_rate, sinr_colluding, sinr_eavesdropper, sinr_legitimate, ImpairmentParams};
use ris_secrecy::linalg::{CMat, CVec};
use ris_secrecy::optimizer::surrogate::{sca_lower_bound_signal, softplus, surrogate_cost};
use ris_secrecy::rng::derive_key;
use ris_secrecy::robust::{bernstein_block, bernstein_kappa, QuadraticForm};
use ris_secrecy::surfaces::{project_holo, project_star, project_uav, quantize_phase};
use ris_secrecy::Complex64;

fn cvec(n: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n).prop_map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

fn close(a: &CVec, b: &CVec) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

proptest! {
    #[test]
    fn star_projection_conserves_energy((t, r) in (1usize..64).prop_flat_map(|m| (cvec(m), cvec(m)))) {
        let s = project_star(&t, &r);
        prop_assert!(s.energy_error() <= 1e-12);
        let again = project_star(&s.transmission(), &s.reflection());
        prop_assert!(close(&again.transmission(), &s.transmission()));
        prop_assert!(close(&again.reflection(), &s.reflection()));
    }

    #[test]
    fn uav_projection_is_unit_modulus_and_idempotent(x in (1usize..64).prop_flat_map(cvec)) {
        let p = project_uav(&x);
        let c = p.coefficients();
        prop_assert!(c.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12));
        prop_assert!(close(&project_uav(&c).coefficients(), &c));
    }

    #[test]
    fn holo_projection_respects_amplitude_cap(x in (1usize..64).prop_flat_map(cvec), cap in 0.1..2.0f64) {
        let p = project_holo(&x, cap);
        prop_assert!(p.is_feasible());
        let c = p.coefficients();
        prop_assert!(close(&project_holo(&c, cap).coefficients(), &c));
        for (z, y) in x.iter().zip(c.iter()) {
            if z.norm() <= cap {
                prop_assert!((z - y).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn quantizer_lands_on_the_grid(phase in -20.0..20.0f64, bits in 1u32..6) {
        let step = TAU / (1u64 << bits) as f64;
        let q = quantize_phase(phase, bits);
        prop_assert!((0.0..TAU).contains(&q));
        prop_assert!(((q / step).round() * step - q).abs() <= 1e-9);
        prop_assert_eq!(quantize_phase(q, bits), q);
        let d = (phase - q).rem_euclid(TAU);
        prop_assert!(d.min(TAU - d) <= 0.5 * step + 1e-9);
    }

    #[test]
    fn sca_signal_bound_is_a_tangent_minorant((h, w, w0) in (1usize..9).prop_flat_map(|n| (cvec(n), cvec(n), cvec(n)))) {
        let exact = h.dotc(&w).norm_sqr();
        prop_assert!(sca_lower_bound_signal(&h, &w, &w0) <= exact + 1e-9 * (1.0 + exact));
        let at = h.dotc(&w0).norm_sqr();
        prop_assert!((sca_lower_bound_signal(&h, &w0, &w0) - at).abs() <= 1e-9 * (1.0 + at));
    }

    #[test]
    fn colluding_sinr_is_the_sum((beams, eves) in (1usize..6).prop_flat_map(|n| (prop::collection::vec(cvec(n), 1..4), prop::collection::vec(cvec(n), 1..4))), noise in 0.01..1.0f64) {
        let imp = ImpairmentParams { kappa_t: 0.01, kappa_r: 0.01, jam_power: 0.0 };
        let each: Vec<f64> = eves.iter().map(|h| sinr_eavesdropper(h, &beams, 0, noise, &imp)).collect();
        let total = sinr_colluding(&eves, &beams, 0, noise, &imp);
        prop_assert!((total - each.iter().sum::<f64>()).abs() <= 1e-12 * (1.0 + total));
        prop_assert!(each.iter().all(|g| *g <= total + 1e-15));
    }

    #[test]
    fn distortion_caps_the_sinr((h, beams) in (1usize..6).prop_flat_map(|n| (cvec(n), prop::collection::vec(cvec(n), 1..4))), kappa_r in 1e-3..0.2f64, scale_db in 0.0..150.0f64) {
        let imp = ImpairmentParams { kappa_t: 0.0, kappa_r, jam_power: 0.0 };
        let s = 10f64.powf(scale_db / 20.0);
        let big: Vec<_> = beams.iter().map(|w| w.scale(s)).collect();
        prop_assume!(h.dotc(&big[0]).norm_sqr() > 0.0);
        let g = sinr_legitimate(&h, &big, 0, 1e-6, &imp, &[]);
        prop_assert!(g <= (1.0 + 1e-12) / kappa_r);
        prop_assert!(distortion_power(&h, &big, &imp) >= 0.0);
    }

    #[test]
    fn secrecy_rate_is_clipped(gl in 0.0..1e4f64, ge in 0.0..1e4f64) {
        let s = secrecy_rate(gl, ge);
        prop_assert!(s >= 0.0 && s <= rate(gl));
        if gl > ge {
            prop_assert!((s - (rate(gl) - rate(ge))).abs() <= 1e-12);
        }
    }

    #[test]
    fn bernstein_slack_scales_linearly((a, b) in (1usize..6).prop_flat_map(|n| (cvec(n * n), cvec(n))), c in -5.0..5.0f64, t in 0.1..10.0f64, eps in 0.001..0.5f64) {
        let n = b.len();
        let g = CMat::from_column_slice(n, n, a.as_slice());
        let a = (&g + g.adjoint()) * Complex64::from(0.5);
        let q = QuadraticForm { a, b, c, cov: CMat::identity(n, n), epsilon: eps };
        let base = bernstein_block(&q).unwrap();
        let scaled = bernstein_block(&q.scaled(t)).unwrap();
        prop_assert!((scaled.slack() - t * base.slack()).abs() <= 1e-9 * (1.0 + t * base.slack().abs() + t * base.tau));
        prop_assert!(scaled.tau >= 0.0 && base.frobenius <= base.tau && base.norm * 2f64.sqrt() <= base.tau + 1e-12);
    }

    #[test]
    fn kappa_decreases_in_epsilon(e1 in 1e-4..0.99f64, e2 in 1e-4..0.99f64) {
        prop_assume!(e1 < e2);
        prop_assert!(bernstein_kappa(e1) > bernstein_kappa(e2));
    }

    #[test]
    fn pathloss_grows_with_distance(d in 10.0..1000.0f64, extra in 1.0..500.0f64, fc in 0.5..100.0f64) {
        for kind in [PathlossKind::UmiLos, PathlossKind::UmiNlos] {
            prop_assert!(pathloss_db(kind, d + extra, fc).unwrap() > pathloss_db(kind, d, fc).unwrap());
        }
        prop_assert!(pathloss_db(PathlossKind::UmiNlos, d, fc).unwrap() >= pathloss_db(PathlossKind::UmiLos, d, fc).unwrap());
    }

    #[test]
    fn los_probability_is_a_decreasing_probability(d in 0.0..2000.0f64, extra in 0.0..500.0f64) {
        for env in [Environment::Umi, Environment::Inh] {
            let p = los_probability(env, d);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(los_probability(env, d + extra) <= p + 1e-15);
        }
    }

    #[test]
    fn soft_min_cost_sandwiches_the_worst_margin(m in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 1..4), 1..5), temp in 0.01..1.0f64, bump in 0.0..0.5f64) {
        let k = m.len();
        let w = vec![1.0 / k as f64; k];
        let c = surrogate_cost(&m, &w, temp);
        let worst: f64 = m.iter().zip(&w).map(|(mk, wk)| wk * mk.iter().map(|x| (-x).max(0.0)).fold(0.0, f64::max) / temp).sum();
        let spread: f64 = m.iter().zip(&w).map(|(mk, wk)| wk * (1.0 + mk.len() as f64).ln()).sum();
        prop_assert!(c >= worst - 1e-12 && c <= worst + spread + 1e-12);
        let mut better = m.clone();
        better[0][0] += bump;
        prop_assert!(surrogate_cost(&better, &w, temp) <= c + 1e-12);
        prop_assert!((softplus(0.0) - 2f64.ln()).abs() <= 1e-15);
    }

    #[test]
    fn derived_keys_depend_on_every_component(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_eq!(derive_key(seed, &[a]), derive_key(seed, &[a]));
        prop_assert_ne!(derive_key(seed, &[a]), derive_key(seed, &[b]));
        prop_assert_ne!(derive_key(seed, &[a, b]), derive_key(seed, &[b, a]));
    }
}
