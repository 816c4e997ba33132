//! Reconfigurable-surface parameterizations, quantization and feasibility
//! projections.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::Complex64;

/// UAV-mounted RIS: unit-modulus reflection coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavRisConfig {
    pub phases: Vec<f64>,
}

/// STAR-RIS in independent-phase mode: `t = rho e^{j theta_t}`,
/// `r = sqrt(1 - rho^2) e^{j theta_r}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarRisConfig {
    pub rho: Vec<f64>,
    pub theta_t: Vec<f64>,
    pub theta_r: Vec<f64>,
}

/// Holographic RIS with amplitude control up to `alpha_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoloRisConfig {
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    pub alpha_max: f64,
}

impl UavRisConfig {
    pub fn identity(m: usize) -> Self {
        UavRisConfig { phases: vec![0.0; m] }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, bits: Option<u32>, rng: &mut R) -> Self {
        UavRisConfig { phases: random_phases(m, bits, rng) }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn coefficients(&self) -> CVec {
        CVec::from_iterator(self.phases.len(), self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)))
    }

    pub fn quantized(&self, bits: u32) -> Self {
        UavRisConfig { phases: quantize_phases(&self.phases, bits) }
    }
}

impl StarRisConfig {
    /// Equal energy split with zero phases.
    pub fn balanced(m: usize) -> Self {
        StarRisConfig { rho: vec![FRAC_1_SQRT_2; m], theta_t: vec![0.0; m], theta_r: vec![0.0; m] }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, bits: Option<u32>, rng: &mut R) -> Self {
        StarRisConfig {
            rho: vec![FRAC_1_SQRT_2; m],
            theta_t: random_phases(m, bits, rng),
            theta_r: random_phases(m, bits, rng),
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn transmission(&self) -> CVec {
        CVec::from_iterator(self.len(), self.rho.iter().zip(&self.theta_t).map(|(&a, &p)| Complex64::from_polar(a, p)))
    }

    pub fn reflection(&self) -> CVec {
        CVec::from_iterator(
            self.len(),
            self.rho.iter().zip(&self.theta_r).map(|(&a, &p)| Complex64::from_polar((1.0 - a * a).max(0.0).sqrt(), p)),
        )
    }

    /// Largest deviation of `|t|^2 + |r|^2` from one.
    pub fn energy_error(&self) -> f64 {
        let (t, r) = (self.transmission(), self.reflection());
        t.iter().zip(r.iter()).map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn quantized(&self, bits: u32) -> Self {
        StarRisConfig {
            rho: self.rho.clone(),
            theta_t: quantize_phases(&self.theta_t, bits),
            theta_r: quantize_phases(&self.theta_r, bits),
        }
    }
}

impl HoloRisConfig {
    pub fn full(m: usize, alpha_max: f64) -> Self {
        HoloRisConfig { alpha: vec![alpha_max; m], theta: vec![0.0; m], alpha_max }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, alpha_max: f64, bits: Option<u32>, rng: &mut R) -> Self {
        HoloRisConfig { alpha: vec![alpha_max; m], theta: random_phases(m, bits, rng), alpha_max }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn coefficients(&self) -> CVec {
        CVec::from_iterator(self.len(), self.alpha.iter().zip(&self.theta).map(|(&a, &p)| Complex64::from_polar(a, p)))
    }

    pub fn quantized(&self, bits: u32) -> Self {
        HoloRisConfig { alpha: self.alpha.clone(), theta: quantize_phases(&self.theta, bits), alpha_max: self.alpha_max }
    }

    pub fn is_feasible(&self) -> bool {
        self.alpha.iter().all(|&a| (0.0..=self.alpha_max).contains(&a))
    }
}

fn random_phases<R: Rng + ?Sized>(m: usize, bits: Option<u32>, rng: &mut R) -> Vec<f64> {
    match bits {
        Some(b) => {
            let levels = 1u64 << b;
            (0..m).map(|_| TAU * rng.random_range(0..levels) as f64 / levels as f64).collect()
        }
        None => (0..m).map(|_| TAU * rng.random::<f64>()).collect(),
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Nearest point of the grid `{2 pi k / 2^bits}`; exact ties go to the lower
/// index. Output lies in `[0, 2 pi)`.
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let x = wrap_phase(phase) / step;
    let lower = x.floor();
    let k = if x - lower > 0.5 { lower as u64 + 1 } else { lower as u64 };
    (k % levels) as f64 * step
}

pub fn quantize_phases(phases: &[f64], bits: u32) -> Vec<f64> {
    phases.iter().map(|&p| quantize_phase(p, bits)).collect()
}

fn phase_of(z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(z.arg())
    }
}

/// Unit-modulus normalization; a zero coefficient maps to phase 0.
pub fn project_uav(raw: &CVec) -> UavRisConfig {
    UavRisConfig { phases: raw.iter().map(|&z| phase_of(z)).collect() }
}

/// Radial projection of `(|t|, |r|)` onto the unit circle, phases kept.
/// An element with `t = r = 0` is split evenly.
pub fn project_star(t: &CVec, r: &CVec) -> StarRisConfig {
    let mut out = StarRisConfig { rho: Vec::new(), theta_t: Vec::new(), theta_r: Vec::new() };
    for (a, b) in t.iter().zip(r.iter()) {
        let norm = a.norm().hypot(b.norm());
        out.rho.push(if norm == 0.0 { FRAC_1_SQRT_2 } else { a.norm() / norm });
        out.theta_t.push(phase_of(*a));
        out.theta_r.push(phase_of(*b));
    }
    out
}

/// Amplitude clamp to `[0, alpha_max]`, phase kept.
pub fn project_holo(raw: &CVec, alpha_max: f64) -> HoloRisConfig {
    HoloRisConfig {
        alpha: raw.iter().map(|z| z.norm().min(alpha_max)).collect(),
        theta: raw.iter().map(|&z| phase_of(z)).collect(),
        alpha_max,
    }
}

/// Surface kind tag for [`project_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub enum RawSurface {
    Uav(CVec),
    Star { t: CVec, r: CVec },
    Holo { coefficients: CVec, alpha_max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SurfaceConfig {
    Uav(UavRisConfig),
    Star(StarRisConfig),
    Holo(HoloRisConfig),
}

pub fn project_feasible(raw: &RawSurface) -> SurfaceConfig {
    match raw {
        RawSurface::Uav(c) => SurfaceConfig::Uav(project_uav(c)),
        RawSurface::Star { t, r } => SurfaceConfig::Star(project_star(t, r)),
        RawSurface::Holo { coefficients, alpha_max } => SurfaceConfig::Holo(project_holo(coefficients, *alpha_max)),
    }
}

impl SurfaceConfig {
    pub fn to_raw(&self) -> RawSurface {
        match self {
            SurfaceConfig::Uav(c) => RawSurface::Uav(c.coefficients()),
            SurfaceConfig::Star(c) => RawSurface::Star { t: c.transmission(), r: c.reflection() },
            SurfaceConfig::Holo(c) => RawSurface::Holo { coefficients: c.coefficients(), alpha_max: c.alpha_max },
        }
    }
}

/// Which surfaces take part in the effective channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSet {
    pub uav: bool,
    pub star: bool,
    pub holo: bool,
}

impl SurfaceSet {
    pub const ALL: SurfaceSet = SurfaceSet { uav: true, star: true, holo: true };
    pub const NONE: SurfaceSet = SurfaceSet { uav: false, star: false, holo: false };
}

impl Default for SurfaceSet {
    fn default() -> Self {
        SurfaceSet::ALL
    }
}

/// Surface section of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfacesConfig {
    pub m_uav: usize,
    pub m_star: usize,
    pub m_holo: usize,
    /// Phase resolution; `None` keeps phases continuous.
    pub bits: Option<u32>,
    pub alpha_max: f64,
}

impl Default for SurfacesConfig {
    fn default() -> Self {
        SurfacesConfig { m_uav: 8, m_star: 16, m_holo: 32, bits: Some(3), alpha_max: 1.0 }
    }
}

impl SurfacesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_uav == 0 || self.m_star == 0 || self.m_holo == 0 {
            return Err(Error::Config("surface element counts must be >= 1".into()));
        }
        if self.bits == Some(0) || self.bits.is_some_and(|b| b > 16) {
            return Err(Error::Config("surfaces.bits must lie in 1..=16".into()));
        }
        if !(self.alpha_max > 0.0) {
            return Err(Error::Config("surfaces.alpha_max must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn identity_uav_is_all_ones() {
        let c = UavRisConfig::identity(5).coefficients();
        assert!(c.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn star_pythagorean_split() {
        let s = StarRisConfig { rho: vec![0.6], theta_t: vec![0.0], theta_r: vec![0.0] };
        assert!((s.transmission()[0] - Complex64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((s.reflection()[0] - Complex64::new(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn holo_pi_phase_negates() {
        let h = HoloRisConfig { alpha: vec![1.0], theta: vec![PI], alpha_max: 1.0 };
        assert!((h.coefficients()[0] + Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quantize_examples() {
        assert!((quantize_phase(0.4, 3) - FRAC_PI_4).abs() < 1e-15);
        assert!((quantize_phase(PI - 0.01, 1) - PI).abs() < 1e-15);
        assert_eq!(quantize_phase(3.0 * FRAC_PI_4, 3), 3.0 * FRAC_PI_4);
        // Exact tie between grid points 0 and pi/2 goes to the lower index.
        assert_eq!(quantize_phase(FRAC_PI_4, 2), 0.0);
        // Wrap-around near 2 pi rounds to 0.
        assert_eq!(quantize_phase(TAU - 0.01, 3), 0.0);
    }

    #[test]
    fn quantize_matches_brute_force() {
        let mut rng = substream(4, &[]);
        for _ in 0..1000 {
            let p: f64 = rng.random::<f64>() * 4.0 * PI - PI;
            let bits = rng.random_range(1..6u32);
            let q = quantize_phase(p, bits);
            let levels = 1u32 << bits;
            let dist = |g: f64| {
                let d = (wrap_phase(p) - g).abs();
                d.min(TAU - d)
            };
            let best = (0..levels).map(|k| TAU * k as f64 / levels as f64).map(dist).fold(f64::INFINITY, f64::min);
            assert!((dist(q) - best).abs() < 1e-12);
            assert!(dist(q) <= PI / levels as f64 + 1e-12);
        }
    }

    #[test]
    fn projection_examples() {
        let raw = CVec::from_vec(vec![Complex64::from_polar(2.0, FRAC_PI_3), Complex64::new(0.0, 0.0)]);
        let u = project_uav(&raw);
        assert!((u.phases[0] - FRAC_PI_3).abs() < 1e-12);
        assert_eq!(u.phases[1], 0.0);

        let t = CVec::from_vec(vec![Complex64::new(0.6, 0.0)]);
        let r = CVec::from_vec(vec![Complex64::new(0.0, 0.6)]);
        let s = project_star(&t, &r);
        assert!((s.transmission()[0].norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.reflection()[0].norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.theta_r[0] - PI / 2.0).abs() < 1e-12);

        let h = project_holo(&CVec::from_vec(vec![Complex64::new(1.5, 0.0)]), 1.0);
        assert_eq!(h.alpha[0], 1.0);
    }

    #[test]
    fn unit_modulus_relaxation_is_projection_fixed_point() {
        let cfg = UavRisConfig::random(16, None, &mut substream(2, &[]));
        let again = project_uav(&cfg.coefficients());
        for (a, b) in cfg.phases.iter().zip(&again.phases) {
            let d = (a - b).abs();
            assert!(d.min(TAU - d) < 1e-12);
        }
    }
}
