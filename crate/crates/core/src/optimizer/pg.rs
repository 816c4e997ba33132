//! Projected gradient with Barzilai-Borwein steps and Armijo backtracking
//! over complex vectors. Gradients follow the convention
//! `df = 2 Re{g^H dx}`, so `-g` is the steepest descent direction.

use crate::linalg::CVec;
use crate::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct PgOptions {
    pub max_iter: usize,
    /// Relative step-length tolerance.
    pub tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for PgOptions {
    fn default() -> Self {
        PgOptions { max_iter: 200, tol: 1e-9, armijo: 1e-4, max_backtracks: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct PgResult {
    pub x: CVec,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `value` over the set described by `project`, starting at `x0`.
/// `value` may return `+inf` for points violating hard constraints; `x0`
/// itself must be finite.
pub fn minimize(
    x0: &CVec,
    mut value: impl FnMut(&CVec) -> f64,
    mut value_grad: impl FnMut(&CVec) -> (f64, CVec),
    project: impl Fn(&mut CVec),
    opts: &PgOptions,
) -> PgResult {
    let mut x = x0.clone();
    project(&mut x);
    let (mut fx, mut g) = value_grad(&x);
    let scale = x.norm().max(1e-9);
    let gn = g.norm();
    if !fx.is_finite() || gn == 0.0 {
        return PgResult { x, value: fx, iterations: 0, converged: true };
    }
    let mut alpha = 0.1 * scale / gn;
    let alpha_min = 1e-14 * alpha;
    let alpha_max = 1e8 * alpha;
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let mut accepted = None;
        let mut a = alpha;
        for _ in 0..=opts.max_backtracks {
            let mut y = &x - &g * Complex64::from(a);
            project(&mut y);
            let d = &y - &x;
            if d.norm() <= opts.tol * (1.0 + x.norm()) {
                break;
            }
            let slope = 2.0 * g.dotc(&d).re;
            let fy = value(&y);
            if fy.is_finite() && fy <= fx + opts.armijo * slope {
                accepted = Some((y, fy));
                break;
            }
            a *= 0.5;
            if a < alpha_min {
                break;
            }
        }
        let Some((y, _)) = accepted else {
            converged = true;
            break;
        };
        let (fy, gy) = value_grad(&y);
        let s = &y - &x;
        let dg = &gy - &g;
        let sy = s.dotc(&dg).re;
        alpha = if sy > 0.0 { (s.norm_squared() / sy).clamp(alpha_min, alpha_max) } else { (2.0 * a).min(alpha_max) };
        let rel = (fx - fy).abs() / fx.abs().max(1e-300);
        let small = s.norm() <= opts.tol * (1.0 + y.norm());
        x = y;
        fx = fy;
        g = gy;
        if small || rel < 1e-13 {
            converged = true;
            break;
        }
    }
    PgResult { x, value: fx, iterations: it, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn projected_quadratic() {
        // min |x - c|^2 over the unit ball, c outside.
        let c = CVec::from_vec(vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]);
        let f = |x: &CVec| (x - &c).norm_squared();
        let fg = |x: &CVec| ((x - &c).norm_squared(), x - &c);
        let proj = |x: &mut CVec| {
            let n = x.norm();
            if n > 1.0 {
                *x /= Complex64::from(n);
            }
        };
        let x0 = CVec::from_vec(vec![Complex64::new(0.0, 0.1), Complex64::new(0.1, 0.0)]);
        let r = minimize(&x0, f, fg, proj, &PgOptions::default());
        let want = &c / Complex64::from(5.0);
        assert!((r.x - want).norm() < 1e-6);
    }

    #[test]
    fn never_increases() {
        let f = |x: &CVec| x.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
        let fg = |x: &CVec| (f(x), x.map(|z| z * 2.0 * z.norm_sqr()));
        let x0 = CVec::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(-2.0, 0.5)]);
        let f0 = f(&x0);
        let r = minimize(&x0, f, fg, |_| {}, &PgOptions::default());
        assert!(r.value <= f0);
        assert!(r.value < 1e-6);
    }
}
