//! Small-scale fading and array geometry.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::CMat;
use crate::rng::complex_normal;
use crate::scenario::{LinkState, Position};

/// Fading matrix with per-entry unit mean power. LoS links are Rician with
/// factor `k_db` around an all-ones specular component; NLoS and blocked
/// links are Rayleigh.
pub fn sample_small_scale<R: Rng + ?Sized>(state: LinkState, k_db: f64, rows: usize, cols: usize, rng: &mut R) -> CMat {
    let mean = CMat::from_element(rows.max(1), cols.max(1), Complex64::new(1.0, 0.0));
    sample_with_specular(state, k_db, &mean, rng)
}

/// As [`sample_small_scale`] with an explicit unit-modulus specular component.
pub fn sample_with_specular<R: Rng + ?Sized>(state: LinkState, k_db: f64, specular: &CMat, rng: &mut R) -> CMat {
    let (rows, cols) = specular.shape();
    match state {
        LinkState::Los => {
            if k_db.is_infinite() && k_db > 0.0 {
                return specular.clone();
            }
            let k = 10f64.powf(k_db / 10.0);
            let a = (k / (k + 1.0)).sqrt();
            let b = (1.0 / (k + 1.0)).sqrt();
            CMat::from_fn(rows, cols, |i, j| specular[(i, j)] * a + complex_normal(rng, 1.0) * b)
        }
        LinkState::Nlos | LinkState::Blocked => CMat::from_fn(rows, cols, |_, _| complex_normal(rng, 1.0)),
    }
}

/// Uniform planar array centred at `center`, lying in the plane orthogonal to
/// `normal`. Elements are laid out on the most square grid that holds `m`.
pub fn planar_array(center: &Position, normal: &Vector3<f64>, m: usize, spacing: f64) -> Vec<Position> {
    let n = normal.normalize();
    let reference = if n.z.abs() > 0.9 { Vector3::x() } else { Vector3::z() };
    let u = n.cross(&reference).normalize();
    let v = n.cross(&u);
    let rows = (1..=m).rev().find(|r| m % r == 0 && r * r <= m).unwrap_or(1);
    let cols = m / rows;
    let mut out = Vec::with_capacity(m);
    for i in 0..rows {
        for j in 0..cols {
            let a = (j as f64 - 0.5 * (cols as f64 - 1.0)) * spacing;
            let b = (i as f64 - 0.5 * (rows as f64 - 1.0)) * spacing;
            out.push(center + u * a + v * b);
        }
    }
    out
}

/// Uniform linear array along the y axis.
pub fn linear_array(center: &Position, n: usize, spacing: f64) -> Vec<Position> {
    (0..n)
        .map(|i| center + Vector3::y() * ((i as f64 - 0.5 * (n as f64 - 1.0)) * spacing))
        .collect()
}

/// Specular (rx x tx) component from exact element-to-element distances.
pub fn specular_component(tx: &[Position], rx: &[Position], wavelength: f64) -> CMat {
    let k = std::f64::consts::TAU / wavelength;
    CMat::from_fn(rx.len(), tx.len(), |i, j| {
        let d = (rx[i] - tx[j]).norm();
        Complex64::from_polar(1.0, -k * d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn infinite_k_gives_specular_component() {
        let g = sample_small_scale(LinkState::Los, f64::INFINITY, 3, 2, &mut substream(1, &[]));
        assert!(g.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn planar_array_is_centred_and_orthogonal() {
        let c = Position::new(1.0, 2.0, 3.0);
        let n = Vector3::new(-1.0, 0.0, 0.0);
        let els = planar_array(&c, &n, 16, 0.5);
        assert_eq!(els.len(), 16);
        let mean = els.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / 16.0;
        assert!((mean - c.coords).norm() < 1e-12);
        assert!(els.iter().all(|p| (p - c).dot(&n).abs() < 1e-12));
        let down = planar_array(&c, &Vector3::new(0.0, 0.0, -1.0), 8, 0.5);
        assert!(down.iter().all(|p| (p.z - 3.0).abs() < 1e-12));
    }

    #[test]
    fn specular_entries_unit_modulus() {
        let tx = linear_array(&Position::origin(), 4, 0.005);
        let rx = vec![Position::new(50.0, 3.0, 1.5)];
        let s = specular_component(&tx, &rx, 0.01);
        assert_eq!(s.shape(), (1, 4));
        assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }
}
