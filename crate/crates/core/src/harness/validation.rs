//! Self-checks behind the `validate-bernstein` and `channel-goldens`
//! subcommands.

use rand::Rng;
use serde::Serialize;

use crate::channel::{o2i_penetration_db, pathloss_db, BuildingClass, PathlossKind};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::rng::{complex_normal, label, substream};
use crate::robust::{bernstein_block, bernstein_kappa, scalar_boundary, validate_block_mc, QuadraticForm};

/// Outcome of one Monte-Carlo soundness check.
#[derive(Clone, Debug, Serialize)]
pub struct SoundnessCase {
    pub index: usize,
    pub n: usize,
    pub epsilon: f64,
    pub tau: f64,
    /// Bernstein slack of the block (zero on the boundary).
    pub margin: f64,
    pub violation: f64,
    pub stderr: f64,
    pub pass: bool,
}

pub const SOUNDNESS_EPSILONS: [f64; 3] = [0.01, 0.05, 0.1];

/// Random feasible block on `n` dimensions: Hermitian `A` with Gaussian
/// entries, Gaussian `b`, Wishart-type `C`, and `c` placed `slack` above the
/// feasibility boundary.
pub fn random_feasible_block(n: usize, epsilon: f64, slack: f64, rng: &mut impl Rng) -> Result<QuadraticForm> {
    let g = CMat::from_fn(n, n, |_, _| complex_normal(rng, 1.0));
    let a = (&g + g.adjoint()) * crate::Complex64::from(0.5);
    let b = CVec::from_fn(n, |_, _| complex_normal(rng, 1.0));
    let l = CMat::from_fn(n, n, |_, _| complex_normal(rng, 1.0 / n as f64));
    let cov = &l * l.adjoint();
    let mut q = QuadraticForm { a, b, c: 0.0, cov, epsilon };
    let blk = bernstein_block(&q)?;
    q.c = blk.tau * bernstein_kappa(epsilon) - blk.trace_term + slack;
    Ok(q)
}

/// Draws `instances` random feasible blocks on the boundary (dimension
/// cycling through 1..=8, violation level through [`SOUNDNESS_EPSILONS`])
/// and checks `violation <= eps + 3 stderr` with `samples` draws each.
pub fn bernstein_soundness(instances: usize, samples: usize, seed: u64) -> Result<Vec<SoundnessCase>> {
    let mut rng = substream(seed, &[label("blocks")]);
    let mut out = Vec::with_capacity(instances);
    for i in 0..instances {
        let n = 1 + i % 8;
        let epsilon = SOUNDNESS_EPSILONS[(i / 8) % SOUNDNESS_EPSILONS.len()];
        let q = random_feasible_block(n, epsilon, 1e-9, &mut rng)?;
        let blk = bernstein_block(&q)?;
        let violation = validate_block_mc(&q, samples, crate::rng::derive_key(seed, &[label("mc"), i as u64]))?;
        let stderr = (epsilon * (1.0 - epsilon) / samples as f64).sqrt();
        out.push(SoundnessCase { index: i, n, epsilon, tau: blk.tau, margin: blk.slack(), violation, stderr, pass: violation <= epsilon + 3.0 * stderr });
    }
    Ok(out)
}

/// Scalar block `A = 1, b = 0, C = 1`: the Bernstein boundary
/// `sqrt(2 ln(1/eps)) - 1` against the exact requirement `c >= ln(1 - eps)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalarBoundary {
    pub epsilon: f64,
    pub bernstein: f64,
    pub exact: f64,
    /// Bisection estimate of the Bernstein boundary from `is_feasible`.
    pub located: f64,
}

pub fn scalar_boundaries() -> Result<Vec<ScalarBoundary>> {
    SOUNDNESS_EPSILONS
        .iter()
        .map(|&epsilon| {
            let form = |c: f64| QuadraticForm {
                a: CMat::from_element(1, 1, 1.0.into()),
                b: CVec::zeros(1),
                c,
                cov: CMat::from_element(1, 1, 1.0.into()),
                epsilon,
            };
            let (mut lo, mut hi) = (-10.0, 10.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if bernstein_block(&form(mid))?.is_feasible() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(ScalarBoundary { epsilon, bernstein: scalar_boundary(epsilon), exact: (1.0 - epsilon).ln(), located: hi })
        })
        .collect()
}

/// One row of the shipped channel test-vector table.
#[derive(Clone, Debug, Serialize)]
pub struct GoldenCheck {
    pub kind: String,
    pub fc_ghz: f64,
    pub distance_m: Option<f64>,
    pub percentile: Option<f64>,
    pub elevation_deg: Option<f64>,
    pub expected_db: f64,
    pub computed_db: f64,
    pub pass: bool,
}

pub const GOLDEN_TOLERANCE_DB: f64 = 0.01;

/// Hand-evaluated pathloss and building-entry-loss values.
pub const CHANNEL_GOLDENS: &str = include_str!("../../data/channel_goldens.csv");

#[derive(serde::Deserialize)]
struct GoldenRow {
    kind: String,
    fc_ghz: f64,
    distance_m: Option<f64>,
    percentile: Option<f64>,
    elevation_deg: Option<f64>,
    loss_db: f64,
}

pub fn channel_goldens() -> Result<Vec<GoldenCheck>> {
    let mut rdr = csv::Reader::from_reader(CHANNEL_GOLDENS.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: GoldenRow = row?;
        let computed = if let Some(class) = r.kind.strip_prefix("p2109-") {
            let p = r.percentile.ok_or_else(|| Error::param("golden row lacks a percentile"))?;
            o2i_penetration_db(r.fc_ghz, BuildingClass::parse(class)?, p, r.elevation_deg.unwrap_or(0.0))?
        } else {
            let d = r.distance_m.ok_or_else(|| Error::param("golden row lacks a distance"))?;
            pathloss_db(r.kind.parse::<PathlossKind>()?, d, r.fc_ghz)?
        };
        out.push(GoldenCheck {
            pass: (computed - r.loss_db).abs() <= GOLDEN_TOLERANCE_DB,
            kind: r.kind,
            fc_ghz: r.fc_ghz,
            distance_m: r.distance_m,
            percentile: r.percentile,
            elevation_deg: r.elevation_deg,
            expected_db: r.loss_db,
            computed_db: computed,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goldens_match() {
        let g = channel_goldens().unwrap();
        assert_eq!(g.len(), 16);
        assert!(g.iter().all(|c| c.pass), "{g:?}");
    }

    #[test]
    fn random_blocks_sit_on_the_boundary() {
        let mut rng = substream(3, &[]);
        for n in 1..=8 {
            let q = random_feasible_block(n, 0.05, 0.0, &mut rng).unwrap();
            let s = bernstein_block(&q).unwrap().slack();
            assert!(s.abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn located_boundary_matches_closed_form() {
        for b in scalar_boundaries().unwrap() {
            assert!((b.located - b.bernstein).abs() < 1e-6);
            assert!(b.exact < b.bernstein);
        }
    }
}
