//! UAV placement block: first-order model of the cost in the horizontal
//! position (the large-scale gains are linearized in dB around the current
//! position) minimized over the trust disc intersected with the flight box.

use super::BlockStatus;
use crate::channel::LinkEnsemble;
use crate::error::Result;
use crate::link::Design;
use crate::scenario::{Position, UavRegion};

#[derive(Clone, Copy, Debug)]
pub struct UavOptions {
    pub trust_radius: f64,
    pub min_radius: f64,
    pub retries: usize,
    /// Finite-difference step for the gradient, meters.
    pub fd_step: f64,
}

impl Default for UavOptions {
    fn default() -> Self {
        UavOptions { trust_radius: 10.0, min_radius: 0.5, retries: 5, fd_step: 0.25 }
    }
}

#[derive(Clone, Debug)]
pub struct UavOutcome {
    pub position: Position,
    pub ensemble: Option<LinkEnsemble>,
    pub status: BlockStatus,
    pub cost: f64,
    pub step_norm: f64,
}

fn moved(p: &Position, dx: f64, dy: f64) -> Position {
    Position::new(p.x + dx, p.y + dy, p.z)
}

/// Gradient of `cost` in the horizontal UAV coordinates by central
/// differences of the relocated ensemble.
pub fn position_gradient(
    base: &LinkEnsemble,
    design: &Design,
    cost: &impl Fn(&LinkEnsemble, &Design) -> Result<f64>,
    h: f64,
) -> Result<[f64; 2]> {
    let p = design.uav_position;
    let mut g = [0.0; 2];
    for (i, (dx, dy)) in [(h, 0.0), (0.0, h)].into_iter().enumerate() {
        let mut d = design.clone();
        d.uav_position = moved(&p, dx, dy);
        let fp = cost(&base.relocate_uav(&d.uav_position)?, &d)?;
        d.uav_position = moved(&p, -dx, -dy);
        let fm = cost(&base.relocate_uav(&d.uav_position)?, &d)?;
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// One trust-region step from `design.uav_position`. `base` is any
/// ensemble of the drop (it is relocated as needed) and `current_cost` the
/// cost at the current position.
pub fn solve_uav_block(
    base: &LinkEnsemble,
    design: &Design,
    region: &UavRegion,
    cost: impl Fn(&LinkEnsemble, &Design) -> Result<f64>,
    current_cost: f64,
    opts: &UavOptions,
) -> Result<UavOutcome> {
    let p = design.uav_position;
    let unchanged = |status| UavOutcome { position: p, ensemble: None, status, cost: current_cost, step_norm: 0.0 };
    if !design.surfaces.uav {
        return Ok(unchanged(BlockStatus::Skipped));
    }
    let g = position_gradient(base, design, &cost, opts.fd_step)?;
    let gn = g[0].hypot(g[1]);
    if !(gn * opts.trust_radius > 1e-12) {
        return Ok(unchanged(BlockStatus::Skipped));
    }
    let dir = [-g[0] / gn, -g[1] / gn];
    let mut radius = opts.trust_radius;
    for _ in 0..=opts.retries {
        // The linear model is minimized on the disc boundary along -g; the
        // box clamp keeps the point inside the disc since p is in the box.
        let cand = region.clamp(&moved(&p, radius * dir[0], radius * dir[1]));
        let step = (cand - p).norm();
        if step < 1e-9 {
            return Ok(unchanged(BlockStatus::Skipped));
        }
        let mut d = design.clone();
        d.uav_position = cand;
        let ens = base.relocate_uav(&cand)?;
        let c = cost(&ens, &d)?;
        if c <= current_cost {
            return Ok(UavOutcome { position: cand, ensemble: Some(ens), status: BlockStatus::Accepted, cost: c, step_norm: step });
        }
        if radius <= opts.min_radius {
            break;
        }
        radius = (radius * 0.5).max(opts.min_radius);
    }
    Ok(unchanged(BlockStatus::Rejected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayDims, PathKind};
    use crate::linalg::{CMat, CVec};
    use crate::optimizer::surrogate::ModelParams;
    use crate::optimizer::testutil::{ensemble, geometric_link, params, uav_design, zero_thresholds};
    use crate::optimizer::{design_surrogate, SystemParams};
    use crate::scenario::Node;
    use crate::Complex64;

    fn region() -> UavRegion {
        UavRegion { x: [-150.0, 150.0], y: [-150.0, 150.0], altitude: 80.0 }
    }

    fn empty() -> (LinkEnsemble, Design) {
        let dims = ArrayDims { bs: 1, uav: 1, star: 0, holo: 0 };
        let ens = ensemble(dims, 0, Vec::new(), Vec::new(), 1.0);
        let d = uav_design(dims, Vec::new(), vec![0.0], Position::new(0.0, 0.0, 80.0));
        (ens, d)
    }

    #[test]
    fn interior_step_descends() {
        let (ens, mut d) = empty();
        let cost = |_: &LinkEnsemble, d: &Design| Ok((d.uav_position.x - 40.0).powi(2) + (d.uav_position.y + 30.0).powi(2));
        let mut c = cost(&ens, &d).unwrap();
        for _ in 0..20 {
            let out = solve_uav_block(&ens, &d, &region(), cost, c, &UavOptions::default()).unwrap();
            assert!(out.cost <= c);
            c = out.cost;
            d.uav_position = out.position;
        }
        assert!((d.uav_position.x - 40.0).abs() < 1.0 && (d.uav_position.y + 30.0).abs() < 1.0);
    }

    #[test]
    fn boundary_with_outward_gradient_stays() {
        let (ens, mut d) = empty();
        d.uav_position = Position::new(150.0, 10.0, 80.0);
        let cost = |_: &LinkEnsemble, d: &Design| Ok(-d.uav_position.x);
        let out = solve_uav_block(&ens, &d, &region(), cost, -150.0, &UavOptions::default()).unwrap();
        assert_eq!(out.position, d.uav_position);
        assert_eq!(out.step_norm, 0.0);
    }

    #[test]
    fn disabled_uav_is_skipped() {
        let (ens, mut d) = empty();
        d.surfaces.uav = false;
        let cost = |_: &LinkEnsemble, d: &Design| Ok(d.uav_position.x);
        let out = solve_uav_block(&ens, &d, &region(), cost, 0.0, &UavOptions::default()).unwrap();
        assert_eq!(out.status, BlockStatus::Skipped);
    }

    /// Two users mirrored about the x-axis, served only through the UAV.
    fn mirrored() -> (LinkEnsemble, Design, SystemParams) {
        let m = 4;
        let dims = ArrayDims { bs: 1, uav: m, star: 0, holo: 0 };
        let bs = Position::new(0.0, 0.0, 25.0);
        let uav = Position::new(0.0, 0.0, 80.0);
        let users = [Position::new(60.0, 40.0, 1.5), Position::new(60.0, -40.0, 1.5)];
        let mut links = vec![geometric_link(Node::Bs, Node::Uav, bs, uav, CMat::from_element(m, 1, Complex64::from(1.0)))];
        for (k, u) in users.iter().enumerate() {
            links.push(geometric_link(Node::Uav, Node::User(k), uav, *u, CMat::from_element(1, m, Complex64::from(1.0))));
        }
        let paths = (0..2).map(|k| (Node::User(k), vec![PathKind::Uav])).collect();
        let mut ens = ensemble(dims, 2, links, paths, 1.0);
        // Noise so that the SNR at (60, 0) is about 0 dB with full power per user.
        let at = ens.relocate_uav(&Position::new(60.0, 0.0, 80.0)).unwrap();
        let g = at.link(crate::scenario::LinkId::new(Node::Bs, Node::Uav)).unwrap().beta * at.link(crate::scenario::LinkId::new(Node::Uav, Node::User(0))).unwrap().beta;
        ens.noise_power = g * (m * m) as f64 * 0.5;
        let w = vec![CVec::from_element(1, Complex64::from(0.5f64.sqrt())); 2];
        let d = uav_design(dims, w, vec![0.0; m], uav);
        (ens, d, params(2, 1.0, 1.0))
    }

    #[test]
    fn mirrored_users_center_the_uav() {
        let (ens, mut d, p) = mirrored();
        let th = zero_thresholds(2);
        let model = ModelParams::target(0.1);
        let cost = |e: &LinkEnsemble, dd: &Design| design_surrogate(e, dd, &th, &p, &model);
        // Brute-force oracle on a 5 m grid.
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=60 {
            for j in 0..=60 {
                let (x, y) = (-150.0 + 5.0 * i as f64, -150.0 + 5.0 * j as f64);
                let mut t = d.clone();
                t.uav_position = Position::new(x, y, 80.0);
                let c = cost(&ens.relocate_uav(&t.uav_position).unwrap(), &t).unwrap();
                if c < best.0 {
                    best = (c, x, y);
                }
            }
        }
        assert_eq!(best.2, 0.0, "grid optimum {best:?}");
        d.uav_position = Position::new(best.1 - 20.0, 25.0, 80.0);
        let mut c = cost(&ens.relocate_uav(&d.uav_position).unwrap(), &d).unwrap();
        for _ in 0..100 {
            let out = solve_uav_block(&ens, &d, &region(), cost, c, &UavOptions::default()).unwrap();
            assert!(out.cost <= c);
            c = out.cost;
            d.uav_position = out.position;
        }
        assert!(d.uav_position.y.abs() <= 1.0, "y = {}", d.uav_position.y);
        assert!((d.uav_position.x - best.1).abs() <= 5.0);
        assert!(c <= best.0 * (1.0 + 1e-4), "{c} vs grid {best:?}");
    }
}
