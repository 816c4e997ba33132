//! Hand-built ensembles for block-level tests.

use std::collections::BTreeMap;

use crate::channel::{db_to_linear, pathloss::pathloss_db_with_height, ArrayDims, LinkChannel, LinkEnsemble, PathKind, PathlossKind};
use crate::linalg::{CMat, CVec};
use crate::link::{Design, ImpairmentParams};
use crate::robust::SecrecyThresholds;
use crate::scenario::{EveRole, LinkId, LinkState, Node, Position};
use crate::surfaces::{HoloRisConfig, StarRisConfig, SurfaceSet, UavRisConfig};
use crate::Complex64;

use super::SystemParams;

pub const FC: f64 = 28.0;

/// Error-free LoS link whose gain follows the UMi-LoS pathloss between the
/// two points, so that UAV relocation rescales it consistently.
pub fn geometric_link(from: Node, to: Node, tx: Position, rx: Position, unit: CMat) -> LinkChannel {
    let d = (rx - tx).norm();
    let pl = pathloss_db_with_height(PathlossKind::UmiLos, d, FC, tx.z.min(rx.z)).unwrap();
    let beta = db_to_linear(-pl);
    let ch = unit.map(|z| z * beta.sqrt());
    LinkChannel {
        id: LinkId::new(from, to),
        state: LinkState::Los,
        kind: PathlossKind::UmiLos,
        pathloss_db: pl,
        shadow_db: 0.0,
        extra_db: 0.0,
        beta,
        tx_center: tx,
        rx_center: rx,
        small_scale: unit.clone(),
        estimate: ch.clone(),
        channel: ch,
        error_cov: CMat::zeros(0, 0),
        error_power: 0.0,
    }
}

/// Link with explicit propagation matrix (no geometry).
pub fn fixed_link(from: Node, to: Node, m: CMat) -> LinkChannel {
    let o = Position::origin();
    let mut l = geometric_link(from, to, o, Position::new(1.0, 0.0, 0.0), m.clone());
    l.beta = 1.0;
    l.channel = m.clone();
    l.estimate = m;
    l
}

pub fn ensemble(dims: ArrayDims, users: usize, links: Vec<LinkChannel>, paths: Vec<(Node, Vec<PathKind>)>, noise: f64) -> LinkEnsemble {
    LinkEnsemble {
        links: links.into_iter().map(|l| (l.id, l)).collect::<BTreeMap<_, _>>(),
        noise_power: noise,
        dims,
        indoor: vec![false; users],
        eve_roles: Vec::<EveRole>::new(),
        paths: paths.into_iter().collect(),
        uav_position: Position::new(0.0, 0.0, 80.0),
        fc_ghz: FC,
    }
}

pub fn uav_design(dims: ArrayDims, beams: Vec<CVec>, phases: Vec<f64>, uav: Position) -> Design {
    Design {
        beamformers: beams,
        uav_ris: UavRisConfig { phases },
        star: StarRisConfig::balanced(dims.star),
        hris: HoloRisConfig::full(dims.holo, 1.0),
        uav_position: uav,
        surfaces: SurfaceSet { uav: true, star: false, holo: false },
    }
}

pub fn params(users: usize, p_max: f64, r_qos: f64) -> SystemParams {
    SystemParams {
        p_max,
        imp: ImpairmentParams::IDEAL,
        r_sec_min: 0.0,
        r_qos,
        epsilon: 0.05,
        delta: 0.05,
        jam_tail: 1e-3,
        weights: vec![1.0 / users as f64; users],
    }
}

pub fn zero_thresholds(users: usize) -> Vec<SecrecyThresholds> {
    vec![SecrecyThresholds { gamma_l: 0.0, gamma_e: 0.0, eps_l: 0.025, eps_e: 0.025 }; users]
}

pub fn scalar(z: Complex64) -> CMat {
    CMat::from_element(1, 1, z)
}
