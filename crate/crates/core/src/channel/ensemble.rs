use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fading::{linear_array, planar_array, sample_with_specular, specular_component};
use super::pathloss::{los_probability, pathloss_db_with_height, Environment};
use super::penetration::sample_o2i_db;
use super::{db_to_linear, row_vector, ArrayDims, ChannelConfig, LinkChannel};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::rng::{self, complex_normal, standard_normal};
use crate::scenario::{EveRole, LinkId, LinkState, Node, Position, Scenario};
use crate::Complex64;

/// Signal paths that can reach a receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Direct,
    Uav,
    /// STAR transmission side (indoor receivers).
    StarT,
    /// STAR reflection side (outdoor receivers in front of the facade).
    StarR,
    /// BS -> STAR (transmit) -> H-RIS -> indoor receiver.
    Holo,
}

/// All links realized for one trial.
#[derive(Clone, Debug)]
pub struct LinkEnsemble {
    pub links: BTreeMap<LinkId, LinkChannel>,
    pub noise_power: f64,
    pub dims: ArrayDims,
    pub indoor: Vec<bool>,
    pub eve_roles: Vec<EveRole>,
    pub paths: BTreeMap<Node, Vec<PathKind>>,
    pub uav_position: Position,
    pub fc_ghz: f64,
}

impl LinkEnsemble {
    pub fn link(&self, id: LinkId) -> Result<&LinkChannel> {
        self.links.get(&id).ok_or_else(|| Error::MissingLink(id.to_string()))
    }

    pub fn user_count(&self) -> usize {
        self.indoor.len()
    }

    pub fn eve_count(&self) -> usize {
        self.eve_roles.len()
    }

    pub fn active_eves(&self) -> impl Iterator<Item = usize> + '_ {
        self.eve_roles.iter().enumerate().filter(|(_, r)| **r == EveRole::Active).map(|(e, _)| e)
    }

    pub fn paths_of(&self, rx: Node) -> &[PathKind] {
        self.paths.get(&rx).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Moves the UAV: every link touching it keeps its small-scale fading
    /// and normalized CSI error while its large-scale gain follows the new
    /// distance.
    pub fn relocate_uav(&self, p: &Position) -> Result<LinkEnsemble> {
        let mut out = self.clone();
        for link in out.links.values_mut() {
            let (tx, rx) = match (link.id.from, link.id.to) {
                (_, Node::Uav) => (link.tx_center, *p),
                (Node::Uav, _) => (*p, link.rx_center),
                _ => continue,
            };
            let d3d = (rx - tx).norm();
            let pl = pathloss_db_with_height(link.kind, d3d, self.fc_ghz, tx.z.min(rx.z))?;
            let beta = db_to_linear(-(pl + link.shadow_db + link.extra_db));
            let ratio = beta / link.beta;
            let amp = Complex64::from(ratio.sqrt());
            link.channel *= amp;
            link.estimate *= amp;
            link.error_cov *= Complex64::from(ratio);
            link.error_power *= ratio;
            link.beta = beta;
            link.pathloss_db = pl;
            link.tx_center = tx;
            link.rx_center = rx;
        }
        out.uav_position = *p;
        Ok(out)
    }
}

struct LinkSpec {
    id: LinkId,
    env: Environment,
    tx: Vec<Position>,
    rx: Vec<Position>,
    tx_center: Position,
    rx_center: Position,
    forced_los: bool,
    o2i: bool,
    with_error: bool,
}

/// Realizes every link of `scenario`. Each link draws from its own substream
/// of `seed`, so links are reproducible independently of one another.
pub fn realize_ensemble(scenario: &Scenario, cfg: &ChannelConfig, dims: &ArrayDims, seed: u64) -> Result<LinkEnsemble> {
    cfg.validate()?;
    let nodes = &scenario.nodes;
    if dims.bs != cfg.bs_antennas {
        return Err(Error::param("array dims disagree with channel.bs_antennas"));
    }
    let lambda = cfg.wavelength();
    let bs_el = linear_array(&nodes.bs, dims.bs, cfg.bs_spacing_wl * lambda);
    let down = nalgebra::Vector3::new(0.0, 0.0, -1.0);
    let uav_el = planar_array(&nodes.uav, &down, dims.uav, cfg.ris_spacing_wl * lambda);
    let star_el = planar_array(&nodes.star.position, &nodes.star.normal, dims.star, cfg.ris_spacing_wl * lambda);
    let holo_el = planar_array(&nodes.hris.position, &nodes.hris.normal, dims.holo, cfg.holo_spacing_wl * lambda);

    let mut specs = vec![
        LinkSpec {
            id: LinkId::new(Node::Bs, Node::Uav),
            env: Environment::Umi,
            tx: bs_el.clone(),
            rx: uav_el.clone(),
            tx_center: nodes.bs,
            rx_center: nodes.uav,
            forced_los: true,
            o2i: false,
            with_error: false,
        },
        LinkSpec {
            id: LinkId::new(Node::Bs, Node::Star),
            env: Environment::Umi,
            tx: bs_el.clone(),
            rx: star_el.clone(),
            tx_center: nodes.bs,
            rx_center: nodes.star.position,
            forced_los: cfg.infrastructure_los,
            o2i: false,
            with_error: false,
        },
        LinkSpec {
            id: LinkId::new(Node::Star, Node::Holo),
            env: Environment::Inh,
            tx: star_el.clone(),
            rx: holo_el.clone(),
            tx_center: nodes.star.position,
            rx_center: nodes.hris.position,
            forced_los: cfg.infrastructure_los,
            o2i: false,
            with_error: false,
        },
    ];
    let mut paths = BTreeMap::new();
    let star_visible = |p: &Position| (p - nodes.star.position).dot(&nodes.star.normal) > 0.0;

    let mut add_receiver = |rx: Node, pos: Position, indoor: bool, specs: &mut Vec<LinkSpec>| {
        let single = vec![pos];
        let mut p = vec![PathKind::Direct, PathKind::Uav];
        specs.push(LinkSpec {
            id: LinkId::new(Node::Bs, rx),
            env: Environment::Umi,
            tx: bs_el.clone(),
            rx: single.clone(),
            tx_center: nodes.bs,
            rx_center: pos,
            forced_los: false,
            o2i: indoor,
            with_error: true,
        });
        specs.push(LinkSpec {
            id: LinkId::new(Node::Uav, rx),
            env: Environment::Umi,
            tx: uav_el.clone(),
            rx: single.clone(),
            tx_center: nodes.uav,
            rx_center: pos,
            forced_los: true,
            o2i: indoor,
            with_error: true,
        });
        if indoor {
            p.push(PathKind::StarT);
            p.push(PathKind::Holo);
            specs.push(LinkSpec {
                id: LinkId::new(Node::Star, rx),
                env: Environment::Inh,
                tx: star_el.clone(),
                rx: single.clone(),
                tx_center: nodes.star.position,
                rx_center: pos,
                forced_los: false,
                o2i: false,
                with_error: true,
            });
            specs.push(LinkSpec {
                id: LinkId::new(Node::Holo, rx),
                env: Environment::Inh,
                tx: holo_el.clone(),
                rx: single,
                tx_center: nodes.hris.position,
                rx_center: pos,
                forced_los: false,
                o2i: false,
                with_error: true,
            });
        } else if star_visible(&pos) {
            p.push(PathKind::StarR);
            specs.push(LinkSpec {
                id: LinkId::new(Node::Star, rx),
                env: Environment::Umi,
                tx: star_el.clone(),
                rx: single,
                tx_center: nodes.star.position,
                rx_center: pos,
                forced_los: false,
                o2i: false,
                with_error: true,
            });
        }
        paths.insert(rx, p);
    };

    let mut indoor = Vec::with_capacity(nodes.user_count());
    for k in 0..nodes.user_count() {
        let (pos, is_in) = nodes.user(k);
        indoor.push(is_in);
        add_receiver(Node::User(k), pos, is_in, &mut specs);
    }
    for (e, eve) in nodes.eavesdroppers.iter().enumerate() {
        add_receiver(Node::Eve(e), eve.position, false, &mut specs);
    }
    for e in nodes.active_eves() {
        let epos = nodes.eavesdroppers[e].position;
        for k in 0..nodes.user_count() {
            let (pos, is_in) = nodes.user(k);
            specs.push(LinkSpec {
                id: LinkId::new(Node::Eve(e), Node::User(k)),
                env: Environment::Umi,
                tx: vec![epos],
                rx: vec![pos],
                tx_center: epos,
                rx_center: pos,
                forced_los: false,
                o2i: is_in,
                with_error: true,
            });
        }
    }

    let mut links = BTreeMap::new();
    for spec in specs {
        let link = realize_link(&spec, scenario, cfg, seed)?;
        links.insert(spec.id, link);
    }
    Ok(LinkEnsemble {
        links,
        noise_power: cfg.noise_power(),
        dims: *dims,
        indoor,
        eve_roles: nodes.eavesdroppers.iter().map(|e| e.role).collect(),
        paths,
        uav_position: nodes.uav,
        fc_ghz: cfg.fc_ghz,
    })
}

fn realize_link(spec: &LinkSpec, scenario: &Scenario, cfg: &ChannelConfig, seed: u64) -> Result<LinkChannel> {
    let stream = |name: &str| rng::substream(seed, &[rng::label("link"), spec.id.code(), rng::label(name)]);
    let delta = spec.rx_center - spec.tx_center;
    let d3d = delta.norm();
    let d2d = delta.x.hypot(delta.y);

    let los = spec.forced_los || {
        use rand::Rng;
        stream("los").random::<f64>() < los_probability(spec.env, d2d)
    };
    let kind = spec.env.kind(los);
    let pl = pathloss_db_with_height(kind, d3d, cfg.fc_ghz, spec.tx_center.z.min(spec.rx_center.z))?;
    let sigma = if los { cfg.shadow_los_db } else { cfg.shadow_nlos_db };
    let shadow = sigma * standard_normal(&mut stream("shadow"));

    let mut extra = 0.0;
    if spec.o2i {
        let elevation = delta.z.abs().atan2(d2d).to_degrees();
        extra += sample_o2i_db(cfg.fc_ghz, cfg.building, elevation, &mut stream("o2i"))?;
    }
    let blocked = scenario.blockage.is_blocked(spec.id);
    let state = if blocked {
        extra += scenario.blockage.chain.depth_db;
        LinkState::Blocked
    } else if los {
        LinkState::Los
    } else {
        LinkState::Nlos
    };
    let beta = db_to_linear(-(pl + shadow + extra));

    let specular = specular_component(&spec.tx, &spec.rx, cfg.wavelength());
    let g = sample_with_specular(state, cfg.rician_k_db, &specular, &mut stream("fading"));
    let channel = &g * Complex64::from(beta.sqrt());

    let (estimate, error_cov, error_power) = if spec.with_error {
        let n = channel.ncols();
        let error_power = cfg.error_ratio * beta * n as f64;
        let cov = super::isotropic_covariance(n, error_power)?;
        let mut err_rng = stream("error");
        let h = row_vector(&channel);
        let h_hat = h.map(|z| z - complex_normal(&mut err_rng, error_power / n as f64));
        let estimate = CMat::from_fn(1, n, |_, j| h_hat[j].conj());
        (estimate, cov, error_power)
    } else {
        (channel.clone(), CMat::zeros(0, 0), 0.0)
    };

    Ok(LinkChannel {
        id: spec.id,
        state,
        kind,
        pathloss_db: pl,
        shadow_db: shadow,
        extra_db: extra,
        beta,
        tx_center: spec.tx_center,
        rx_center: spec.rx_center,
        small_scale: g,
        channel,
        estimate,
        error_cov,
        error_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, re_trace};
    use crate::scenario::ScenarioConfig;

    fn dims() -> ArrayDims {
        ArrayDims { bs: 4, uav: 8, star: 16, holo: 32 }
    }

    #[test]
    fn blockage_scales_beta_by_depth() {
        let sc = ScenarioConfig::default();
        let mut scenario = Scenario::sample(&sc, 3).unwrap();
        scenario.blockage.blocked.values_mut().for_each(|b| *b = false);
        let id = LinkId::new(Node::Bs, Node::User(0));
        let clear = realize_ensemble(&scenario, &ChannelConfig::default(), &dims(), 17).unwrap();
        scenario.blockage.blocked.insert(id, true);
        let blocked = realize_ensemble(&scenario, &ChannelConfig::default(), &dims(), 17).unwrap();
        let ratio = clear.link(id).unwrap().beta / blocked.link(id).unwrap().beta;
        assert!((ratio - 100.0).abs() < 1e-9, "{ratio}");
        assert_eq!(blocked.link(id).unwrap().state, LinkState::Blocked);
    }

    #[test]
    fn indoor_direct_link_carries_building_loss() {
        let sc = ScenarioConfig::default();
        let mut scenario = Scenario::sample(&sc, 5).unwrap();
        scenario.blockage.blocked.values_mut().for_each(|b| *b = false);
        let ens = realize_ensemble(&scenario, &ChannelConfig::default(), &dims(), 1).unwrap();
        let k_in = ens.indoor.iter().position(|&x| x).unwrap();
        let k_out = ens.indoor.iter().position(|&x| !x).unwrap();
        assert!(ens.link(LinkId::new(Node::Bs, Node::User(k_in))).unwrap().extra_db > 0.0);
        assert_eq!(ens.link(LinkId::new(Node::Bs, Node::User(k_out))).unwrap().extra_db, 0.0);
        // STAR transmission link replaces the wall: no building loss.
        assert_eq!(ens.link(LinkId::new(Node::Star, Node::User(k_in))).unwrap().extra_db, 0.0);
    }

    #[test]
    fn ensemble_is_reproducible_and_covariances_are_bounded() {
        let sc = ScenarioConfig::default();
        let scenario = Scenario::sample(&sc, 8).unwrap();
        let a = realize_ensemble(&scenario, &ChannelConfig::default(), &dims(), 2).unwrap();
        let b = realize_ensemble(&scenario, &ChannelConfig::default(), &dims(), 2).unwrap();
        assert_eq!(a.links, b.links);
        for link in a.links.values() {
            assert!(link.beta > 0.0);
            if link.is_vector() {
                assert!(hermitian_eigenvalues(&link.error_cov).iter().all(|&l| l >= -1e-10));
                assert!(re_trace(&link.error_cov) <= link.error_power * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn relocation_rescales_gain_only() {
        let sc = ScenarioConfig::default();
        let scenario = Scenario::sample(&sc, 8).unwrap();
        let ens = realize_ensemble(&scenario, &ChannelConfig::default(), &dims(), 2).unwrap();
        let moved = ens.relocate_uav(&Position::new(40.0, -20.0, 80.0)).unwrap();
        let id = LinkId::new(Node::Uav, Node::User(0));
        let (a, b) = (ens.link(id).unwrap(), moved.link(id).unwrap());
        assert_eq!(a.small_scale, b.small_scale);
        assert!((b.error_power / b.beta - a.error_power / a.beta).abs() < 1e-12 * a.error_power / a.beta);
        let back = moved.relocate_uav(&ens.uav_position).unwrap();
        assert!((back.link(id).unwrap().beta / a.beta - 1.0).abs() < 1e-12);
    }
}
