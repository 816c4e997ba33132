//! Network geometry: node placement, user mobility, UAV kinematics and the
//! dynamic-blockage Markov process.
//!
//! Coordinates are metres in a right-handed frame with the base station at the
//! horizontal origin and `z` pointing up.

use std::collections::BTreeMap;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

pub type Position = Point3<f64>;

/// A planar region used for placement and containment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Disc { center: [f64; 2], radius: f64 },
    /// Simple polygon, vertices in order.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Region {
    pub fn rectangle(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Region::Polygon {
            vertices: vec![lower, [upper[0], lower[1]], upper, [lower[0], upper[1]]],
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
            Region::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return 0.0;
                }
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - b[0] * a[1]
                    })
                    .sum();
                0.5 * twice.abs()
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Region::Disc { center, radius } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                dx * dx + dy * dy <= radius * radius * (1.0 + 1e-12)
            }
            Region::Polygon { vertices } => {
                if on_polygon_boundary(vertices, p) {
                    return true;
                }
                let mut inside = false;
                let n = vertices.len();
                let mut j = n.wrapping_sub(1);
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[j]);
                    if (a[1] > p[1]) != (b[1] > p[1])
                        && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]
                    {
                        inside = !inside;
                    }
                    j = i;
                }
                inside
            }
        }
    }

    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Region::Disc { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Region::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Uniform point in the region.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match self {
            Region::Disc { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                [center[0] + r * phi.cos(), center[1] + r * phi.sin()]
            }
            Region::Polygon { .. } => {
                let (lo, hi) = self.bounding_box();
                loop {
                    let p = [
                        lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
                        lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
                    ];
                    if self.contains(p) {
                        return p;
                    }
                }
            }
        }
    }

    /// Nearest point of the region (identity for interior points).
    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        if self.contains(p) {
            return p;
        }
        match self {
            Region::Disc { center, radius } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let d = (dx * dx + dy * dy).sqrt();
                [center[0] + dx * radius / d, center[1] + dy * radius / d]
            }
            Region::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = vertices[0];
                let mut best_d = f64::INFINITY;
                for i in 0..n {
                    let q = nearest_on_segment(vertices[i], vertices[(i + 1) % n], p);
                    let d = (q[0] - p[0]).hypot(q[1] - p[1]);
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                best
            }
        }
    }
}

fn nearest_on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ux * ux + uy * uy;
    if len2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * ux + (p[1] - a[1]) * uy) / len2).clamp(0.0, 1.0);
    [a[0] + t * ux, a[1] + t * uy]
}

fn on_polygon_boundary(vertices: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = vertices.len();
    (0..n).any(|i| {
        let q = nearest_on_segment(vertices[i], vertices[(i + 1) % n], p);
        (q[0] - p[0]).hypot(q[1] - p[1]) < 1e-9
    })
}

/// Samples a homogeneous Poisson point process of the given intensity
/// (nodes per square metre) over `region`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, region: &Region, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::param(format!("PPP density must be >= 0, got {density}")));
    }
    let mean = density * region.area();
    if mean <= 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::param(e.to_string()))?
        .sample(rng) as usize;
    Ok((0..count).map(|_| region.sample_uniform(rng)).collect())
}

/// Position plus outward facing normal of a planar surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePose {
    pub position: Position,
    pub normal: Vector3<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveRole {
    Idle,
    Active,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eavesdropper {
    pub position: Position,
    pub role: EveRole,
}

/// Static and stochastic placement of every node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub bs: Position,
    pub uav: Position,
    pub star: SurfacePose,
    pub hris: SurfacePose,
    pub outdoor_users: Vec<Position>,
    pub indoor_users: Vec<Position>,
    pub eavesdroppers: Vec<Eavesdropper>,
}

impl NodeSet {
    pub fn user_count(&self) -> usize {
        self.outdoor_users.len() + self.indoor_users.len()
    }

    /// Users are indexed outdoor first, then indoor.
    pub fn user(&self, k: usize) -> (Position, bool) {
        let n_out = self.outdoor_users.len();
        if k < n_out {
            (self.outdoor_users[k], false)
        } else {
            (self.indoor_users[k - n_out], true)
        }
    }

    pub fn active_eves(&self) -> impl Iterator<Item = usize> + '_ {
        self.eavesdroppers
            .iter()
            .enumerate()
            .filter(|(_, e)| e.role == EveRole::Active)
            .map(|(i, _)| i)
    }
}

/// Network endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    Bs,
    Uav,
    Star,
    Holo,
    User(usize),
    Eve(usize),
}

impl Node {
    pub(crate) fn code(self) -> u64 {
        match self {
            Node::Bs => 1,
            Node::Uav => 2,
            Node::Star => 3,
            Node::Holo => 4,
            Node::User(k) => 1_000 + k as u64,
            Node::Eve(e) => 100_000 + e as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkId {
    pub from: Node,
    pub to: Node,
}

impl LinkId {
    pub fn new(from: Node, to: Node) -> Self {
        LinkId { from, to }
    }

    pub(crate) fn code(self) -> u64 {
        self.from.code() * 1_000_003 + self.to.code()
    }
}

impl std::fmt::Display for LinkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}->{:?}", self.from, self.to)
    }
}

/// Per-link propagation state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkState {
    Los,
    Nlos,
    Blocked,
}

/// Two-state (clear / blocked) Markov chain, one transition per slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockageChain {
    /// Row-stochastic matrix over [clear, blocked].
    pub transition: [[f64; 2]; 2],
    pub slot_s: f64,
    pub depth_db: f64,
}

impl BlockageChain {
    /// Chain with the given mean sojourn times, discretised at `slot_s`.
    pub fn from_durations(mean_blocked_s: f64, mean_clear_s: f64, slot_s: f64, depth_db: f64) -> Result<Self> {
        if mean_blocked_s <= 0.0 || mean_clear_s <= 0.0 || slot_s <= 0.0 {
            return Err(Error::param("blockage durations and slot must be positive"));
        }
        let p_block = (slot_s / mean_clear_s).min(1.0);
        let p_clear = (slot_s / mean_blocked_s).min(1.0);
        let chain = BlockageChain {
            transition: [[1.0 - p_block, p_block], [p_clear, 1.0 - p_clear]],
            slot_s,
            depth_db,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.transition {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(Error::param(format!("transition row {row:?} is not stochastic")));
            }
        }
        if !(self.depth_db >= 0.0) {
            return Err(Error::param("blockage depth must be >= 0 dB"));
        }
        if !(self.slot_s > 0.0) {
            return Err(Error::param("blockage slot must be positive"));
        }
        Ok(())
    }

    /// Stationary probability of the blocked state.
    pub fn stationary_blocked(&self) -> f64 {
        let a = self.transition[0][1];
        let b = self.transition[1][0];
        if a + b == 0.0 {
            0.0
        } else {
            a / (a + b)
        }
    }
}

/// Blocked flags of every tracked link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockageState {
    pub chain: BlockageChain,
    pub blocked: BTreeMap<LinkId, bool>,
}

impl BlockageState {
    pub fn new(chain: BlockageChain, links: impl IntoIterator<Item = LinkId>) -> Result<Self> {
        chain.validate()?;
        Ok(BlockageState { chain, blocked: links.into_iter().map(|l| (l, false)).collect() })
    }

    /// Draws every link from the chain's stationary distribution.
    pub fn randomize_stationary<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let p = self.chain.stationary_blocked();
        for flag in self.blocked.values_mut() {
            *flag = rng.random::<f64>() < p;
        }
    }

    pub fn is_blocked(&self, link: LinkId) -> bool {
        self.blocked.get(&link).copied().unwrap_or(false)
    }

    pub fn blocked_fraction(&self) -> f64 {
        if self.blocked.is_empty() {
            return 0.0;
        }
        self.blocked.values().filter(|b| **b).count() as f64 / self.blocked.len() as f64
    }
}

/// Advances every link of the blockage process by `dt` seconds
/// (`max(1, round(dt / slot))` Markov steps).
pub fn step_blockage<R: Rng + ?Sized>(state: &BlockageState, dt: f64, rng: &mut R) -> Result<BlockageState> {
    state.chain.validate()?;
    if !(dt > 0.0) {
        return Err(Error::param("dt must be positive"));
    }
    let steps = ((dt / state.chain.slot_s).round() as usize).max(1);
    let mut next = state.clone();
    for flag in next.blocked.values_mut() {
        for _ in 0..steps {
            let row = state.chain.transition[*flag as usize];
            *flag = rng.random::<f64>() < row[1];
        }
    }
    Ok(next)
}

/// Random-waypoint state of one indoor user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Walker {
    pub waypoint: [f64; 2],
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityState {
    pub walkers: Vec<Walker>,
    pub speed_range: [f64; 2],
    pub uav_max_speed: f64,
}

impl MobilityState {
    pub fn new<R: Rng + ?Sized>(n_users: usize, region: &Region, speed_range: [f64; 2], uav_max_speed: f64, rng: &mut R) -> Self {
        let walkers = (0..n_users)
            .map(|_| Walker { waypoint: region.sample_uniform(rng), speed: draw_speed(speed_range, rng) })
            .collect();
        MobilityState { walkers, speed_range, uav_max_speed }
    }
}

fn draw_speed<R: Rng + ?Sized>(range: [f64; 2], rng: &mut R) -> f64 {
    range[0] + (range[1] - range[0]) * rng.random::<f64>()
}

/// Moves every indoor user toward its waypoint for `dt` seconds. A user that
/// reaches its waypoint stops there and draws a fresh waypoint and speed.
pub fn step_mobility<R: Rng + ?Sized>(
    state: &MobilityState,
    nodes: &NodeSet,
    footprint: &Region,
    dt: f64,
    rng: &mut R,
) -> Result<(MobilityState, NodeSet)> {
    if !(dt > 0.0) {
        return Err(Error::param("dt must be positive"));
    }
    if state.walkers.len() != nodes.indoor_users.len() {
        return Err(Error::param("mobility state does not match indoor user count"));
    }
    let mut next_state = state.clone();
    let mut next_nodes = nodes.clone();
    for (walker, pos) in next_state.walkers.iter_mut().zip(next_nodes.indoor_users.iter_mut()) {
        let (dx, dy) = (walker.waypoint[0] - pos.x, walker.waypoint[1] - pos.y);
        let remaining = dx.hypot(dy);
        let travel = walker.speed * dt;
        let target = if remaining <= travel {
            let arrived = walker.waypoint;
            walker.waypoint = footprint.sample_uniform(rng);
            walker.speed = draw_speed(state.speed_range, rng);
            arrived
        } else {
            [pos.x + dx * travel / remaining, pos.y + dy * travel / remaining]
        };
        let clamped = footprint.clamp(target);
        pos.x = clamped[0];
        pos.y = clamped[1];
    }
    Ok((next_state, next_nodes))
}

/// Moves the UAV toward `target` with speed bounded by `max_speed`.
pub fn step_uav(current: &Position, target: &Position, max_speed: f64, dt: f64) -> Position {
    let delta = target - current;
    let dist = delta.norm();
    let reach = max_speed * dt;
    if dist <= reach {
        *target
    } else {
        current + delta * (reach / dist)
    }
}

/// Node-count policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Placement {
    Fixed { outdoor_users: usize, indoor_users: usize, idle_eves: usize, active_eves: usize },
    /// Densities in nodes per square metre.
    Ppp { lambda_out: f64, lambda_in: f64, lambda_eve: f64, active_fraction: f64 },
}

/// Box of admissible horizontal UAV positions at fixed altitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavRegion {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub altitude: f64,
}

impl UavRegion {
    pub fn center(&self) -> Position {
        Position::new(0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1]), self.altitude)
    }

    pub fn contains(&self, p: &Position) -> bool {
        let tol = 1e-9;
        p.x >= self.x[0] - tol
            && p.x <= self.x[1] + tol
            && p.y >= self.y[0] - tol
            && p.y <= self.y[1] + tol
            && (p.z - self.altitude).abs() <= tol
    }

    pub fn clamp(&self, p: &Position) -> Position {
        Position::new(p.x.clamp(self.x[0], self.x[1]), p.y.clamp(self.y[0], self.y[1]), self.altitude)
    }
}

/// Scenario section of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bs_height: f64,
    pub uav_region: UavRegion,
    pub uav_max_speed: f64,
    pub outdoor_radius: f64,
    pub user_height: f64,
    /// Lower-left corner of the square building footprint.
    pub building_origin: [f64; 2],
    pub building_size: f64,
    pub star_height: f64,
    pub hris_height: f64,
    pub placement: Placement,
    pub indoor_speed: [f64; 2],
    pub blockage_mean_blocked_s: f64,
    pub blockage_mean_clear_s: f64,
    pub blockage_slot_s: f64,
    pub blockage_depth_db: f64,
    /// Seconds of mobility and blockage evolution applied after placement.
    pub warmup_s: f64,
    pub step_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            bs_height: 25.0,
            uav_region: UavRegion { x: [-150.0, 150.0], y: [-150.0, 150.0], altitude: 80.0 },
            uav_max_speed: 15.0,
            outdoor_radius: 60.0,
            user_height: 1.5,
            building_origin: [30.0, -10.0],
            building_size: 20.0,
            star_height: 5.0,
            hris_height: 2.0,
            placement: Placement::Fixed { outdoor_users: 2, indoor_users: 2, idle_eves: 1, active_eves: 1 },
            indoor_speed: [0.5, 1.0],
            blockage_mean_blocked_s: 0.5,
            blockage_mean_clear_s: 2.0,
            blockage_slot_s: 0.1,
            blockage_depth_db: 20.0,
            warmup_s: 0.0,
            step_s: 0.1,
        }
    }
}

impl ScenarioConfig {
    pub fn footprint(&self) -> Region {
        let [x0, y0] = self.building_origin;
        Region::rectangle([x0, y0], [x0 + self.building_size, y0 + self.building_size])
    }

    pub fn outdoor_region(&self) -> Region {
        Region::Disc { center: [0.0, 0.0], radius: self.outdoor_radius }
    }

    pub fn blockage_chain(&self) -> Result<BlockageChain> {
        BlockageChain::from_durations(
            self.blockage_mean_blocked_s,
            self.blockage_mean_clear_s,
            self.blockage_slot_s,
            self.blockage_depth_db,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.uav_region;
        if !(r.x[0] < r.x[1] && r.y[0] < r.y[1]) {
            return Err(Error::Config("UAV region must have positive extent".into()));
        }
        if self.outdoor_radius <= 0.0 || self.building_size <= 0.0 {
            return Err(Error::Config("regions must have positive size".into()));
        }
        if !(0.0 < self.indoor_speed[0] && self.indoor_speed[0] <= self.indoor_speed[1]) {
            return Err(Error::Config("indoor speed range must be positive and ordered".into()));
        }
        if let Placement::Ppp { lambda_out, lambda_in, lambda_eve, active_fraction } = self.placement {
            if lambda_out < 0.0 || lambda_in < 0.0 || lambda_eve < 0.0 || !(0.0..=1.0).contains(&active_fraction) {
                return Err(Error::Config("PPP densities must be >= 0 and active fraction in [0,1]".into()));
            }
        }
        self.blockage_chain().map(|_| ())
    }
}

/// A network snapshot together with its dynamic state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub nodes: NodeSet,
    pub mobility: MobilityState,
    pub blockage: BlockageState,
}

impl Scenario {
    /// Places all nodes, draws the initial blockage state from its stationary
    /// law and applies the configured warm-up evolution. Deterministic in
    /// `seed`.
    pub fn sample(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::substream(seed, &[rng::label("scenario")]);
        let footprint = config.footprint();
        let outdoor = config.outdoor_region();
        let h_u = config.user_height;

        let sample_outdoor = |rng: &mut StreamRng| loop {
            let p = outdoor.sample_uniform(rng);
            if !footprint.contains(p) {
                return p;
            }
        };

        let (n_out, n_in, roles): (usize, usize, Vec<EveRole>) = match config.placement {
            Placement::Fixed { outdoor_users, indoor_users, idle_eves, active_eves } => (
                outdoor_users,
                indoor_users,
                std::iter::repeat_n(EveRole::Idle, idle_eves)
                    .chain(std::iter::repeat_n(EveRole::Active, active_eves))
                    .collect(),
            ),
            Placement::Ppp { lambda_out, lambda_in, lambda_eve, active_fraction } => {
                let n_out = sample_ppp(lambda_out, &outdoor, &mut rng)?.len();
                let n_in = sample_ppp(lambda_in, &footprint, &mut rng)?.len();
                let n_eve = sample_ppp(lambda_eve, &outdoor, &mut rng)?.len();
                let roles = (0..n_eve)
                    .map(|_| if rng.random::<f64>() < active_fraction { EveRole::Active } else { EveRole::Idle })
                    .collect();
                (n_out, n_in, roles)
            }
        };

        let outdoor_users = (0..n_out)
            .map(|_| {
                let p = sample_outdoor(&mut rng);
                Position::new(p[0], p[1], h_u)
            })
            .collect();
        let indoor_users = (0..n_in)
            .map(|_| {
                let p = footprint.sample_uniform(&mut rng);
                Position::new(p[0], p[1], h_u)
            })
            .collect();
        let eavesdroppers = roles
            .into_iter()
            .map(|role| {
                let p = sample_outdoor(&mut rng);
                Eavesdropper { position: Position::new(p[0], p[1], h_u), role }
            })
            .collect();

        let [x0, y0] = config.building_origin;
        let s = config.building_size;
        let nodes = NodeSet {
            bs: Position::new(0.0, 0.0, config.bs_height),
            uav: config.uav_region.center(),
            // Street-facing facade is the x = x0 wall, facing the BS.
            star: SurfacePose {
                position: Position::new(x0, y0 + 0.5 * s, config.star_height),
                normal: Vector3::new(-1.0, 0.0, 0.0),
            },
            // Back interior wall, facing into the room.
            hris: SurfacePose {
                position: Position::new(x0 + s, y0 + 0.5 * s, config.hris_height),
                normal: Vector3::new(-1.0, 0.0, 0.0),
            },
            outdoor_users,
            indoor_users,
            eavesdroppers,
        };

        let mobility = MobilityState::new(n_in, &footprint, config.indoor_speed, config.uav_max_speed, &mut rng);
        let mut blockage = BlockageState::new(config.blockage_chain()?, tracked_links(&nodes))?;
        blockage.randomize_stationary(&mut rng);

        let mut scenario = Scenario { config: config.clone(), nodes, mobility, blockage };
        let steps = (config.warmup_s / config.step_s).round() as usize;
        for _ in 0..steps {
            scenario = scenario.step(config.step_s, &mut rng)?;
        }
        Ok(scenario)
    }

    /// Advances mobility and blockage by `dt`.
    pub fn step<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Result<Self> {
        let (mobility, nodes) = step_mobility(&self.mobility, &self.nodes, &self.config.footprint(), dt, rng)?;
        let blockage = step_blockage(&self.blockage, dt, rng)?;
        Ok(Scenario { config: self.config.clone(), nodes, mobility, blockage })
    }
}

/// Links whose blockage is tracked: every hop that terminates at a user or an
/// eavesdropper.
pub fn tracked_links(nodes: &NodeSet) -> Vec<LinkId> {
    let mut links = Vec::new();
    let n_out = nodes.outdoor_users.len();
    for k in 0..nodes.user_count() {
        let rx = Node::User(k);
        links.push(LinkId::new(Node::Bs, rx));
        links.push(LinkId::new(Node::Uav, rx));
        links.push(LinkId::new(Node::Star, rx));
        if k >= n_out {
            links.push(LinkId::new(Node::Holo, rx));
        }
        for e in nodes.active_eves() {
            links.push(LinkId::new(Node::Eve(e), rx));
        }
    }
    for e in 0..nodes.eavesdroppers.len() {
        let rx = Node::Eve(e);
        links.push(LinkId::new(Node::Bs, rx));
        links.push(LinkId::new(Node::Uav, rx));
        links.push(LinkId::new(Node::Star, rx));
    }
    links
}
