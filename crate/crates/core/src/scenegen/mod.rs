//! Procedural crossroad scenes: buildings lining two perpendicular streets, trees on
//! the sidewalks, and cars and buses driving straight lanes.
//!
//! The x-axis street is the "vertical" street and the y-axis street the
//! "horizontal" one. All three layouts share the same crossroad; the layout only
//! decides where the transceiver cars drive and therefore which links exist.

mod lidar;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Cuboid, Vec3};
use crate::seed;

pub use lidar::{simulate_lidar, LidarConfig, LidarMount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Building,
    Car,
    Bus,
    Tree,
    Ground,
}

impl ObjectKind {
    pub fn is_vehicle(self) -> bool {
        matches!(self, ObjectKind::Car | ObjectKind::Bus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    pub kind: ObjectKind,
    pub center: Vec3,
    /// Length, width, height.
    pub dims: Vec3,
    pub yaw: f64,
    pub velocity: Vec3,
}

impl SceneObject {
    pub fn cuboid(&self) -> Cuboid {
        Cuboid::new(self.center, self.dims, self.yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreetLayout {
    Vertical,
    Horizontal,
    Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vtd {
    Low,
    Medium,
    High,
}

impl StreetLayout {
    pub const ALL: [StreetLayout; 3] =
        [StreetLayout::Vertical, StreetLayout::Horizontal, StreetLayout::Crossing];

    pub fn as_str(self) -> &'static str {
        match self {
            StreetLayout::Vertical => "vertical",
            StreetLayout::Horizontal => "horizontal",
            StreetLayout::Crossing => "crossing",
        }
    }
}

impl Vtd {
    pub const ALL: [Vtd; 3] = [Vtd::Low, Vtd::Medium, Vtd::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Vtd::Low => "low",
            Vtd::Medium => "medium",
            Vtd::High => "high",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for StreetLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Vtd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StreetLayout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StreetLayout::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown layout `{s}`")))
    }
}

impl FromStr for Vtd {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Vtd::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown vtd `{s}`")))
    }
}

/// A transceiver pair. Both ends are car ids in the owning scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: usize,
    pub tx: u32,
    pub rx: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub layout: StreetLayout,
    pub vtd: Vtd,
    pub seed: u64,
    pub snapshot_index: u64,
    pub snapshot_period: f64,
    pub objects: Vec<SceneObject>,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransceiverPose {
    pub tx_position: Vec3,
    pub rx_position: Vec3,
    pub tx_velocity: Vec3,
    pub rx_velocity: Vec3,
}

impl TransceiverPose {
    pub fn stationary(tx: Vec3, rx: Vec3) -> Self {
        TransceiverPose {
            tx_position: tx,
            rx_position: rx,
            tx_velocity: Vec3::ZERO,
            rx_velocity: Vec3::ZERO,
        }
    }

    pub fn separation(&self) -> f64 {
        self.tx_position.distance(self.rx_position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    /// Background vehicle counts for the low, medium and high densities.
    pub vehicles_per_vtd: [usize; 3],
    /// Half length of each street, measured from the crossing.
    pub street_extent: f64,
    /// Lane centre offsets from a street's centre line.
    pub lane_offsets: [f64; 2],
    pub sidewalk_tree_offset: f64,
    pub tree_spacing: f64,
    /// Closest distance of a building front face to a street centre line.
    pub building_setback: f64,
    pub building_height: [f64; 2],
    pub building_length: [f64; 2],
    pub building_depth: [f64; 2],
    pub building_gap: [f64; 2],
    pub car_dims: [f64; 3],
    pub bus_dims: [f64; 3],
    pub tree_dims: [f64; 3],
    pub bus_fraction: f64,
    pub lane_speed: [f64; 2],
    pub snapshot_period: f64,
    /// Half side of the square ground object.
    pub ground_half_extent: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            vehicles_per_vtd: [4, 10, 20],
            street_extent: 120.0,
            lane_offsets: [1.75, 5.25],
            sidewalk_tree_offset: 8.5,
            tree_spacing: 15.0,
            building_setback: 12.0,
            building_height: [10.0, 30.0],
            building_length: [15.0, 35.0],
            building_depth: [10.0, 20.0],
            building_gap: [3.0, 6.0],
            car_dims: [4.5, 1.8, 2.0],
            bus_dims: [12.0, 2.5, 3.0],
            tree_dims: [1.0, 1.0, 6.0],
            bus_fraction: 0.25,
            lane_speed: [8.0, 14.0],
            snapshot_period: 0.1,
            ground_half_extent: 250.0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let v = self.vehicles_per_vtd;
        if v[0] > v[1] || v[1] > v[2] {
            return Err(Error::Config("vehicles_per_vtd must be non-decreasing".into()));
        }
        let dims = [self.car_dims, self.bus_dims, self.tree_dims];
        if dims.iter().flatten().any(|&d| d <= 0.0) {
            return Err(Error::Config("object dimensions must be positive".into()));
        }
        if self.snapshot_period <= 0.0 {
            return Err(Error::Config("snapshot_period must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.bus_fraction) {
            return Err(Error::Config("bus_fraction must lie in [0, 1]".into()));
        }
        for r in [
            self.building_height,
            self.building_length,
            self.building_depth,
            self.building_gap,
            self.lane_speed,
        ] {
            if r[0] <= 0.0 || r[0] > r[1] {
                return Err(Error::Config(format!("bad range {r:?}")));
            }
        }
        if self.building_setback <= self.lane_offsets[1] + self.bus_dims[1] {
            return Err(Error::Config("buildings would intrude on the road".into()));
        }
        Ok(())
    }

    /// Smallest |y| (for the x street) at which a building may start along the
    /// second street without overlapping the first street's row.
    fn cross_row_start(&self) -> f64 {
        self.building_setback + 2.0 + self.building_depth[1] + 4.0
    }

    /// Slot positions along a lane, away from the intersection box.
    fn lane_slots(&self) -> Vec<f64> {
        let spacing = self.bus_dims[0] + 2.0;
        let first = self.building_setback + 3.0;
        let mut out = Vec::new();
        let mut s = first;
        while s <= self.street_extent - self.bus_dims[0] / 2.0 {
            out.push(s);
            out.push(-s);
            s += spacing;
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// A lane: which street, offset of its centre line, and heading.
#[derive(Debug, Clone, Copy)]
struct Lane {
    along_x: bool,
    offset: f64,
    yaw: f64,
}

impl Lane {
    fn all(cfg: &SceneConfig) -> Vec<Lane> {
        let mut lanes = Vec::new();
        for along_x in [true, false] {
            for &o in &cfg.lane_offsets {
                for off in [-o, o] {
                    // Right-hand traffic.
                    let yaw = match (along_x, off < 0.0) {
                        (true, true) => 0.0,
                        (true, false) => std::f64::consts::PI,
                        (false, true) => -std::f64::consts::FRAC_PI_2,
                        (false, false) => std::f64::consts::FRAC_PI_2,
                    };
                    lanes.push(Lane { along_x, offset: off, yaw });
                }
            }
        }
        lanes
    }

    fn position(&self, s: f64, z: f64) -> Vec3 {
        if self.along_x {
            Vec3::new(s, self.offset, z)
        } else {
            Vec3::new(self.offset, s, z)
        }
    }

    fn heading(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }
}

fn uniform<R: Rng>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.gen_range(r[0]..r[1])
    }
}

fn push(objects: &mut Vec<SceneObject>, kind: ObjectKind, center: Vec3, dims: Vec3, yaw: f64, velocity: Vec3) {
    let id = objects.len() as u32;
    objects.push(SceneObject { id, kind, center, dims, yaw, velocity });
}

fn static_world(cfg: &SceneConfig, seed_value: u64, objects: &mut Vec<SceneObject>) {
    let g = cfg.ground_half_extent;
    push(objects, ObjectKind::Ground, Vec3::new(0.0, 0.0, -0.05), Vec3::new(2.0 * g, 2.0 * g, 0.1), 0.0, Vec3::ZERO);

    let mut rng = seed::rng(seed_value, &[0xB0]);
    // Two rows per street side and direction: along x at |y| ≥ setback, along y
    // starting beyond the x rows.
    for along_x in [true, false] {
        for side in [-1.0, 1.0] {
            for dir in [-1.0, 1.0] {
                let mut u = if along_x { cfg.building_setback } else { cfg.cross_row_start() };
                loop {
                    let mut len = uniform(&mut rng, cfg.building_length);
                    if u + len > cfg.street_extent {
                        len = cfg.street_extent - u;
                        if len < 8.0 {
                            break;
                        }
                    }
                    let depth = uniform(&mut rng, cfg.building_depth);
                    let height = uniform(&mut rng, cfg.building_height);
                    let front = cfg.building_setback + rng.gen_range(0.0..2.0);
                    let along = dir * (u + len / 2.0);
                    let across = side * (front + depth / 2.0);
                    let (center, dims) = if along_x {
                        (Vec3::new(along, across, height / 2.0), Vec3::new(len, depth, height))
                    } else {
                        (Vec3::new(across, along, height / 2.0), Vec3::new(depth, len, height))
                    };
                    push(objects, ObjectKind::Building, center, dims, 0.0, Vec3::ZERO);
                    u += len + uniform(&mut rng, cfg.building_gap);
                    if u >= cfg.street_extent {
                        break;
                    }
                }
            }
        }
    }

    let t = Vec3::from(cfg.tree_dims);
    for along_x in [true, false] {
        for side in [-1.0, 1.0] {
            let mut s = cfg.building_setback + cfg.tree_spacing / 2.0;
            while s < cfg.street_extent {
                for dir in [-1.0, 1.0] {
                    let (x, y) = if along_x {
                        (dir * s, side * cfg.sidewalk_tree_offset)
                    } else {
                        (side * cfg.sidewalk_tree_offset, dir * s)
                    };
                    push(objects, ObjectKind::Tree, Vec3::new(x, y, t.z / 2.0), t, 0.0, Vec3::ZERO);
                }
                s += cfg.tree_spacing;
            }
        }
    }
}

/// Builds a crossroad scene. Deterministic in `(layout, vtd, seed)`; for a fixed
/// seed the static world and transceiver cars are shared by every density level
/// and the background traffic of a lower density is a prefix of a higher one.
pub fn build_scene(layout: StreetLayout, vtd: Vtd, seed_value: u64, cfg: &SceneConfig) -> Scene {
    let mut objects = Vec::new();
    static_world(cfg, seed_value, &mut objects);

    let lanes = Lane::all(cfg);
    let mut speed_rng = seed::rng(seed_value, &[0x5BEED]);
    let speeds: Vec<f64> = lanes.iter().map(|_| uniform(&mut speed_rng, cfg.lane_speed)).collect();

    let slots = cfg.lane_slots();
    let mut free: Vec<(usize, f64)> = (0..lanes.len())
        .flat_map(|l| slots.iter().map(move |&s| (l, s)))
        .collect();

    let layout_tag = layout as u64 + 1;
    let mut trx_rng = seed::rng(seed_value, &[0x7A, layout_tag]);
    let central = |&(_, s): &(usize, f64)| s.abs() <= cfg.street_extent / 2.0;
    let pick = |rng: &mut rand_chacha::ChaCha8Rng, free: &mut Vec<(usize, f64)>, along_x: bool, n: usize| {
        let mut chosen = Vec::new();
        for _ in 0..n {
            let candidates: Vec<usize> = free
                .iter()
                .enumerate()
                .filter(|(_, slot)| lanes[slot.0].along_x == along_x && central(slot))
                .map(|(i, _)| i)
                .collect();
            let i = *candidates.choose(rng).expect("lane slots exhausted");
            chosen.push(free.remove(i));
        }
        chosen
    };
    let (on_x, on_y) = match layout {
        StreetLayout::Vertical => (4, 0),
        StreetLayout::Horizontal => (0, 4),
        StreetLayout::Crossing => (3, 2),
    };
    let mut trx_slots = pick(&mut trx_rng, &mut free, true, on_x);
    trx_slots.extend(pick(&mut trx_rng, &mut free, false, on_y));

    let car = Vec3::from(cfg.car_dims);
    let bus = Vec3::from(cfg.bus_dims);
    let place = |objects: &mut Vec<SceneObject>, (l, s): (usize, f64), kind: ObjectKind| {
        let lane = lanes[l];
        let dims = if kind == ObjectKind::Bus { bus } else { car };
        let velocity = lane.heading() * speeds[l];
        push(objects, kind, lane.position(s, dims.z / 2.0), dims, lane.yaw, velocity);
    };
    let first_trx = objects.len() as u32;
    for slot in &trx_slots {
        place(&mut objects, *slot, ObjectKind::Car);
    }
    let trx_ids: Vec<u32> = (first_trx..objects.len() as u32).collect();

    // Draw the largest traffic set, keep a prefix.
    let mut traffic_rng = seed::rng(seed_value, &[0x7F, layout_tag]);
    free.shuffle(&mut traffic_rng);
    let max_n = cfg.vehicles_per_vtd[2].min(free.len());
    let kinds: Vec<ObjectKind> = (0..max_n)
        .map(|_| {
            if traffic_rng.gen::<f64>() < cfg.bus_fraction {
                ObjectKind::Bus
            } else {
                ObjectKind::Car
            }
        })
        .collect();
    let n = cfg.vehicles_per_vtd[vtd.index()].min(max_n);
    for (slot, kind) in free.iter().zip(&kinds).take(n) {
        place(&mut objects, *slot, *kind);
    }

    let links = match layout {
        StreetLayout::Vertical | StreetLayout::Horizontal => {
            let mut v = Vec::new();
            for i in 0..trx_ids.len() {
                for j in i + 1..trx_ids.len() {
                    v.push((trx_ids[i], trx_ids[j]));
                }
            }
            v
        }
        StreetLayout::Crossing => {
            let (xs, ys) = trx_ids.split_at(on_x);
            xs.iter().flat_map(|&a| ys.iter().map(move |&b| (a, b))).collect()
        }
    };
    let links = links
        .into_iter()
        .enumerate()
        .map(|(id, (tx, rx))| Link { id, tx, rx })
        .collect();

    Scene {
        layout,
        vtd,
        seed: seed_value,
        snapshot_index: 0,
        snapshot_period: cfg.snapshot_period,
        objects,
        links,
    }
}

/// Moves every object by `velocity × n × snapshot_period`.
pub fn advance_scene(scene: &Scene, n: u64) -> Scene {
    let dt = n as f64 * scene.snapshot_period;
    let mut out = scene.clone();
    for o in &mut out.objects {
        if o.velocity != Vec3::ZERO {
            o.center += o.velocity * dt;
        }
    }
    out.snapshot_index += n;
    out
}

impl Scene {
    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.get(id as usize).filter(|o| o.id == id).or_else(|| self.objects.iter().find(|o| o.id == id))
    }

    pub fn ground(&self) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.kind == ObjectKind::Ground)
    }

    /// Objects other than the ground.
    pub fn solids(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.iter().filter(|o| o.kind != ObjectKind::Ground)
    }

    pub fn vehicle_count(&self) -> usize {
        self.objects.iter().filter(|o| o.kind.is_vehicle()).count()
    }

    /// Largest vehicle speed in the scene.
    pub fn max_speed(&self) -> f64 {
        self.objects.iter().map(|o| o.velocity.norm()).fold(0.0, f64::max)
    }

    /// Sensor/antenna mount on top of a vehicle.
    pub fn mount(&self, vehicle: u32, lidar: &LidarConfig) -> Option<LidarMount> {
        let o = self.object(vehicle)?;
        Some(LidarMount {
            position: Vec3::new(o.center.x, o.center.y, o.center.z + o.dims.z / 2.0 + lidar.mount_height),
            platform: Some(o.id),
        })
    }

    pub fn pose(&self, link: &Link, lidar: &LidarConfig) -> Option<TransceiverPose> {
        let tx = self.object(link.tx)?;
        let rx = self.object(link.rx)?;
        Some(TransceiverPose {
            tx_position: self.mount(link.tx, lidar)?.position,
            rx_position: self.mount(link.rx, lidar)?.position,
            tx_velocity: tx.velocity,
            rx_velocity: rx.velocity,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_is_deterministic() {
        let cfg = SceneConfig::default();
        let a = build_scene(StreetLayout::Crossing, Vtd::High, 7, &cfg);
        let b = build_scene(StreetLayout::Crossing, Vtd::High, 7, &cfg);
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn vehicle_count_monotone_in_density() {
        let cfg = SceneConfig::default();
        for seed in 0..100 {
            for layout in StreetLayout::ALL {
                let counts: Vec<usize> =
                    Vtd::ALL.iter().map(|&v| build_scene(layout, v, seed, &cfg).vehicle_count()).collect();
                assert!(counts[0] <= counts[1] && counts[1] <= counts[2], "seed {seed}: {counts:?}");
            }
        }
    }

    #[test]
    fn buildings_stay_off_the_streets() {
        let cfg = SceneConfig::default();
        let scene = build_scene(StreetLayout::Vertical, Vtd::Low, 1, &cfg);
        let mut n = 0;
        for o in scene.objects.iter().filter(|o| o.kind == ObjectKind::Building) {
            n += 1;
            let hx = o.dims.x / 2.0;
            let hy = o.dims.y / 2.0;
            let near_x = o.center.x.abs() - hx;
            let near_y = o.center.y.abs() - hy;
            assert!(near_x >= cfg.building_setback - 1e-9 && near_y >= cfg.building_setback - 1e-9,
                "building {} intrudes on a street: {:?}", o.id, o.center);
            assert!(o.center.x.abs() + hx <= cfg.street_extent + 1e-9);
            assert!(o.center.y.abs() + hy <= cfg.street_extent + 1e-9);
            assert!(o.dims.z >= cfg.building_height[0] && o.dims.z <= cfg.building_height[1]);
        }
        assert!(n > 8);
    }

    #[test]
    fn no_static_overlaps() {
        let cfg = SceneConfig::default();
        let scene = build_scene(StreetLayout::Crossing, Vtd::High, 3, &cfg);
        let solids: Vec<_> = scene.solids().collect();
        // Every yaw at snapshot 0 is a multiple of 90°, so footprint AABBs are exact.
        let aabb = |o: &SceneObject| {
            let f = o.cuboid().footprint();
            let xs = f.map(|p| p.0);
            let ys = f.map(|p| p.1);
            let lo = |v: [f64; 4]| v.into_iter().fold(f64::INFINITY, f64::min);
            let hi = |v: [f64; 4]| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
            (lo(xs), hi(xs), lo(ys), hi(ys))
        };
        for (i, a) in solids.iter().enumerate() {
            for b in &solids[i + 1..] {
                let (ax0, ax1, ay0, ay1) = aabb(a);
                let (bx0, bx1, by0, by1) = aabb(b);
                let overlap_x = ax1.min(bx1) - ax0.max(bx0);
                let overlap_y = ay1.min(by1) - ay0.max(by0);
                assert!(overlap_x <= 1e-9 || overlap_y <= 1e-9, "objects {} and {} overlap", a.id, b.id);
            }
        }
    }

    #[test]
    fn scene_invariants() {
        let cfg = SceneConfig::default();
        for layout in StreetLayout::ALL {
            let s = build_scene(layout, Vtd::Medium, 11, &cfg);
            assert_eq!(s.objects.iter().filter(|o| o.kind == ObjectKind::Ground).count(), 1);
            assert_eq!(s.links.len(), 6);
            for o in &s.objects {
                assert!(o.dims.x > 0.0 && o.dims.y > 0.0 && o.dims.z > 0.0);
                match o.kind {
                    ObjectKind::Car => assert_eq!(o.dims.z, 2.0),
                    ObjectKind::Bus => assert_eq!(o.dims.z, 3.0),
                    _ => assert_eq!(o.velocity, Vec3::ZERO),
                }
                if o.kind.is_vehicle() {
                    assert!(o.center.z - o.dims.z / 2.0 >= 0.0);
                }
            }
            for l in &s.links {
                assert_eq!(s.object(l.tx).unwrap().kind, ObjectKind::Car);
                assert_eq!(s.object(l.rx).unwrap().kind, ObjectKind::Car);
                let pose = s.pose(l, &LidarConfig::default()).unwrap();
                assert!(pose.separation() > 0.0);
            }
        }
    }

    #[test]
    fn advance_moves_only_vehicles() {
        let cfg = SceneConfig::default();
        let s = build_scene(StreetLayout::Vertical, Vtd::High, 5, &cfg);
        assert_eq!(advance_scene(&s, 0), s);

        let mut one = s.clone();
        one.objects.truncate(1);
        one.objects.push(SceneObject {
            id: 1,
            kind: ObjectKind::Car,
            center: Vec3::new(0.0, 0.0, 1.0),
            dims: Vec3::new(4.5, 1.8, 2.0),
            yaw: 0.0,
            velocity: Vec3::new(10.0, 0.0, 0.0),
        });
        let moved = advance_scene(&one, 5);
        assert!((moved.objects[1].center - Vec3::new(5.0, 0.0, 1.0)).norm() < 1e-12);
        assert_eq!(moved.snapshot_index, 5);
        assert_eq!(moved.objects[0], one.objects[0]);

        let a = advance_scene(&advance_scene(&s, 2), 3);
        let b = advance_scene(&s, 5);
        assert_eq!(a.snapshot_index, b.snapshot_index);
        for (x, y) in a.objects.iter().zip(&b.objects) {
            assert!((x.center - y.center).norm() < 1e-9);
        }
    }

    #[test]
    fn scene_json_keys() {
        let s = build_scene(StreetLayout::Horizontal, Vtd::Low, 2, &SceneConfig::default());
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        for k in ["layout", "vtd", "seed", "objects"] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
        let o = &v["objects"][0];
        for k in ["id", "kind", "center", "dims", "yaw", "velocity"] {
            assert!(o.get(k).is_some(), "missing object key {k}");
        }
        let back: Scene = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
