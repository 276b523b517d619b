//! Single-bounce geometrical-optics tracer (image method) producing ground-truth
//! scatterers, line-of-sight state and the ground reflection point.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Cuboid, Vec3};
use crate::scenegen::{ObjectKind, Scene, TransceiverPose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScattererClass {
    Static,
    Dynamic,
}

impl ScattererClass {
    pub fn of(kind: ObjectKind) -> Self {
        if kind.is_vehicle() {
            ScattererClass::Dynamic
        } else {
            ScattererClass::Static
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScattererClass::Static => "static",
            ScattererClass::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Vec3,
    pub kind: ScattererClass,
    pub source_object_id: u32,
    /// Face index of the source cuboid (+x, -x, +y, -y, +z, -z).
    pub face: u8,
    /// dB, non-negative.
    pub reflection_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(rename = "snapshot")]
    pub snapshot_index: u64,
    pub los_blocked: bool,
    pub tx: Vec3,
    pub rx: Vec3,
    pub scatterers: Vec<Scatterer>,
    /// Specular point on the ground, absent when either leg is blocked.
    #[serde(default)]
    pub ground_point: Option<Vec3>,
}

impl GroundTruth {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<GroundTruth> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn of_class(&self, class: ScattererClass) -> impl Iterator<Item = &Scatterer> {
        self.scatterers.iter().filter(move |s| s.kind == class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub loss_building_db: f64,
    pub loss_vehicle_db: f64,
    pub loss_tree_db: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            loss_building_db: 6.0,
            loss_vehicle_db: 3.0,
            loss_tree_db: 10.0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if [self.loss_building_db, self.loss_vehicle_db, self.loss_tree_db].iter().any(|&l| l < 0.0) {
            return Err(Error::Config("reflection losses must be non-negative".into()));
        }
        Ok(())
    }

    pub fn loss(&self, kind: ObjectKind) -> f64 {
        match kind {
            ObjectKind::Building | ObjectKind::Ground => self.loss_building_db,
            ObjectKind::Car | ObjectKind::Bus => self.loss_vehicle_db,
            ObjectKind::Tree => self.loss_tree_db,
        }
    }
}

fn blocked_by(solids: &[(u32, Cuboid)], a: Vec3, b: Vec3, skip: Option<u32>) -> bool {
    solids
        .iter()
        .any(|(id, c)| Some(*id) != skip && c.blocks_segment(a, b))
}

/// True when the segment Tx–Rx passes through the interior of any non-ground object.
pub fn los_blocked(scene: &Scene, tx: Vec3, rx: Vec3) -> bool {
    scene.solids().any(|o| o.cuboid().blocks_segment(tx, rx))
}

/// Specular point of `face` for the pair, if it lies on the face.
fn specular_point(face: &crate::geom::Face, tx: Vec3, rx: Vec3) -> Option<Vec3> {
    let dt = face.signed_distance(tx);
    let dr = face.signed_distance(rx);
    if dt <= 0.0 || dr <= 0.0 {
        return None;
    }
    let image = face.mirror(tx);
    let p = image + (rx - image) * (dt / (dt + dr));
    face.contains_in_plane(p, 1e-9).then_some(p)
}

/// Ground specular point: the plane is the top of the ground object.
pub fn ground_reflection(scene: &Scene, tx: Vec3, rx: Vec3) -> Option<Vec3> {
    let g = scene.ground()?;
    let top = g.cuboid().faces()[4];
    let p = specular_point(&top, tx, rx)?;
    let solids: Vec<(u32, Cuboid)> = scene.solids().map(|o| (o.id, o.cuboid())).collect();
    if blocked_by(&solids, tx, p, None) || blocked_by(&solids, p, rx, None) {
        return None;
    }
    Some(p)
}

/// Image-method trace of every exposed face of every non-ground object. A face
/// contributes a scatterer when the specular point lies on it and neither leg
/// is occluded.
pub fn trace_ground_truth(scene: &Scene, pose: &TransceiverPose, cfg: &OracleConfig) -> GroundTruth {
    let (tx, rx) = (pose.tx_position, pose.rx_position);
    let solids: Vec<(u32, Cuboid)> = scene.solids().map(|o| (o.id, o.cuboid())).collect();
    let mut scatterers = Vec::new();
    for o in scene.solids() {
        let c = o.cuboid();
        for (fi, face) in c.faces().iter().enumerate() {
            let Some(p) = specular_point(face, tx, rx) else { continue };
            if blocked_by(&solids, tx, p, Some(o.id)) || blocked_by(&solids, p, rx, Some(o.id)) {
                continue;
            }
            scatterers.push(Scatterer {
                position: p,
                kind: ScattererClass::of(o.kind),
                source_object_id: o.id,
                face: fi as u8,
                reflection_loss: cfg.loss(o.kind),
            });
        }
    }
    GroundTruth {
        snapshot_index: scene.snapshot_index,
        los_blocked: blocked_by(&solids, tx, rx, None),
        tx,
        rx,
        scatterers,
        ground_point: ground_reflection(scene, tx, rx),
    }
}
