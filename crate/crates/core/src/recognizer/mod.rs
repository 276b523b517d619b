//! Per-cluster scatterer counting: canonical features, an MLP regressor,
//! visibility-region filtering, static/dynamic classification and position
//! sampling.

mod features;
mod mlp;
mod train;
mod vr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::pointcloud::{Cluster, ClusterCuboid, PointCloud};
use crate::rtoracle::{GroundTruth, ScattererClass};
use crate::scenegen::TransceiverPose;
use crate::seed;

pub use features::{extract_features, FeatureVector, LinkFrame, FEATURE_DIM};
pub use mlp::{mlp_gradients, sigmoid, softplus, Activation, Gradients, MlpModel, OutputTransform};
pub use train::{train, training_log_csv, write_training_log, EpochLog, Samples, TrainConfig, TrainOutcome};
pub use vr::{distance_ratios, fit_vr, vr_filter, VREllipsoid, VrRatios};

/// Dimension ranges (inclusive, metres) of cuboids treated as vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleEnvelope {
    pub length: [f64; 2],
    pub width: [f64; 2],
    pub height: [f64; 2],
}

impl Default for VehicleEnvelope {
    fn default() -> Self {
        VehicleEnvelope {
            length: [3.0, 14.0],
            width: [1.5, 3.0],
            height: [1.2, 3.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecognizerConfig {
    /// Fraction of training scatterers each VR must cover.
    pub vr_quantile: f64,
    /// Inflation (m) of cluster cuboids when matching ground-truth scatterers.
    pub label_inflate: f64,
    pub vehicle_envelope: VehicleEnvelope,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig {
            vr_quantile: 0.95,
            label_inflate: 0.2,
            vehicle_envelope: VehicleEnvelope::default(),
        }
    }
}

impl RecognizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vr_quantile > 0.0 && self.vr_quantile <= 1.0) {
            return Err(Error::Config("vr_quantile must lie in (0, 1]".into()));
        }
        if self.label_inflate < 0.0 {
            return Err(Error::Config("label_inflate must be non-negative".into()));
        }
        let e = &self.vehicle_envelope;
        if [e.length, e.width, e.height].iter().any(|r| r[0] > r[1]) {
            return Err(Error::Config("vehicle envelope ranges must be ordered".into()));
        }
        Ok(())
    }
}

pub fn classify_cluster(cuboid: &ClusterCuboid, envelope: &VehicleEnvelope) -> ScattererClass {
    let within = |v: f64, r: [f64; 2]| v >= r[0] && v <= r[1];
    if within(cuboid.length, envelope.length) && within(cuboid.width, envelope.width) && within(cuboid.height, envelope.height) {
        ScattererClass::Dynamic
    } else {
        ScattererClass::Static
    }
}

/// Round half up of a non-negative estimate.
pub fn round_count(y: f64) -> usize {
    if y.is_finite() && y > 0.0 {
        (y + 0.5).floor() as usize
    } else {
        0
    }
}

pub fn predict_counts(model: &MlpModel, cuboids: &[ClusterCuboid], pose: &TransceiverPose) -> Result<Vec<usize>> {
    cuboids
        .iter()
        .map(|c| model.forward(&extract_features(c, pose)).map(round_count))
        .collect()
}

/// `count` member points, distinct when the cluster is large enough.
pub fn assign_positions(cloud: &PointCloud, cluster: &Cluster, count: usize, seed_value: u64) -> Vec<Vec3> {
    let members = &cluster.member_indices;
    if count == 0 || members.is_empty() {
        return Vec::new();
    }
    let mut rng = seed::rng(seed_value, &[0xA551, cluster.label as u64]);
    if count <= members.len() {
        index::sample(&mut rng, members.len(), count)
            .into_iter()
            .map(|k| cloud.points[members[k]])
            .collect()
    } else {
        (0..count).map(|_| cloud.points[members[rng.gen_range(0..members.len())]]).collect()
    }
}

/// Training targets: each ground-truth scatterer is credited to the first
/// cluster (in order) whose inflated cuboid contains it; the rest are dropped.
pub fn count_labels(cuboids: &[ClusterCuboid], gt: &GroundTruth, inflate: f64) -> Vec<usize> {
    let mut counts = vec![0; cuboids.len()];
    for s in &gt.scatterers {
        if let Some(k) = cuboids.iter().position(|c| c.contains(s.position, inflate)) {
            counts[k] += 1;
        }
    }
    counts
}

/// One cluster after recognition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizedCluster {
    pub label: usize,
    pub cuboid: ClusterCuboid,
    pub class: ScattererClass,
    /// MLP count before VR filtering.
    pub raw_count: usize,
    pub count: usize,
    pub positions: Vec<Vec3>,
}

/// Trained model plus fitted VR ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct Recognizer {
    pub model: MlpModel,
    pub vr: VrRatios,
    pub config: RecognizerConfig,
}

impl Recognizer {
    pub fn fit_ratios(ground_truths: &[GroundTruth], q: f64) -> Result<VrRatios> {
        Ok(VrRatios {
            rho_static: fit_vr(ground_truths, ScattererClass::Static, q)?,
            rho_dynamic: fit_vr(ground_truths, ScattererClass::Dynamic, q)?,
        })
    }

    /// Counts, VR filtering and positions for every cluster of one snapshot.
    pub fn recognize(
        &self,
        cloud: &PointCloud,
        clusters: &[Cluster],
        cuboids: &[ClusterCuboid],
        pose: &TransceiverPose,
        seed_value: u64,
    ) -> Result<Vec<RecognizedCluster>> {
        if clusters.len() != cuboids.len() {
            return Err(Error::Misaligned(clusters.len(), cuboids.len()));
        }
        let raw = predict_counts(&self.model, cuboids, pose)?;
        let classes: Vec<ScattererClass> = cuboids
            .iter()
            .map(|c| classify_cluster(c, &self.config.vehicle_envelope))
            .collect();
        let counts = vr_filter(
            cuboids,
            &raw,
            &classes,
            &self.vr.ellipsoid(pose, ScattererClass::Static),
            &self.vr.ellipsoid(pose, ScattererClass::Dynamic),
        )?;
        Ok(clusters
            .iter()
            .zip(cuboids)
            .enumerate()
            .map(|(k, (cl, cub))| RecognizedCluster {
                label: cl.label,
                cuboid: *cub,
                class: classes[k],
                raw_count: raw[k],
                count: counts[k],
                positions: assign_positions(cloud, cl, counts[k], seed_value),
            })
            .collect())
    }
}
