//! Point-cloud preprocessing (concatenation, ground removal, voxel
//! downsampling), DBSCAN clustering and circumscribed-cuboid fitting.

mod cuboid;
mod dbscan;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

pub use cuboid::{convex_hull, fit_cuboid, min_perimeter_rect, ClusterCuboid, Rect2};
pub use dbscan::{dbscan, Clustering};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub label: usize,
    pub member_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PointCloudConfig {
    pub ground_z_threshold: f64,
    pub voxel: f64,
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
}

impl Default for PointCloudConfig {
    fn default() -> Self {
        PointCloudConfig {
            ground_z_threshold: 0.2,
            voxel: 0.3,
            dbscan_eps: 1.0,
            dbscan_min_pts: 8,
        }
    }
}

impl PointCloudConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ground_z_threshold < 0.0 {
            return Err(Error::Config("ground_z_threshold must be non-negative".into()));
        }
        if self.voxel <= 0.0 || self.dbscan_eps <= 0.0 {
            return Err(Error::Config("voxel and dbscan_eps must be positive".into()));
        }
        if self.dbscan_min_pts == 0 {
            return Err(Error::Config("dbscan_min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        debug_assert!(points.iter().all(|p| p.is_finite()));
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes the `# count=N` header followed by one `x y z` line per point with
    /// nine significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + self.points.len() * 48);
        let _ = writeln!(s, "# count={}", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{:.8e} {:.8e} {:.8e}", p.x, p.y, p.z);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PointCloud> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse("point cloud", "empty file"))?;
        let count: usize = header
            .trim()
            .strip_prefix("# count=")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::parse("point cloud", format!("bad header `{header}`")))?;
        let mut points = Vec::with_capacity(count);
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse("point cloud", format!("line {}: {e}", i + 2)))?;
            if v.len() != 3 || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::parse("point cloud", format!("line {}: expected x y z", i + 2)));
            }
            points.push(Vec3::new(v[0], v[1], v[2]));
        }
        if points.len() != count {
            return Err(Error::parse("point cloud", format!("header says {count}, found {}", points.len())));
        }
        Ok(PointCloud { points })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<PointCloud> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PointCloud::from_text(&text)
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<Vec3> {
        indices.iter().map(|&i| self.points[i]).collect()
    }
}

/// Tx points followed by Rx points.
pub fn concatenate(tx: &PointCloud, rx: &PointCloud) -> PointCloud {
    let mut points = Vec::with_capacity(tx.len() + rx.len());
    points.extend_from_slice(&tx.points);
    points.extend_from_slice(&rx.points);
    PointCloud { points }
}

/// Keeps the points strictly above `z_threshold`.
pub fn remove_ground(cloud: &PointCloud, z_threshold: f64) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().copied().filter(|p| p.z > z_threshold).collect(),
    }
}

/// Replaces the members of each occupied voxel by their centroid. Output order
/// follows the first appearance of each voxel in the input.
pub fn voxel_downsample(cloud: &PointCloud, voxel: f64) -> PointCloud {
    let mut slot: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut sums: Vec<(Vec3, usize)> = Vec::new();
    for &p in &cloud.points {
        let key = (
            (p.x / voxel).floor() as i64,
            (p.y / voxel).floor() as i64,
            (p.z / voxel).floor() as i64,
        );
        let i = *slot.entry(key).or_insert_with(|| {
            sums.push((Vec3::ZERO, 0));
            sums.len() - 1
        });
        sums[i].0 += p;
        sums[i].1 += 1;
    }
    PointCloud {
        points: sums.into_iter().map(|(s, n)| s / n as f64).collect(),
    }
}

/// Runs Steps 1–4 up to clustering: concatenation, ground removal, voxel
/// downsampling and DBSCAN.
pub fn preprocess(tx: &PointCloud, rx: &PointCloud, cfg: &PointCloudConfig) -> (PointCloud, Clustering) {
    let merged = concatenate(tx, rx);
    let above = remove_ground(&merged, cfg.ground_z_threshold);
    let cloud = voxel_downsample(&above, cfg.voxel);
    let clustering = dbscan(&cloud, cfg.dbscan_eps, cfg.dbscan_min_pts);
    (cloud, clustering)
}

/// One line per cluster: `label members cx cy cz length width height angle`.
pub fn cluster_dump(clusters: &[Cluster], cuboids: &[ClusterCuboid]) -> String {
    let members: Vec<usize> = clusters.iter().map(|c| c.member_indices.len()).collect();
    cluster_dump_counts(&members, cuboids)
}

/// [`cluster_dump`] from member counts, labelling clusters by position.
pub fn cluster_dump_counts(members: &[usize], cuboids: &[ClusterCuboid]) -> String {
    let mut s = String::from("# label members cx cy cz length width height angle\n");
    for (label, (m, b)) in members.iter().zip(cuboids).enumerate() {
        let _ = writeln!(
            s,
            "{} {} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            label,
            m,
            b.center.x,
            b.center.y,
            b.center.z,
            b.length,
            b.width,
            b.height,
            b.angle()
        );
    }
    s
}

/// Parses a cluster dump back into `(label, member count, cuboid)` rows.
pub fn parse_cluster_dump(text: &str) -> Result<Vec<(usize, usize, ClusterCuboid)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::parse("cluster dump", format!("line {}", i + 1));
        if f.len() != 9 {
            return Err(bad());
        }
        let label = f[0].parse().map_err(|_| bad())?;
        let members = f[1].parse().map_err(|_| bad())?;
        let v: Vec<f64> = f[2..]
            .iter()
            .map(|x| x.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let angle = v[6];
        out.push((
            label,
            members,
            ClusterCuboid {
                center: Vec3::new(v[0], v[1], v[2]),
                length: v[3],
                width: v[4],
                height: v[5],
                orientation: [angle.cos(), angle.sin()],
            },
        ));
    }
    Ok(out)
}
