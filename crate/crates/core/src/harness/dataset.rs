use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::Config;
use crate::error::{Error, Result};
use crate::pointcloud::{self, fit_cuboid, parse_cluster_dump, ClusterCuboid, Clustering, PointCloud};
use crate::recognizer::count_labels;
use crate::rtoracle::{trace_ground_truth, GroundTruth};
use crate::scenegen::{advance_scene, build_scene, simulate_lidar, Link, Scene, StreetLayout, TransceiverPose, Vtd};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub layout: StreetLayout,
    pub vtd: Vtd,
}

impl Condition {
    pub fn all(cfg: &Config) -> Vec<Condition> {
        cfg.dataset
            .vtds
            .iter()
            .flat_map(|&vtd| cfg.dataset.layouts.iter().map(move |&layout| Condition { layout, vtd }))
            .collect()
    }

    pub fn key(&self) -> u64 {
        self.layout as u64 * 3 + self.vtd.index() as u64
    }

    pub fn name(&self) -> String {
        format!("{}_{}", self.layout, self.vtd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Shuffles the snapshots of one link with a seed derived from
/// `(seed, condition, link)` and cuts the permutation by the split ratios.
pub fn split_snapshots(n: u64, ratios: [u32; 3], seed_value: u64, condition: u64, link: usize) -> Vec<Split> {
    let mut order: Vec<u64> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed_value, &[0x5917, condition, link as u64]));
    let total: u32 = ratios.iter().sum();
    let n_train = ((n as f64) * ratios[0] as f64 / total as f64).round() as u64;
    let n_val = (((n as f64) * ratios[1] as f64 / total as f64).round() as u64).min(n - n_train);
    let mut out = vec![Split::Test; n as usize];
    for (rank, &s) in order.iter().enumerate() {
        let rank = rank as u64;
        out[s as usize] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

/// Sensor-side view of one link at one snapshot.
#[derive(Debug, Clone)]
pub struct Observation {
    pub pose: TransceiverPose,
    /// Ground-removed, downsampled merged cloud.
    pub cloud: PointCloud,
    pub clustering: Clustering,
    pub cuboids: Vec<ClusterCuboid>,
    pub gt: GroundTruth,
}

/// Scene at snapshot 0 for a condition. The seed ignores the density so the
/// static world and transceivers are shared across densities.
pub fn condition_scene(cfg: &Config, condition: Condition) -> Scene {
    build_scene(
        condition.layout,
        condition.vtd,
        seed::derive(cfg.seed, &[0x5CE, condition.layout as u64]),
        &cfg.scene,
    )
}

fn lidar_seed(cfg: &Config, condition: Condition, snapshot: u64, vehicle: u32) -> u64 {
    seed::derive(cfg.seed, &[0x11D, condition.key(), snapshot, vehicle as u64])
}

/// Raw LiDAR cloud of one vehicle.
pub fn scan(cfg: &Config, condition: Condition, scene: &Scene, vehicle: u32) -> Result<PointCloud> {
    let mount = scene
        .mount(vehicle, &cfg.lidar)
        .ok_or_else(|| Error::Data(format!("vehicle {vehicle} missing from scene")))?;
    Ok(simulate_lidar(scene, &mount, &cfg.lidar, lidar_seed(cfg, condition, scene.snapshot_index, vehicle)))
}

/// Processes one link of a scene snapshot. `scans` caches raw clouds per
/// vehicle so links sharing a car scan it once.
pub fn observe(
    cfg: &Config,
    condition: Condition,
    scene: &Scene,
    link: &Link,
    scans: &mut HashMap<u32, PointCloud>,
) -> Result<Observation> {
    let pose = scene
        .pose(link, &cfg.lidar)
        .ok_or_else(|| Error::Data(format!("link {} refers to missing vehicles", link.id)))?;
    for v in [link.tx, link.rx] {
        if !scans.contains_key(&v) {
            let c = scan(cfg, condition, scene, v)?;
            scans.insert(v, c);
        }
    }
    let (cloud, clustering) = pointcloud::preprocess(&scans[&link.tx], &scans[&link.rx], &cfg.pointcloud);
    let cuboids = clustering
        .clusters
        .iter()
        .map(|c| fit_cuboid(&cloud, c))
        .collect::<Result<Vec<_>>>()?;
    let gt = trace_ground_truth(scene, &pose, &cfg.oracle);
    Ok(Observation { pose, cloud, clustering, cuboids, gt })
}

/// One link-snapshot of the dataset, without the point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub link: usize,
    pub snapshot: u64,
    pub split: Split,
    pub pose: TransceiverPose,
    pub gt: GroundTruth,
    pub cuboids: Vec<ClusterCuboid>,
    pub members: Vec<usize>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ConditionData {
    pub condition: Condition,
    pub scene: Scene,
    /// Ordered by link, then snapshot.
    pub records: Vec<Record>,
}

impl ConditionData {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

#[cfg(feature = "parallel")]
fn map_snapshots<R: Send>(n: u64, f: impl Fn(u64) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_snapshots<R>(n: u64, f: impl Fn(u64) -> R) -> Vec<R> {
    (0..n).map(f).collect()
}

pub fn generate_condition(cfg: &Config, condition: Condition) -> Result<ConditionData> {
    let scene = condition_scene(cfg, condition);
    let n = cfg.dataset.snapshots;
    let splits: Vec<Vec<Split>> = scene
        .links
        .iter()
        .map(|l| split_snapshots(n, cfg.train.split, cfg.seed, condition.key(), l.id))
        .collect();
    let per_snapshot = map_snapshots(n, |s| -> Result<Vec<Record>> {
        let now = advance_scene(&scene, s);
        let mut scans = HashMap::new();
        scene
            .links
            .iter()
            .map(|link| {
                let obs = observe(cfg, condition, &now, link, &mut scans)?;
                let labels = count_labels(&obs.cuboids, &obs.gt, cfg.recognizer.label_inflate);
                Ok(Record {
                    link: link.id,
                    snapshot: s,
                    split: splits[link.id][s as usize],
                    pose: obs.pose,
                    members: obs.clustering.clusters.iter().map(|c| c.member_indices.len()).collect(),
                    gt: obs.gt,
                    cuboids: obs.cuboids,
                    labels,
                })
            })
            .collect()
    });
    let mut records = Vec::with_capacity(n as usize * scene.links.len());
    for r in per_snapshot {
        records.extend(r?);
    }
    records.sort_by_key(|r| (r.link, r.snapshot));
    log::info!("{}: {} records", condition.name(), records.len());
    Ok(ConditionData { condition, scene, records })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub link: usize,
    pub snapshot: u64,
    pub split: Split,
    pub gt: String,
    pub clusters: String,
    pub labels: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clouds: Option<[String; 2]>,
}

/// On-disk description of one condition's dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub condition: Condition,
    pub seed: u64,
    pub snapshots: u64,
    pub links: Vec<Link>,
    pub entries: Vec<IndexEntry>,
}

fn stem(link: usize, snapshot: u64) -> String {
    format!("l{link:02}_s{snapshot:05}")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn labels_text(labels: &[usize]) -> String {
    let mut s = String::from("# cluster count\n");
    for (i, n) in labels.iter().enumerate() {
        let _ = writeln!(s, "{i} {n}");
    }
    s
}

fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let n = (f.len() == 2)
            .then(|| f[1].parse::<usize>().ok())
            .flatten()
            .ok_or_else(|| Error::parse("labels", line.to_string()))?;
        out.push(n);
    }
    Ok(out)
}

/// Writes `config.toml`, `scene.json`, `index.json` and per link-snapshot
/// ground truth, cluster dumps and labels. With `clouds`, the raw Tx and Rx
/// scans are regenerated and written too.
pub fn write_condition(dir: &Path, cfg: &Config, data: &ConditionData, clouds: bool) -> Result<DatasetIndex> {
    for sub in ["gt", "clusters", "labels"] {
        mkdir(&dir.join(sub))?;
    }
    if clouds {
        mkdir(&dir.join("clouds"))?;
    }
    cfg.save(&dir.join("config.toml"))?;
    data.scene.write_json(&dir.join("scene.json"))?;
    let mut entries = Vec::with_capacity(data.records.len());
    let mut scene_cache: Option<(u64, Scene, HashMap<u32, PointCloud>)> = None;
    for r in &data.records {
        let st = stem(r.link, r.snapshot);
        let e = IndexEntry {
            link: r.link,
            snapshot: r.snapshot,
            split: r.split,
            gt: format!("gt/{st}.json"),
            clusters: format!("clusters/{st}.txt"),
            labels: format!("labels/{st}.txt"),
            clouds: clouds.then(|| [format!("clouds/{st}_tx.txt"), format!("clouds/{st}_rx.txt")]),
        };
        r.gt.write_json(&dir.join(&e.gt))?;
        write(&dir.join(&e.clusters), &pointcloud::cluster_dump_counts(&r.members, &r.cuboids))?;
        write(&dir.join(&e.labels), &labels_text(&r.labels))?;
        if let Some([tx_path, rx_path]) = &e.clouds {
            if scene_cache.as_ref().map(|c| c.0) != Some(r.snapshot) {
                scene_cache = Some((r.snapshot, advance_scene(&data.scene, r.snapshot), HashMap::new()));
            }
            let (_, scene, scans) = scene_cache.as_mut().unwrap();
            let link = data.scene.links[r.link];
            for (v, path) in [(link.tx, tx_path), (link.rx, rx_path)] {
                if !scans.contains_key(&v) {
                    let c = scan(cfg, data.condition, scene, v)?;
                    scans.insert(v, c);
                }
                scans[&v].write(&dir.join(path))?;
            }
        }
        entries.push(e);
    }
    let index = DatasetIndex {
        condition: data.condition,
        seed: cfg.seed,
        snapshots: cfg.dataset.snapshots,
        links: data.scene.links.clone(),
        entries,
    };
    write(&dir.join("index.json"), &serde_json::to_string_pretty(&index)?)?;
    Ok(index)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a directory written by [`write_condition`].
pub fn read_condition(dir: &Path) -> Result<(Config, ConditionData)> {
    let cfg = Config::load(&dir.join("config.toml"))?;
    let scene = Scene::read_json(&dir.join("scene.json"))?;
    let index: DatasetIndex = serde_json::from_str(&read(&dir.join("index.json"))?)?;
    if index.entries.len() as u64 != index.snapshots * index.links.len() as u64 {
        return Err(Error::Data(format!(
            "{}: index lists {} entries for {} links × {} snapshots",
            dir.display(),
            index.entries.len(),
            index.links.len(),
            index.snapshots
        )));
    }
    let mut records = Vec::with_capacity(index.entries.len());
    for e in &index.entries {
        let link = *scene
            .links
            .get(e.link)
            .ok_or_else(|| Error::Data(format!("unknown link {}", e.link)))?;
        let gt = GroundTruth::read_json(&dir.join(&e.gt))?;
        let rows = parse_cluster_dump(&read(&dir.join(&e.clusters))?)?;
        let labels = parse_labels(&read(&dir.join(&e.labels))?)?;
        if labels.len() != rows.len() {
            return Err(Error::Data(format!("{}: {} labels for {} clusters", e.labels, labels.len(), rows.len())));
        }
        let pose = advance_scene(&scene, e.snapshot)
            .pose(&link, &cfg.lidar)
            .ok_or_else(|| Error::Data(format!("link {} refers to missing vehicles", e.link)))?;
        records.push(Record {
            link: e.link,
            snapshot: e.snapshot,
            split: e.split,
            pose,
            gt,
            members: rows.iter().map(|r| r.1).collect(),
            cuboids: rows.into_iter().map(|r| r.2).collect(),
            labels,
        });
    }
    Ok((cfg, ConditionData { condition: index.condition, scene, records }))
}

/// `dir` itself when it holds an `index.json`, otherwise its immediate
/// subdirectories that do, sorted by name.
pub fn dataset_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join("index.json").is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("index.json").is_file())
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::Data(format!("{}: no dataset found", dir.display())));
    }
    Ok(out)
}
