//! Dataset orchestration, training, evaluation, channel comparison and the
//! end-to-end pipeline.

mod config;
mod dataset;
mod metrics;
mod report;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{
    self, band_frequencies, cir_csv, pdp, pdp_csv, position_identity, synthesize_cir, tvtf, ChannelInput, Cir,
    Pdp, ScattererInput, C,
};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::pointcloud::ClusterCuboid;
use crate::recognizer::{
    classify_cluster, extract_features, predict_counts, train, vr_filter, write_training_log, MlpModel,
    Recognizer, Samples, TrainOutcome, VrRatios,
};
use crate::rtoracle::{GroundTruth, ScattererClass};
use crate::scenegen::{advance_scene, Link, ObjectKind, StreetLayout, TransceiverPose, Vtd};
use crate::seed;

pub use config::{Config, DatasetConfig};
pub use dataset::{
    condition_scene, dataset_dirs, generate_condition, observe, read_condition, scan, split_snapshots,
    write_condition, Condition, ConditionData, DatasetIndex, IndexEntry, Observation, Record, Split,
};
pub use metrics::{
    accuracy, binary_accuracy, compare_pdp, error_histogram, error_totals, random_baseline, PDP_FLOOR,
};
pub use report::{write_figures, FIGURE_FILES};

/// Feature rows and count targets of every record in the iterator.
pub fn build_samples<'a>(records: impl IntoIterator<Item = &'a Record>) -> Samples {
    let mut s = Samples::default();
    for r in records {
        for (c, &n) in r.cuboids.iter().zip(&r.labels) {
            s.push(extract_features(c, &r.pose).to_vec(), n as f64);
        }
    }
    s
}

/// Trains one model on the training splits of all conditions pooled,
/// selecting on the pooled validation splits.
pub fn train_model(cfg: &Config, data: &[ConditionData]) -> Result<TrainOutcome> {
    let train_set = build_samples(data.iter().flat_map(|d| d.split(Split::Train)));
    let val_set = build_samples(data.iter().flat_map(|d| d.split(Split::Val)));
    log::info!("training on {} samples, validating on {}", train_set.len(), val_set.len());
    train(&train_set, &val_set, &cfg.train)
}

/// VR ratios from the ground truth of every training record.
pub fn fit_ratios(cfg: &Config, data: &[ConditionData]) -> Result<VrRatios> {
    let gts: Vec<GroundTruth> = data
        .iter()
        .flat_map(|d| d.split(Split::Train))
        .map(|r| r.gt.clone())
        .collect();
    Recognizer::fit_ratios(&gts, cfg.recognizer.vr_quantile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub layout: StreetLayout,
    pub vtd: Vtd,
    pub test_snapshots: usize,
    pub test_clusters: usize,
    pub n_error: u64,
    pub n_all: u64,
    /// Pooled `1 − N_error / N_all` after VR filtering; may be negative.
    pub accuracy: f64,
    pub accuracy_pre_vr: f64,
    pub baseline_accuracy: f64,
    /// Whether a cluster holds any scatterer.
    pub binary_accuracy: f64,
    /// Fraction of clusters with the exact count.
    pub regression_accuracy: f64,
    pub error_histogram: Vec<f64>,
    pub baseline_error_histogram: Vec<f64>,
    /// Number of clusters per count value.
    pub truth_count_histogram: Vec<u64>,
    pub predicted_count_histogram: Vec<u64>,
    /// Clusters left with a nonzero count whose centre is outside their class VR.
    pub vr_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub layout: StreetLayout,
    pub vtd: Vtd,
    pub link: usize,
    pub snapshots: usize,
    pub compared_bins: usize,
    pub pdp_rmse_db: f64,
    /// Snapshots whose first PDP bin does not start at `|Rx − Tx| / c`.
    pub los_bin_mismatches: usize,
    /// `(v_max_closing / c) Δ` for the condition.
    pub drift_bound_s: f64,
    pub drift_pairs_checked: usize,
    pub drift_violations: usize,
    pub max_drift_s: f64,
    /// Largest per-snapshot deviation of Σ path power and Σ PDP power from 1.
    pub max_power_error: f64,
    /// Snapshots (over both channels) with no propagation path at all.
    pub outages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub conditions: Vec<ConditionReport>,
    pub pooled_accuracy: f64,
    pub pooled_baseline_accuracy: f64,
    pub pooled_error_histogram: Vec<f64>,
    pub vr: VrRatios,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_epoch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityReport>,
}

impl EvalReport {
    pub fn condition(&self, layout: StreetLayout, vtd: Vtd) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.layout == layout && c.vtd == vtd)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<EvalReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn value_histogram(values: &[usize]) -> Vec<u64> {
    let mut h = vec![0u64; values.iter().max().map_or(0, |m| m + 1)];
    for &v in values {
        h[v] += 1;
    }
    h
}

/// Post-VR counts and classes of one record.
pub fn record_counts(recognizer: &Recognizer, r: &Record) -> Result<(Vec<usize>, Vec<usize>, Vec<ScattererClass>)> {
    let raw = predict_counts(&recognizer.model, &r.cuboids, &r.pose)?;
    let classes: Vec<ScattererClass> = r
        .cuboids
        .iter()
        .map(|c| classify_cluster(c, &recognizer.config.vehicle_envelope))
        .collect();
    let counts = vr_filter(
        &r.cuboids,
        &raw,
        &classes,
        &recognizer.vr.ellipsoid(&r.pose, ScattererClass::Static),
        &recognizer.vr.ellipsoid(&r.pose, ScattererClass::Dynamic),
    )?;
    Ok((raw, counts, classes))
}

fn vr_violations(recognizer: &Recognizer, pose: &TransceiverPose, cuboids: &[ClusterCuboid], counts: &[usize], classes: &[ScattererClass]) -> usize {
    cuboids
        .iter()
        .zip(counts)
        .zip(classes)
        .filter(|((c, &n), &class)| n > 0 && !recognizer.vr.ellipsoid(pose, class).contains(c.center))
        .count()
}

/// Test-split metrics of one condition, with the baseline drawn from the
/// condition's training labels.
pub fn evaluate_condition(cfg: &Config, data: &ConditionData, recognizer: &Recognizer) -> Result<ConditionReport> {
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    let mut raw_pred = Vec::new();
    let mut violations = 0;
    let mut snapshots = 0;
    for r in data.split(Split::Test) {
        let (raw, counts, classes) = record_counts(recognizer, r)?;
        violations += vr_violations(recognizer, &r.pose, &r.cuboids, &counts, &classes);
        truth.extend_from_slice(&r.labels);
        pred.extend(counts);
        raw_pred.extend(raw);
        snapshots += 1;
    }
    let train_labels: Vec<usize> = data.split(Split::Train).flat_map(|r| r.labels.iter().copied()).collect();
    let baseline = random_baseline(&train_labels, truth.len(), seed::derive(cfg.seed, &[0xBA5E, data.condition.key()]))?;
    let (n_error, n_all) = error_totals(&pred, &truth)?;
    let exact = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
    Ok(ConditionReport {
        layout: data.condition.layout,
        vtd: data.condition.vtd,
        test_snapshots: snapshots,
        test_clusters: truth.len(),
        n_error,
        n_all,
        accuracy: accuracy(&pred, &truth)?,
        accuracy_pre_vr: accuracy(&raw_pred, &truth)?,
        baseline_accuracy: accuracy(&baseline, &truth)?,
        binary_accuracy: binary_accuracy(&pred, &truth)?,
        regression_accuracy: if truth.is_empty() { 1.0 } else { exact as f64 / truth.len() as f64 },
        error_histogram: error_histogram(&pred, &truth)?,
        baseline_error_histogram: error_histogram(&baseline, &truth)?,
        truth_count_histogram: value_histogram(&truth),
        predicted_count_histogram: value_histogram(&pred),
        vr_violations: violations,
    })
}

/// Per-condition and pooled test metrics. The fidelity section is left empty.
pub fn evaluate(cfg: &Config, data: &[ConditionData], recognizer: &Recognizer) -> Result<EvalReport> {
    let conditions = data
        .iter()
        .map(|d| evaluate_condition(cfg, d, recognizer))
        .collect::<Result<Vec<_>>>()?;
    let (mut ne, mut nb, mut na) = (0.0, 0.0, 0.0);
    let mut hist = vec![0.0; conditions.iter().map(|c| c.error_histogram.len()).max().unwrap_or(0)];
    let total: usize = conditions.iter().map(|c| c.test_clusters).sum();
    for c in &conditions {
        ne += c.n_error as f64;
        na += c.n_all as f64;
        nb += (1.0 - c.baseline_accuracy) * c.n_all as f64;
        for (h, p) in hist.iter_mut().zip(&c.error_histogram) {
            *h += p * c.test_clusters as f64 / total.max(1) as f64;
        }
    }
    Ok(EvalReport {
        seed: cfg.seed,
        pooled_accuracy: 1.0 - ne / na,
        pooled_baseline_accuracy: 1.0 - nb / na,
        pooled_error_histogram: hist,
        conditions,
        vr: recognizer.vr,
        best_epoch: None,
        fidelity: None,
    })
}

/// Channels of one link over every snapshot, from ground truth and from
/// recognized scatterers.
#[derive(Debug, Clone)]
pub struct LinkChannels {
    pub truth: Vec<Cir>,
    pub recognized: Vec<Cir>,
    pub truth_pdp: Vec<Pdp>,
    pub recognized_pdp: Vec<Pdp>,
    pub report: FidelityReport,
}

/// Image point of the ground reflection on `z = 0`.
fn ground_point(tx: Vec3, rx: Vec3) -> Option<Vec3> {
    (tx.z > 0.0 && rx.z > 0.0).then(|| {
        let g = tx + (Vec3::new(rx.x, rx.y, -rx.z) - tx) * (tx.z / (tx.z + rx.z));
        Vec3::new(g.x, g.y, 0.0)
    })
}

/// Channel input built only from the sensed environment: LoS and ground
/// blockage are decided by the recognized cuboids.
pub fn recognized_input(
    cfg: &Config,
    snapshot: u64,
    t: f64,
    pose: &TransceiverPose,
    cuboids: &[ClusterCuboid],
    recognized: &[crate::recognizer::RecognizedCluster],
) -> ChannelInput {
    let (tx, rx) = (pose.tx_position, pose.rx_position);
    let blocks = |a: Vec3, b: Vec3| cuboids.iter().any(|c| c.as_cuboid().blocks_segment(a, b));
    let ground_visible = ground_point(tx, rx).is_some_and(|g| !blocks(tx, g) && !blocks(g, rx));
    let scatterers = recognized
        .iter()
        .flat_map(|rc| {
            let loss = match rc.class {
                ScattererClass::Static => cfg.oracle.loss(ObjectKind::Building),
                ScattererClass::Dynamic => cfg.oracle.loss(ObjectKind::Car),
            };
            rc.positions.iter().enumerate().map(move |(i, &p)| ScattererInput {
                position: p,
                class: rc.class,
                cluster: rc.label,
                index: i,
                reflection_loss: loss,
                identity: position_identity(p),
            })
        })
        .collect();
    ChannelInput { snapshot_index: snapshot, t, pose: *pose, los_blocked: blocks(tx, rx), ground_visible, scatterers }
}

/// Identity of the strongest path in the peak bin of a PDP.
fn peak_path(cir: &Cir, p: &Pdp, width: f64) -> Option<(u64, f64, f64)> {
    let k = p.peak()?;
    cir.paths
        .iter()
        .filter(|q| channel::delay_bin(q.delay, cir.los_delay, width) == k)
        .max_by(|a, b| a.power.total_cmp(&b.power))
        .map(|q| (q.identity, q.delay, p.delay_bins[k]))
}

fn drift_check(cirs: &[Cir], pdps: &[Pdp], width: f64, bound: f64) -> (usize, usize, f64) {
    let (mut checked, mut violations, mut max) = (0, 0, 0.0f64);
    for w in 0..cirs.len().saturating_sub(1) {
        let (Some(a), Some(b)) = (peak_path(&cirs[w], &pdps[w], width), peak_path(&cirs[w + 1], &pdps[w + 1], width)) else {
            continue;
        };
        if a.0 != b.0 {
            continue;
        }
        checked += 1;
        let path = (b.1 - a.1).abs();
        let bin = (b.2 - a.2).abs();
        max = max.max(path);
        if path > bound + 1e-12 || bin > bound + width + 1e-12 {
            violations += 1;
        }
    }
    (checked, violations, max)
}

/// A snapshot without any path becomes an empty CIR (an outage) instead of an error.
fn synthesize_or_outage(input: &ChannelInput, params: &channel::ChannelParams, seed_value: u64) -> Result<Cir> {
    match synthesize_cir(input, params, seed_value) {
        Err(Error::NoPaths) => Ok(Cir {
            snapshot_index: input.snapshot_index,
            t: input.t,
            los_delay: (input.pose.rx_position - input.pose.tx_position).norm() / C,
            paths: Vec::new(),
        }),
        other => other,
    }
}

/// Synthesizes both channels of `link` over all snapshots of the condition
/// and compares their PDPs on a common grid.
pub fn simulate_link(cfg: &Config, data: &ConditionData, recognizer: &Recognizer, link: usize) -> Result<LinkChannels> {
    let l: Link = *data
        .scene
        .links
        .get(link)
        .ok_or_else(|| Error::Data(format!("condition {} has no link {link}", data.condition.name())))?;
    let records: Vec<&Record> = data.records.iter().filter(|r| r.link == link).collect();
    let chan_seed = seed::derive(cfg.seed, &[0xC4A, data.condition.key(), link as u64]);
    let period = data.scene.snapshot_period;
    let mut truth = Vec::with_capacity(records.len());
    let mut recognized = Vec::with_capacity(records.len());
    for r in &records {
        let now = advance_scene(&data.scene, r.snapshot);
        let obs = observe(cfg, data.condition, &now, &l, &mut HashMap::new())?;
        let t = r.snapshot as f64 * period;
        truth.push(synthesize_or_outage(&ChannelInput::from_ground_truth(&r.gt, &r.pose, t), &cfg.channel, chan_seed)?);
        let rec_seed = seed::derive(cfg.seed, &[0x9EC, data.condition.key(), link as u64, r.snapshot]);
        let rc = recognizer.recognize(&obs.cloud, &obs.clustering.clusters, &obs.cuboids, &obs.pose, rec_seed)?;
        let input = recognized_input(cfg, r.snapshot, t, &obs.pose, &obs.cuboids, &rc);
        recognized.push(synthesize_or_outage(&input, &cfg.channel, chan_seed)?);
    }
    let width = cfg.channel.bin_width();
    let mut truth_pdp: Vec<Pdp> = truth.iter().map(|c| pdp(c, &cfg.channel)).collect();
    let mut rec_pdp: Vec<Pdp> = recognized.iter().map(|c| pdp(c, &cfg.channel)).collect();
    let mut los_mismatch = 0;
    let mut max_power_error = 0.0f64;
    let mut outages = 0;
    for k in 0..truth.len() {
        let pose = &records[k].pose;
        let los = (pose.rx_position - pose.tx_position).norm() / C;
        for (c, p) in [(&truth[k], &truth_pdp[k]), (&recognized[k], &rec_pdp[k])] {
            if p.delay_bins.first() != Some(&los) {
                los_mismatch += 1;
            }
            if c.paths.is_empty() {
                outages += 1;
            } else {
                max_power_error = max_power_error.max((c.total_power() - 1.0).abs()).max((p.total_power() - 1.0).abs());
            }
        }
        let n = truth_pdp[k].powers.len().max(rec_pdp[k].powers.len());
        truth_pdp[k] = truth_pdp[k].padded(n, width);
        rec_pdp[k] = rec_pdp[k].padded(n, width);
    }
    let compared_bins = truth_pdp.iter().flat_map(|p| &p.powers).filter(|&&p| p > PDP_FLOOR).count();
    let rmse = compare_pdp(&rec_pdp, &truth_pdp)?;
    let now = advance_scene(&data.scene, 0);
    let speed = |id: u32| now.object(id).map_or(0.0, |o| o.velocity.norm());
    let closing = speed(l.tx) + speed(l.rx) + 2.0 * now.max_speed();
    let bound = closing / C * period;
    let (c1, v1, m1) = drift_check(&truth, &truth_pdp, width, bound);
    let (c2, v2, m2) = drift_check(&recognized, &rec_pdp, width, bound);
    let report = FidelityReport {
        layout: data.condition.layout,
        vtd: data.condition.vtd,
        link,
        snapshots: records.len(),
        compared_bins,
        pdp_rmse_db: rmse,
        los_bin_mismatches: los_mismatch,
        drift_bound_s: bound,
        drift_pairs_checked: c1 + c2,
        drift_violations: v1 + v2,
        max_drift_s: m1.max(m2),
        max_power_error,
        outages,
    };
    Ok(LinkChannels { truth, recognized, truth_pdp, recognized_pdp: rec_pdp, report })
}

fn tvtf_csv(cirs: &[Cir], cfg: &Config) -> Result<String> {
    let freqs = band_frequencies(&cfg.channel, cfg.dataset.tvtf_points);
    let mut s = String::from("snapshot,freq_hz,re,im\n");
    for c in cirs {
        let h = tvtf(c, &cfg.channel, &freqs)?;
        for (f, v) in h.freqs.iter().zip(&h.values) {
            let _ = writeln!(s, "{},{f:e},{:e},{:e}", c.snapshot_index, v.re, v.im);
        }
    }
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `cir_*.csv`, `pdp_*.csv` (for ground truth and recognized), the ground-truth
/// `tvtf.csv` and `fidelity.json`.
pub fn write_channels(dir: &Path, cfg: &Config, ch: &LinkChannels) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let indexed = |cirs: &[Cir], pdps: &[Pdp]| -> Vec<(u64, Pdp)> {
        cirs.iter().map(|c| c.snapshot_index).zip(pdps.iter().cloned()).collect()
    };
    write_text(&dir.join("cir_truth.csv"), &cir_csv(&ch.truth))?;
    write_text(&dir.join("cir_recognized.csv"), &cir_csv(&ch.recognized))?;
    write_text(&dir.join("pdp_truth.csv"), &pdp_csv(&indexed(&ch.truth, &ch.truth_pdp)))?;
    write_text(&dir.join("pdp_recognized.csv"), &pdp_csv(&indexed(&ch.recognized, &ch.recognized_pdp)))?;
    write_text(&dir.join("tvtf.csv"), &tvtf_csv(&ch.truth, cfg)?)?;
    write_text(&dir.join("fidelity.json"), &serde_json::to_string_pretty(&ch.report)?)
}

/// Loads every condition under `dir` (see [`dataset_dirs`]). All must share
/// one seed; the first directory's config is returned.
pub fn load_datasets(dir: &Path) -> Result<(Config, Vec<ConditionData>)> {
    let mut cfg = None;
    let mut out = Vec::new();
    for d in dataset_dirs(dir)? {
        let (c, data) = read_condition(&d)?;
        match &cfg {
            None => cfg = Some(c),
            Some(first) if first.seed != c.seed => {
                return Err(Error::Data(format!("{}: seed {} differs from {}", d.display(), c.seed, first.seed)));
            }
            Some(_) => {}
        }
        out.push(data);
    }
    Ok((cfg.expect("dataset_dirs returns at least one directory"), out))
}

/// Names of the top-level artifacts written by [`run_pipeline`].
pub const PIPELINE_FILES: [&str; 6] = ["config.toml", "checkpoint.txt", "train_log.csv", "report.json", "data", "channel"];

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map_or("pipeline".into(), |n| n.to_string_lossy().into_owned());
    out.with_file_name(format!(".{name}.partial"))
}

fn run_into(cfg: &Config, dir: &Path) -> Result<EvalReport> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    cfg.save(&dir.join("config.toml"))?;
    let mut data = Vec::new();
    for cond in Condition::all(cfg) {
        let d = generate_condition(cfg, cond)?;
        write_condition(&dir.join("data").join(cond.name()), cfg, &d, false)?;
        data.push(d);
    }
    let outcome = train_model(cfg, &data)?;
    outcome.model.save(&dir.join("checkpoint.txt"))?;
    write_training_log(&outcome.log, &dir.join("train_log.csv"))?;
    let recognizer = Recognizer { model: outcome.model, vr: fit_ratios(cfg, &data)?, config: cfg.recognizer.clone() };
    let mut report = evaluate(cfg, &data, &recognizer)?;
    report.best_epoch = Some(outcome.best_epoch);
    let fid = Condition { layout: cfg.dataset.fidelity_layout, vtd: cfg.dataset.fidelity_vtd };
    if let Some(d) = data.iter().find(|d| d.condition == fid) {
        let ch = simulate_link(cfg, d, &recognizer, cfg.dataset.fidelity_link)?;
        write_channels(&dir.join("channel"), cfg, &ch)?;
        report.fidelity = Some(ch.report);
    }
    report.write(&dir.join("report.json"))?;
    write_figures(dir, &report)?;
    Ok(report)
}

fn remove(path: &Path) -> std::io::Result<()> {
    if path.is_dir() {
        std::fs::remove_dir_all(path)
    } else {
        std::fs::remove_file(path)
    }
}

/// Generates all conditions, trains, evaluates and synthesizes the fidelity
/// link into `out`. Work happens in a sibling staging directory that is moved
/// into place on success and deleted on failure.
pub fn run_pipeline(cfg: &Config, out: &Path) -> Result<EvalReport> {
    cfg.validate()?;
    let stage = staging_dir(out);
    if stage.exists() {
        remove(&stage).map_err(|e| Error::io(&stage, e))?;
    }
    let report = match run_into(cfg, &stage) {
        Ok(r) => r,
        Err(e) => {
            let _ = remove(&stage);
            return Err(e);
        }
    };
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let entries: Vec<PathBuf> = std::fs::read_dir(&stage)
        .map_err(|e| Error::io(&stage, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    for from in entries {
        let to = out.join(from.file_name().expect("directory entries have names"));
        if to.exists() {
            remove(&to).map_err(|e| Error::io(&to, e))?;
        }
        std::fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
    }
    std::fs::remove_dir(&stage).map_err(|e| Error::io(&stage, e))?;
    Ok(report)
}

/// Recognizer for a data set from a checkpoint, refitting the VR ratios on the
/// set's training split.
pub fn load_recognizer(cfg: &Config, data: &[ConditionData], ckpt: &Path) -> Result<Recognizer> {
    let model = MlpModel::load(ckpt)?;
    Ok(Recognizer { model, vr: fit_ratios(cfg, data)?, config: cfg.recognizer.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_point_matches_image_construction() {
        let g = ground_point(Vec3::new(0.0, 0.0, 2.0), Vec3::new(100.0, 0.0, 2.0)).unwrap();
        assert!((g.x - 50.0).abs() < 1e-12 && g.z == 0.0);
        let g = ground_point(Vec3::new(0.0, 0.0, 1.0), Vec3::new(30.0, 0.0, 2.0)).unwrap();
        assert!((g.x - 10.0).abs() < 1e-12);
        assert!(ground_point(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 1.0)).is_none());
    }

    #[test]
    fn value_histogram_counts() {
        assert_eq!(value_histogram(&[0, 2, 2, 1, 0, 0]), vec![3, 1, 2]);
        assert!(value_histogram(&[]).is_empty());
    }

    #[test]
    fn staging_is_a_hidden_sibling() {
        assert_eq!(staging_dir(Path::new("/tmp/run")), PathBuf::from("/tmp/.run.partial"));
    }
}
