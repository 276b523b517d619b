//! WebAssembly bindings for the static demo page in `www/`. Every export
//! returns a JSON string; the plain functions are also callable natively.

use std::collections::HashMap;

use scatterec::channel::{band_frequencies, pdp, synthesize_cir, tvtf, ChannelInput, ChannelParams};
use scatterec::harness::{condition_scene, observe, Condition, Config};
use scatterec::rtoracle::ScattererClass;
use scatterec::scenegen::{advance_scene, ObjectKind, Scene, StreetLayout, Vtd};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 6000;

#[derive(Serialize)]
struct ObjectView {
    kind: ObjectKind,
    footprint: [(f64, f64); 4],
    height: f64,
}

#[derive(Serialize)]
struct ClusterView {
    footprint: [(f64, f64); 4],
    length: f64,
    width: f64,
    height: f64,
    dynamic: bool,
    truth: usize,
}

#[derive(Serialize)]
struct SceneView {
    objects: Vec<ObjectView>,
    tx: [f64; 3],
    rx: [f64; 3],
    points: Vec<(f32, f32)>,
    clusters: Vec<ClusterView>,
    scatterers: Vec<(f64, f64, ScattererClass)>,
    los_blocked: bool,
}

#[derive(Serialize)]
struct PdpFrame {
    snapshot: u64,
    los_delay: f64,
    powers_db: Vec<f64>,
}

#[derive(Serialize)]
struct PdpSeries {
    bin_width: f64,
    frames: Vec<PdpFrame>,
}

#[derive(Serialize)]
struct TvtfView {
    freqs: Vec<f64>,
    mag_db: Vec<f64>,
    paths: usize,
}

fn setup(layout: &str, vtd: &str, seed: u64) -> Result<(Config, Condition, Scene), String> {
    let layout: StreetLayout = layout.parse().map_err(|e| format!("{e}"))?;
    let vtd: Vtd = vtd.parse().map_err(|e| format!("{e}"))?;
    let cfg = Config { seed, ..Config::default() };
    let cond = Condition { layout, vtd };
    let scene = condition_scene(&cfg, cond);
    Ok((cfg, cond, scene))
}

fn link_of(scene: &Scene, link: usize) -> Result<scatterec::scenegen::Link, String> {
    scene.links.get(link).copied().ok_or_else(|| format!("link {link} out of range (0..{})", scene.links.len()))
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Bird's-eye view of one snapshot: objects, the merged LiDAR cloud, fitted
/// cluster rectangles and the ground-truth scatterers of `link`.
pub fn scene_view(layout: &str, vtd: &str, seed: u64, snapshot: u64, link: usize) -> Result<String, String> {
    let (cfg, cond, scene) = setup(layout, vtd, seed)?;
    let l = link_of(&scene, link)?;
    let now = advance_scene(&scene, snapshot);
    let obs = observe(&cfg, cond, &now, &l, &mut HashMap::new()).map_err(|e| e.to_string())?;
    let labels = scatterec::recognizer::count_labels(&obs.cuboids, &obs.gt, cfg.recognizer.label_inflate);
    let stride = obs.cloud.len().div_ceil(MAX_POINTS).max(1);
    let view = SceneView {
        objects: now
            .solids()
            .map(|o| ObjectView { kind: o.kind, footprint: o.cuboid().footprint(), height: o.dims.z })
            .collect(),
        tx: obs.pose.tx_position.to_array(),
        rx: obs.pose.rx_position.to_array(),
        points: obs.cloud.points.iter().step_by(stride).map(|p| (p.x as f32, p.y as f32)).collect(),
        clusters: obs
            .cuboids
            .iter()
            .zip(&labels)
            .map(|(c, &n)| ClusterView {
                footprint: c.as_cuboid().footprint(),
                length: c.length,
                width: c.width,
                height: c.height,
                dynamic: scatterec::recognizer::classify_cluster(c, &cfg.recognizer.vehicle_envelope)
                    == ScattererClass::Dynamic,
                truth: n,
            })
            .collect(),
        scatterers: obs.gt.scatterers.iter().map(|s| (s.position.x, s.position.y, s.kind)).collect(),
        los_blocked: obs.gt.los_blocked,
    };
    json(&view)
}

fn ground_truth_input(cfg: &Config, scene: &Scene, link: usize, snapshot: u64) -> Result<ChannelInput, String> {
    let l = link_of(scene, link)?;
    let now = advance_scene(scene, snapshot);
    let pose = now.pose(&l, &cfg.lidar).ok_or("link vehicles missing")?;
    let gt = scatterec::rtoracle::trace_ground_truth(&now, &pose, &cfg.oracle);
    Ok(ChannelInput::from_ground_truth(&gt, &pose, snapshot as f64 * scene.snapshot_period))
}

/// Ground-truth PDPs of `link` for snapshots `0..snapshots`, in dB relative to
/// total power. Snapshots without any path are skipped.
pub fn pdp_series(layout: &str, vtd: &str, seed: u64, link: usize, snapshots: u64) -> Result<String, String> {
    let (cfg, _, scene) = setup(layout, vtd, seed)?;
    let mut frames = Vec::new();
    for s in 0..snapshots {
        let input = ground_truth_input(&cfg, &scene, link, s)?;
        let Ok(cir) = synthesize_cir(&input, &cfg.channel, seed) else { continue };
        let p = pdp(&cir, &cfg.channel);
        frames.push(PdpFrame {
            snapshot: s,
            los_delay: cir.los_delay,
            powers_db: p.powers.iter().map(|&w| 10.0 * w.max(1e-12).log10()).collect(),
        });
    }
    json(&PdpSeries { bin_width: cfg.channel.bin_width(), frames })
}

/// `|H(t, f)|` in dB across the band for one snapshot and exponent `chi`.
pub fn tvtf_view(layout: &str, vtd: &str, seed: u64, link: usize, snapshot: u64, chi: f64, points: usize) -> Result<String, String> {
    let (cfg, _, scene) = setup(layout, vtd, seed)?;
    let params = ChannelParams { chi, ..cfg.channel.clone() };
    params.validate().map_err(|e| e.to_string())?;
    let input = ground_truth_input(&cfg, &scene, link, snapshot)?;
    let cir = synthesize_cir(&input, &params, seed).map_err(|e| e.to_string())?;
    let freqs = band_frequencies(&params, points.clamp(2, 4096));
    let h = tvtf(&cir, &params, &freqs).map_err(|e| e.to_string())?;
    json(&TvtfView {
        mag_db: h.values.iter().map(|v| 20.0 * v.norm().max(1e-12).log10()).collect(),
        freqs,
        paths: cir.paths.len(),
    })
}

#[wasm_bindgen(js_name = sceneView)]
pub fn scene_view_js(layout: &str, vtd: &str, seed: u32, snapshot: u32, link: u32) -> Result<String, JsValue> {
    scene_view(layout, vtd, seed as u64, snapshot as u64, link as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = pdpSeries)]
pub fn pdp_series_js(layout: &str, vtd: &str, seed: u32, link: u32, snapshots: u32) -> Result<String, JsValue> {
    pdp_series(layout, vtd, seed as u64, link as usize, snapshots as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = tvtfView)]
pub fn tvtf_view_js(layout: &str, vtd: &str, seed: u32, link: u32, snapshot: u32, chi: f64, points: u32) -> Result<String, JsValue> {
    tvtf_view(layout, vtd, seed as u64, link as usize, snapshot as u64, chi, points as usize).map_err(|e| JsValue::from_str(&e))
}
