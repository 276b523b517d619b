//! Environment-embedded channel synthesis: LoS, ground reflection and
//! static/dynamic NLoS single-ray components with geometric delays, angles and
//! Doppler; power allocation by the Rician factor and group weights; TVTF and
//! power-delay profile.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{azimuth, elevation, Vec3};
use crate::rtoracle::{GroundTruth, ScattererClass};
use crate::scenegen::TransceiverPose;
use crate::seed;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub f_c: f64,
    pub bandwidth: f64,
    pub ricean_omega: f64,
    pub eta_gr: f64,
    pub eta_sta: f64,
    pub eta_dyn: f64,
    pub chi: f64,
    /// Exponential intra-group power decay rate, 1/s.
    pub delay_decay: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            f_c: 28e9,
            bandwidth: 2e9,
            ricean_omega: 3.0,
            eta_gr: 0.2,
            eta_sta: 0.5,
            eta_dyn: 0.3,
            chi: 0.0,
            delay_decay: 5e7,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_c > 0.0) || !(self.bandwidth > 0.0) {
            return Err(Error::Config("f_c and bandwidth must be positive".into()));
        }
        if !(self.ricean_omega > 0.0) {
            return Err(Error::Config("ricean_omega must be positive".into()));
        }
        let etas = [self.eta_gr, self.eta_sta, self.eta_dyn];
        if etas.iter().any(|&e| !(e >= 0.0)) || (etas.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("eta_gr + eta_sta + eta_dyn must equal 1 with each ≥ 0".into()));
        }
        if !(self.delay_decay >= 0.0) || !self.chi.is_finite() {
            return Err(Error::Config("delay_decay must be non-negative and chi finite".into()));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.bandwidth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Los,
    Ground,
    StaticNlos,
    DynamicNlos,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Los => "los",
            PathKind::Ground => "ground",
            PathKind::StaticNlos => "static_nlos",
            PathKind::DynamicNlos => "dynamic_nlos",
        }
    }

    fn of(class: ScattererClass) -> Self {
        match class {
            ScattererClass::Static => PathKind::StaticNlos,
            ScattererClass::Dynamic => PathKind::DynamicNlos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub kind: PathKind,
    pub cluster: usize,
    pub index: usize,
    pub delay: f64,
    pub power: f64,
    pub doppler: f64,
    pub phase0: f64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
    /// Key that persists across snapshots for the same physical path.
    pub identity: u64,
    pub reflection_loss: f64,
}

impl PathComponent {
    pub fn amplitude(&self, params: &ChannelParams, t: f64) -> Complex64 {
        let phase = self.phase0 + TAU * self.doppler * t - TAU * params.f_c * self.delay;
        Complex64::from_polar(self.power.sqrt(), phase)
    }
}

/// One NLoS interaction point fed to the synthesizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScattererInput {
    pub position: Vec3,
    pub class: ScattererClass,
    pub cluster: usize,
    pub index: usize,
    pub reflection_loss: f64,
    pub identity: u64,
}

/// Everything the synthesizer needs for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInput {
    pub snapshot_index: u64,
    pub t: f64,
    pub pose: TransceiverPose,
    pub los_blocked: bool,
    pub ground_visible: bool,
    pub scatterers: Vec<ScattererInput>,
}

const LOS_IDENTITY: u64 = 0x105;
const GROUND_IDENTITY: u64 = 0x6_0D;

/// Stable key for a ground-truth specular path.
pub fn face_identity(object_id: u32, face: u8) -> u64 {
    seed::derive(0xFACE, &[object_id as u64, face as u64])
}

/// Stable key for a recognized scatterer, from its position on a 1 cm grid.
pub fn position_identity(p: Vec3) -> u64 {
    let q = |v: f64| (v * 100.0).round() as i64 as u64;
    seed::derive(0x905, &[q(p.x), q(p.y), q(p.z)])
}

impl ChannelInput {
    pub fn from_ground_truth(gt: &GroundTruth, pose: &TransceiverPose, t: f64) -> Self {
        ChannelInput {
            snapshot_index: gt.snapshot_index,
            t,
            pose: *pose,
            los_blocked: gt.los_blocked,
            ground_visible: gt.ground_point.is_some(),
            scatterers: gt
                .scatterers
                .iter()
                .map(|s| ScattererInput {
                    position: s.position,
                    class: s.kind,
                    cluster: s.source_object_id as usize,
                    index: s.face as usize,
                    reflection_loss: s.reflection_loss,
                    identity: face_identity(s.source_object_id, s.face),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    pub delay: f64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
    /// Unit direction leaving Tx.
    pub departure: Vec3,
    /// Unit direction from Rx towards the last interaction.
    pub arrival: Vec3,
}

fn via(tx: Vec3, p: Vec3, rx: Vec3) -> PathGeometry {
    let (d1, d2) = (p - tx, p - rx);
    PathGeometry {
        delay: (d1.norm() + d2.norm()) / C,
        aod_azimuth: azimuth(d1),
        aod_elevation: elevation(d1),
        aoa_azimuth: azimuth(d2),
        aoa_elevation: elevation(d2),
        departure: d1.normalized(),
        arrival: d2.normalized(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub los: PathGeometry,
    /// Absent when either antenna is at or below the ground plane.
    pub ground: Option<PathGeometry>,
    pub scatterers: Vec<PathGeometry>,
}

/// Delays and angles of the LoS path, the ground reflection (plane `z = 0`,
/// via the image of Rx) and every single-bounce NLoS path.
pub fn geometric_delays(pose: &TransceiverPose, scatterers: &[Vec3]) -> Result<Geometry> {
    let (tx, rx) = (pose.tx_position, pose.rx_position);
    let d = rx - tx;
    let los = PathGeometry {
        delay: d.norm() / C,
        aod_azimuth: azimuth(d),
        aod_elevation: elevation(d),
        aoa_azimuth: azimuth(-d),
        aoa_elevation: elevation(-d),
        departure: d.normalized(),
        arrival: (-d).normalized(),
    };
    let ground = (tx.z > 0.0 && rx.z > 0.0).then(|| {
        let image = Vec3::new(rx.x, rx.y, -rx.z);
        let g = tx + (image - tx) * (tx.z / (tx.z + rx.z));
        let mut p = via(tx, Vec3::new(g.x, g.y, 0.0), rx);
        p.delay = tx.distance(image) / C;
        p
    });
    let scatterers = scatterers
        .iter()
        .map(|&s| {
            if s.distance(tx) < 1e-9 || s.distance(rx) < 1e-9 {
                Err(Error::DegenerateScatterer(s.to_array()))
            } else {
                Ok(via(tx, s, rx))
            }
        })
        .collect::<Result<_>>()?;
    Ok(Geometry { los, ground, scatterers })
}

/// `(f_c / c)(v_tx · û_dep + v_rx · û_arr)` with `û_arr` pointing from Rx
/// back along the arriving leg.
pub fn doppler_of(geometry: &PathGeometry, pose: &TransceiverPose, f_c: f64) -> f64 {
    f_c / C * (pose.tx_velocity.dot(geometry.departure) + pose.rx_velocity.dot(geometry.arrival))
}

fn group_of(kind: PathKind) -> usize {
    match kind {
        PathKind::Los => 0,
        PathKind::Ground => 1,
        PathKind::StaticNlos => 2,
        PathKind::DynamicNlos => 3,
    }
}

/// Group budgets `(LoS, ground, static, dynamic)` given which groups have
/// paths. Budgets of empty NLoS groups move to the non-empty ones in
/// proportion to their weights (equally when those weights are all zero);
/// with no NLoS path at all the LoS path takes everything.
pub fn group_budgets(params: &ChannelParams, present: [bool; 4]) -> Result<[f64; 4]> {
    let omega = if present[0] { params.ricean_omega } else { 0.0 };
    let nlos_any = present[1..].iter().any(|&p| p);
    if !nlos_any {
        return if present[0] { Ok([1.0, 0.0, 0.0, 0.0]) } else { Err(Error::NoPaths) };
    }
    let eta = [params.eta_gr, params.eta_sta, params.eta_dyn];
    let mut w = [0.0; 3];
    for k in 0..3 {
        if present[k + 1] {
            w[k] = eta[k];
        }
    }
    let mut sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-15 {
        log::debug!("redistributing NLoS budget over groups {:?}", &present[1..]);
    }
    if sum <= 0.0 {
        for k in 0..3 {
            w[k] = if present[k + 1] { 1.0 } else { 0.0 };
        }
        sum = w.iter().sum();
    }
    let (los, nlos) = if omega.is_infinite() { (1.0, 0.0) } else { (omega / (omega + 1.0), 1.0 / (omega + 1.0)) };
    Ok([los, nlos * w[0] / sum, nlos * w[1] / sum, nlos * w[2] / sum])
}

/// Assigns powers in place: group budgets from [`group_budgets`], then within a
/// group weights `exp(−delay_decay (τ − τ_min)) × 10^(−loss/10)`.
pub fn power_allocation(params: &ChannelParams, paths: &mut [PathComponent]) -> Result<()> {
    let mut present = [false; 4];
    let mut tmin = [f64::INFINITY; 4];
    for p in paths.iter() {
        let g = group_of(p.kind);
        present[g] = true;
        tmin[g] = tmin[g].min(p.delay);
    }
    let budget = group_budgets(params, present)?;
    let weight = |p: &PathComponent| {
        (-params.delay_decay * (p.delay - tmin[group_of(p.kind)])).exp() * 10f64.powf(-p.reflection_loss / 10.0)
    };
    let mut sums = [0.0; 4];
    for p in paths.iter() {
        sums[group_of(p.kind)] += weight(p);
    }
    for p in paths.iter_mut() {
        let g = group_of(p.kind);
        p.power = if sums[g] > 0.0 { budget[g] * weight(p) / sums[g] } else { 0.0 };
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cir {
    pub snapshot_index: u64,
    pub t: f64,
    /// Geometric LoS delay, present even when the LoS path is blocked.
    pub los_delay: f64,
    pub paths: Vec<PathComponent>,
}

fn uniform_phase(seed_value: u64, identity: u64) -> f64 {
    let h = seed::derive(seed_value, &[0xF4A5E, identity]);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * TAU
}

/// Builds every path of one snapshot. Initial phases
/// depend only on `(seed, path identity)`.
pub fn synthesize_cir(input: &ChannelInput, params: &ChannelParams, seed_value: u64) -> Result<Cir> {
    params.validate()?;
    let positions: Vec<Vec3> = input.scatterers.iter().map(|s| s.position).collect();
    let geo = geometric_delays(&input.pose, &positions)?;
    let make = |kind, cluster, index, g: &PathGeometry, identity, reflection_loss| PathComponent {
        kind,
        cluster,
        index,
        delay: g.delay,
        power: 0.0,
        doppler: doppler_of(g, &input.pose, params.f_c),
        phase0: uniform_phase(seed_value, identity),
        aod_azimuth: g.aod_azimuth,
        aod_elevation: g.aod_elevation,
        aoa_azimuth: g.aoa_azimuth,
        aoa_elevation: g.aoa_elevation,
        identity,
        reflection_loss,
    };
    let mut paths = Vec::with_capacity(2 + positions.len());
    if !input.los_blocked {
        paths.push(make(PathKind::Los, 0, 0, &geo.los, LOS_IDENTITY, 0.0));
    }
    if input.ground_visible {
        if let Some(g) = &geo.ground {
            paths.push(make(PathKind::Ground, 0, 0, g, GROUND_IDENTITY, 0.0));
        }
    }
    for (s, g) in input.scatterers.iter().zip(&geo.scatterers) {
        paths.push(make(PathKind::of(s.class), s.cluster, s.index, g, s.identity, s.reflection_loss));
    }
    power_allocation(params, &mut paths)?;
    Ok(Cir {
        snapshot_index: input.snapshot_index,
        t: input.t,
        los_delay: geo.los.delay,
        paths,
    })
}

impl Cir {
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.power).sum()
    }

    pub fn amplitudes(&self, params: &ChannelParams) -> Vec<Complex64> {
        self.paths.iter().map(|p| p.amplitude(params, self.t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tvtf {
    pub t: f64,
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// `H(t, f) = Σ a_p (f / f_c)^χ exp(−i 2π (f − f_c) τ_p)`.
pub fn tvtf(cir: &Cir, params: &ChannelParams, freqs: &[f64]) -> Result<Tvtf> {
    if let Some(&f) = freqs.iter().find(|&&f| !(f > 0.0)) {
        return Err(Error::Frequency(f));
    }
    let amps = cir.amplitudes(params);
    let values = freqs
        .iter()
        .map(|&f| {
            let factor = (f / params.f_c).powf(params.chi);
            let h: Complex64 = cir
                .paths
                .iter()
                .zip(&amps)
                .map(|(p, a)| a * Complex64::from_polar(1.0, -TAU * (f - params.f_c) * p.delay))
                .sum();
            h * factor
        })
        .collect();
    Ok(Tvtf { t: cir.t, freqs: freqs.to_vec(), values })
}

/// `n` frequencies evenly spaced over the band, `f_c − B/2 + kB/n`.
pub fn band_frequencies(params: &ChannelParams, n: usize) -> Vec<f64> {
    let start = params.f_c - params.bandwidth / 2.0;
    (0..n).map(|k| start + params.bandwidth * k as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pdp {
    /// Start delay of each bin, s.
    pub delay_bins: Vec<f64>,
    pub powers: Vec<f64>,
}

impl Pdp {
    pub fn bin_width(&self) -> Option<f64> {
        (self.delay_bins.len() >= 2).then(|| self.delay_bins[1] - self.delay_bins[0])
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// Index of the strongest bin (first on ties).
    pub fn peak(&self) -> Option<usize> {
        self.powers
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((i, p)),
            })
            .map(|(i, _)| i)
    }

    /// Extends with empty bins to `n` bins.
    pub fn padded(&self, n: usize, width: f64) -> Pdp {
        let mut out = self.clone();
        let start = self.delay_bins.first().copied().unwrap_or(0.0);
        while out.powers.len() < n {
            out.delay_bins.push(start + width * out.powers.len() as f64);
            out.powers.push(0.0);
        }
        out
    }
}

/// Bin index of a delay on a grid starting at `start`.
pub fn delay_bin(delay: f64, start: f64, width: f64) -> usize {
    let k = ((delay - start) / width + 1e-9).floor();
    if k > 0.0 {
        k as usize
    } else {
        0
    }
}

/// Bins of width `1/B` from the geometric LoS delay to the largest path delay.
pub fn pdp(cir: &Cir, params: &ChannelParams) -> Pdp {
    let width = params.bin_width();
    let start = cir.los_delay;
    let last = cir.paths.iter().map(|p| delay_bin(p.delay, start, width)).max().unwrap_or(0);
    let mut powers = vec![0.0; last + 1];
    for p in &cir.paths {
        powers[delay_bin(p.delay, start, width)] += p.power;
    }
    Pdp {
        delay_bins: (0..=last).map(|k| start + width * k as f64).collect(),
        powers,
    }
}

pub fn cir_csv(cirs: &[Cir]) -> String {
    let mut s = String::from("snapshot,kind,cluster,index,delay_s,power,doppler_hz,phase0,aod_az,aod_el,aoa_az,aoa_el\n");
    for c in cirs {
        for p in &c.paths {
            let _ = writeln!(
                s,
                "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                c.snapshot_index,
                p.kind.as_str(),
                p.cluster,
                p.index,
                p.delay,
                p.power,
                p.doppler,
                p.phase0,
                p.aod_azimuth,
                p.aod_elevation,
                p.aoa_azimuth,
                p.aoa_elevation
            );
        }
    }
    s
}

pub fn pdp_csv(pdps: &[(u64, Pdp)]) -> String {
    let mut s = String::from("snapshot,delay_s,power\n");
    for (snap, p) in pdps {
        for (d, w) in p.delay_bins.iter().zip(&p.powers) {
            let _ = writeln!(s, "{snap},{d:e},{w:e}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pose(tx: Vec3, rx: Vec3) -> TransceiverPose {
        TransceiverPose::stationary(tx, rx)
    }

    fn sc(p: Vec3, class: ScattererClass, cluster: usize, index: usize) -> ScattererInput {
        ScattererInput { position: p, class, cluster, index, reflection_loss: 6.0, identity: position_identity(p) }
    }

    fn input(scatterers: Vec<ScattererInput>, los_blocked: bool) -> ChannelInput {
        ChannelInput {
            snapshot_index: 0,
            t: 0.0,
            pose: pose(Vec3::new(0.0, 0.0, 2.0), Vec3::new(100.0, 0.0, 2.0)),
            los_blocked,
            ground_visible: true,
            scatterers,
        }
    }

    #[test]
    fn delay_examples() {
        let g = geometric_delays(&pose(Vec3::ZERO, Vec3::new(299.792458, 0.0, 0.0)), &[]).unwrap();
        assert!((g.los.delay - 1e-6).abs() < 1e-18);
        let g = geometric_delays(&pose(Vec3::new(0.0, 0.0, 2.0), Vec3::new(100.0, 0.0, 2.0)), &[Vec3::new(50.0, 0.0, 2.0)])
            .unwrap();
        assert!((g.ground.unwrap().delay - 10016f64.sqrt() / C).abs() < 1e-18);
        assert!((g.ground.unwrap().delay - 333.831e-9).abs() < 1e-12);
        assert!((g.scatterers[0].delay - g.los.delay).abs() < 1e-18);
        let tx = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            geometric_delays(&pose(tx, Vec3::new(5.0, 2.0, 3.0)), &[tx]),
            Err(Error::DegenerateScatterer(_))
        ));
    }

    #[test]
    fn doppler_examples() {
        let mut p = pose(Vec3::ZERO, Vec3::new(100.0, 0.0, 0.0));
        let g = geometric_delays(&p, &[]).unwrap();
        assert_eq!(doppler_of(&g.los, &p, 28e9), 0.0);
        p.tx_velocity = Vec3::new(30.0, 0.0, 0.0);
        let f = doppler_of(&g.los, &p, 28e9);
        assert!((f - 28e9 * 30.0 / C).abs() < 1e-9);
        assert!((f - 2801.9).abs() < 0.05);
        p.tx_velocity = -p.tx_velocity;
        p.rx_velocity = Vec3::new(3.0, -1.0, 0.0);
        let fwd = doppler_of(&g.los, &p, 28e9);
        p.tx_velocity = -p.tx_velocity;
        p.rx_velocity = -p.rx_velocity;
        assert_eq!(doppler_of(&g.los, &p, 28e9), -fwd);
    }

    #[test]
    fn group_sums_for_unit_omega() {
        let params = ChannelParams { ricean_omega: 1.0, ..ChannelParams::default() };
        let b = group_budgets(&params, [true; 4]).unwrap();
        let want = [0.5, 0.1, 0.25, 0.15];
        for k in 0..4 {
            assert!((b[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rician_limit() {
        let params = ChannelParams { ricean_omega: 1e12, ..ChannelParams::default() };
        assert!((group_budgets(&params, [true; 4]).unwrap()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_groups_redistribute() {
        let params = ChannelParams::default();
        let b = group_budgets(&params, [false, true, true, false]).unwrap();
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 0.2 / 0.7).abs() < 1e-15 && (b[2] - 0.5 / 0.7).abs() < 1e-15);
        assert_eq!(group_budgets(&params, [true, false, false, false]).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(group_budgets(&params, [false; 4]), Err(Error::NoPaths)));
        let skewed = ChannelParams { eta_gr: 1.0, eta_sta: 0.0, eta_dyn: 0.0, ..params };
        let b = group_budgets(&skewed, [false, false, true, true]).unwrap();
        assert!((b[2] - 0.5).abs() < 1e-15 && (b[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bare_channel_has_los_and_ground() {
        let cir = synthesize_cir(&input(vec![], false), &ChannelParams::default(), 1).unwrap();
        let kinds: Vec<PathKind> = cir.paths.iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![PathKind::Los, PathKind::Ground]);
    }

    #[test]
    fn static_counts_add_up() {
        let s = ScattererClass::Static;
        let scat = vec![
            sc(Vec3::new(30.0, 10.0, 2.0), s, 0, 0),
            sc(Vec3::new(31.0, 10.0, 2.0), s, 0, 1),
            sc(Vec3::new(60.0, -8.0, 2.0), s, 1, 0),
            sc(Vec3::new(61.0, -8.0, 2.0), s, 1, 1),
            sc(Vec3::new(62.0, -8.0, 2.0), s, 1, 2),
        ];
        let cir = synthesize_cir(&input(scat, false), &ChannelParams::default(), 1).unwrap();
        assert_eq!(cir.paths.iter().filter(|p| p.kind == PathKind::StaticNlos).count(), 5);
        let amp: f64 = cir.amplitudes(&ChannelParams::default()).iter().map(|a| a.norm_sqr()).sum();
        assert!((amp - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tvtf_examples() {
        let params = ChannelParams { chi: 2.5, ..ChannelParams::default() };
        let cir = synthesize_cir(&input(vec![], false), &params, 3).unwrap();
        let at_fc = tvtf(&cir, &params, &[params.f_c]).unwrap();
        let direct: Complex64 = cir.amplitudes(&params).iter().sum();
        assert!((at_fc.values[0] - direct).norm() < 1e-12);
        assert!(matches!(tvtf(&cir, &params, &[0.0]), Err(Error::Frequency(_))));

        let flat = ChannelParams::default();
        let mut one = synthesize_cir(&input(vec![], false), &flat, 3).unwrap();
        one.paths.truncate(1);
        one.paths[0].power = 1.0;
        let h = tvtf(&one, &flat, &band_frequencies(&flat, 32)).unwrap();
        assert!(h.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pdp_basics() {
        let params = ChannelParams::default();
        assert!((params.bin_width() - 0.5e-9).abs() < 1e-24);
        let mut cir = synthesize_cir(&input(vec![], false), &params, 3).unwrap();
        cir.paths.truncate(1);
        cir.paths[0].power = 1.0;
        let p = pdp(&cir, &params);
        assert_eq!(p.powers, vec![1.0]);
        assert_eq!(p.delay_bins[0], cir.los_delay);
    }

    #[test]
    fn csv_headers() {
        let cir = synthesize_cir(&input(vec![], false), &ChannelParams::default(), 3).unwrap();
        let text = cir_csv(&[cir.clone()]);
        assert!(text.starts_with("snapshot,kind,cluster,index,delay_s,power,doppler_hz,phase0,aod_az,aod_el,aoa_az,aoa_el\n"));
        assert_eq!(text.lines().count(), 3);
        let p = pdp_csv(&[(0, pdp(&cir, &ChannelParams::default()))]);
        assert!(p.starts_with("snapshot,delay_s,power\n"));
    }

    fn arb_scatterers() -> impl Strategy<Value = Vec<(f64, f64, f64, bool)>> {
        prop::collection::vec((-80.0f64..180.0, -60.0f64..60.0, 0.5f64..25.0, any::<bool>()), 0..40)
    }

    proptest! {
        #[test]
        fn power_is_conserved(
            scat in arb_scatterers(),
            blocked in any::<bool>(),
            omega in 0.01f64..100.0,
            e1 in 0.0f64..1.0,
            e2 in 0.0f64..1.0,
        ) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let params = ChannelParams { ricean_omega: omega, eta_gr: lo, eta_sta: hi - lo, eta_dyn: 1.0 - hi, ..ChannelParams::default() };
            prop_assume!(params.validate().is_ok());
            let s: Vec<ScattererInput> = scat
                .iter()
                .enumerate()
                .map(|(i, &(x, y, z, dynamic))| {
                    let class = if dynamic { ScattererClass::Dynamic } else { ScattererClass::Static };
                    sc(Vec3::new(x, y, z), class, i / 3, i % 3)
                })
                .collect();
            let cir = synthesize_cir(&input(s, blocked), &params, 11).unwrap();
            prop_assert!((cir.total_power() - 1.0).abs() < 1e-12);
            let p = pdp(&cir, &params);
            prop_assert!((p.total_power() - 1.0).abs() < 1e-12);
            prop_assert_eq!(p.delay_bins[0], cir.los_delay);
            for path in &cir.paths {
                prop_assert!(path.delay >= cir.los_delay * (1.0 - 1e-15));
                prop_assert!(path.power >= 0.0);
            }
        }

        #[test]
        fn tvtf_matches_direct_sum(
            d1 in 1e-8f64..1e-6,
            d2 in 1e-8f64..1e-6,
            p1 in 0.0f64..1.0,
            ph1 in 0.0f64..TAU,
            ph2 in 0.0f64..TAU,
            chi in -3.0f64..3.0,
        ) {
            let params = ChannelParams { chi, ..ChannelParams::default() };
            let mut cir = synthesize_cir(&input(vec![], false), &params, 0).unwrap();
            cir.paths[0].delay = d1;
            cir.paths[0].power = p1;
            cir.paths[0].phase0 = ph1;
            cir.paths[1].delay = d2;
            cir.paths[1].power = 1.0 - p1;
            cir.paths[1].phase0 = ph2;
            let freqs = band_frequencies(&params, 64);
            let h = tvtf(&cir, &params, &freqs).unwrap();
            for (f, v) in freqs.iter().zip(&h.values) {
                let mut re = 0.0;
                let mut im = 0.0;
                for p in &cir.paths {
                    let carrier = p.phase0 - TAU * params.f_c * p.delay;
                    let (ar, ai) = (p.power.sqrt() * carrier.cos(), p.power.sqrt() * carrier.sin());
                    let shift = -TAU * (f - params.f_c) * p.delay;
                    let (er, ei) = (shift.cos(), shift.sin());
                    re += ar * er - ai * ei;
                    im += ar * ei + ai * er;
                }
                let k = (f / params.f_c).powf(chi);
                prop_assert!((v.re - k * re).abs() < 1e-12 && (v.im - k * im).abs() < 1e-12);
            }
        }

        #[test]
        fn tvtf_inverse_peaks_at_pdp_peak(
            scat in prop::collection::vec((0.0f64..100.0, -20.0f64..20.0, 0.5f64..25.0), 0..6),
            blocked in any::<bool>(),
            seed_value in any::<u64>(),
        ) {
            let params = ChannelParams { ricean_omega: 20.0, ..ChannelParams::default() };
            let s = scat.iter().enumerate().map(|(i, &(x, y, z))| sc(Vec3::new(x, y, z), ScattererClass::Static, i, 0)).collect();
            let cir = synthesize_cir(&input(s, blocked), &params, seed_value).unwrap();
            let mut powers: Vec<f64> = cir.paths.iter().map(|p| p.power).collect();
            powers.sort_by(|a, b| b.total_cmp(a));
            prop_assume!(powers.len() < 2 || powers[0] >= 9.0 * powers[1]);

            // Inverse DFT of H over n band points, delays measured from LoS.
            let n = 256;
            let freqs = band_frequencies(&params, n);
            let h = tvtf(&cir, &params, &freqs).unwrap();
            let shifted: Vec<Complex64> = freqs
                .iter()
                .zip(&h.values)
                .map(|(f, v)| v * Complex64::from_polar(1.0, TAU * (f - params.f_c) * cir.los_delay))
                .collect();
            let mag = |m: usize| -> f64 {
                shifted.iter().enumerate().map(|(k, v)| v * Complex64::from_polar(1.0, TAU * (k * m) as f64 / n as f64)).sum::<Complex64>().norm()
            };
            let peak = (0..n).max_by(|&a, &b| mag(a).total_cmp(&mag(b))).unwrap();
            let bin = pdp(&cir, &params).peak().unwrap();
            prop_assert!(peak == bin || peak == bin + 1, "IDFT peak {} vs PDP peak bin {}", peak, bin);
        }
    }
}
