//! Spinning multi-channel LiDAR simulated by nearest-hit ray casting.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::Scene;
use crate::error::{Error, Result};
use crate::geom::{Cuboid, Vec3};
use crate::pointcloud::PointCloud;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarConfig {
    pub channels: usize,
    /// Revolutions per second.
    pub scan_rate: f64,
    pub points_per_second: usize,
    /// Degrees above the horizon.
    pub fov_up: f64,
    /// Degrees, negative below the horizon.
    pub fov_down: f64,
    pub max_range: f64,
    /// Height of the optical centre above the platform vehicle's roof.
    pub mount_height: f64,
    /// Standard deviation of Gaussian range noise; zero disables noise.
    pub range_noise_sigma: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        LidarConfig {
            channels: 16,
            scan_rate: 10.0,
            points_per_second: 240_000,
            fov_up: 15.0,
            fov_down: -25.0,
            max_range: 100.0,
            mount_height: 0.3,
            range_noise_sigma: 0.0,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::Config("lidar channels must be at least 1".into()));
        }
        if self.fov_down >= self.fov_up {
            return Err(Error::Config("lidar fov_down must be below fov_up".into()));
        }
        if self.points_per_second % self.channels != 0 {
            return Err(Error::Config("points_per_second must be divisible by channels".into()));
        }
        if self.scan_rate <= 0.0 || self.max_range <= 0.0 || self.range_noise_sigma < 0.0 {
            return Err(Error::Config("lidar rates and ranges must be positive".into()));
        }
        if self.azimuth_steps() == 0 {
            return Err(Error::Config("lidar produces no rays per revolution".into()));
        }
        Ok(())
    }

    /// Rays per channel per revolution.
    pub fn azimuth_steps(&self) -> usize {
        let per_scan = (self.points_per_second as f64 / self.scan_rate).round() as usize;
        per_scan / self.channels
    }

    /// Channel elevations in radians, uniformly spanning `[fov_down, fov_up]`.
    pub fn elevations(&self) -> Vec<f64> {
        let (lo, hi) = (self.fov_down.to_radians(), self.fov_up.to_radians());
        if self.channels == 1 {
            return vec![lo];
        }
        let step = (hi - lo) / (self.channels - 1) as f64;
        (0..self.channels).map(|k| lo + step * k as f64).collect()
    }
}

/// Where a sensor sits. The platform object (the carrying vehicle) never returns
/// points, as real sensors mask their own body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarMount {
    pub position: Vec3,
    pub platform: Option<u32>,
}

impl LidarMount {
    pub fn at(position: Vec3) -> Self {
        LidarMount { position, platform: None }
    }
}

fn wrap(a: f64) -> f64 {
    let mut a = a.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Columns (azimuth indices) whose rays can reach `c` from `origin`.
fn azimuth_columns(c: &Cuboid, origin: Vec3, steps: usize) -> (i64, i64) {
    let corners = c.footprint();
    let local = c.to_local(origin);
    let h = c.half();
    if local.x.abs() <= h.x && local.y.abs() <= h.y {
        return (0, steps as i64 - 1);
    }
    let mid = (c.center.y - origin.y).atan2(c.center.x - origin.x);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (x, y) in corners {
        let d = wrap((y - origin.y).atan2(x - origin.x) - mid);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let step = TAU / steps as f64;
    let first = ((mid + lo) / step).floor() as i64;
    let last = ((mid + hi) / step).ceil() as i64;
    (first, last)
}

/// Casts `channels × azimuth_steps` rays over a full revolution and returns the
/// nearest hit of each ray within `max_range`.
pub fn simulate_lidar(scene: &Scene, mount: &LidarMount, config: &LidarConfig, seed_value: u64) -> PointCloud {
    let origin = mount.position;
    let steps = config.azimuth_steps();
    let ground = scene.ground();
    if let Some(g) = ground {
        let h = g.dims * 0.5;
        if (origin.x - g.center.x).abs() > h.x || (origin.y - g.center.y).abs() > h.y {
            return PointCloud::default();
        }
    }
    if steps == 0 {
        return PointCloud::default();
    }

    // Bucket candidate objects per azimuth column.
    let mut columns: Vec<Vec<Cuboid>> = vec![Vec::new(); steps];
    for o in scene.solids() {
        if Some(o.id) == mount.platform {
            continue;
        }
        let c = o.cuboid();
        let reach = c.half().x.hypot(c.half().y);
        if c.center.distance(Vec3::new(origin.x, origin.y, c.center.z)) - reach > config.max_range {
            continue;
        }
        let (first, last) = azimuth_columns(&c, origin, steps);
        let span = (last - first + 1).min(steps as i64);
        for k in 0..span {
            columns[(first + k).rem_euclid(steps as i64) as usize].push(c);
        }
    }

    let ground_z = ground.map(|g| g.center.z + g.dims.z / 2.0);
    let elevations = config.elevations();
    let mut rng = seed::rng(seed_value, &[0x11DA4]);
    let mut points = Vec::new();
    for (j, candidates) in columns.iter().enumerate() {
        let az = TAU * j as f64 / steps as f64;
        let (saz, caz) = az.sin_cos();
        for &el in &elevations {
            let (sel, cel) = el.sin_cos();
            let dir = Vec3::new(cel * caz, cel * saz, sel);
            let mut best = f64::INFINITY;
            if let Some(gz) = ground_z {
                if dir.z < 0.0 && origin.z > gz {
                    best = (gz - origin.z) / dir.z;
                }
            }
            for c in candidates {
                if let Some(t) = c.ray_hit(origin, dir) {
                    if t < best {
                        best = t;
                    }
                }
            }
            if best <= config.max_range {
                let mut range = best;
                if config.range_noise_sigma > 0.0 {
                    range += config.range_noise_sigma * seed::gaussian(&mut rng);
                }
                points.push(origin + dir * range);
            }
        }
    }
    PointCloud::new(points)
}
