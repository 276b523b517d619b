use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::pointcloud::ClusterCuboid;
use crate::rtoracle::{GroundTruth, ScattererClass};
use crate::scenegen::TransceiverPose;

/// Ellipsoid with the transceivers at its foci: semi-major axis `a`,
/// semi-focal distance `c`, semi-minor axis `b = sqrt(a² − c²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VREllipsoid {
    pub focus_tx: Vec3,
    pub focus_rx: Vec3,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub class: ScattererClass,
}

impl VREllipsoid {
    /// Ellipsoid for a pose from a fitted ratio `ρ = a / c ≥ 1`.
    pub fn from_ratio(pose: &TransceiverPose, rho: f64, class: ScattererClass) -> Self {
        let c = pose.separation() / 2.0;
        let a = rho * c;
        VREllipsoid {
            focus_tx: pose.tx_position,
            focus_rx: pose.rx_position,
            a,
            b: (a * a - c * c).max(0.0).sqrt(),
            c,
            class,
        }
    }

    pub fn distance_sum(&self, p: Vec3) -> f64 {
        p.distance(self.focus_tx) + p.distance(self.focus_rx)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.distance_sum(p) <= 2.0 * self.a
    }
}

/// Per-class ratios `a / c` fitted on training ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VrRatios {
    pub rho_static: f64,
    pub rho_dynamic: f64,
}

impl VrRatios {
    pub fn ellipsoid(&self, pose: &TransceiverPose, class: ScattererClass) -> VREllipsoid {
        let rho = match class {
            ScattererClass::Static => self.rho_static,
            ScattererClass::Dynamic => self.rho_dynamic,
        };
        VREllipsoid::from_ratio(pose, rho, class)
    }
}

/// Distance-sum ratios `(|P − Tx| + |P − Rx|) / 2c` of every scatterer of
/// `class`, skipping snapshots with coincident transceivers.
pub fn distance_ratios(ground_truths: &[GroundTruth], class: ScattererClass) -> Vec<f64> {
    let mut out = Vec::new();
    for gt in ground_truths {
        let two_c = gt.tx.distance(gt.rx);
        if two_c <= 0.0 {
            continue;
        }
        out.extend(gt.of_class(class).map(|s| (s.position.distance(gt.tx) + s.position.distance(gt.rx)) / two_c));
    }
    out
}

/// Smallest ratio such that at least a fraction `q` of the class scatterers
/// fall inside the VR.
pub fn fit_vr(ground_truths: &[GroundTruth], class: ScattererClass, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Config(format!("coverage quantile {q} outside (0, 1]")));
    }
    let mut r = distance_ratios(ground_truths, class);
    if r.is_empty() {
        return Err(Error::NoScatterers(class.as_str()));
    }
    r.sort_by(f64::total_cmp);
    let n = r.len();
    let k = ((q * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    Ok(r[k - 1].max(1.0))
}

/// Zeroes the count of every cluster whose centre lies outside its class VR.
pub fn vr_filter(
    cuboids: &[ClusterCuboid],
    counts: &[usize],
    classes: &[ScattererClass],
    vr_static: &VREllipsoid,
    vr_dynamic: &VREllipsoid,
) -> Result<Vec<usize>> {
    if cuboids.len() != counts.len() || classes.len() != counts.len() {
        return Err(Error::Misaligned(cuboids.len(), counts.len().min(classes.len())));
    }
    Ok(cuboids
        .iter()
        .zip(counts)
        .zip(classes)
        .map(|((c, &n), class)| {
            let vr = match class {
                ScattererClass::Static => vr_static,
                ScattererClass::Dynamic => vr_dynamic,
            };
            if vr.contains(c.center) {
                n
            } else {
                0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtoracle::Scatterer;
    use proptest::prelude::*;

    fn gt(tx: Vec3, rx: Vec3, pts: &[Vec3]) -> GroundTruth {
        GroundTruth {
            snapshot_index: 0,
            los_blocked: false,
            tx,
            rx,
            scatterers: pts
                .iter()
                .map(|&position| Scatterer {
                    position,
                    kind: ScattererClass::Static,
                    source_object_id: 1,
                    face: 0,
                    reflection_loss: 6.0,
                })
                .collect(),
            ground_point: None,
        }
    }

    fn cub(center: Vec3) -> ClusterCuboid {
        ClusterCuboid { center, length: 1.0, width: 1.0, height: 1.0, orientation: [1.0, 0.0] }
    }

    #[test]
    fn collinear_scatterers_give_unit_ratio() {
        let g = gt(Vec3::ZERO, Vec3::new(10.0, 0.0, 0.0), &[Vec3::new(2.0, 0.0, 0.0), Vec3::new(7.0, 0.0, 0.0)]);
        assert_eq!(fit_vr(&[g], ScattererClass::Static, 0.95).unwrap(), 1.0);
    }

    #[test]
    fn full_coverage_contains_all() {
        let pts: Vec<Vec3> = (0..30).map(|i| Vec3::new(i as f64, 5.0 + i as f64 * 0.3, 1.0)).collect();
        let g = gt(Vec3::ZERO, Vec3::new(20.0, 0.0, 0.0), &pts);
        let rho = fit_vr(std::slice::from_ref(&g), ScattererClass::Static, 1.0).unwrap();
        let vr = VREllipsoid::from_ratio(&TransceiverPose::stationary(g.tx, g.rx), rho, ScattererClass::Static);
        assert!(pts.iter().all(|p| vr.contains(*p)));
        assert!((vr.b * vr.b + vr.c * vr.c - vr.a * vr.a).abs() < 1e-9);
    }

    #[test]
    fn missing_class_is_an_error() {
        let g = gt(Vec3::ZERO, Vec3::new(10.0, 0.0, 0.0), &[Vec3::new(2.0, 3.0, 0.0)]);
        assert!(matches!(fit_vr(&[g], ScattererClass::Dynamic, 0.9), Err(Error::NoScatterers("dynamic"))));
    }

    #[test]
    fn filter_examples() {
        let pose = TransceiverPose::stationary(Vec3::ZERO, Vec3::new(100.0, 0.0, 0.0));
        let vr = VREllipsoid::from_ratio(&pose, 1.2, ScattererClass::Static);
        assert!((vr.a - 60.0).abs() < 1e-12);
        let cubs = [cub(Vec3::new(200.0, 0.0, 0.0)), cub(Vec3::new(50.0, 0.0, 0.0))];
        let classes = [ScattererClass::Static; 2];
        assert_eq!(vr_filter(&cubs, &[3, 4], &classes, &vr, &vr).unwrap(), vec![0, 4]);
    }

    proptest! {
        #[test]
        fn quantile_matches_brute_force(
            sums in prop::collection::vec(1.0f64..5.0, 1..60),
            q in 0.05f64..1.0,
        ) {
            // Scatterers on the perpendicular bisector of a 20 m link with prescribed ratios.
            let pts: Vec<Vec3> = sums.iter().map(|r| Vec3::new(10.0, 10.0 * (r * r - 1.0).sqrt(), 0.0)).collect();
            let g = gt(Vec3::ZERO, Vec3::new(20.0, 0.0, 0.0), &pts);
            let actual = distance_ratios(std::slice::from_ref(&g), ScattererClass::Static);
            let rho = fit_vr(std::slice::from_ref(&g), ScattererClass::Static, q).unwrap();
            let n = actual.len() as f64;
            let best = actual
                .iter()
                .copied()
                .filter(|&cand| actual.iter().filter(|&&r| r <= cand).count() as f64 / n >= q)
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(rho, best.max(1.0));
        }

        #[test]
        fn coverage_is_monotone(
            sums in prop::collection::vec(1.0f64..5.0, 1..60),
            q1 in 0.05f64..1.0,
            q2 in 0.05f64..1.0,
        ) {
            let pts: Vec<Vec3> = sums.iter().map(|r| Vec3::new(10.0, 10.0 * (r * r - 1.0).sqrt(), 0.0)).collect();
            let g = gt(Vec3::ZERO, Vec3::new(20.0, 0.0, 0.0), &pts);
            let (lo, hi) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
            let a = fit_vr(std::slice::from_ref(&g), ScattererClass::Static, lo).unwrap();
            let b = fit_vr(std::slice::from_ref(&g), ScattererClass::Static, hi).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn filter_is_sound(
            centers in prop::collection::vec(prop::array::uniform3(-100.0f64..100.0), 0..40),
            rho in 1.0f64..3.0,
        ) {
            let pose = TransceiverPose::stationary(Vec3::new(-20.0, 0.0, 2.0), Vec3::new(30.0, 5.0, 2.0));
            let cubs: Vec<ClusterCuboid> = centers.iter().map(|&c| cub(Vec3::from(c))).collect();
            let counts = vec![2; cubs.len()];
            let classes: Vec<ScattererClass> = (0..cubs.len())
                .map(|i| if i % 2 == 0 { ScattererClass::Static } else { ScattererClass::Dynamic })
                .collect();
            let vs = VREllipsoid::from_ratio(&pose, rho, ScattererClass::Static);
            let vd = VREllipsoid::from_ratio(&pose, rho * 0.8 + 0.2, ScattererClass::Dynamic);
            let out = vr_filter(&cubs, &counts, &classes, &vs, &vd).unwrap();
            for ((c, n), class) in cubs.iter().zip(&out).zip(&classes) {
                let vr = if *class == ScattererClass::Static { &vs } else { &vd };
                if *n > 0 {
                    prop_assert!(vr.distance_sum(c.center) <= 2.0 * vr.a);
                }
            }
        }
    }
}
