//! Circumscribed cuboids: the ground projection of a cluster is enclosed by its
//! minimum-perimeter rectangle (convex hull + rotating calipers) and extruded
//! over the cluster's vertical extent.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{Cluster, PointCloud};
use crate::error::{Error, Result};
use crate::geom::{Cuboid, Vec3};

/// Smallest admitted extent along any cuboid axis.
pub const MIN_EXTENT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterCuboid {
    pub center: Vec3,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Unit vector `(cos θ, sin θ)` along the long side.
    pub orientation: [f64; 2],
}

impl ClusterCuboid {
    pub fn angle(&self) -> f64 {
        self.orientation[1].atan2(self.orientation[0])
    }

    pub fn as_cuboid(&self) -> Cuboid {
        Cuboid::new(self.center, Vec3::new(self.length, self.width, self.height), self.angle())
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        self.as_cuboid().contains(p, tol)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.length + self.width)
    }
}

/// Oriented rectangle in the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub center: [f64; 2],
    pub length: f64,
    pub width: f64,
    /// Direction of the long side, in `[0, π)`.
    pub angle: f64,
}

impl Rect2 {
    pub fn perimeter(&self) -> f64 {
        2.0 * (self.length + self.width)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Monotone-chain convex hull, counter-clockwise, without collinear vertices.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Builds the rectangle from extents along `e` (`du`) and its normal (`dv`),
/// orienting it along the longer side.
fn make_rect(e: [f64; 2], center: [f64; 2], du: f64, dv: f64) -> Rect2 {
    let ae = normalize_angle(e[1].atan2(e[0]));
    let an = normalize_angle(ae + FRAC_PI_2);
    let scale = du.abs().max(dv.abs()).max(1.0);
    let (length, width, angle) = if (du - dv).abs() <= 1e-12 * scale {
        // Square: two equally valid long sides, take the one in [0, π/2).
        (du, dv, if ae < FRAC_PI_2 { ae } else { an })
    } else if du > dv {
        (du, dv, ae)
    } else {
        (dv, du, an)
    };
    Rect2 { center, length, width, angle }
}

/// Minimum-perimeter enclosing rectangle of a planar point set.
pub fn min_perimeter_rect(points: &[[f64; 2]]) -> Option<Rect2> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => None,
        1 => Some(Rect2 { center: hull[0], length: 0.0, width: 0.0, angle: 0.0 }),
        2 => {
            let d = [hull[1][0] - hull[0][0], hull[1][1] - hull[0][1]];
            let len = d[0].hypot(d[1]);
            let e = [d[0] / len, d[1] / len];
            let c = [(hull[0][0] + hull[1][0]) / 2.0, (hull[0][1] + hull[1][1]) / 2.0];
            Some(make_rect(e, c, len, 0.0))
        }
        _ => Some(rotating_calipers(&hull)),
    }
}

/// Rotating calipers over a CCW hull with at least three vertices. For each hull
/// edge the three opposing support vertices (max along the edge, farthest from
/// it, min along it) advance monotonically, so the sweep is linear.
fn rotating_calipers(h: &[[f64; 2]]) -> Rect2 {
    let m = h.len();
    let next = |i: usize| (i + 1) % m;
    let edge = |i: usize| {
        let (a, b) = (h[i], h[next(i)]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let l = d[0].hypot(d[1]);
        [d[0] / l, d[1] / l]
    };

    let mut best: Option<(f64, [f64; 2], [f64; 2], f64, f64)> = None;
    let (mut j, mut k, mut l) = (1usize, 1usize, 1usize);
    for i in 0..m {
        let e = edge(i);
        let n = [-e[1], e[0]];
        if i == 0 {
            j = next(i);
        }
        while dot(h[next(j)], e) > dot(h[j], e) {
            j = next(j);
        }
        if i == 0 {
            k = j;
        }
        while dot(h[next(k)], n) > dot(h[k], n) {
            k = next(k);
        }
        if i == 0 {
            l = k;
        }
        while dot(h[next(l)], e) < dot(h[l], e) {
            l = next(l);
        }
        let (umax, umin) = (dot(h[j], e), dot(h[l], e));
        let (vmax, vmin) = (dot(h[k], n), dot(h[i], n));
        let (du, dv) = (umax - umin, vmax - vmin);
        let perim = 2.0 * (du + dv);
        if best.map_or(true, |b| perim < b.0) {
            let cu = (umax + umin) / 2.0;
            let cv = (vmax + vmin) / 2.0;
            let center = [e[0] * cu + n[0] * cv, e[1] * cu + n[1] * cv];
            best = Some((perim, e, center, du, dv));
        }
    }
    let (_, e, center, du, dv) = best.expect("hull has edges");
    make_rect(e, center, du, dv)
}

/// Fits the circumscribed cuboid of one cluster.
pub fn fit_cuboid(cloud: &PointCloud, cluster: &Cluster) -> Result<ClusterCuboid> {
    if cluster.member_indices.is_empty() {
        return Err(Error::EmptyCluster(cluster.label));
    }
    let members = cloud.subset(&cluster.member_indices);
    let xy: Vec<[f64; 2]> = members.iter().map(|p| [p.x, p.y]).collect();
    let rect = min_perimeter_rect(&xy).expect("non-empty cluster");
    let (zmin, zmax) = members
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    let length = rect.length.max(MIN_EXTENT);
    Ok(ClusterCuboid {
        center: Vec3::new(rect.center[0], rect.center[1], (zmin + zmax) / 2.0),
        length,
        width: rect.width.max(MIN_EXTENT).min(length),
        height: (zmax - zmin).max(MIN_EXTENT),
        orientation: [rect.angle.cos(), rect.angle.sin()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cluster_of(points: Vec<Vec3>) -> (PointCloud, Cluster) {
        let n = points.len();
        (PointCloud::new(points), Cluster { label: 0, member_indices: (0..n).collect() })
    }

    fn square(rot: f64) -> Vec<Vec3> {
        let mut v = Vec::new();
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            for z in [0.0, 1.0] {
                v.push(Vec3::new(x, y, z).rotate_z(rot));
            }
        }
        v
    }

    #[test]
    fn unit_square() {
        let (c, k) = cluster_of(square(0.0));
        let b = fit_cuboid(&c, &k).unwrap();
        assert!((b.length - 1.0).abs() < 1e-12 && (b.width - 1.0).abs() < 1e-12);
        assert!((b.height - 1.0).abs() < 1e-12);
        assert!((b.perimeter() - 4.0).abs() < 1e-12);
        assert!((b.center - Vec3::new(0.5, 0.5, 0.5)).norm() < 1e-12);
        assert!(b.angle().abs() < 1e-12);
    }

    #[test]
    fn rotated_square() {
        let rot = 30f64.to_radians();
        let (c, k) = cluster_of(square(rot));
        let b = fit_cuboid(&c, &k).unwrap();
        assert!((b.length - 1.0).abs() < 1e-12 && (b.width - 1.0).abs() < 1e-12);
        let diff = (b.angle() - rot).rem_euclid(FRAC_PI_2);
        assert!(diff < 1e-9 || FRAC_PI_2 - diff < 1e-9, "angle {}", b.angle());
        let o = b.orientation;
        assert!((o[0].hypot(o[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_side_orientation() {
        let pts: Vec<Vec3> = [(0.0, 0.0), (4.0, 0.0), (4.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&(x, y)| Vec3::new(x, y, 0.0).rotate_z(2.0))
            .collect();
        let (c, k) = cluster_of(pts);
        let b = fit_cuboid(&c, &k).unwrap();
        assert!((b.length - 4.0).abs() < 1e-9 && (b.width - 1.0).abs() < 1e-9);
        assert!((b.angle() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_clusters_get_floors() {
        let (c, k) = cluster_of(vec![Vec3::new(1.0, 2.0, 3.0)]);
        let b = fit_cuboid(&c, &k).unwrap();
        assert_eq!((b.length, b.width, b.height), (MIN_EXTENT, MIN_EXTENT, MIN_EXTENT));

        let line: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, i as f64, 1.0)).collect();
        let (c, k) = cluster_of(line);
        let b = fit_cuboid(&c, &k).unwrap();
        assert!((b.length - 4.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(b.width, MIN_EXTENT);
        assert!((b.angle() - PI / 4.0).abs() < 1e-12);

        let empty = Cluster { label: 3, member_indices: vec![] };
        assert!(matches!(fit_cuboid(&c, &empty), Err(Error::EmptyCluster(3))));
    }

    #[test]
    fn members_are_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..60);
            let pts: Vec<Vec3> = (0..n)
                .map(|_| Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..3.0)))
                .collect();
            let (c, k) = cluster_of(pts.clone());
            let b = fit_cuboid(&c, &k).unwrap();
            assert!(b.length >= b.width && b.width > 0.0 && b.height > 0.0);
            for p in &pts {
                assert!(b.contains(*p, 1e-9));
            }
        }
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 1.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
    }
}
