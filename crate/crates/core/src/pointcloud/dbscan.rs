use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Cluster, PointCloud};
use crate::geom::Vec3;

/// Result of a DBSCAN run: clusters in creation order plus the noise indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub noise: Vec<usize>,
}

impl Clustering {
    /// Per-point cluster label, `None` for noise.
    pub fn labels(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for c in &self.clusters {
            for &i in &c.member_indices {
                out[i] = Some(c.label);
            }
        }
        out
    }

    pub fn from_labels(labels: &[Option<usize>]) -> Clustering {
        let mut by_label: Vec<Vec<usize>> = Vec::new();
        let mut noise = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            match l {
                Some(l) => {
                    if by_label.len() <= *l {
                        by_label.resize(l + 1, Vec::new());
                    }
                    by_label[*l].push(i);
                }
                None => noise.push(i),
            }
        }
        Clustering {
            clusters: by_label
                .into_iter()
                .enumerate()
                .filter(|(_, m)| !m.is_empty())
                .map(|(label, member_indices)| Cluster { label, member_indices })
                .collect(),
            noise,
        }
    }
}

/// Uniform grid with cell side `eps` for fixed-radius neighbour queries.
struct Grid<'a> {
    points: &'a [Vec3],
    eps: f64,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Vec3], eps: f64) -> Self {
        let mut cells: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(*p, eps)).or_default().push(i);
        }
        Grid { points, eps, cells }
    }

    fn key(p: Vec3, eps: f64) -> (i64, i64, i64) {
        ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64, (p.z / eps).floor() as i64)
    }

    /// Indices within `eps` of point `i` (itself included), ascending.
    fn neighbours(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = self.points[i];
        let (kx, ky, kz) = Self::key(p, self.eps);
        let eps2 = self.eps * self.eps;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cell) = self.cells.get(&(kx + dx, ky + dy, kz + dz)) {
                        out.extend(cell.iter().copied().filter(|&j| (self.points[j] - p).norm_sq() <= eps2));
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

/// Density-based clustering. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`. Points are scanned in ascending index
/// order; a border point joins the first cluster that reaches it.
pub fn dbscan(cloud: &PointCloud, eps: f64, min_pts: usize) -> Clustering {
    let n = cloud.len();
    let grid = Grid::new(&cloud.points, eps);
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next_label = 0;
    let mut nbrs = Vec::new();
    let mut queue = VecDeque::new();

    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        grid.neighbours(i, &mut nbrs);
        if nbrs.len() < min_pts {
            continue;
        }
        let c = next_label;
        next_label += 1;
        label[i] = Some(c);
        queue.extend(nbrs.iter().copied().filter(|&j| j != i));
        while let Some(q) = queue.pop_front() {
            if label[q].is_none() {
                label[q] = Some(c);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            grid.neighbours(q, &mut nbrs);
            if nbrs.len() >= min_pts {
                queue.extend(nbrs.iter().copied().filter(|&j| !visited[j] || label[j].is_none()));
            }
        }
    }
    Clustering::from_labels(&label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob(rng: &mut ChaCha8Rng, c: Vec3, r: f64, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| loop {
                let d = Vec3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r));
                if d.norm() <= r {
                    break c + d;
                }
            })
            .collect()
    }

    #[test]
    fn two_separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pts = blob(&mut rng, Vec3::ZERO, 0.5, 50);
        pts.extend(blob(&mut rng, Vec3::new(10.0, 0.0, 0.0), 0.5, 50));
        let c = dbscan(&PointCloud::new(pts), 1.0, 5);
        assert_eq!(c.clusters.len(), 2);
        assert!(c.noise.is_empty());
        assert_eq!(c.clusters[0].member_indices, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn isolated_point_is_noise() {
        let c = dbscan(&PointCloud::new(vec![Vec3::ZERO]), 1.0, 2);
        assert!(c.clusters.is_empty());
        assert_eq!(c.noise, vec![0]);
    }

    #[test]
    fn min_pts_one_makes_every_point_a_cluster_member() {
        let pts = vec![Vec3::ZERO, Vec3::new(5.0, 0.0, 0.0)];
        let c = dbscan(&PointCloud::new(pts), 1.0, 1);
        assert_eq!(c.clusters.len(), 2);
    }

    #[test]
    fn chain_links_through_cores() {
        // Points every 0.8 m on a line; each interior point has 3 neighbours.
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(0.8 * i as f64, 0.0, 0.0)).collect();
        let c = dbscan(&PointCloud::new(pts), 1.0, 3);
        assert_eq!(c.clusters.len(), 1);
        assert_eq!(c.clusters[0].member_indices.len(), 10);
    }

    #[test]
    fn labels_round_trip() {
        let labels = vec![Some(0), None, Some(1), Some(0), None];
        let c = Clustering::from_labels(&labels);
        assert_eq!(c.labels(5), labels);
        assert_eq!(c.noise, vec![1, 4]);
    }
}
