use proptest::prelude::*;
use rand::Rng;
use scatterec::geom::Cuboid;
use scatterec::rtoracle::{trace_ground_truth, GroundTruth, OracleConfig, ScattererClass};
use scatterec::scenegen::{ObjectKind, Scene, SceneObject, StreetLayout, TransceiverPose, Vtd};
use scatterec::{seed, Vec3};

/// Local axes of a yawed box, computed here rather than taken from the crate.
fn axes(yaw: f64) -> [Vec3; 3] {
    let (s, c) = yaw.sin_cos();
    [Vec3::new(c, s, 0.0), Vec3::new(-s, c, 0.0), Vec3::new(0.0, 0.0, 1.0)]
}

fn local(b: &Cuboid, p: Vec3) -> [f64; 3] {
    let d = p - b.center;
    let a = axes(b.yaw);
    [d.dot(a[0]), d.dot(a[1]), d.dot(a[2])]
}

fn half(b: &Cuboid) -> [f64; 3] {
    [b.dims.x / 2.0, b.dims.y / 2.0, b.dims.z / 2.0]
}

/// Faces as (outward normal, centre, in-plane half extents), in the order
/// +x, -x, +y, -y, +z, -z.
fn naive_faces(b: &Cuboid) -> Vec<(Vec3, Vec3, usize, usize)> {
    let a = axes(b.yaw);
    let h = half(b);
    let mut out = Vec::new();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let n = a[axis] * sign;
            let (u, v) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            out.push((n, b.center + n * h[axis], u, v));
        }
    }
    out
}

fn strictly_inside(b: &Cuboid, p: Vec3) -> bool {
    let l = local(b, p);
    let h = half(b);
    (0..3).all(|i| l[i].abs() < h[i])
}

/// Smallest positive entry parameter over the six face rectangles.
fn naive_entry(b: &Cuboid, o: Vec3, d: Vec3) -> Option<f64> {
    let h = half(b);
    let mut best: Option<f64> = None;
    for (n, c, u, v) in naive_faces(b) {
        let dn = d.dot(n);
        if dn >= 0.0 {
            continue;
        }
        let t = (c - o).dot(n) / dn;
        if t <= 0.0 {
            continue;
        }
        let l = local(b, o + d * t);
        if l[u].abs() <= h[u] && l[v].abs() <= h[v] {
            best = Some(best.map_or(t, |x: f64| x.min(t)));
        }
    }
    best
}

fn random_box<R: Rng>(rng: &mut R) -> Cuboid {
    Cuboid::new(
        Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.0..4.0)),
        Vec3::new(rng.gen_range(0.3..8.0), rng.gen_range(0.3..8.0), rng.gen_range(0.3..6.0)),
        rng.gen_range(-3.2..3.2),
    )
}

#[test]
fn ray_box_matches_face_enumeration() {
    let mut rng = seed::rng(11, &[]);
    let (mut hits, mut checked) = (0, 0);
    while checked < 10_000 {
        let b = random_box(&mut rng);
        let o = Vec3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..10.0));
        if strictly_inside(&b, o) || b.contains(o, 1e-6) {
            continue;
        }
        let target = b.center + Vec3::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0), rng.gen_range(-4.0..4.0));
        let d = (target - o).normalized();
        checked += 1;
        let got = b.ray_hit(o, d);
        let want = naive_entry(&b, o, d);
        match (got, want) {
            (Some(g), Some(w)) => {
                hits += 1;
                assert!((g - w).abs() <= 1e-9 * w.max(1.0), "ray {checked}: {g} vs {w}");
            }
            (None, None) => {}
            _ => panic!("ray {checked}: slab {got:?} vs faces {want:?}"),
        }
    }
    assert!(hits > 1000, "too few hits to be meaningful: {hits}");
}

#[test]
fn segment_blocking_matches_face_enumeration() {
    let mut rng = seed::rng(12, &[]);
    let mut checked = 0;
    while checked < 10_000 {
        let b = random_box(&mut rng);
        let p = |rng: &mut rand_chacha::ChaCha8Rng| {
            Vec3::new(rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0), rng.gen_range(-3.0..8.0))
        };
        let (a, e) = (p(&mut rng), p(&mut rng));
        if b.contains(a, 1e-6) || b.contains(e, 1e-6) {
            continue;
        }
        checked += 1;
        let want = naive_entry(&b, a, e - a).is_some_and(|t| t < 1.0);
        assert_eq!(b.blocks_segment(a, e), want, "segment {a:?} -> {e:?}");
    }
}

fn object(id: u32, kind: ObjectKind, center: Vec3, dims: Vec3, yaw: f64) -> SceneObject {
    SceneObject { id, kind, center, dims, yaw, velocity: Vec3::ZERO }
}

fn scene(objects: Vec<SceneObject>) -> Scene {
    let mut all = vec![object(0, ObjectKind::Ground, Vec3::new(0.0, 0.0, -0.05), Vec3::new(400.0, 400.0, 0.1), 0.0)];
    all.extend(objects);
    Scene {
        layout: StreetLayout::Vertical,
        vtd: Vtd::Low,
        seed: 0,
        snapshot_index: 0,
        snapshot_period: 0.1,
        objects: all,
        links: Vec::new(),
    }
}

fn naive_blocked(boxes: &[(u32, Cuboid)], a: Vec3, b: Vec3, skip: u32) -> bool {
    boxes.iter().any(|(id, c)| *id != skip && naive_entry(c, a, b - a).is_some_and(|t| t < 1.0 - 1e-12))
}

/// Every face, specular point by projecting both antennas onto the plane and
/// splitting the projected segment in the ratio of their heights above it.
fn brute_force(sc: &Scene, tx: Vec3, rx: Vec3) -> Vec<(u32, u8, Vec3)> {
    let boxes: Vec<(u32, Cuboid)> = sc.solids().map(|o| (o.id, o.cuboid())).collect();
    let mut out = Vec::new();
    for (id, b) in &boxes {
        let h = half(b);
        for (fi, (n, c, u, v)) in naive_faces(b).into_iter().enumerate() {
            let (dt, dr) = ((tx - c).dot(n), (rx - c).dot(n));
            if dt <= 0.0 || dr <= 0.0 {
                continue;
            }
            let (pt, pr) = (tx - n * dt, rx - n * dr);
            let p = pt + (pr - pt) * (dt / (dt + dr));
            let l = local(b, p);
            if l[u].abs() > h[u] + 1e-9 || l[v].abs() > h[v] + 1e-9 {
                continue;
            }
            if naive_blocked(&boxes, tx, p, *id) || naive_blocked(&boxes, p, rx, *id) {
                continue;
            }
            out.push((*id, fi as u8, p));
        }
    }
    out
}

fn angle(a: Vec3, b: Vec3) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

fn check_physics(sc: &Scene, gt: &GroundTruth) -> Result<(), TestCaseError> {
    for s in &gt.scatterers {
        let o = sc.object(s.source_object_id).unwrap();
        let face = o.cuboid().faces()[s.face as usize];
        let n = face.normal;
        let (ai, ar) = (angle(gt.tx - s.position, n), angle(gt.rx - s.position, n));
        prop_assert!((ai - ar).abs() < 1e-9, "specular law: {} vs {}", ai, ar);
        prop_assert!(o.cuboid().surface_distance(s.position) < 1e-6);
        prop_assert_eq!(s.kind == ScattererClass::Dynamic, o.kind.is_vehicle());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn oracle_matches_brute_force(
        car in (-15.0..15.0f64, -6.0..6.0f64, -1.6..1.6f64),
        bld in (-20.0..20.0f64, 8.0..25.0f64, 5.0..30.0f64, 4.0..15.0f64, -0.5..0.5f64),
        tx in (-30.0..30.0f64, -6.0..6.0f64, 1.0..3.0f64),
        rx in (-30.0..30.0f64, -6.0..6.0f64, 1.0..3.0f64),
    ) {
        let sc = scene(vec![
            object(1, ObjectKind::Car, Vec3::new(car.0, car.1, 0.75), Vec3::new(4.5, 1.8, 1.5), car.2),
            object(2, ObjectKind::Building, Vec3::new(bld.0, bld.1, bld.3 / 2.0), Vec3::new(bld.2, 8.0, bld.3), bld.4),
        ]);
        let (tx, rx) = (Vec3::new(tx.0, tx.1, tx.2), Vec3::new(rx.0, rx.1, rx.2));
        prop_assume!(sc.solids().all(|o| !o.cuboid().contains(tx, 1e-3) && !o.cuboid().contains(rx, 1e-3)));
        let gt = trace_ground_truth(&sc, &TransceiverPose::stationary(tx, rx), &OracleConfig::default());
        let want = brute_force(&sc, tx, rx);
        prop_assert_eq!(gt.scatterers.len(), want.len());
        for (s, (id, face, p)) in gt.scatterers.iter().zip(&want) {
            prop_assert_eq!((s.source_object_id, s.face), (*id, *face));
            prop_assert!(s.position.distance(*p) < 1e-9);
        }
        check_physics(&sc, &gt)?;
    }
}
