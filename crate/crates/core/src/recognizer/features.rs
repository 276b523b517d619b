use crate::geom::Vec3;
use crate::pointcloud::ClusterCuboid;
use crate::scenegen::TransceiverPose;

pub const FEATURE_DIM: usize = 14;

/// `[l, w, h, cx, cy, cz, ox, oy, tx_x, tx_y, tx_z, rx_x, rx_y, rx_z]` in the
/// link frame: origin at the Tx–Rx midpoint, +x along the horizontal Tx→Rx
/// direction.
pub type FeatureVector = [f64; FEATURE_DIM];

/// Rigid transform into the link frame.
#[derive(Debug, Clone, Copy)]
pub struct LinkFrame {
    origin: Vec3,
    angle: f64,
}

impl LinkFrame {
    pub fn new(tx: Vec3, rx: Vec3) -> Self {
        let d = rx - tx;
        LinkFrame {
            origin: (tx + rx) * 0.5,
            angle: d.y.atan2(d.x),
        }
    }

    pub fn point(&self, p: Vec3) -> Vec3 {
        (p - self.origin).rotate_z(-self.angle)
    }

    /// Axis direction, folded so the first component is non-negative.
    pub fn axis(&self, o: [f64; 2]) -> [f64; 2] {
        let (s, c) = (-self.angle).sin_cos();
        let (x, y) = (c * o[0] - s * o[1], s * o[0] + c * o[1]);
        if x < 0.0 || (x == 0.0 && y < 0.0) {
            [-x, -y]
        } else {
            [x, y]
        }
    }
}

pub fn extract_features(cuboid: &ClusterCuboid, pose: &TransceiverPose) -> FeatureVector {
    let frame = LinkFrame::new(pose.tx_position, pose.rx_position);
    let c = frame.point(cuboid.center);
    let o = frame.axis(cuboid.orientation);
    let t = frame.point(pose.tx_position);
    let r = frame.point(pose.rx_position);
    [
        cuboid.length,
        cuboid.width,
        cuboid.height,
        c.x,
        c.y,
        c.z,
        o[0],
        o[1],
        t.x,
        t.y,
        t.z,
        r.x,
        r.y,
        r.z,
    ]
}
