//! Scatterer recognition from LiDAR point clouds and environment-embedded
//! vehicular channel synthesis.
//!
//! The pipeline runs scene generation ([`scenegen`]) → LiDAR point clouds →
//! clustering and cuboid fitting ([`pointcloud`]) → per-cluster scatterer counts
//! and visibility-region filtering ([`recognizer`]) → channel impulse response,
//! transfer function and power-delay profile ([`channel`]). A single-bounce
//! image-method tracer ([`rtoracle`]) supplies ground truth, and [`harness`]
//! ties everything into datasets, training, evaluation and reports.

pub mod error;
pub mod channel;
pub mod geom;
pub mod harness;
pub mod pointcloud;
pub mod recognizer;
pub mod rtoracle;
pub mod scenegen;
pub mod seed;

pub use error::{Error, Result};
pub use geom::Vec3;
