use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::pointcloud::PointCloudConfig;
use crate::recognizer::{RecognizerConfig, TrainConfig};
use crate::rtoracle::OracleConfig;
use crate::scenegen::{LidarConfig, SceneConfig, StreetLayout, Vtd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Snapshots per link.
    pub snapshots: u64,
    pub layouts: Vec<StreetLayout>,
    pub vtds: Vec<Vtd>,
    /// Condition and link used for the channel-fidelity comparison.
    pub fidelity_layout: StreetLayout,
    pub fidelity_vtd: Vtd,
    pub fidelity_link: usize,
    /// Frequencies per snapshot in the TVTF dump.
    pub tvtf_points: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            snapshots: 100,
            layouts: StreetLayout::ALL.to_vec(),
            vtds: Vtd::ALL.to_vec(),
            fidelity_layout: StreetLayout::Vertical,
            fidelity_vtd: Vtd::High,
            fidelity_link: 0,
            tvtf_points: 64,
        }
    }
}

/// Every tunable of the pipeline. Serialized as TOML with one table per module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub scene: SceneConfig,
    pub lidar: LidarConfig,
    pub oracle: OracleConfig,
    pub pointcloud: PointCloudConfig,
    pub recognizer: RecognizerConfig,
    pub train: TrainConfig,
    pub channel: ChannelParams,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 2024,
            dataset: DatasetConfig::default(),
            scene: SceneConfig::default(),
            lidar: LidarConfig::default(),
            oracle: OracleConfig::default(),
            pointcloud: PointCloudConfig::default(),
            recognizer: RecognizerConfig::default(),
            train: TrainConfig::default(),
            channel: ChannelParams::default(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.dataset.snapshots == 0 {
            return Err(Error::Config("dataset.snapshots must be at least 1".into()));
        }
        if self.dataset.layouts.is_empty() || self.dataset.vtds.is_empty() {
            return Err(Error::Config("dataset needs at least one layout and one vtd".into()));
        }
        self.scene.validate()?;
        self.lidar.validate()?;
        self.oracle.validate()?;
        self.pointcloud.validate()?;
        self.recognizer.validate()?;
        self.train.validate()?;
        self.channel.validate()
    }

    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}
