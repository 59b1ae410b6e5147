//! Run configuration: library defaults, overridden by a TOML file, overridden
//! by flags.

use std::path::Path;

use dnapix::{ChannelParams, EncodeConfig, Strategy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeSettings {
    pub strategy: Strategy,
    /// Seed for the random selection strategy.
    pub seed: u64,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        Self { strategy: Strategy::Frequency, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub encode: EncodeConfig,
    pub channel: ChannelParams,
    pub decode: DecodeSettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}
