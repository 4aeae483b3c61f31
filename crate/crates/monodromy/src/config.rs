//! Run-wide configuration shared by the CLI and the verification suite.

use thiserror::Error;

use crate::group::DEFAULT_CLOSURE_CAP;
use crate::path::Orientation;
use crate::poly::{ContinuationConfig, RootConfig};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("tolerance {0} must be positive")]
    NonPositiveTolerance(&'static str),
    #[error("level cap must be at least 1")]
    LevelCapTooSmall,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol_root: f64,
    pub tol_cluster: f64,
    pub tol_clearance: f64,
    pub level_cap: usize,
    pub closure_cap: usize,
    pub seed: u64,
    pub orientation: Orientation,
    pub json: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol_root: 1e-12,
            tol_cluster: 1e-8,
            tol_clearance: 1e-9,
            level_cap: 4,
            closure_cap: DEFAULT_CLOSURE_CAP,
            seed: 0,
            orientation: Orientation::Ccw,
            json: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("tol-root", self.tol_root),
            ("tol-cluster", self.tol_cluster),
            ("tol-clearance", self.tol_clearance),
        ] {
            if v <= 0.0 {
                return Err(ConfigError::NonPositiveTolerance(match name {
                    "tol-root" => "tol-root",
                    "tol-cluster" => "tol-cluster",
                    _ => "tol-clearance",
                }));
            }
        }
        if self.level_cap < 1 {
            return Err(ConfigError::LevelCapTooSmall);
        }
        Ok(())
    }

    pub fn root_config(&self) -> RootConfig {
        RootConfig {
            residual_tol: self.tol_root,
            cluster_tol: self.tol_cluster,
            ..RootConfig::default()
        }
    }

    pub fn engine_config(&self) -> crate::engine::EngineConfig {
        crate::engine::EngineConfig {
            orientation: self.orientation,
            clearance: self.tol_clearance,
            roots: self.root_config(),
            continuation: ContinuationConfig {
                residual_tol: (self.tol_root * 10.0).max(1e-13),
                ..crate::engine::EngineConfig::default().continuation
            },
            ..crate::engine::EngineConfig::default()
        }
    }
}
