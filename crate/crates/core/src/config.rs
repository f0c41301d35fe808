//! Simulation and planner hyperparameters.
//!
//! Values come from three layers, lowest precedence first: the defaults
//! below, a TOML config file, then command-line overrides applied by the
//! caller.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Primitive motions executed between replans.
    pub replan_interval: usize,
    /// Consecutive failed replans before a navigation sub-goal is abandoned.
    pub max_replans: usize,
    /// Horizontal field of view in degrees.
    pub fov_deg: f64,
    /// Perception range in meters.
    pub view_range: f64,
    /// Grasp reach radius in meters.
    pub reach_radius: f64,
    /// Objects a container can hold.
    pub container_capacity: usize,
    /// Per-item probability that a held item falls on a heavy collision.
    pub p_drop: f64,
    /// Per-item probability that an item stays inside a dropped container.
    pub p_still_in: f64,
    /// Agent map side length in cells.
    pub map_size: usize,
    /// Goal zone radius in meters around the goal furniture footprint.
    pub goal_radius: f64,
    /// Interaction budget in charged steps.
    pub budget: u32,
    /// Occupied-probability threshold used when planning over agent maps.
    pub occupancy_threshold: f64,
    /// Forward step length in meters.
    pub step_length: f64,
    /// Rotation quantum in degrees.
    pub turn_deg: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            replan_interval: 5,
            max_replans: 5,
            fov_deg: 90.0,
            view_range: 3.0,
            reach_radius: 0.75,
            container_capacity: 3,
            p_drop: 0.5,
            p_still_in: 0.0,
            map_size: 128,
            goal_radius: 1.0,
            budget: 1000,
            occupancy_threshold: 0.5,
            step_length: 0.5,
            turn_deg: 15.0,
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        prob("p_drop", self.p_drop)?;
        prob("p_still_in", self.p_still_in)?;
        prob("occupancy_threshold", self.occupancy_threshold)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("fov_deg", self.fov_deg)?;
        positive("view_range", self.view_range)?;
        positive("reach_radius", self.reach_radius)?;
        positive("goal_radius", self.goal_radius)?;
        positive("step_length", self.step_length)?;
        positive("turn_deg", self.turn_deg)?;
        if self.fov_deg > 360.0 {
            return Err(Error::Config("fov_deg must not exceed 360".into()));
        }
        if self.replan_interval == 0 || self.max_replans == 0 {
            return Err(Error::Config("replan_interval and max_replans must be positive".into()));
        }
        if self.map_size < 8 {
            return Err(Error::Config("map_size must be at least 8".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(())
    }
}
