use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Longitudinal acceleration (m/s²) and yaw rate (deg/s) for a car.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveCommand {
    pub accel: f64,
    pub yaw_rate: f64,
}

impl DriveCommand {
    pub const COAST: DriveCommand = DriveCommand {
        accel: 0.0,
        yaw_rate: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        self.accel.is_finite() && self.yaw_rate.is_finite()
    }
}

/// Planar velocity (m/s) and facing yaw (deg) for a pedestrian.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WalkCommand {
    pub velocity: Vec2,
    pub yaw: f64,
}

impl WalkCommand {
    pub fn halt(yaw: f64) -> Self {
        Self {
            velocity: Vec2::ZERO,
            yaw,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.velocity.is_finite() && self.yaw.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Command {
    Drive(DriveCommand),
    Walk(WalkCommand),
}
