use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_deg, Vec2};

pub type AgentId = u32;

/// Position in meters (global frame) and rotation `(yaw, pitch, roll)` in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    pub rotation: [f64; 3],
}

impl Pose {
    pub fn planar(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            position: [x, y, 0.0],
            rotation: [yaw, 0.0, 0.0],
        }
    }

    pub fn xy(&self) -> Vec2 {
        Vec2::new(self.position[0], self.position[1])
    }

    pub fn yaw(&self) -> f64 {
        self.rotation[0]
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(&self.rotation).all(|v| v.is_finite())
    }
}

/// Bounding box extents in meters, serialized as `[length, width, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Shape {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Shape {
    pub const CAR: Shape = Shape {
        length: 4.5,
        width: 2.0,
        height: 1.5,
    };
    pub const PEDESTRIAN: Shape = Shape {
        length: 0.5,
        width: 0.5,
        height: 1.75,
    };

    pub fn new(length: f64, width: f64, height: f64) -> Self {
        Self {
            length,
            width,
            height,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.length, self.width, self.height]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

impl From<[f64; 3]> for Shape {
    fn from([length, width, height]: [f64; 3]) -> Self {
        Self {
            length,
            width,
            height,
        }
    }
}

impl From<Shape> for [f64; 3] {
    fn from(s: Shape) -> Self {
        [s.length, s.width, s.height]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Car,
    Pedestrian,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Car => "car",
            AgentKind::Pedestrian => "pedestrian",
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub kind: AgentKind,
    pub pose: Pose,
    pub velocity: [f64; 3],
    pub acceleration: [f64; 3],
    pub shape: Shape,
}

impl AgentState {
    /// A ground agent at rest or moving along its heading at `speed`. The
    /// spawn yaw is normalized.
    pub fn spawn(id: AgentId, kind: AgentKind, shape: Shape, mut pose: Pose, speed: f64) -> Self {
        pose.rotation[0] = normalize_deg(pose.rotation[0]);
        let dir = Vec2::from_heading(pose.yaw());
        Self {
            id,
            kind,
            pose,
            velocity: [dir.x * speed, dir.y * speed, 0.0],
            acceleration: [0.0; 3],
            shape,
        }
    }

    pub fn xy(&self) -> Vec2 {
        self.pose.xy()
    }

    pub fn yaw(&self) -> f64 {
        self.pose.yaw()
    }

    pub fn planar_velocity(&self) -> Vec2 {
        Vec2::new(self.velocity[0], self.velocity[1])
    }

    pub fn speed(&self) -> f64 {
        self.planar_velocity().norm()
    }
}

/// Per-kind kinematic limits. Defaults are artifact choices; scenarios may
/// override them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsLimits {
    /// m/s
    pub v_max_car: f64,
    /// m/s²
    pub a_accel_max: f64,
    /// m/s², positive magnitude
    pub a_brake_max: f64,
    /// deg/s
    pub yaw_rate_max: f64,
    /// m/s
    pub v_max_ped: f64,
}

impl Default for DynamicsLimits {
    fn default() -> Self {
        Self {
            v_max_car: 13.0,
            a_accel_max: 3.0,
            a_brake_max: 6.0,
            yaw_rate_max: 60.0,
            v_max_ped: 3.0,
        }
    }
}
