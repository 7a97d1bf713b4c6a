//! Live human input: the wire message and its mapping to agent commands.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::sim::{clamp_speed, DriveCommand, DynamicsLimits, Pose, WalkCommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pedestrian,
    Vehicle,
    Observer,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Pedestrian => "pedestrian",
            Role::Vehicle => "vehicle",
            Role::Observer => "observer",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pedestrian" => Ok(Role::Pedestrian),
            "vehicle" => Ok(Role::Vehicle),
            "observer" => Ok(Role::Observer),
            other => Err(InputError::UnknownRole(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputPayload {
    Pedestrian {
        #[serde(rename = "move")]
        movement: Vec2,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        yaw: Option<f64>,
    },
    Vehicle {
        throttle: f64,
        steer: f64,
    },
}

/// One client input sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputMessage {
    pub seq: u64,
    pub client_time_ms: f64,
    pub role: Role,
    pub payload: InputPayload,
}

impl InputMessage {
    /// Checks the payload shape against the role and that all numbers are finite.
    pub fn validate(&self) -> Result<(), InputError> {
        if !self.client_time_ms.is_finite() {
            return Err(InputError::NonFinite);
        }
        match (self.role, &self.payload) {
            (Role::Pedestrian, InputPayload::Pedestrian { movement, yaw }) => {
                if !movement.is_finite() || yaw.is_some_and(|y| !y.is_finite()) {
                    return Err(InputError::NonFinite);
                }
            }
            (Role::Vehicle, InputPayload::Vehicle { throttle, steer }) => {
                if !throttle.is_finite() || !steer.is_finite() {
                    return Err(InputError::NonFinite);
                }
                if !(-1.0..=1.0).contains(throttle) || !(-1.0..=1.0).contains(steer) {
                    return Err(InputError::OutOfRange);
                }
            }
            (role, _) => return Err(InputError::PayloadRoleMismatch(role)),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("non-finite numeric field")]
    NonFinite,
    #[error("throttle/steer outside [-1, 1]")]
    OutOfRange,
    #[error("payload does not match role {0}")]
    PayloadRoleMismatch(Role),
    #[error("unknown role {0:?}")]
    UnknownRole(String),
}

/// Map a pedestrian payload to a walk command. Speed is clamped to
/// `v_max_ped`; a missing yaw keeps the previous pose's yaw.
pub fn live_walk_command(
    payload: &InputPayload,
    prev_pose: &Pose,
    limits: &DynamicsLimits,
) -> Result<WalkCommand, InputError> {
    match *payload {
        InputPayload::Pedestrian { movement, yaw } => {
            if !movement.is_finite() || yaw.is_some_and(|y| !y.is_finite()) {
                return Err(InputError::NonFinite);
            }
            Ok(WalkCommand {
                velocity: clamp_speed(movement, limits.v_max_ped),
                yaw: yaw.unwrap_or(prev_pose.yaw()),
            })
        }
        InputPayload::Vehicle { .. } => Err(InputError::PayloadRoleMismatch(Role::Pedestrian)),
    }
}

/// Map a steering-controller payload to a drive command. Malformed input
/// yields a coast command.
pub fn manual_vehicle_command(payload: &InputPayload, limits: &DynamicsLimits) -> DriveCommand {
    match *payload {
        InputPayload::Vehicle { throttle, steer }
            if throttle.is_finite()
                && steer.is_finite()
                && (-1.0..=1.0).contains(&throttle)
                && (-1.0..=1.0).contains(&steer) =>
        {
            let accel = if throttle >= 0.0 {
                throttle * limits.a_accel_max
            } else {
                throttle * limits.a_brake_max
            };
            DriveCommand {
                accel,
                yaw_rate: steer * limits.yaw_rate_max,
            }
        }
        _ => DriveCommand::COAST,
    }
}
