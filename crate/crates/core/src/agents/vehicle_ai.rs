//! Route-following vehicle policy that yields to pedestrians.
//!
//! Steering is pure pursuit toward a lookahead point on the route polyline.
//! Speed tracks the route's cruise speed and is cut to a full brake whenever
//! a pedestrian stands inside the detection corridor: a lane-wide rectangle
//! that starts at the vehicle center and reaches past the front bumper by the
//! current braking distance plus a fixed margin.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::{AgentKind, AgentState, DriveCommand, DynamicsLimits, DT};

use super::route::Route;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AiParams {
    pub limits: DynamicsLimits,
    /// Minimum lookahead distance (m).
    pub lookahead_min: f64,
    /// Lookahead time gain (s); lookahead = max(min, gain * speed).
    pub lookahead_time: f64,
    /// Distance added past the braking distance (m).
    pub corridor_margin: f64,
    /// Corridor width (m).
    pub lane_width: f64,
    /// Deceleration used to plan stops at route ends and stop lines (m/s²).
    pub comfort_decel: f64,
}

impl Default for AiParams {
    fn default() -> Self {
        Self {
            limits: DynamicsLimits::default(),
            lookahead_min: 3.0,
            lookahead_time: 1.0,
            corridor_margin: 4.0,
            lane_width: 3.5,
            comfort_decel: 3.0,
        }
    }
}

impl AiParams {
    pub fn violations(&self) -> Vec<String> {
        let l = &self.limits;
        let named = [
            ("limits.v_max_car", l.v_max_car),
            ("limits.a_accel_max", l.a_accel_max),
            ("limits.a_brake_max", l.a_brake_max),
            ("limits.yaw_rate_max", l.yaw_rate_max),
            ("limits.v_max_ped", l.v_max_ped),
            ("lookahead_min", self.lookahead_min),
            ("lookahead_time", self.lookahead_time),
            ("lane_width", self.lane_width),
            ("comfort_decel", self.comfort_decel),
        ];
        let mut out: Vec<String> = named
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, v)| format!("params.{name} must be positive, got {v}"))
            .collect();
        if !(self.corridor_margin.is_finite() && self.corridor_margin >= 0.0) {
            out.push(format!("params.corridor_margin must be >= 0, got {}", self.corridor_margin));
        }
        out
    }

    /// Corridor length ahead of the front bumper at `speed`.
    pub fn corridor_length(&self, speed: f64) -> f64 {
        speed * speed / (2.0 * self.limits.a_brake_max) + self.corridor_margin
    }
}

/// Per-vehicle controller memory carried between frames.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AiMemory {
    segment: Option<usize>,
    next_stop: usize,
    stopped_since: Option<f64>,
}

/// Whether `other`'s center lies inside `vehicle`'s detection corridor.
pub fn in_detection_corridor(vehicle: &AgentState, other: &AgentState, params: &AiParams) -> bool {
    let u = Vec2::from_heading(vehicle.yaw());
    let rel = other.xy() - vehicle.xy();
    let lon = rel.dot(u);
    let lat = rel.dot(u.perp());
    let reach = vehicle.shape.length / 2.0 + params.corridor_length(vehicle.speed());
    (0.0..=reach).contains(&lon) && lat.abs() <= params.lane_width / 2.0
}

/// One frame of the vehicle policy. `others` may include the vehicle itself.
pub fn vehicle_ai_command(
    state: &AgentState,
    route: &Route,
    memory: &mut AiMemory,
    others: &[AgentState],
    params: &AiParams,
    t: f64,
) -> DriveCommand {
    let limits = &params.limits;
    let pos = state.xy();
    let speed = state.speed();
    let heading = Vec2::from_heading(state.yaw());

    let proj = route.project(pos, memory.segment);
    memory.segment = Some(proj.segment);

    let lookahead = params.lookahead_min.max(params.lookahead_time * speed);
    let target = route.point_at(proj.s + lookahead);
    let to_target = target - pos;
    let dist = to_target.norm();
    let yaw_rate = if dist > 1e-9 && speed > 0.0 {
        let alpha = to_target.dot(heading.perp()).atan2(to_target.dot(heading));
        let curvature = 2.0 * alpha.sin() / dist;
        (curvature * speed).to_degrees()
    } else {
        0.0
    };

    let mut target_speed = route.cruise_speed;
    if t < route.depart_time {
        target_speed = 0.0;
    }
    if !route.looped {
        let remaining = (route.length() - proj.s - 1.0).max(0.0);
        target_speed = target_speed.min((2.0 * params.comfort_decel * remaining).sqrt());
    }
    if let Some(stop) = route.stops.get(memory.next_stop) {
        let to_stop = stop.at - proj.s;
        match memory.stopped_since {
            Some(since) if t - since >= stop.dwell => {
                memory.next_stop += 1;
                memory.stopped_since = None;
            }
            Some(_) => target_speed = 0.0,
            None if to_stop < -2.0 => memory.next_stop += 1,
            None if to_stop <= 0.5 && speed < 0.05 => {
                memory.stopped_since = Some(t);
                target_speed = 0.0;
            }
            None => {
                target_speed = target_speed.min((2.0 * params.comfort_decel * to_stop.max(0.0)).sqrt());
            }
        }
    }

    let mut brake = false;
    for other in others.iter().filter(|o| o.id != state.id) {
        if !in_detection_corridor(state, other, params) {
            continue;
        }
        match other.kind {
            AgentKind::Pedestrian => brake = true,
            AgentKind::Car => {
                let along = other.planar_velocity().dot(heading);
                if along < speed {
                    brake = true;
                } else {
                    target_speed = target_speed.min(along);
                }
            }
        }
    }

    let accel = if brake {
        -limits.a_brake_max
    } else {
        ((target_speed - speed) / DT).clamp(-limits.a_brake_max, limits.a_accel_max)
    };
    DriveCommand {
        accel,
        yaw_rate: yaw_rate.clamp(-limits.yaw_rate_max, limits.yaw_rate_max),
    }
}
