//! Kinematic integration for cars (speed + yaw rate) and pedestrians
//! (direct planar velocity control).

use crate::geometry::{normalize_deg, Vec2};

use super::command::{DriveCommand, WalkCommand};
use super::types::{AgentKind, AgentState, DynamicsLimits};
use super::SimError;

/// Advance a car by one step.
///
/// Acceleration and yaw rate are clamped to the limits. The new speed is
/// clamped to `[0, v_max_car]`; the position then moves along the
/// constant-curvature arc from the old to the new heading, travelled at the
/// new speed. For a straight step this is exactly `speed' * dt` along the
/// heading, and under a constant yaw rate the points lie on the exact circle.
pub fn integrate_vehicle(
    state: &AgentState,
    cmd: DriveCommand,
    dt: f64,
    limits: &DynamicsLimits,
) -> Result<AgentState, SimError> {
    if state.kind != AgentKind::Car {
        return Err(SimError::KindMismatch {
            id: state.id,
            expected: AgentKind::Car,
            found: state.kind,
        });
    }
    if !cmd.is_finite() {
        return Err(SimError::NonFiniteCommand { id: state.id });
    }
    let accel = cmd.accel.clamp(-limits.a_brake_max, limits.a_accel_max);
    let yaw_rate = cmd.yaw_rate.clamp(-limits.yaw_rate_max, limits.yaw_rate_max);

    let speed = (state.speed() + accel * dt).clamp(0.0, limits.v_max_car);
    let yaw0 = state.yaw();
    let dyaw = yaw_rate * dt;

    let half = dyaw.to_radians() / 2.0;
    let chord_scale = if half == 0.0 { 1.0 } else { half.sin() / half };
    let step = Vec2::from_heading(yaw0 + dyaw / 2.0) * (speed * dt * chord_scale);

    let yaw = normalize_deg(yaw0 + dyaw);
    let dir = Vec2::from_heading(yaw);
    let velocity = [dir.x * speed, dir.y * speed, 0.0];

    let mut next = *state;
    next.pose.position[0] += step.x;
    next.pose.position[1] += step.y;
    next.pose.rotation = [yaw, 0.0, 0.0];
    next.acceleration = backward_difference(&state.velocity, &velocity, dt);
    next.velocity = velocity;
    Ok(next)
}

/// Advance a pedestrian by one step. The commanded velocity is clamped to
/// `v_max_ped` and the yaw is taken from the command.
pub fn integrate_pedestrian(
    state: &AgentState,
    cmd: WalkCommand,
    dt: f64,
    limits: &DynamicsLimits,
) -> Result<AgentState, SimError> {
    if state.kind != AgentKind::Pedestrian {
        return Err(SimError::KindMismatch {
            id: state.id,
            expected: AgentKind::Pedestrian,
            found: state.kind,
        });
    }
    if !cmd.is_finite() {
        return Err(SimError::NonFiniteCommand { id: state.id });
    }
    let v = clamp_speed(cmd.velocity, limits.v_max_ped);
    let velocity = [v.x, v.y, 0.0];

    let mut next = *state;
    next.pose.position[0] += v.x * dt;
    next.pose.position[1] += v.y * dt;
    next.pose.rotation = [normalize_deg(cmd.yaw), 0.0, 0.0];
    next.acceleration = backward_difference(&state.velocity, &velocity, dt);
    next.velocity = velocity;
    Ok(next)
}

/// Scale `v` down so that its norm does not exceed `max`.
pub fn clamp_speed(v: Vec2, max: f64) -> Vec2 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

fn backward_difference(prev: &[f64; 3], next: &[f64; 3], dt: f64) -> [f64; 3] {
    [
        (next[0] - prev[0]) / dt,
        (next[1] - prev[1]) / dt,
        (next[2] - prev[2]) / dt,
    ]
}
