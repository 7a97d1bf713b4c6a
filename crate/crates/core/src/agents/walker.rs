use serde::{Deserialize, Serialize};

use crate::geometry::{closest_point_on_segment, Vec2};
use crate::sim::{AgentKind, AgentState, WalkCommand, DT};

/// Extra clearance (m) kept between the walking path and any car footprint,
/// moving or not, before a gap is accepted.
const PATH_CLEARANCE: f64 = 1.0;
/// Cars slower than this are not considered approaching.
const MOVING_SPEED: f64 = 0.1;
/// Distance at which a goto target counts as reached.
const ARRIVAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum WalkSegment {
    Goto { point: Vec2, speed: f64 },
    Wait { duration: f64 },
    /// Hold until no approaching car is within `min_gap` meters of the next
    /// goto leg.
    WaitUntilGap { min_gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WalkerScript {
    pub segments: Vec<WalkSegment>,
}

impl WalkerScript {
    pub fn new(segments: Vec<WalkSegment>) -> Self {
        Self { segments }
    }

    pub fn violations(&self, v_max_ped: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            match *seg {
                WalkSegment::Goto { point, speed } => {
                    if !point.is_finite() {
                        out.push(format!("segment {i}: goto point is not finite"));
                    }
                    if !(speed > 0.0 && speed <= v_max_ped) {
                        out.push(format!("segment {i}: goto speed {speed} outside (0, {v_max_ped}]"));
                    }
                }
                WalkSegment::Wait { duration } => {
                    if !(duration >= 0.0 && duration.is_finite()) {
                        out.push(format!("segment {i}: wait duration {duration} must be >= 0"));
                    }
                }
                WalkSegment::WaitUntilGap { min_gap } => {
                    if !(min_gap >= 0.0 && min_gap.is_finite()) {
                        out.push(format!("segment {i}: min_gap {min_gap} must be >= 0"));
                    }
                }
            }
        }
        out
    }

    /// Target of the first goto at or after segment `from`.
    fn next_goto(&self, from: usize) -> Option<Vec2> {
        self.segments[from..].iter().find_map(|s| match s {
            WalkSegment::Goto { point, .. } => Some(*point),
            _ => None,
        })
    }
}

/// Execution state of a script.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptProgress {
    pub index: usize,
    pub segment_started: Option<f64>,
    pub done: bool,
}

impl ScriptProgress {
    fn advance(&mut self) {
        self.index += 1;
        self.segment_started = None;
    }
}

/// True when no car threatens the straight leg `from -> to`.
///
/// A car blocks the leg when its footprint comes within a fixed clearance of
/// the leg, or when it is moving toward the leg with its center closer than
/// `min_gap`.
pub fn gap_clear(from: Vec2, to: Vec2, others: &[AgentState], min_gap: f64) -> bool {
    others.iter().filter(|o| o.kind == AgentKind::Car).all(|car| {
        let (closest, _) = closest_point_on_segment(car.xy(), from, to);
        let offset = closest - car.xy();
        let dist = offset.norm();
        let half_diag = car.shape.length.hypot(car.shape.width) / 2.0;
        if dist <= half_diag + PATH_CLEARANCE {
            return false;
        }
        let approaching = car.speed() > MOVING_SPEED && car.planar_velocity().dot(offset) > 0.0;
        !(approaching && dist < min_gap)
    })
}

/// One frame of a scripted pedestrian at simulation time `t`.
///
/// Completed waits and accepted gaps advance to the following segment within
/// the same frame. After the last segment the walker halts and
/// `progress.done` is set.
pub fn scripted_walker_command(
    script: &WalkerScript,
    progress: &mut ScriptProgress,
    state: &AgentState,
    others: &[AgentState],
    t: f64,
) -> WalkCommand {
    let pos = state.xy();
    let hold = WalkCommand::halt(state.yaw());
    while let Some(segment) = script.segments.get(progress.index) {
        match *segment {
            WalkSegment::Goto { point, speed } => {
                let delta = point - pos;
                let dist = delta.norm();
                if dist <= ARRIVAL_EPS {
                    progress.advance();
                    continue;
                }
                let velocity = if dist <= speed * DT {
                    delta * (1.0 / DT)
                } else {
                    delta * (speed / dist)
                };
                return WalkCommand {
                    velocity,
                    yaw: delta.heading_deg(),
                };
            }
            WalkSegment::Wait { duration } => {
                let started = *progress.segment_started.get_or_insert(t);
                // frame times are multiples of DT; the epsilon absorbs rounding
                if t - started + 1e-9 >= duration {
                    progress.advance();
                    continue;
                }
                return hold;
            }
            WalkSegment::WaitUntilGap { min_gap } => {
                let clear = match script.next_goto(progress.index + 1) {
                    Some(target) => gap_clear(pos, target, others, min_gap),
                    None => true,
                };
                if clear {
                    progress.advance();
                    continue;
                }
                return hold;
            }
        }
    }
    progress.done = true;
    hold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Pose, Shape};

    fn walker_at(x: f64, y: f64) -> AgentState {
        AgentState::spawn(9, AgentKind::Pedestrian, Shape::PEDESTRIAN, Pose::planar(x, y, 0.0), 0.0)
    }

    fn car(id: u32, x: f64, y: f64, yaw: f64, speed: f64) -> AgentState {
        AgentState::spawn(id, AgentKind::Car, Shape::CAR, Pose::planar(x, y, yaw), speed)
    }

    #[test]
    fn goto_heads_to_target() {
        let script = WalkerScript::new(vec![WalkSegment::Goto { point: Vec2::new(10.0, 0.0), speed: 1.4 }]);
        let mut progress = ScriptProgress::default();
        let cmd = scripted_walker_command(&script, &mut progress, &walker_at(0.0, 0.0), &[], 0.0);
        assert_eq!(cmd.velocity, Vec2::new(1.4, 0.0));
        assert_eq!(cmd.yaw, 0.0);
    }

    #[test]
    fn goto_lands_exactly_and_finishes() {
        let script = WalkerScript::new(vec![WalkSegment::Goto { point: Vec2::new(0.05, 0.0), speed: 1.4 }]);
        let mut progress = ScriptProgress::default();
        let cmd = scripted_walker_command(&script, &mut progress, &walker_at(0.0, 0.0), &[], 0.0);
        assert!((cmd.velocity.x - 1.0).abs() < 1e-12);
        let cmd = scripted_walker_command(&script, &mut progress, &walker_at(0.05, 0.0), &[], 0.05);
        assert_eq!(cmd.velocity, Vec2::ZERO);
        assert!(progress.done);
    }

    #[test]
    fn wait_holds_then_releases() {
        let script = WalkerScript::new(vec![
            WalkSegment::Wait { duration: 2.0 },
            WalkSegment::Goto { point: Vec2::new(0.0, 5.0), speed: 1.0 },
        ]);
        let mut progress = ScriptProgress::default();
        let me = walker_at(0.0, 0.0);
        let cmd = scripted_walker_command(&script, &mut progress, &me, &[], 0.0);
        assert_eq!(cmd.velocity, Vec2::ZERO);
        let cmd = scripted_walker_command(&script, &mut progress, &me, &[], 1.0);
        assert_eq!(cmd.velocity, Vec2::ZERO);
        let cmd = scripted_walker_command(&script, &mut progress, &me, &[], 2.0);
        assert_eq!(cmd.velocity, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn gap_acceptance_against_hand_placed_geometry() {
        // Crossing leg from (0,-4) to (0,4); a car drives toward it along y = -1.75.
        let script = WalkerScript::new(vec![
            WalkSegment::WaitUntilGap { min_gap: 15.0 },
            WalkSegment::Goto { point: Vec2::new(0.0, 4.0), speed: 1.4 },
        ]);
        let me = walker_at(0.0, -4.0);

        // Center 9 m from the leg, approaching: hold.
        let close = car(1, -9.0, -1.75, 0.0, 8.0);
        let mut progress = ScriptProgress::default();
        let cmd = scripted_walker_command(&script, &mut progress, &me, &[close], 0.0);
        assert_eq!(cmd.velocity, Vec2::ZERO);
        assert_eq!(progress.index, 0);

        // Center 20 m away: advance and start walking in the same frame.
        let far = car(1, -20.0, -1.75, 0.0, 8.0);
        let mut progress = ScriptProgress::default();
        let cmd = scripted_walker_command(&script, &mut progress, &me, &[far], 0.0);
        assert_eq!(progress.index, 1);
        assert_eq!(cmd.velocity, Vec2::new(0.0, 1.4));

        // Close but driving away: not a threat.
        let leaving = car(1, 9.0, -1.75, 0.0, 8.0);
        assert!(gap_clear(Vec2::new(0.0, -4.0), Vec2::new(0.0, 4.0), &[leaving], 15.0));

        // Parked right across the path: blocks regardless of speed.
        let parked = car(1, 1.0, 0.0, 0.0, 0.0);
        assert!(!gap_clear(Vec2::new(0.0, -4.0), Vec2::new(0.0, 4.0), &[parked], 15.0));
    }

    #[test]
    fn pure_function_of_inputs() {
        let script = WalkerScript::new(vec![
            WalkSegment::Wait { duration: 0.5 },
            WalkSegment::WaitUntilGap { min_gap: 10.0 },
            WalkSegment::Goto { point: Vec2::new(3.0, 3.0), speed: 1.2 },
        ]);
        let me = walker_at(0.0, 0.0);
        let others = [car(1, -12.0, 1.5, 0.0, 6.0)];
        let mut p1 = ScriptProgress::default();
        let mut p2 = ScriptProgress::default();
        for i in 0..30 {
            let t = i as f64 * DT;
            let a = scripted_walker_command(&script, &mut p1, &me, &others, t);
            let b = scripted_walker_command(&script, &mut p2, &me, &others, t);
            assert_eq!(a, b);
            assert_eq!(p1, p2);
        }
    }

    #[test]
    fn rejects_bad_scripts() {
        let script = WalkerScript::new(vec![
            WalkSegment::Goto { point: Vec2::ZERO, speed: 4.0 },
            WalkSegment::Wait { duration: -1.0 },
        ]);
        assert_eq!(script.violations(3.0).len(), 2);
    }
}
