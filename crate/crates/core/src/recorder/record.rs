use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::{AgentId, WorldSnapshot, RATE_HZ};

use super::RecorderError;

/// One agent at one frame. Kind and shape live in the scene header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentFrameRecord {
    pub frame: u64,
    pub t: f64,
    pub id: AgentId,
    pub pos: [f64; 3],
    /// (yaw, pitch, roll), degrees
    pub rot: [f64; 3],
    pub vel: [f64; 3],
    pub acc: [f64; 3],
}

impl AgentFrameRecord {
    pub fn xy(&self) -> Vec2 {
        Vec2::new(self.pos[0], self.pos[1])
    }

    pub fn planar_speed(&self) -> f64 {
        self.vel[0].hypot(self.vel[1])
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.pos.iter().chain(&self.rot).chain(&self.vel).chain(&self.acc).all(|v| v.is_finite())
    }

    pub(crate) fn check(&self) -> Result<(), RecorderError> {
        if !self.is_finite() {
            return Err(RecorderError::NonFinite { frame: self.frame, id: self.id });
        }
        let yaw = self.rot[0];
        if !(-180.0..180.0).contains(&yaw) {
            return Err(RecorderError::YawRange { frame: self.frame, id: self.id, yaw });
        }
        Ok(())
    }
}

/// Time stamp of `frame` at `rate_hz`.
pub fn frame_time(frame: u64, rate_hz: u32) -> f64 {
    frame as f64 / rate_hz as f64
}

/// One record per agent of a 20 Hz snapshot, in id order.
pub fn capture_frame(snapshot: &WorldSnapshot) -> Result<Vec<AgentFrameRecord>, RecorderError> {
    let t = frame_time(snapshot.frame, RATE_HZ);
    snapshot
        .agents
        .iter()
        .map(|a| {
            let rec = AgentFrameRecord {
                frame: snapshot.frame,
                t,
                id: a.id,
                pos: a.pose.position,
                rot: a.pose.rotation,
                vel: a.velocity,
                acc: a.acceleration,
            };
            rec.check().map(|_| rec)
        })
        .collect()
}
