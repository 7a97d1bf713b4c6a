use crate::recorder::SceneFile;
use crate::sim::AgentKind;

pub const DEFAULT_FILTER_DIST: f64 = 8.0;
pub const DEFAULT_FILTER_MIN_SPEED: f64 = 0.5;

/// Whether some frame has a pedestrian within `d_max` (center distance) of a
/// car moving faster than `v_min`.
pub fn is_interactive(scene: &SceneFile, d_max: f64, v_min: f64) -> bool {
    let kinds: Vec<AgentKind> = scene.header.agents.iter().map(|a| a.kind).collect();
    (0..scene.header.frames).any(|f| {
        let frame = scene.frame(f);
        frame.iter().zip(&kinds).any(|(car, kind)| {
            *kind == AgentKind::Car
                && car.planar_speed() > v_min
                && frame
                    .iter()
                    .zip(&kinds)
                    .any(|(ped, k)| *k == AgentKind::Pedestrian && ped.xy().distance(car.xy()) <= d_max)
        })
    })
}

/// Indices of the interactive scenes, in input order.
pub fn filter_interactive(scenes: &[SceneFile], d_max: f64, v_min: f64) -> Vec<usize> {
    scenes
        .iter()
        .enumerate()
        .filter(|(_, s)| is_interactive(s, d_max, v_min))
        .map(|(i, _)| i)
        .collect()
}
