//! The four built-in scenarios. Geometry constants are fixed here; traffic
//! counts, speeds and timings are drawn from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{AiParams, Controller, Role, Route, RouteStop, WalkSegment, WalkerScript};
use crate::geometry::{aabb_polygon, Vec2};
use crate::sim::{AgentId, AgentKind, Pose, Shape};

use super::map::{Bounds, Lane, LaneDirection, MapSpec, ParkingSpot};
use super::spec::{AgentSpec, ScenarioError, ScenarioSpec, Termination};

pub const BUILTIN_IDS: [&str; 4] = ["jaywalk", "parked_cars", "four_way_stop", "parking_lot_entrance"];

pub const LANE_WIDTH: f64 = 3.5;
pub const JAYWALK_ROAD_LENGTH: f64 = 60.0;
pub const ARM_LENGTH: f64 = 30.0;
pub const PARKED_SPACING: f64 = 6.0;
pub const DRIVEWAY_WIDTH: f64 = 6.0;

const PED_ID: AgentId = 1;

/// All four built-ins at `seed`.
pub fn builtin_scenarios(seed: u64) -> Vec<ScenarioSpec> {
    BUILTIN_IDS
        .iter()
        .map(|id| builtin_scenario(id, seed).expect("built-in id"))
        .collect()
}

pub fn builtin_scenario(id: &str, seed: u64) -> Result<ScenarioSpec, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = match id {
        "jaywalk" => jaywalk(&mut rng),
        "parked_cars" => parked_cars(&mut rng),
        "four_way_stop" => four_way_stop(&mut rng),
        "parking_lot_entrance" => parking_lot_entrance(&mut rng),
        other => return Err(ScenarioError::Unknown(other.to_string())),
    };
    Ok(ScenarioSpec {
        id: id.to_string(),
        seed,
        params: AiParams::default(),
        ..spec
    })
}

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Vec2> {
    aabb_polygon(v(x0, y0), v(x1, y1))
}

fn lane(from: Vec2, to: Vec2, direction: LaneDirection) -> Lane {
    Lane {
        centerline: vec![from, to],
        width: LANE_WIDTH,
        direction,
    }
}

fn ai_car(id: AgentId, at: Vec2, yaw: f64, speed: f64, route: Route) -> AgentSpec {
    AgentSpec {
        id,
        kind: AgentKind::Car,
        shape: Shape::CAR,
        spawn: Pose::planar(at.x, at.y, yaw),
        speed,
        controller: Controller::VehicleAi { route },
        headless: None,
    }
}

/// A car that never leaves its spot during any allowed scene length.
fn parked_car(id: AgentId, at: Vec2, yaw: f64) -> AgentSpec {
    let ahead = at + Vec2::from_heading(yaw) * 5.0;
    let mut route = Route::new(vec![at, ahead], 1.0);
    route.depart_time = 3600.0;
    ai_car(id, at, yaw, 0.0, route)
}

/// Pedestrian slot: live in sessions, scripted when headless.
fn walker(at: Vec2, yaw: f64, script: Vec<WalkSegment>) -> AgentSpec {
    AgentSpec {
        id: PED_ID,
        kind: AgentKind::Pedestrian,
        shape: Shape::PEDESTRIAN,
        spawn: Pose::planar(at.x, at.y, yaw),
        speed: 0.0,
        controller: Controller::Live { role: Role::Pedestrian },
        headless: Some(Controller::Scripted {
            script: WalkerScript::new(script),
        }),
    }
}

fn goto(x: f64, y: f64, speed: f64) -> WalkSegment {
    WalkSegment::Goto { point: v(x, y), speed }
}

/// Two-lane road, x in [-30, 30]. Eastbound traffic on y < 0, westbound on
/// y > 0, sidewalks on both sides, bus stop on the north sidewalk. The
/// pedestrian crosses one lane at a time, pausing on the centerline.
fn jaywalk(rng: &mut ChaCha8Rng) -> ScenarioSpec {
    let half = JAYWALK_ROAD_LENGTH / 2.0;
    let w = LANE_WIDTH;
    let map = MapSpec {
        lanes: vec![
            lane(v(-half, -w / 2.0), v(half, -w / 2.0), LaneDirection::Eastbound),
            lane(v(half, w / 2.0), v(-half, w / 2.0), LaneDirection::Westbound),
        ],
        crosswalks: vec![],
        parking_spots: vec![],
        sidewalks: vec![rect(-half, -2.0 * w, half, -w), rect(-half, w, half, 2.0 * w)],
        drivable_area: vec![rect(-half, -w, half, w)],
        bounds: Bounds::new(v(-half, -8.0), v(half, 8.0)),
    };

    let mut agents = Vec::new();
    let mut next_id = PED_ID + 1;
    for (dir, y, yaw) in [(1.0, -w / 2.0, 0.0), (-1.0, w / 2.0, 180.0)] {
        let count = rng.random_range(2..=4);
        let cruise = rng.random_range(7.0..10.0);
        let route = Route::new(vec![v(-half * dir, y), v(half * dir, y)], cruise);
        let mut lead = -half + 2.0 + rng.random_range(0.0..3.0);
        for _ in 0..count {
            agents.push(ai_car(next_id, v(lead * dir, y), yaw, cruise, route.clone()));
            next_id += 1;
            lead += rng.random_range(10.0..14.0);
        }
    }

    let x0 = rng.random_range(-3.0..3.0);
    let start_y = -rng.random_range(6.5..7.0);
    let walk = rng.random_range(1.2..1.4);
    let cross = rng.random_range(1.3..1.4);
    agents.push(walker(
        v(x0, start_y),
        90.0,
        vec![
            goto(x0, -4.0, walk),
            WalkSegment::WaitUntilGap { min_gap: 20.0 },
            goto(x0, -0.45, cross),
            WalkSegment::WaitUntilGap { min_gap: 20.0 },
            goto(x0, 4.0, cross),
            goto(9.5, 5.75, walk),
        ],
    ));
    agents.sort_by_key(|a| a.id);

    ScenarioSpec {
        id: String::new(),
        map,
        agents,
        goal_region: rect(8.0, 4.5, 11.0, 7.0),
        termination: Termination {
            timeout_s: 25.0,
            on_goal: true,
            on_collision: true,
        },
        seed: 0,
        params: AiParams::default(),
    }
}

/// One eastbound lane with three cars parked on the south shoulder. The
/// pedestrian starts behind the first parked car, steps into the road edge to
/// pass them and finishes ahead of the last one while traffic comes from
/// behind.
fn parked_cars(rng: &mut ChaCha8Rng) -> ScenarioSpec {
    let w = LANE_WIDTH;
    let half = 50.0;
    let shoulder_y = -3.0;
    let parked_x = [-PARKED_SPACING, 0.0, PARKED_SPACING];
    let map = MapSpec {
        lanes: vec![lane(v(-half, 0.0), v(half, 0.0), LaneDirection::Eastbound)],
        crosswalks: vec![],
        parking_spots: parked_x
            .iter()
            .map(|&x| ParkingSpot {
                center: v(x, shoulder_y),
                yaw: 0.0,
                length: PARKED_SPACING,
                width: 2.5,
            })
            .collect(),
        sidewalks: vec![rect(-half, -6.5, half, -4.25), rect(-half, w / 2.0, half, 4.0)],
        drivable_area: vec![rect(-half, -w / 2.0, half, w / 2.0)],
        bounds: Bounds::new(v(-half, -7.0), v(half, 5.0)),
    };

    let mut agents = Vec::new();
    let mut next_id = PED_ID + 1;
    for &x in &parked_x {
        agents.push(parked_car(next_id, v(x, shoulder_y), 0.0));
        next_id += 1;
    }
    let cruise = rng.random_range(6.0..9.0);
    let route = Route::new(vec![v(-half, 0.0), v(half, 0.0)], cruise);
    let mut x = -half + 2.0 + rng.random_range(0.0..3.0);
    for _ in 0..rng.random_range(2..=3) {
        agents.push(ai_car(next_id, v(x, 0.0), 0.0, cruise, route.clone()));
        next_id += 1;
        x += rng.random_range(12.0..16.0);
    }

    let start_x = -rng.random_range(11.5..13.0);
    let speed = rng.random_range(1.2..1.4);
    agents.push(walker(
        v(start_x, shoulder_y),
        0.0,
        vec![
            WalkSegment::Wait { duration: rng.random_range(0.5..2.0) },
            WalkSegment::WaitUntilGap { min_gap: 20.0 },
            goto(-10.0, -1.5, speed),
            goto(10.0, -1.5, speed),
            goto(10.5, shoulder_y, speed),
        ],
    ));
    agents.sort_by_key(|a| a.id);

    ScenarioSpec {
        id: String::new(),
        map,
        agents,
        goal_region: rect(9.5, -4.0, 12.5, -2.0),
        termination: Termination {
            timeout_s: 30.0,
            on_goal: true,
            on_collision: true,
        },
        seed: 0,
        params: AiParams::default(),
    }
}

/// Four-armed intersection, one lane each way. Each arm has a crosswalk just
/// outside the box and a stop line behind it. One car per arm goes straight
/// through; departures are staggered so only one car occupies the box at a
/// time. The pedestrian crosses the south arm.
fn four_way_stop(rng: &mut ChaCha8Rng) -> ScenarioSpec {
    let w = LANE_WIDTH;
    let box_half = w;
    let reach = box_half + ARM_LENGTH;
    let cw_near = box_half + 0.5;
    let cw_far = box_half + 3.5;
    let walk = box_half + 3.0;
    let map = MapSpec {
        lanes: vec![
            lane(v(-reach, -w / 2.0), v(reach, -w / 2.0), LaneDirection::Eastbound),
            lane(v(reach, w / 2.0), v(-reach, w / 2.0), LaneDirection::Westbound),
            lane(v(w / 2.0, -reach), v(w / 2.0, reach), LaneDirection::Northbound),
            lane(v(-w / 2.0, reach), v(-w / 2.0, -reach), LaneDirection::Southbound),
        ],
        crosswalks: vec![
            rect(-box_half, -cw_far, box_half, -cw_near),
            rect(-box_half, cw_near, box_half, cw_far),
            rect(-cw_far, -box_half, -cw_near, box_half),
            rect(cw_near, -box_half, cw_far, box_half),
        ],
        parking_spots: vec![],
        sidewalks: vec![
            rect(-reach, box_half, -box_half, walk),
            rect(box_half, box_half, reach, walk),
            rect(-reach, -walk, -box_half, -box_half),
            rect(box_half, -walk, reach, -box_half),
            rect(box_half, walk, walk, reach),
            rect(-walk, walk, -box_half, reach),
            rect(box_half, -reach, walk, -walk),
            rect(-walk, -reach, -box_half, -walk),
        ],
        drivable_area: vec![rect(-reach, -w, reach, w), rect(-w, -reach, w, reach)],
        bounds: Bounds::new(v(-reach, -reach), v(reach, reach)),
    };

    // (start, end, yaw) for each arm
    let arms = [
        (v(-reach, -w / 2.0), v(reach, -w / 2.0), 0.0),
        (v(reach, w / 2.0), v(-reach, w / 2.0), 180.0),
        (v(w / 2.0, -reach), v(w / 2.0, reach), 90.0),
        (v(-w / 2.0, reach), v(-w / 2.0, -reach), -90.0),
    ];
    let mut order = [0usize, 1, 2, 3];
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let stop_at = ARM_LENGTH - 7.5;
    let mut agents = Vec::new();
    for (slot, &arm) in order.iter().enumerate() {
        let (start, end, yaw) = arms[arm];
        let dir = (end - start) * (1.0 / start.distance(end));
        let mut route = Route::new(vec![start, end], rng.random_range(6.0..8.0));
        route.stops.push(RouteStop { at: stop_at, dwell: 1.0 });
        route.depart_time = slot as f64 * 5.0 + rng.random_range(0.0..1.0);
        let spawn = start + dir * 3.5;
        agents.push(ai_car(PED_ID + 1 + arm as AgentId, spawn, yaw, 0.0, route));
    }

    let y = -(cw_near + cw_far) / 2.0;
    let speed = rng.random_range(1.2..1.4);
    agents.push(walker(
        v(-rng.random_range(9.5..11.0), y),
        0.0,
        vec![
            goto(-box_half - 1.0, y, speed),
            WalkSegment::WaitUntilGap { min_gap: 15.0 },
            goto(box_half + 1.0, y, speed),
            goto(8.5, y, speed),
        ],
    ));
    agents.sort_by_key(|a| a.id);

    ScenarioSpec {
        id: String::new(),
        map,
        agents,
        goal_region: rect(7.5, -cw_far, 10.0, -cw_near),
        termination: Termination {
            timeout_s: 30.0,
            on_goal: true,
            on_collision: true,
        },
        seed: 0,
        params: AiParams::default(),
    }
}

/// Two-lane road with a sidewalk on the north side, a driveway through the
/// sidewalk and a parking lot behind it. The vehicle slot is driven by a
/// human; headless it leaves the lot and turns right into the westbound lane.
/// The pedestrian walks along the sidewalk across the driveway.
fn parking_lot_entrance(rng: &mut ChaCha8Rng) -> ScenarioSpec {
    let w = LANE_WIDTH;
    let half = 30.0;
    let dw = DRIVEWAY_WIDTH / 2.0;
    let walk_top = w + 3.0;
    let lot_top = walk_top + 20.0;
    let mut parking_spots = Vec::new();
    for row_y in [walk_top + 4.0, lot_top - 4.0] {
        for k in 0..12 {
            let x = -13.75 + k as f64 * 2.5;
            if x.abs() < dw + 1.5 {
                continue;
            }
            parking_spots.push(ParkingSpot {
                center: v(x, row_y),
                yaw: 90.0,
                length: 5.0,
                width: 2.5,
            });
        }
    }
    let map = MapSpec {
        lanes: vec![
            lane(v(-half, -w / 2.0), v(half, -w / 2.0), LaneDirection::Eastbound),
            lane(v(half, w / 2.0), v(-half, w / 2.0), LaneDirection::Westbound),
            lane(v(0.0, lot_top - 2.0), v(0.0, w), LaneDirection::Outbound),
        ],
        crosswalks: vec![],
        parking_spots,
        sidewalks: vec![rect(-half, w, half, walk_top), rect(-half, -walk_top, half, -w)],
        drivable_area: vec![
            rect(-half, -w, half, w),
            rect(-dw, w, dw, walk_top),
            rect(-15.0, walk_top, 15.0, lot_top),
        ],
        bounds: Bounds::new(v(-half, -8.0), v(half, lot_top)),
    };

    let mut agents = Vec::new();
    let mut exit = Route::new(
        vec![v(0.0, 20.0), v(0.0, 5.0), v(-1.0, 2.6), v(-4.0, w / 2.0), v(-half, w / 2.0)],
        5.0,
    );
    exit.depart_time = rng.random_range(0.0..1.0);
    agents.push(AgentSpec {
        id: PED_ID + 1,
        kind: AgentKind::Car,
        shape: Shape::CAR,
        spawn: Pose::planar(0.0, 18.0, -90.0),
        speed: 0.0,
        controller: Controller::ManualVehicle { role: Role::Vehicle },
        headless: Some(Controller::VehicleAi { route: exit }),
    });
    let cruise = rng.random_range(7.0..9.0);
    let road = Route::new(vec![v(-half, -w / 2.0), v(half, -w / 2.0)], cruise);
    agents.push(ai_car(PED_ID + 2, v(-half + rng.random_range(2.0..12.0), -w / 2.0), 0.0, cruise, road));

    let y = (w + walk_top) / 2.0;
    let speed = rng.random_range(1.2..1.4);
    agents.push(walker(
        v(-rng.random_range(12.0..14.0), y),
        0.0,
        vec![
            goto(-dw - 2.0, y, speed),
            WalkSegment::WaitUntilGap { min_gap: 20.0 },
            goto(dw + 2.0, y, speed),
            goto(12.0, y, speed),
        ],
    ));
    agents.sort_by_key(|a| a.id);

    ScenarioSpec {
        id: String::new(),
        map,
        agents,
        goal_region: rect(10.5, w, 14.0, walk_top),
        termination: Termination {
            timeout_s: 30.0,
            on_goal: true,
            on_collision: true,
        },
        seed: 0,
        params: AiParams::default(),
    }
}
