//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the metric code under test.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use pedsim_core::agents::{Controller, Route, WalkSegment, WalkerScript};
use pedsim_core::geometry::Vec2;
use pedsim_core::recorder::{AgentFrameRecord, AgentInfo, SceneFile, SceneHeader};
use pedsim_core::scenarios::{AgentSpec, MapSpec, ScenarioSpec, Termination};
use pedsim_core::sim::{AgentKind, Pose, Shape};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type P = [f64; 2];

pub fn p(v: Vec2) -> P {
    [v.x, v.y]
}

pub fn dist(a: P, b: P) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn oracle_ade(pred: &[P], gt: &[P]) -> f64 {
    let mut total = 0.0;
    for i in 0..pred.len() {
        total += dist(pred[i], gt[i]);
    }
    total / pred.len() as f64
}

pub fn oracle_fde(pred: &[P], gt: &[P]) -> f64 {
    dist(pred[pred.len() - 1], gt[gt.len() - 1])
}

/// (minADE, its k, minFDE, its k) by scanning every sample.
pub fn oracle_min_marginal(samples: &[Vec<P>], gt: &[P]) -> (f64, usize, f64, usize) {
    let mut best = (f64::INFINITY, 0, f64::INFINITY, 0);
    for (k, s) in samples.iter().enumerate() {
        let a = oracle_ade(s, gt);
        let f = oracle_fde(s, gt);
        if a < best.0 {
            best.0 = a;
            best.1 = k;
        }
        if f < best.2 {
            best.2 = f;
            best.3 = k;
        }
    }
    best
}

/// (minJADE, its k, minJFDE, its k) by scanning every joint sample.
pub fn oracle_min_joint(preds: &[Vec<Vec<P>>], gts: &[Vec<P>]) -> (f64, usize, f64, usize) {
    let k = preds[0].len();
    let mut best = (f64::INFINITY, 0, f64::INFINITY, 0);
    for j in 0..k {
        let mut a = 0.0;
        let mut f = 0.0;
        for (agent, gt) in gts.iter().enumerate() {
            a += oracle_ade(&preds[agent][j], gt);
            f += oracle_fde(&preds[agent][j], gt);
        }
        a /= gts.len() as f64;
        f /= gts.len() as f64;
        if a < best.0 {
            best.0 = a;
            best.1 = j;
        }
        if f < best.2 {
            best.2 = f;
            best.3 = j;
        }
    }
    best
}

/// Heading in radians at every point: the step into the point, the first
/// moving step for point 0, unchanged across stationary steps, 0 if the
/// trajectory never moves.
pub fn oracle_headings(traj: &[P]) -> Vec<f64> {
    let step = |i: usize| [traj[i][0] - traj[i - 1][0], traj[i][1] - traj[i - 1][1]];
    let moving = |d: P| d[0] != 0.0 || d[1] != 0.0;
    let mut h = 0.0;
    for i in 1..traj.len() {
        if moving(step(i)) {
            let d = step(i);
            h = d[1].atan2(d[0]);
            break;
        }
    }
    let mut out = vec![h];
    for i in 1..traj.len() {
        if moving(step(i)) {
            let d = step(i);
            h = d[1].atan2(d[0]);
        }
        out.push(h);
    }
    out
}

pub fn corners(c: P, heading_rad: f64, shape: &Shape) -> [P; 4] {
    let (s, co) = heading_rad.sin_cos();
    let (hl, hw) = (shape.length / 2.0, shape.width / 2.0);
    let at = |a: f64, b: f64| [c[0] + a * co - b * s, c[1] + a * s + b * co];
    [at(hl, hw), at(-hl, hw), at(-hl, -hw), at(hl, -hw)]
}

fn cross(o: P, a: P, b: P) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn inside_convex(q: P, poly: &[P; 4]) -> bool {
    let signs: Vec<f64> = (0..4).map(|i| cross(poly[i], poly[(i + 1) % 4], q)).collect();
    signs.iter().all(|s| *s >= 0.0) || signs.iter().all(|s| *s <= 0.0)
}

fn segments_touch(a: P, b: P, c: P, d: P) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    if d1 == 0.0 && d2 == 0.0 {
        // collinear: the spans must meet on both axes
        let meets = |i: usize| a[i].min(b[i]) <= c[i].max(d[i]) && c[i].min(d[i]) <= a[i].max(b[i]);
        return meets(0) && meets(1);
    }
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Rectangle overlap by containment and edge crossing, no projections.
pub fn oracle_rects_overlap(a: &[P; 4], b: &[P; 4]) -> bool {
    a.iter().any(|q| inside_convex(*q, b))
        || b.iter().any(|q| inside_convex(*q, a))
        || (0..4).any(|i| (0..4).any(|j| segments_touch(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4])))
}

pub fn oracle_collision_rate(preds: &[Vec<Vec<P>>], shapes: &[Shape]) -> f64 {
    let n = preds.len();
    let k = preds[0].len();
    let mut hits = 0;
    for j in 0..k {
        for a in 0..n {
            let mut hit = false;
            for b in 0..n {
                if a == b {
                    continue;
                }
                let (ha, hb) = (oracle_headings(&preds[a][j]), oracle_headings(&preds[b][j]));
                for t in 0..preds[a][j].len() {
                    let ra = corners(preds[a][j][t], ha[t], &shapes[a]);
                    let rb = corners(preds[b][j][t], hb[t], &shapes[b]);
                    hit |= oracle_rects_overlap(&ra, &rb);
                }
            }
            hits += hit as usize;
        }
    }
    hits as f64 / (n * k) as f64
}

/// A random multi-agent forecasting instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub preds: Vec<Vec<Vec<Vec2>>>,
    pub gts: Vec<Vec<Vec2>>,
    pub shapes: Vec<Shape>,
}

impl Instance {
    pub fn preds_p(&self) -> Vec<Vec<Vec<P>>> {
        self.preds.iter().map(|a| a.iter().map(|s| s.iter().map(|v| p(*v)).collect()).collect()).collect()
    }

    pub fn gts_p(&self) -> Vec<Vec<P>> {
        self.gts.iter().map(|g| g.iter().map(|v| p(*v)).collect()).collect()
    }
}

fn random_walk(rng: &mut ChaCha8Rng, steps: usize, spread: f64) -> Vec<Vec2> {
    let mut at = Vec2::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread));
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        // a quarter of the steps stand still to exercise held headings
        if rng.random_range(0..4) != 0 {
            at += Vec2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        }
        out.push(at);
    }
    out
}

/// Up to 4 agents, 12 steps and 5 samples, packed into a small area so
/// that collisions are common.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(1..=4);
    let steps = rng.random_range(1..=12);
    let k = rng.random_range(1..=5);
    let shapes = (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => Shape::CAR,
            1 => Shape::PEDESTRIAN,
            _ => Shape::new(rng.random_range(0.3..5.0), rng.random_range(0.3..2.5), 1.0),
        })
        .collect();
    Instance {
        preds: (0..n).map(|_| (0..k).map(|_| random_walk(rng, steps, 6.0)).collect()).collect(),
        gts: (0..n).map(|_| random_walk(rng, steps, 6.0)).collect(),
        shapes,
    }
}

/// Is any pedestrian within `d_max` of a car moving faster than `v_min`, at
/// any frame? Scans the raw record list.
pub fn oracle_interactive(scene: &SceneFile, d_max: f64, v_min: f64) -> bool {
    let kind: BTreeMap<u32, AgentKind> = scene.header.agents.iter().map(|a| (a.id, a.kind)).collect();
    let mut by_frame: BTreeMap<u64, Vec<&AgentFrameRecord>> = BTreeMap::new();
    for r in &scene.records {
        by_frame.entry(r.frame).or_default().push(r);
    }
    for recs in by_frame.values() {
        for c in recs.iter().filter(|r| kind[&r.id] == AgentKind::Car) {
            let speed = (c.vel[0] * c.vel[0] + c.vel[1] * c.vel[1]).sqrt();
            if speed <= v_min {
                continue;
            }
            for q in recs.iter().filter(|r| kind[&r.id] == AgentKind::Pedestrian) {
                let d = ((c.pos[0] - q.pos[0]).powi(2) + (c.pos[1] - q.pos[1]).powi(2)).sqrt();
                if d <= d_max {
                    return true;
                }
            }
        }
    }
    false
}

/// A 20 Hz scene of constant-velocity agents, built record by record.
/// Each agent is `(kind, start, velocity)`.
pub fn synthetic_scene(seed: u64, frames: u64, agents: &[(AgentKind, Vec2, Vec2)]) -> SceneFile {
    let infos: Vec<AgentInfo> = agents
        .iter()
        .enumerate()
        .map(|(i, (kind, _, _))| AgentInfo {
            id: i as u32 + 1,
            kind: *kind,
            shape: if *kind == AgentKind::Car { Shape::CAR } else { Shape::PEDESTRIAN },
        })
        .collect();
    let mut header = SceneHeader::new("synthetic", seed, infos);
    header.frames = frames;
    let mut records = Vec::new();
    for f in 0..frames {
        let t = f as f64 / 20.0;
        for (i, (_, start, vel)) in agents.iter().enumerate() {
            let at = *start + *vel * t;
            let yaw = if *vel == Vec2::ZERO { 0.0 } else { vel.heading_deg() };
            records.push(AgentFrameRecord {
                frame: f,
                t,
                id: i as u32 + 1,
                pos: [at.x, at.y, 0.0],
                rot: [yaw, 0.0, 0.0],
                vel: [vel.x, vel.y, 0.0],
                acc: [0.0; 3],
            });
        }
    }
    SceneFile { header, records }
}

/// An empty-map scenario with one car cruising a straight route at its
/// spawn speed and one pedestrian walking a straight line well clear of it.
pub fn straight_cv_scenario(seed: u64, car_speed: f64, walk_speed: f64) -> ScenarioSpec {
    let car = AgentSpec {
        id: 1,
        kind: AgentKind::Car,
        shape: Shape::CAR,
        spawn: Pose::planar(-90.0, 0.0, 0.0),
        speed: car_speed,
        controller: Controller::VehicleAi {
            route: Route::new(vec![Vec2::new(-90.0, 0.0), Vec2::new(99.0, 0.0)], car_speed),
        },
        headless: None,
    };
    let ped = AgentSpec {
        id: 2,
        kind: AgentKind::Pedestrian,
        shape: Shape::PEDESTRIAN,
        spawn: Pose::planar(-60.0, 20.0, 0.0),
        speed: 0.0,
        controller: Controller::Scripted {
            script: WalkerScript::new(vec![WalkSegment::Goto {
                point: Vec2::new(60.0, 20.0),
                speed: walk_speed,
            }]),
        },
        headless: None,
    };
    ScenarioSpec {
        id: "straight".into(),
        map: MapSpec::empty(),
        agents: vec![car, ped],
        goal_region: Vec::new(),
        termination: Termination {
            timeout_s: 10.0,
            on_goal: false,
            on_collision: true,
        },
        seed,
        params: Default::default(),
    }
}
