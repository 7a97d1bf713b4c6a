#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use pedsim_core::geometry::{polygon_area, Vec2};
use pedsim_core::recorder::*;
use pedsim_core::runner::{run_headless, run_replay};
use pedsim_core::scenarios::*;
use pedsim_core::sim::AgentKind;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A valid 20 Hz scene with arbitrary (finite) kinematic values.
fn fuzzed_scene(seed: u64) -> SceneFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = rng.random_range(200..=600);
    let agents: Vec<(AgentKind, Vec2, Vec2)> = (0..rng.random_range(1..=3))
        .map(|i| (if i == 0 { AgentKind::Pedestrian } else { AgentKind::Car }, Vec2::ZERO, Vec2::ZERO))
        .collect();
    let mut scene = synthetic_scene(seed, frames, &agents);
    for r in &mut scene.records {
        for v in r.pos.iter_mut().chain(&mut r.vel).chain(&mut r.acc) {
            *v = rng.random_range(-1e4..1e4) * 10f64.powi(rng.random_range(-8..3));
        }
        r.rot = [rng.random_range(-180.0..180.0), rng.random_range(-90.0..90.0), 0.0];
    }
    scene
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scene_text_round_trips(seed in any::<u64>()) {
        let scene = fuzzed_scene(seed);
        let text = write_scene(&scene);
        let back = read_scene(&text).unwrap();
        prop_assert_eq!(&back, &scene);
        prop_assert_eq!(write_scene(&back), text);
    }

    #[test]
    fn resample_keeps_records_bit_exact(seed in any::<u64>(), to in prop::sample::select(vec![1u32, 2, 4, 5, 10, 20])) {
        let scene = fuzzed_scene(seed);
        let stride = (20 / to) as u64;
        let out = resample_scene(&scene, to).unwrap();
        prop_assert_eq!(out.header.rate_hz, to);
        let kept: Vec<&AgentFrameRecord> = scene.records.iter().filter(|r| r.frame % stride == 0).collect();
        prop_assert_eq!(out.records.len(), kept.len());
        for (o, k) in out.records.iter().zip(kept) {
            prop_assert_eq!(o.frame * stride, k.frame);
            prop_assert_eq!(o.pos.map(f64::to_bits), k.pos.map(f64::to_bits));
            prop_assert_eq!(o.rot.map(f64::to_bits), k.rot.map(f64::to_bits));
            prop_assert_eq!(o.vel.map(f64::to_bits), k.vel.map(f64::to_bits));
            prop_assert_eq!(o.acc.map(f64::to_bits), k.acc.map(f64::to_bits));
            prop_assert_eq!(o.t.to_bits(), k.t.to_bits());
        }
    }

    #[test]
    fn backward_differences_of_a_quadratic(a in -50.0..50.0f64, b in -10.0..10.0f64, c in -3.0..3.0f64, n in 3usize..60) {
        let times: Vec<f64> = (0..n).map(|i| frame_time(i as u64, 20)).collect();
        let pos: Vec<[f64; 3]> = times.iter().map(|t| [a + b * t + c * t * t, 0.0, 0.0]).collect();
        let k = derive_kinematics(&pos, &times, 20).unwrap();
        let dt = 0.05;
        for i in 1..n {
            // (p(t) - p(t - dt)) / dt = b + c (2t - dt)
            let want_v = b + c * (2.0 * times[i] - dt);
            prop_assert!((k.velocity[i][0] - want_v).abs() < 1e-8, "v[{}]", i);
        }
        for i in 2..n {
            prop_assert!((k.acceleration[i][0] - 2.0 * c).abs() < 1e-5, "a[{}]", i);
        }
    }
}

#[test]
fn short_recordings_rejected_long_truncated() {
    let short = synthetic_scene(0, 199, &[(AgentKind::Pedestrian, Vec2::ZERO, Vec2::new(1.0, 0.0))]);
    let err = finalize_scene(short.records, short.header).unwrap_err();
    assert!(err.to_string().contains("below the 10 s minimum"), "{err}");
    let long = synthetic_scene(0, 650, &[(AgentKind::Pedestrian, Vec2::ZERO, Vec2::new(1.0, 0.0))]);
    let s = finalize_scene(long.records, long.header).unwrap();
    assert_eq!(s.header.frames, 600);
    assert!(s.header.truncated);
}

#[test]
fn builtins_over_ten_seeds_are_valid_and_replayable() {
    for id in BUILTIN_IDS {
        for seed in 0..10 {
            let out = run_headless(builtin_scenario(id, seed).unwrap()).unwrap();
            let scene = out.scene.clone().unwrap_or_else(|e| panic!("{id} {seed}: {e}"));
            scene.validate().unwrap();
            assert_eq!(out.reason.map(|r| r.label()), Some("goal"), "{id} {seed}");
            let again = run_replay(builtin_scenario(id, seed).unwrap(), read_replay(&write_replay(&out.replay)).unwrap()).unwrap();
            assert_eq!(write_scene(&again.scene.unwrap()), write_scene(&scene), "{id} {seed}");
        }
    }
}

#[test]
fn scenario_text_round_trips() {
    for spec in builtin_scenarios(5) {
        let text = spec.to_text();
        assert_eq!(load_scenario(&text).unwrap(), spec);
    }
    let bad = builtin_scenario("jaywalk", 1).unwrap().to_text().replace("\"timeout_s\": 25.0", "\"timeout_s\": 45.0");
    let err = load_scenario(&bad).unwrap_err().to_string();
    assert!(err.contains("termination.timeout_s 45 outside [10, 30] s"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn raster_area_within_five_percent(x0 in -40.0..10.0f64, y0 in -40.0..10.0f64, w in 3.0..30.0f64, h in 3.0..30.0f64, skew in -2.0..2.0f64) {
        // a convex quadrilateral, one sheared edge
        let poly = vec![
            Vec2::new(x0, y0),
            Vec2::new(x0 + w, y0),
            Vec2::new(x0 + w + skew, y0 + h),
            Vec2::new(x0 + skew.abs(), y0 + h),
        ];
        let mut map = MapSpec::empty();
        map.bounds = Bounds::new(Vec2::new(-50.0, -50.0), Vec2::new(50.0, 50.0));
        map.drivable_area = vec![poly.clone()];
        let grid = rasterize_semantic_map(&map, 0.1).unwrap();
        let area = grid.count(SemanticClass::Drivable) as f64 * 0.01;
        let want = polygon_area(&poly).abs();
        prop_assert!((area - want).abs() <= 0.05 * want, "{} vs {}", area, want);
    }
}
