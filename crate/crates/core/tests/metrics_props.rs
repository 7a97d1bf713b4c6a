mod common;

use std::collections::BTreeMap;

use common::*;
use pedsim_core::geometry::Vec2;
use pedsim_core::metrics::*;
use pedsim_core::runner::run_headless;
use pedsim_core::sim::{AgentKind, Shape};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> Instance {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn coord() -> impl Strategy<Value = f64> {
    -50.0..50.0f64
}

fn traj_pair(len: usize) -> impl Strategy<Value = (Vec<Vec2>, Vec<Vec2>)> {
    let pt = || (coord(), coord()).prop_map(|(x, y)| Vec2::new(x, y));
    (prop::collection::vec(pt(), len), prop::collection::vec(pt(), len))
}

fn rigid(inst: &Instance, angle: f64, shift: Vec2) -> Instance {
    let f = |v: &Vec2| v.rotated_deg(angle) + shift;
    Instance {
        preds: inst.preds.iter().map(|a| a.iter().map(|s| s.iter().map(f).collect()).collect()).collect(),
        gts: inst.gts.iter().map(|g| g.iter().map(f).collect()).collect(),
        shapes: inst.shapes.clone(),
    }
}

fn all_metrics(inst: &Instance) -> Vec<f64> {
    let mut out = Vec::new();
    for (s, g) in inst.preds.iter().zip(&inst.gts) {
        let m = min_marginal(s, g).unwrap();
        out.extend([m.min_ade, m.min_fde]);
    }
    let j = min_joint(&inst.preds, &inst.gts).unwrap();
    out.extend([j.min_jade, j.min_jfde, collision_rate(&inst.preds, &inst.shapes).unwrap()]);
    out
}

proptest! {
    #[test]
    fn ade_matches_summation((pred, gt) in traj_pair(12)) {
        let (pp, gp): (Vec<P>, Vec<P>) = (pred.iter().map(|v| p(*v)).collect(), gt.iter().map(|v| p(*v)).collect());
        prop_assert!((ade(&pred, &gt).unwrap() - oracle_ade(&pp, &gp)).abs() <= 1e-12);
    }

    #[test]
    fn fde_bounded_by_max_step_distance(seed in any::<u64>()) {
        let inst = instance(seed);
        let gt = &inst.gts[0];
        let pred = &inst.preds[0][0];
        let max = pred.iter().zip(gt).map(|(a, b)| a.distance(*b)).fold(0.0, f64::max);
        prop_assert!(fde(pred, gt).unwrap() <= max);
        prop_assert!(ade(pred, gt).unwrap() <= max + 1e-12);
    }

    #[test]
    fn marginal_matches_exhaustive_k(seed in any::<u64>()) {
        let inst = instance(seed);
        let (pp, gp) = (inst.preds_p(), inst.gts_p());
        for a in 0..inst.gts.len() {
            let m = min_marginal(&inst.preds[a], &inst.gts[a]).unwrap();
            let o = oracle_min_marginal(&pp[a], &gp[a]);
            prop_assert!((m.min_ade - o.0).abs() <= 1e-9 && (m.min_fde - o.2).abs() <= 1e-9);
            prop_assert_eq!((m.ade_k, m.fde_k), (o.1, o.3));
        }
    }

    #[test]
    fn joint_matches_exhaustive_k(seed in any::<u64>()) {
        let inst = instance(seed);
        let j = min_joint(&inst.preds, &inst.gts).unwrap();
        let o = oracle_min_joint(&inst.preds_p(), &inst.gts_p());
        prop_assert!((j.min_jade - o.0).abs() <= 1e-9 && (j.min_jfde - o.2).abs() <= 1e-9);
    }

    #[test]
    fn joint_at_least_marginal_mean(seed in any::<u64>()) {
        let inst = instance(seed);
        let n = inst.gts.len() as f64;
        let ms: Vec<MarginalResult> = inst.preds.iter().zip(&inst.gts).map(|(s, g)| min_marginal(s, g).unwrap()).collect();
        let j = min_joint(&inst.preds, &inst.gts).unwrap();
        prop_assert!(j.min_jade >= ms.iter().map(|m| m.min_ade).sum::<f64>() / n - 1e-12);
        prop_assert!(j.min_jfde >= ms.iter().map(|m| m.min_fde).sum::<f64>() / n - 1e-12);
    }

    #[test]
    fn rigid_transform_invariance(seed in any::<u64>(), angle in -180.0..180.0f64, dx in -1e3..1e3f64, dy in -1e3..1e3f64) {
        let inst = instance(seed);
        // a sample that never moves has no heading to rotate with
        prop_assume!(inst.preds.iter().flatten().all(|s| s.windows(2).any(|w| w[0] != w[1])));
        let moved = rigid(&inst, angle, Vec2::new(dx, dy));
        for (a, b) in all_metrics(&inst).iter().zip(all_metrics(&moved)) {
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn single_sample_degenerates(seed in any::<u64>()) {
        let mut inst = instance(seed);
        for a in &mut inst.preds {
            a.truncate(1);
        }
        let mut mean = 0.0;
        for (s, g) in inst.preds.iter().zip(&inst.gts) {
            let direct = ade(&s[0], g).unwrap();
            prop_assert_eq!(min_marginal(s, g).unwrap().min_ade, direct);
            mean += direct / inst.gts.len() as f64;
        }
        prop_assert!((min_joint(&inst.preds, &inst.gts).unwrap().min_jade - mean).abs() <= 1e-12);
    }

    #[test]
    fn collision_rate_ignores_agent_order(seed in any::<u64>(), rot in 0usize..4) {
        let inst = instance(seed);
        let cr = collision_rate(&inst.preds, &inst.shapes).unwrap();
        let (mut preds, mut shapes) = (inst.preds.clone(), inst.shapes.clone());
        let r = rot % preds.len();
        preds.rotate_left(r);
        shapes.rotate_left(r);
        preds.reverse();
        shapes.reverse();
        prop_assert_eq!(cr, collision_rate(&preds, &shapes).unwrap());
        prop_assert!((0.0..=1.0).contains(&cr));
    }

    #[test]
    fn collision_rate_matches_polygon_oracle(seed in any::<u64>()) {
        let inst = instance(seed);
        let cr = collision_rate(&inst.preds, &inst.shapes).unwrap();
        prop_assert!((cr - oracle_collision_rate(&inst.preds_p(), &inst.shapes)).abs() <= 1e-12);
    }

    #[test]
    fn headings_match_oracle(seed in any::<u64>()) {
        let inst = instance(seed);
        for s in &inst.preds[0] {
            let got = predicted_headings(s);
            let want = oracle_headings(&s.iter().map(|v| p(*v)).collect::<Vec<_>>());
            for (g, w) in got.iter().zip(want) {
                prop_assert!((g - w.to_degrees()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn filter_matches_full_scan(seed in any::<u64>(), d in 0.5..20.0f64, v in 0.0..5.0f64) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus: Vec<_> = (0..6)
            .map(|i| {
                let agents: Vec<(AgentKind, Vec2, Vec2)> = (0..rng.random_range(1..4))
                    .map(|_| {
                        let kind = if rng.random_bool(0.5) { AgentKind::Car } else { AgentKind::Pedestrian };
                        let at = Vec2::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
                        let vel = Vec2::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
                        (kind, at, if rng.random_bool(0.3) { Vec2::ZERO } else { vel })
                    })
                    .collect();
                synthetic_scene(i, 40, &agents)
            })
            .collect();
        let want: Vec<usize> = (0..corpus.len()).filter(|i| oracle_interactive(&corpus[*i], d, v)).collect();
        prop_assert_eq!(filter_interactive(&corpus, d, v), want);
    }

    #[test]
    fn baseline_shapes_and_spread(seed in any::<u64>(), k in 1usize..12, horizon in 1usize..10, vx in -3.0..3.0f64, vy in -3.0..3.0f64) {
        let hist = [Vec2::new(1.0, 1.0), Vec2::new(1.0 + vx, 1.0 + vy)];
        let s = constant_velocity_baseline(&hist, horizon, k, seed).unwrap();
        prop_assert_eq!(s.len(), k);
        let step = Vec2::new(vx, vy);
        for sample in &s {
            prop_assert_eq!(sample.len(), horizon);
            let d = sample[0] - hist[1];
            prop_assert!((d.norm() - step.norm()).abs() <= 1e-9);
            if step.norm() > 1e-6 {
                let turn = ((d.heading_deg() - step.heading_deg() + 540.0) % 360.0) - 180.0;
                prop_assert!(turn.abs() <= CV_SPREAD_DEG + 1e-6);
            }
        }
        prop_assert_eq!(&s, &constant_velocity_baseline(&hist, horizon, k, seed).unwrap());
    }
}

fn segment(from: Vec2, step: Vec2, n: usize) -> Vec<Vec2> {
    (0..n).map(|i| from + step * i as f64).collect()
}

#[test]
fn crossing_paths_collide_in_one_sample() {
    // sample 0: both centers reach (0, 0) at step 3; sample 1: 10 m apart
    let car = Shape::new(4.5, 2.0, 1.5);
    let a0 = segment(Vec2::new(-9.0, 0.0), Vec2::new(3.0, 0.0), 5);
    let b0 = segment(Vec2::new(0.0, -9.0), Vec2::new(0.0, 3.0), 5);
    let a1 = segment(Vec2::new(-9.0, 10.0), Vec2::new(3.0, 0.0), 5);
    let b1 = segment(Vec2::new(0.0, -9.0), Vec2::new(0.0, 0.0), 5);
    let preds = vec![vec![a0, a1], vec![b0, b1]];
    assert_eq!(collision_rate(&preds, &[car, car]).unwrap(), 0.5);
    assert_eq!(oracle_collision_rate(&Instance { preds: preds.clone(), gts: vec![], shapes: vec![] }.preds_p(), &[car, car]), 0.5);
    assert_eq!(collision_indicators(&preds, &[car, car]).unwrap(), vec![vec![true, false], vec![true, false]]);
}

#[test]
fn worked_joint_example() {
    let gt = segment(Vec2::ZERO, Vec2::new(1.0, 0.0), 3);
    let up = |d: f64| segment(Vec2::new(0.0, d), Vec2::new(1.0, 0.0), 3);
    let preds = vec![vec![up(1.0), up(3.0)], vec![up(3.0), up(1.0)]];
    let j = min_joint(&preds, &[gt.clone(), gt.clone()]).unwrap();
    assert_eq!(j.min_jade, 2.0);
    let single = min_joint(&preds[..1], std::slice::from_ref(&gt)).unwrap();
    assert_eq!(single.min_jade, min_marginal(&preds[0], &gt).unwrap().min_ade);
}

#[test]
fn one_exact_sample_among_ten() {
    let gt = segment(Vec2::new(2.0, 2.0), Vec2::new(0.5, 0.25), 6);
    let mut samples: Vec<Vec<Vec2>> = (1..10).map(|i| segment(Vec2::new(2.0, 2.0 + i as f64), Vec2::new(0.5, 0.0), 6)).collect();
    samples.insert(4, gt.clone());
    let m = min_marginal(&samples, &gt).unwrap();
    assert_eq!((m.min_ade, m.min_fde, m.ade_k), (0.0, 0.0, 4));
}

#[test]
fn ground_truth_scores_zero_and_counts_add_up() {
    let mut gts = BTreeMap::new();
    let mut preds = Vec::new();
    let mut agents = 0;
    for seed in 0..3 {
        let scene = run_headless(pedsim_core::scenarios::builtin_scenario("parked_cars", seed).unwrap()).unwrap().scene.unwrap();
        let id = scene_id(&scene.header);
        let mut p = ground_truth_predictions(&id, &scene, 4, 6).unwrap();
        // pad to K = 3 with displaced copies; the exact sample must win
        for s in p.agents.values_mut() {
            let off: Vec<Vec2> = s[0].iter().map(|q| *q + Vec2::new(1.0, 0.0)).collect();
            s.extend([off.clone(), off]);
        }
        p.header.k = 3;
        agents += p.agents.len();
        preds.push(p);
        gts.insert(id, scene);
    }
    let eval = evaluate_corpus(&gts, &preds, &EvalConfig::default()).unwrap();
    let r = &eval.report;
    assert_eq!((r.min_ade, r.min_fde, r.min_jade, r.min_jfde), (0.0, 0.0, 0.0, 0.0));
    assert_eq!(r.agents, agents);
    assert_eq!(r.agents, eval.scenes.iter().map(|s| s.agents).sum::<usize>());
    assert_eq!(r.scenes, 3);
}

#[test]
fn eval_skips_and_rejects() {
    let scene = run_headless(straight_cv_scenario(0, 8.0, 1.4)).unwrap().scene.unwrap();
    let id = scene_id(&scene.header);
    let gts = BTreeMap::from([(id.clone(), scene.clone())]);
    let long = baseline_predictions(&id, &scene, 4, 17, 2, 0).unwrap();
    assert!(matches!(
        evaluate_corpus(&gts, std::slice::from_ref(&long), &EvalConfig::default()),
        Err(MetricsError::NothingEvaluated { skipped: 1 })
    ));
    let ok = baseline_predictions(&id, &scene, 4, 6, 2, 0).unwrap();
    let cfg = EvalConfig { k: Some(3), ..EvalConfig::default() };
    assert!(matches!(evaluate_scene(&scene, &ok, &cfg).unwrap(), SceneOutcome::Skipped(_)));
    let mut stranger = ok.clone();
    stranger.agents.insert(99, stranger.agents[&1].clone());
    assert!(matches!(evaluate_scene(&scene, &stranger, &EvalConfig::default()), Err(MetricsError::UnknownAgent { id: 99, .. })));
    let mut renamed = ok.clone();
    renamed.header.scene = "elsewhere".into();
    assert!(matches!(evaluate_corpus(&gts, &[renamed], &EvalConfig::default()), Err(MetricsError::UnknownScene(_))));
    let best = EvalConfig { cr_mode: CrMode::Best, ..EvalConfig::default() };
    let r = evaluate_corpus(&gts, &[ok], &best).unwrap().report;
    assert!(r.min_ade < 1e-9 && r.cr_mean == 0.0);
    let text = r.to_text();
    assert_eq!(serde_json::from_str::<MetricsReport>(&text).unwrap(), r);
    assert!(r.to_table().contains("minJADE"));
}

#[test]
fn parked_car_is_not_interaction() {
    let parked = synthetic_scene(0, 40, &[(AgentKind::Pedestrian, Vec2::ZERO, Vec2::ZERO), (AgentKind::Car, Vec2::new(3.0, 0.0), Vec2::ZERO)]);
    let moving = synthetic_scene(1, 40, &[(AgentKind::Pedestrian, Vec2::ZERO, Vec2::ZERO), (AgentKind::Car, Vec2::new(-1.0, 3.0), Vec2::new(5.0, 0.0))]);
    assert!(!is_interactive(&parked, DEFAULT_FILTER_DIST, DEFAULT_FILTER_MIN_SPEED));
    assert!(is_interactive(&moving, DEFAULT_FILTER_DIST, DEFAULT_FILTER_MIN_SPEED));
}
