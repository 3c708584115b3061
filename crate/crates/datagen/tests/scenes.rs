use maad_core::{AgentRole, LabelCategory, Scene, Subclass, FRAME_DT};
use maad_datagen::{
    episode_for, generate_dataset, generate_scene, largest_remainder, world_for, DatagenError, DatasetConfig, ManeuverScript,
    SceneSettings, SplitConfig, StartLane, WorldSpec, WorldTemplate, REFERENCE_ABNORMAL_TIMESTEPS,
};

fn scene(subclass: Subclass, seed: u64) -> Scene {
    let world = world_for(subclass, seed);
    let settings = SceneSettings::new(format!("s{seed}"), 8.0);
    generate_scene(&world, &ManeuverScript::new(subclass), &settings, seed).unwrap()
}

fn target_xy(scene: &Scene) -> Vec<[f64; 2]> {
    scene.target().unwrap().states.iter().map(|s| [s.x, s.y]).collect()
}

#[test]
fn straight_target_stays_on_its_lane() {
    for seed in 0..10 {
        let s = scene(Subclass::Straight, seed);
        for p in target_xy(&s) {
            let d = s.lane_graph.nearest_lane(p).unwrap().distance;
            assert!(d < 0.05, "seed {seed}: {d}");
        }
        assert!(s.labels.unwrap().iter().all(|l| l.category == LabelCategory::Normal));
    }
}

#[test]
fn staggering_deviation_matches_amplitude() {
    for seed in 0..10 {
        let s = scene(Subclass::Staggering, seed);
        let xy = target_xy(&s);
        let labels = s.labels.as_ref().unwrap();
        let max = labels
            .iter()
            .filter(|l| l.category == LabelCategory::Abnormal)
            .map(|l| s.lane_graph.nearest_lane(xy[l.frame_index]).unwrap().distance)
            .fold(0.0, f64::max);
        assert!((0.9..=1.1).contains(&max), "seed {seed}: {max}");
    }
}

#[test]
fn ghost_driver_opposes_occupied_lane() {
    for seed in 0..10 {
        let s = scene(Subclass::GhostDriver, seed);
        let xy = target_xy(&s);
        let labels = s.labels.as_ref().unwrap();
        let mut checked = 0;
        for l in labels.iter().filter(|l| l.category == LabelCategory::Abnormal) {
            let k = l.frame_index;
            let (a, b) = if k > 0 { (xy[k - 1], xy[k]) } else { (xy[k], xy[k + 1]) };
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let heading = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let lane = s.lane_graph.nearest_lane(xy[k]).unwrap().direction;
            assert!(heading[0] * lane[0] + heading[1] * lane[1] < 0.0, "seed {seed} frame {k}");
            checked += 1;
        }
        assert!(checked > 0);
    }
}

#[test]
fn dynamics_stay_within_limits() {
    for c in Subclass::ALL {
        for seed in 0..6 {
            let s = scene(c, seed);
            let xy = target_xy(&s);
            let speeds: Vec<f64> =
                xy.windows(2).map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt() / FRAME_DT).collect();
            for v in &speeds {
                assert!(*v <= 20.0 + 1e-9, "{c} seed {seed}: speed {v}");
            }
            for w in speeds.windows(2) {
                let a = (w[1] - w[0]) / FRAME_DT;
                assert!(a.abs() <= 4.0 + 1e-6, "{c} seed {seed}: accel {a}");
            }
        }
    }
}

#[test]
fn every_frame_is_labelled_and_abnormal_frames_match_class() {
    for c in Subclass::ALL {
        for seed in 0..8 {
            let s = scene(c, seed);
            let labels = s.labels.as_ref().unwrap();
            assert_eq!(labels.len(), s.len());
            assert!(labels.iter().enumerate().all(|(k, l)| l.frame_index == k));
            let abnormal = labels.iter().filter(|l| l.category == LabelCategory::Abnormal).count();
            assert_eq!(abnormal > 0, c.is_abnormal(), "{c} seed {seed}");
            assert!(labels.iter().filter(|l| l.category == LabelCategory::Abnormal).all(|l| l.subclass == Some(c)));
        }
    }
}

#[test]
fn ignore_frames_surround_transitions() {
    let s = scene(Subclass::SwervingLeft, 4);
    let cats: Vec<LabelCategory> = s.labels.unwrap().iter().map(|l| l.category).collect();
    let first_ignore = cats.iter().position(|c| *c == LabelCategory::Ignore).unwrap();
    let first_abnormal = cats.iter().position(|c| *c == LabelCategory::Abnormal).unwrap();
    assert_eq!(first_abnormal - first_ignore, 6);
    assert!(cats.windows(2).all(|w| !(w[0] == LabelCategory::Normal && w[1] == LabelCategory::Abnormal)));
}

#[test]
fn background_is_independent_of_the_script() {
    let world = WorldSpec::new(WorldTemplate::Straight, StartLane::Outer);
    let settings = SceneSettings::new("x", 6.0);
    let scripts = [Subclass::Straight, Subclass::LeaveRoad, Subclass::Tailgating, Subclass::LaneChangeLeft];
    let scenes: Vec<Scene> = scripts.iter().map(|c| generate_scene(&world, &ManeuverScript::new(*c), &settings, 11).unwrap()).collect();
    for s in &scenes[1..] {
        let others = |sc: &Scene| sc.trajectories.iter().filter(|t| t.role != AgentRole::Target).cloned().collect::<Vec<_>>();
        assert_eq!(others(s), others(&scenes[0]));
    }
    let e = episode_for(&world, 11);
    assert!(e.lead.is_some() && e.neighbor.is_some());
}

#[test]
fn turn_on_a_straight_road_is_infeasible() {
    let world = WorldSpec::new(WorldTemplate::Straight, StartLane::Inner);
    let err = generate_scene(&world, &ManeuverScript::new(Subclass::TurnLeft), &SceneSettings::new("bad_scene", 5.0), 0).unwrap_err();
    match err {
        DatagenError::InfeasibleScript { scene_id, .. } => assert_eq!(scene_id, "bad_scene"),
        other => panic!("{other}"),
    }
}

#[test]
fn default_config_mirrors_reference_counts() {
    let config = DatasetConfig::default();
    let abnormal: usize = config.classes.iter().filter(|c| c.subclass.is_abnormal()).map(|c| c.count).sum();
    let normal: usize = config.classes.iter().filter(|c| !c.subclass.is_abnormal()).map(|c| c.count).sum();
    assert_eq!((abnormal, normal), (80, 80));
    let total: u32 = REFERENCE_ABNORMAL_TIMESTEPS.iter().map(|(_, n)| n).sum();
    for (c, (_, n)) in config.classes.iter().zip(REFERENCE_ABNORMAL_TIMESTEPS) {
        let quota = 80.0 * n as f64 / total as f64;
        assert!((c.count as f64 - quota).abs() < 1.0, "{}: {} vs {quota}", c.subclass, c.count);
    }
    assert_eq!(largest_remainder(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
}

#[test]
fn default_test_split_has_160_scenes_and_reruns_identically() {
    let config = DatasetConfig {
        train: SplitConfig { count: 3, duration_s: 5.0 },
        val: SplitConfig { count: 2, duration_s: 5.0 },
        ..DatasetConfig::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let manifest = generate_dataset(&config, a.path()).unwrap();
    generate_dataset(&config, b.path()).unwrap();
    assert_eq!(manifest.splits["test"].scenes, 160);
    assert_eq!(manifest.classes.len(), 22);
    let abnormal_frames: usize = manifest.classes.iter().map(|c| c.abnormal_frames).sum();
    assert!(abnormal_frames > 0);
    let mut files = Vec::new();
    for split in ["train", "val", "test"] {
        for e in std::fs::read_dir(a.path().join(split)).unwrap() {
            files.push(format!("{split}/{}", e.unwrap().file_name().to_string_lossy()));
        }
    }
    files.push("manifest.json".into());
    files.push("config.json".into());
    assert!(files.len() > 160 * 3);
    for f in files {
        assert_eq!(std::fs::read(a.path().join(&f)).unwrap(), std::fs::read(b.path().join(&f)).unwrap(), "{f}");
    }
    let test_labels = std::fs::read_dir(a.path().join("test"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".labels.json"));
    assert_eq!(test_labels.count(), 160);
    assert!(!a.path().join("train/train_00000.labels.json").exists());
}

#[test]
fn bad_configs_are_rejected() {
    assert!(matches!(DatasetConfig::from_json(r#"{"world": "roundabout"}"#), Err(DatagenError::Config(_))));
    assert!(matches!(DatasetConfig::from_json(r#"{"duration_s": 12.0}"#), Err(DatagenError::Config(_))));
    assert!(matches!(DatasetConfig::from_json(r#"{"colour": 1}"#), Err(DatagenError::Config(_))));
    let ok =
        DatasetConfig::from_json(r#"{"seed": 5, "classes": [{"subclass": "staggering", "count": 2, "params": {"amplitude_m": 0.5}}]}"#)
            .unwrap();
    assert_eq!(ok.seed, 5);
    assert_eq!(ok.train, DatasetConfig::default().train);
}
