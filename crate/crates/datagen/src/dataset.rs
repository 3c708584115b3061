use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use maad_core::{LabelCategory, Scene, Subclass};
use maad_dataio::{write_scene, DataError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kinematics::VehicleLimits;
use crate::script::{feasible_worlds, ManeuverScript};
use crate::simulate::{generate_scene, world_for, SceneSettings};
use crate::world::{WorldSpec, WorldTemplate};
use crate::DatagenError;

/// Abnormal timesteps per class in the reference benchmark, used as default test proportions.
pub const REFERENCE_ABNORMAL_TIMESTEPS: [(Subclass, u32); 13] = [
    (Subclass::GhostDriver, 202),
    (Subclass::LeaveRoad, 186),
    (Subclass::Thwarting, 179),
    (Subclass::CancelTurn, 156),
    (Subclass::LastMinuteTurn, 114),
    (Subclass::EnterWrongLane, 101),
    (Subclass::Staggering, 92),
    (Subclass::PushingAway, 84),
    (Subclass::SwervingLeft, 77),
    (Subclass::SwervingRight, 26),
    (Subclass::Tailgating, 69),
    (Subclass::AggressiveShearingLeft, 62),
    (Subclass::AggressiveShearingRight, 64),
];

pub const MIN_DURATION_S: f64 = 1.7;
pub const MAX_DURATION_S: f64 = 10.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub count: usize,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConfig {
    pub subclass: Subclass,
    pub count: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    /// `"auto"` or a template name.
    pub world: String,
    pub seed: u64,
    pub v_max: f64,
    pub a_max: f64,
    /// Length of test scenes.
    pub duration_s: f64,
    pub random_pose: bool,
    pub train: SplitConfig,
    pub val: SplitConfig,
    pub classes: Vec<ClassConfig>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let mut classes: Vec<ClassConfig> = largest_remainder(80, &REFERENCE_ABNORMAL_TIMESTEPS.map(|(_, n)| n as f64))
            .into_iter()
            .zip(REFERENCE_ABNORMAL_TIMESTEPS)
            .map(|(count, (subclass, _))| ClassConfig { subclass, count, params: BTreeMap::new() })
            .collect();
        let normal: Vec<Subclass> = Subclass::normal().collect();
        for (count, subclass) in largest_remainder(80, &vec![1.0; normal.len()]).into_iter().zip(normal) {
            classes.push(ClassConfig { subclass, count, params: BTreeMap::new() });
        }
        DatasetConfig {
            world: "auto".into(),
            seed: 0,
            v_max: VehicleLimits::default().v_max,
            a_max: VehicleLimits::default().a_max,
            duration_s: 8.0,
            random_pose: true,
            train: SplitConfig { count: 1000, duration_s: 5.0 },
            val: SplitConfig { count: 200, duration_s: 5.0 },
            classes,
        }
    }
}

/// Hamilton apportionment of `total` seats by `weights`; ties go to the earlier entry.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut seats: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let missing = total - seats.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        seats[i] += 1;
    }
    seats
}

impl DatasetConfig {
    pub fn from_json(text: &str) -> Result<Self, DatagenError> {
        let config: DatasetConfig = serde_json::from_str(text).map_err(|e| DatagenError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: String| Err(DatagenError::Config(m));
        if self.world != "auto" {
            self.world.parse::<WorldTemplate>()?;
        }
        for (name, d) in
            [("duration_s", self.duration_s), ("train.duration_s", self.train.duration_s), ("val.duration_s", self.val.duration_s)]
        {
            if !(MIN_DURATION_S..=MAX_DURATION_S).contains(&d) {
                return bad(format!("{name} = {d} outside [{MIN_DURATION_S}, {MAX_DURATION_S}] s"));
            }
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) || !(self.a_max > 0.0 && self.a_max.is_finite()) {
            return bad("v_max and a_max must be positive".into());
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.classes {
            if !seen.insert(c.subclass) {
                return bad(format!("class {} listed twice", c.subclass));
            }
        }
        Ok(())
    }

    fn limits(&self) -> VehicleLimits {
        VehicleLimits { v_max: self.v_max, a_max: self.a_max, ..VehicleLimits::default() }
    }

    fn fixed_world(&self) -> Option<WorldTemplate> {
        (self.world != "auto").then(|| self.world.parse().expect("validated"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub scenes: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub subclass: String,
    pub scenes: usize,
    pub abnormal_frames: usize,
    pub normal_frames: usize,
    pub ignore_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene_id: String,
    pub split: String,
    pub subclass: Subclass,
    pub world: WorldTemplate,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub splits: BTreeMap<String, SplitSummary>,
    pub classes: Vec<ClassSummary>,
    pub scenes: Vec<SceneEntry>,
}

/// SplitMix64 finaliser, used to derive independent per-scene seeds.
pub fn mix_seed(seed: u64, split: u64, index: u64) -> u64 {
    let mut z = seed ^ split.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Job {
    split: &'static str,
    index: usize,
    script: ManeuverScript,
    seed: u64,
    duration: f64,
}

fn world_spec(config: &DatasetConfig, subclass: Subclass, seed: u64) -> WorldSpec {
    let auto = world_for(subclass, seed);
    match config.fixed_world() {
        None => auto,
        Some(t) => WorldSpec::new(t, auto.start_lane),
    }
}

fn jobs(config: &DatasetConfig) -> Vec<Job> {
    let mut out = Vec::new();
    let normal_pool: Vec<Subclass> =
        Subclass::normal().filter(|c| config.fixed_world().is_none_or(|t| feasible_worlds(*c).contains(&t))).collect();
    for (split, split_id, sc) in [("train", 1u64, &config.train), ("val", 2, &config.val)] {
        for index in 0..sc.count {
            let seed = mix_seed(config.seed, split_id, index as u64);
            let pick = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED).gen_range(0..normal_pool.len().max(1));
            let subclass = *normal_pool.get(pick).unwrap_or(&Subclass::Straight);
            out.push(Job { split, index, script: ManeuverScript::new(subclass), seed, duration: sc.duration_s });
        }
    }
    let mut index = 0;
    for c in &config.classes {
        for _ in 0..c.count {
            let seed = mix_seed(config.seed, 3, index as u64);
            let script = ManeuverScript { subclass: c.subclass, params: c.params.clone() };
            out.push(Job { split: "test", index, script, seed, duration: config.duration_s });
            index += 1;
        }
    }
    out
}

fn scene_id(split: &str, index: usize) -> String {
    format!("{split}_{index:05}")
}

fn build(config: &DatasetConfig, job: &Job) -> Result<(Scene, WorldSpec), DatagenError> {
    let spec = world_spec(config, job.script.subclass, job.seed);
    let mut settings = SceneSettings::new(scene_id(job.split, job.index), job.duration);
    settings.limits = config.limits();
    settings.labeled = job.split == "test";
    settings.random_pose = config.random_pose;
    let scene = generate_scene(&spec, &job.script, &settings, job.seed)?;
    Ok((scene, spec))
}

/// Generates every scene of `config` in memory, in manifest order.
pub fn generate_scenes(config: &DatasetConfig) -> Result<Vec<(String, Scene, ManeuverScript, WorldSpec)>, DatagenError> {
    config.validate()?;
    jobs(config)
        .par_iter()
        .map(|job| build(config, job).map(|(scene, spec)| (job.split.to_string(), scene, job.script.clone(), spec)))
        .collect()
}

/// Writes `train/`, `val/` and `test/` splits plus `manifest.json` and `config.json` under `out_dir`.
pub fn generate_dataset(config: &DatasetConfig, out_dir: &Path) -> Result<Manifest, DatagenError> {
    config.validate()?;
    for split in ["train", "val", "test"] {
        let dir = out_dir.join(split);
        fs::create_dir_all(&dir).map_err(|e| DataError::Io { path: dir.clone(), source: e })?;
    }
    let jobs = jobs(config);
    let results: Vec<Result<(SceneEntry, [usize; 3]), DatagenError>> = jobs
        .par_iter()
        .map(|job| {
            let (scene, spec) = build(config, job)?;
            write_scene(&scene, &out_dir.join(job.split))?;
            let mut counts = [0usize; 3];
            for l in scene.labels.iter().flatten() {
                counts[l.category as usize] += 1;
            }
            let entry = SceneEntry {
                scene_id: scene.scene_id.clone(),
                split: job.split.to_string(),
                subclass: job.script.subclass,
                world: spec.template,
                frames: scene.len(),
            };
            Ok((entry, counts))
        })
        .collect();
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let manifest = summarise(config, entries);
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    write_json(&out_dir.join("config.json"), config)?;
    Ok(manifest)
}

fn summarise(config: &DatasetConfig, scenes: Vec<(SceneEntry, [usize; 3])>) -> Manifest {
    let mut splits: BTreeMap<String, SplitSummary> = BTreeMap::new();
    let mut classes: BTreeMap<Subclass, ClassSummary> = BTreeMap::new();
    for (e, counts) in &scenes {
        let s = splits.entry(e.split.clone()).or_default();
        s.scenes += 1;
        s.frames += e.frames;
        if e.split == "test" {
            let c = classes.entry(e.subclass).or_insert_with(|| ClassSummary { subclass: e.subclass.name().into(), ..Default::default() });
            c.scenes += 1;
            c.normal_frames += counts[LabelCategory::Normal as usize];
            c.abnormal_frames += counts[LabelCategory::Abnormal as usize];
            c.ignore_frames += counts[LabelCategory::Ignore as usize];
        }
    }
    Manifest { seed: config.seed, splits, classes: classes.into_values().collect(), scenes: scenes.into_iter().map(|(e, _)| e).collect() }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DatagenError> {
    let body = serde_json::to_string_pretty(value).expect("serialisable");
    fs::write(path, body + "\n").map_err(|e| DataError::Io { path: path.to_path_buf(), source: e })?;
    Ok(())
}
