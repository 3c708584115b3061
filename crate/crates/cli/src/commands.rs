use std::fs;
use std::path::Path;

use maad_core::{to_target_frame, window_iter, LabelCategory, Scene, FIRST_SCORED_FRAME};
use maad_datagen::{generate_dataset, DatasetConfig};
use maad_dataio::{
    labels_path, list_scene_ids, load_checkpoint, read_labels, read_scene_by_id, save_checkpoint, scores_path, write_scores,
};
use maad_eval::{evaluate, score_scenes, EvalError, MetricsReport, Scorer};
use maad_models::{train, training_windows, Architecture, DeepModel, Model, ModelDescriptor, Objective, Sample, TrainConfig};
use maad_oneclass::{default_gammas, grid_search, select_subset, TwoStage, DEFAULT_NUS, OCSVM_TAG};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::{CliError, EvalArgs, GenerateArgs, GridArgs, Result, ScoreArgs, TrainArgs};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

/// Writes `run_config.json` holding the subcommand name and its arguments.
pub fn write_run_config(dir: &Path, command: &str, args: &impl Serialize) -> Result<()> {
    write_json(&dir.join("run_config.json"), &json!({ "command": command, "version": env!("CARGO_PKG_VERSION"), "args": args }))
}

/// Every scene of `dir`, in id order; an empty directory is a usage error.
pub fn load_scenes(dir: &Path) -> Result<Vec<Scene>> {
    let ids = list_scene_ids(dir)?;
    if ids.is_empty() {
        return Err(CliError::usage(format!("no scenes in {}", dir.display())));
    }
    let scenes = ids.par_iter().map(|id| read_scene_by_id(dir, id)).collect::<maad_dataio::Result<Vec<_>>>()?;
    Ok(scenes)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            DatasetConfig::from_json(&text)?
        }
        None => DatasetConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    create_dir(&args.out)?;
    let manifest = generate_dataset(&config, &args.out)?;
    write_run_config(&args.out, "generate", args)?;
    for (split, s) in &manifest.splits {
        println!("{split}: {} scenes, {} frames", s.scenes, s.frames);
    }
    for c in &manifest.classes {
        println!(
            "  {:<26} {:>3} scenes  abnormal {:>5}  normal {:>5}  ignore {:>4}",
            c.subclass, c.scenes, c.abnormal_frames, c.normal_frames, c.ignore_frames
        );
    }
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let architecture: Architecture = args.model.parse()?;
    if architecture.is_linear() {
        return Err(CliError::usage(format!("{architecture} requires no training")));
    }
    let objective: Objective = args.objective.parse()?;
    let descriptor = ModelDescriptor::new(architecture, objective)?;
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        lr: args.lr,
        lr_decayed: args.lr_decayed,
        decay_after: args.decay_after,
        seed: args.seed,
        clips_per_scene: args.clips_per_scene,
        pretrain_epochs: args.pretrain_epochs,
        ..TrainConfig::default()
    };
    let train_scenes = load_scenes(&args.data)?;
    let val_scenes = match &args.val {
        Some(dir) => load_scenes(dir)?,
        None => Vec::new(),
    };
    let report = train(descriptor, &train_scenes, &val_scenes, &config)?;

    create_dir(&args.out)?;
    save_checkpoint(&report.checkpoint(&config), &args.out.join("model.ckpt"))?;
    let log_path = args.out.join("epochs.csv");
    let mut w = csv::Writer::from_path(&log_path).map_err(|e| csv_error(&log_path, e))?;
    for row in &report.epochs {
        w.serialize(row).map_err(|e| csv_error(&log_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&log_path, e))?;
    write_json(&args.out.join("summary.json"), &report.summary(&config))?;
    write_run_config(&args.out, "train", args)?;
    println!(
        "{architecture} ({objective}): {} epochs, best epoch {} with val loss {:.6}",
        report.epochs.len(),
        report.best_epoch,
        report.epochs.get(report.best_epoch.wrapping_sub(1)).map_or(f64::NAN, |e| e.val_loss)
    );
    if let (Some(init), Some(best)) = (report.center_distance_init, report.center_distance_best) {
        println!("mean center distance: {init:.6} at init, {best:.6} at best epoch");
    }
    Ok(())
}

/// A loaded scorer: a baseline or auto-encoder, or an encoder plus OC-SVM.
enum Loaded {
    Model(Model),
    TwoStage(Box<TwoStage>),
}

impl Loaded {
    fn scorer(&self) -> &dyn Scorer {
        match self {
            Loaded::Model(m) => m,
            Loaded::TwoStage(t) => t.as_ref(),
        }
    }
}

fn load_scorer(args: &ScoreArgs) -> Result<Loaded> {
    match (&args.checkpoint, &args.model) {
        (Some(path), expected) => {
            let ckpt = load_checkpoint(path)?;
            if let Some(name) = expected {
                ckpt.expect_architecture(name)?;
            }
            if ckpt.header.architecture == OCSVM_TAG {
                Ok(Loaded::TwoStage(Box::new(TwoStage::from_checkpoint(&ckpt)?)))
            } else {
                Ok(Loaded::Model(Model::from_checkpoint(&ckpt)?))
            }
        }
        (None, Some(name)) => {
            let architecture: Architecture = name.parse()?;
            if !architecture.is_linear() {
                return Err(CliError::usage(format!("{architecture} needs --checkpoint")));
            }
            Ok(Loaded::Model(Model::linear(architecture)?))
        }
        (None, None) => Err(CliError::usage("either --checkpoint or --model is required")),
    }
}

pub fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let loaded = load_scorer(args)?;
    let scenes = load_scenes(&args.data)?;
    let series = score_scenes(loaded.scorer(), &scenes)?;
    create_dir(&args.out)?;
    for s in &series {
        write_scores(&s.entries, &scores_path(&args.out, &s.scene_id))?;
    }
    write_run_config(&args.out, "score", args)?;
    let frames: usize = series.iter().map(|s| s.entries.len()).sum();
    println!("scored {frames} frames in {} scenes", series.len());
    Ok(())
}

fn print_metrics(r: &MetricsReport) {
    println!("AUPR-Abnormal {:.4}", r.aupr_abnormal);
    println!("AUPR-Normal   {:.4}", r.aupr_normal);
    println!("AUROC         {:.4}", r.auroc);
    println!("FPR@95%TPR    {:.4}", r.fpr_at_95_tpr);
    println!("frames: {} abnormal, {} normal, {} ignored", r.counts.n_abnormal, r.counts.n_normal, r.counts.n_ignored);
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let report = evaluate(&args.scores, &args.labels, &args.out)?;
    write_run_config(&args.out, "eval", args)?;
    print_metrics(&report);
    Ok(())
}

fn sample(scene: &Scene, window: maad_core::Window, with_map: bool) -> Sample {
    if with_map {
        Sample::new(window, &scene.lane_graph)
    } else {
        Sample::without_map(window)
    }
}

/// A labeled test frame.
#[derive(Serialize)]
struct LabeledFrame {
    scene_id: String,
    frame: usize,
    abnormal: bool,
}

pub fn cmd_gridsearch_ocsvm(args: &GridArgs) -> Result<()> {
    if !(args.subset_frac > 0.0 && args.subset_frac <= 1.0) {
        return Err(CliError::usage(format!("--subset-frac {} outside (0, 1]", args.subset_frac)));
    }
    if args.max_train == 0 {
        return Err(CliError::usage("--max-train must be positive"));
    }
    let encoder: DeepModel = match Model::from_checkpoint(&load_checkpoint(&args.checkpoint)?)? {
        Model::Deep(m) => *m,
        Model::Linear(a) => return Err(CliError::usage(format!("{a} has no latent code"))),
    };
    let with_map = encoder.architecture() == Architecture::LanegcnAe;

    let train_scenes = load_scenes(&args.train_data)?;
    let mut windows = training_windows(&train_scenes);
    if windows.len() > args.max_train {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        rng.set_stream(1);
        let mut idx = rand::seq::index::sample(&mut rng, windows.len(), args.max_train).into_vec();
        idx.sort_unstable();
        windows = idx.into_iter().map(|i| windows[i]).collect();
    }
    let train_samples = windows
        .iter()
        .map(|&(i, f)| Ok(sample(&train_scenes[i], to_target_frame(&train_scenes[i], f)?, with_map)))
        .collect::<std::result::Result<Vec<_>, maad_core::CoreError>>()?;
    let train_features = encoder.latents(&train_samples)?;
    drop(train_samples);

    let test_scenes = load_scenes(&args.test_data)?;
    let labels_dir = args.labels.as_deref().unwrap_or(&args.test_data);
    let mut frames = Vec::new();
    let mut frame_samples = Vec::new();
    for scene in &test_scenes {
        let path = labels_path(labels_dir, &scene.scene_id);
        if !path.exists() {
            return Err(EvalError::MissingLabels { scene: scene.scene_id.clone() }.into());
        }
        let labels = read_labels(&path)?;
        for (k, window) in window_iter(scene)?.enumerate() {
            let frame = FIRST_SCORED_FRAME + k;
            let label = labels
                .iter()
                .find(|l| l.frame_index == frame)
                .ok_or_else(|| EvalError::MissingLabel { scene: scene.scene_id.clone(), frame })?;
            if label.category == LabelCategory::Ignore {
                continue;
            }
            let window = window?;
            frames.push(LabeledFrame { scene_id: scene.scene_id.clone(), frame, abnormal: label.category == LabelCategory::Abnormal });
            frame_samples.push(Some(sample(scene, window, with_map)));
        }
    }
    let chosen = select_subset(frames.len(), args.subset_frac, args.seed);
    let subset_samples: Vec<Sample> = chosen.iter().map(|&i| frame_samples[i].take().expect("indices are distinct")).collect();
    let subset: Vec<(Vec<f64>, bool)> =
        encoder.latents(&subset_samples)?.into_iter().zip(&chosen).map(|(z, &i)| (z, frames[i].abnormal)).collect();
    log::info!("ocsvm grid: {} training features, {} of {} labeled test frames", train_features.len(), subset.len(), frames.len());

    let result = grid_search(&train_features, &subset, &default_gammas(), &DEFAULT_NUS)?;

    create_dir(&args.out)?;
    let grid_path = args.out.join("grid.csv");
    let mut w = csv::Writer::from_path(&grid_path).map_err(|e| csv_error(&grid_path, e))?;
    for c in &result.candidates {
        w.serialize(c).map_err(|e| csv_error(&grid_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&grid_path, e))?;
    let subset_path = args.out.join("subset.csv");
    let mut w = csv::Writer::from_path(&subset_path).map_err(|e| csv_error(&subset_path, e))?;
    for &i in &chosen {
        w.serialize(&frames[i]).map_err(|e| csv_error(&subset_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&subset_path, e))?;
    let positives = subset.iter().filter(|s| s.1).count();
    write_json(
        &args.out.join("best.json"),
        &json!({
            "best": result.best,
            "n_train": train_features.len(),
            "subset_size": subset.len(),
            "subset_abnormal": positives,
            "subset_normal": subset.len() - positives,
        }),
    )?;
    TwoStage { encoder, svm: result.model }.save(&args.out.join("model.ckpt"))?;
    write_run_config(&args.out, "gridsearch-ocsvm", args)?;
    println!(
        "best gamma {:e} nu {} with AUPR-Abnormal {:.4} on {} labeled frames",
        result.best.gamma,
        result.best.nu,
        result.best.aupr,
        subset.len()
    );
    Ok(())
}
