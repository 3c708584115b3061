//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use maad_core::{LabelCategory, Subclass};
use maad_datagen::{largest_remainder, ClassConfig, DatasetConfig, SplitConfig};
use maad_dataio::{labels_path, list_scene_ids, read_labels, read_scene_by_id, read_scores, scores_path, write_scores};
use maad_diffcalc::{Graph, Linear, LstmCell, LstmState, ParamStore, Tensor, Var};
use maad_eval::{aupr, auroc, evaluate_dirs, fpr_at_95_tpr, Pair, Positive};
use maad_models::layers::{normalized_row, Aggregation, GraphConv, LaneFusion, LaneInputs};
use maad_models::{cvm_reconstruct, lti_reconstruct};
use maad_oneclass::{fit_ocsvm, gaussian_kernel, OcSvmModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn maad(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_maad")).args(args).env("MAAD_LOG", "error").output().unwrap();
    assert!(out.status.success(), "maad {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// ---------------------------------------------------------------- gradients

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative error between backpropagated and central-difference gradients.
fn gradient_error(store: &mut ParamStore, loss: impl Fn(&mut Graph, &ParamStore) -> Var) -> f64 {
    store.zero_grad();
    let mut g = Graph::new();
    let l = loss(&mut g, store);
    g.backward(l, store).unwrap();
    let analytic = store.grads_flat();
    let eps = 1e-5;
    let mut numeric = Vec::with_capacity(analytic.len());
    for k in 0..analytic.len() {
        let orig = *store.flat_value_mut(k);
        let mut at = |v: f64| {
            *store.flat_value_mut(k) = v;
            let mut g = Graph::new();
            let l = loss(&mut g, store);
            g.value(l).item()
        };
        let (fp, fm) = (at(orig + eps), at(orig - eps));
        *store.flat_value_mut(k) = orig;
        numeric.push((fp - fm) / (2.0 * eps));
    }
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12)
}

fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_biases(store: &mut ParamStore, rng: &mut ChaCha8Rng) {
    for p in store.iter_mut() {
        if p.name.ends_with("bias") {
            p.value.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
        }
    }
}

fn squared_error(g: &mut Graph, out: Var, target: &Tensor) -> Var {
    let t = g.constant(target.clone());
    let se = g.squared_euclidean(out, t).unwrap();
    g.sum(se)
}

fn linear_error(rng: &mut ChaCha8Rng) -> f64 {
    let mut store = ParamStore::new();
    let layer = Linear::new(&mut store, "fc", 5, 3, rng);
    random_biases(&mut store, rng);
    let (x, y) = (random(4, 5, rng), random(4, 3, rng));
    gradient_error(&mut store, |g, st| {
        let xv = g.constant(x.clone());
        let out = layer.forward(g, st, xv).unwrap();
        squared_error(g, out, &y)
    })
}

fn lstm_error(rng: &mut ChaCha8Rng) -> f64 {
    let mut store = ParamStore::new();
    let cell = LstmCell::new(&mut store, "lstm", 3, 4, rng);
    random_biases(&mut store, rng);
    let xs: Vec<Tensor> = (0..4).map(|_| random(2, 3, rng)).collect();
    let (h0, c0, y) = (random(2, 4, rng), random(2, 4, rng), random(2, 8, rng));
    gradient_error(&mut store, |g, st| {
        let mut state = LstmState { h: g.constant(h0.clone()), c: g.constant(c0.clone()) };
        for x in &xs {
            let xv = g.constant(x.clone());
            state = cell.forward(g, st, xv, state).unwrap();
        }
        let both = g.concat_cols(&[state.h, state.c]).unwrap();
        squared_error(g, both, &y)
    })
}

fn graph_conv_error(rng: &mut ChaCha8Rng) -> f64 {
    let mut store = ParamStore::new();
    let conv = GraphConv::new(&mut store, "gc", 4, rng);
    random_biases(&mut store, rng);
    let h = random(5, 4, rng);
    let points: Vec<Option<[f64; 2]>> = (0..5).map(|_| Some([rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..5.0)])).collect();
    let mut agg = Aggregation::new(1);
    for (k, w) in normalized_row(&points, 0) {
        agg.push(k, 0, w);
    }
    let y = random(1, 4, rng);
    gradient_error(&mut store, |g, st| {
        let hv = g.constant(h.clone());
        let out = conv.forward(g, st, hv, &agg, &[0]).unwrap();
        squared_error(g, out, &y)
    })
}

fn fusion_error(rng: &mut ChaCha8Rng) -> f64 {
    let mut store = ParamStore::new();
    let fusion = LaneFusion::new(&mut store, "lane", 4, rng);
    random_biases(&mut store, rng);
    let nodes = 5;
    let mut connectivity = Aggregation::new(nodes);
    for i in 0..nodes - 1 {
        connectivity.push(i + 1, i, 1.0);
        connectivity.push(i, i + 1, 0.5);
    }
    let edge_nodes = vec![0, 2, 3, 4];
    let mut to_actor = Aggregation::new(2);
    for (e, a) in [0, 0, 1, 1].into_iter().enumerate() {
        to_actor.push(e, a, 0.5);
    }
    let lanes =
        LaneInputs { node_features: random(nodes, 4, rng), connectivity, offsets: random(edge_nodes.len(), 2, rng), edge_nodes, to_actor };
    let (actors, y) = (random(2, 4, rng), random(2, 4, rng));
    gradient_error(&mut store, |g, st| {
        let a = g.constant(actors.clone());
        let out = fusion.forward(g, st, a, &lanes).unwrap();
        squared_error(g, out, &y)
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: Vec<(&str, f64)> = Vec::new();
    type ErrorFn = fn(&mut ChaCha8Rng) -> f64;
    let layers: [(&str, ErrorFn); 4] =
        [("linear", linear_error), ("lstm", lstm_error), ("graph-conv", graph_conv_error), ("fusion", fusion_error)];
    for (name, f) in layers {
        let max = (0..10).map(|seed| f(&mut ChaCha8Rng::seed_from_u64(seed))).fold(0.0, f64::max);
        worst.push((name, max));
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|(_, e)| *e < 1e-4) && elapsed < Duration::from_secs(60);
    let parts: Vec<String> = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect();
    outcome(pass, format!("max relative error over 10 seeds: {} (< 1e-4), {:.1} s", parts.join(", "), elapsed.as_secs_f64()))
}

// ------------------------------------------------------------------ metrics

fn pairwise_auroc(p: &[Pair]) -> f64 {
    let (mut wins, mut total) = (0.0, 0.0);
    for a in p.iter().filter(|x| x.abnormal) {
        for b in p.iter().filter(|x| !x.abnormal) {
            total += 1.0;
            wins += if a.score > b.score {
                1.0
            } else if a.score == b.score {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / total
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=50);
        let mut p: Vec<Pair> = (0..n).map(|_| Pair::new(rng.gen_range(0..10) as f64 / 3.0, rng.gen_bool(0.5))).collect();
        p[0].abnormal = true;
        p[1].abnormal = false;
        worst = worst.max((auroc(&p).unwrap() - pairwise_auroc(&p)).abs());
    }
    let mut prevalence_exact = true;
    for _ in 0..100 {
        let n = rng.gen_range(1..=50);
        let k = rng.gen_range(1..=n);
        let p: Vec<Pair> = (0..n).map(|i| Pair::new(2.5, i < k)).collect();
        prevalence_exact &= aupr(&p, Positive::Abnormal).unwrap() == k as f64 / n as f64;
    }
    // ranks A, N, A: precision 1 at recall 1/2 and 2/3 at recall 1
    let hand = vec![Pair::new(0.9, true), Pair::new(0.8, false), Pair::new(0.7, true)];
    let split = vec![Pair::new(0.9, true), Pair::new(0.5, false), Pair::new(0.3, true), Pair::new(0.1, false)];
    let hand_ok = (aupr(&hand, Positive::Abnormal).unwrap() - 5.0 / 6.0).abs() < 1e-9
        && (aupr(&hand, Positive::Normal).unwrap() - 0.5).abs() < 1e-9
        && (auroc(&hand).unwrap() - 0.5).abs() < 1e-9
        && (auroc(&split).unwrap() - 0.75).abs() < 1e-9
        && (fpr_at_95_tpr(&split).unwrap() - 0.5).abs() < 1e-9;
    let elapsed = start.elapsed();
    let pass = worst < 1e-9 && prevalence_exact && hand_ok && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "AUROC vs pairwise max gap {worst:.1e} on 100 instances, constant-scorer AP exact: {prevalence_exact}, hand cases: {hand_ok}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

// ----------------------------------------------------------------- protocol

fn criterion_3(bench: &Path) -> Outcome {
    let mut scenes = 0;
    let mut bad_counts = Vec::new();
    for split in ["train", "val", "test"] {
        let data = bench.join("data").join(split);
        let out = bench.join("protocol").join(split);
        maad(&["score", "--model", "cvm", "--data", s(&data), "--out", s(&out)]);
        for id in list_scene_ids(&data).unwrap() {
            let len = read_scene_by_id(&data, &id).unwrap().len();
            let rows = read_scores(&scores_path(&out, &id)).unwrap();
            let frames_ok = rows.iter().enumerate().all(|(k, (f, _))| *f == 15 + k);
            if rows.len() != len - 15 || !frames_ok {
                bad_counts.push(id);
            }
            scenes += 1;
        }
    }

    // any value on IGNORE frames must leave the metrics untouched
    let labels_dir = bench.join("data").join("test");
    let clean = bench.join("protocol").join("test");
    let poisoned = bench.join("protocol").join("poisoned");
    fs::create_dir_all(&poisoned).unwrap();
    let (mut ignored, mut kept) = (0, 0);
    for id in list_scene_ids(&labels_dir).unwrap() {
        let labels: BTreeMap<usize, LabelCategory> =
            read_labels(&labels_path(&labels_dir, &id)).unwrap().into_iter().map(|l| (l.frame_index, l.category)).collect();
        let rows: Vec<(usize, f64)> = read_scores(&scores_path(&clean, &id))
            .unwrap()
            .into_iter()
            .map(|(f, v)| {
                if labels[&f] == LabelCategory::Ignore {
                    ignored += 1;
                    (f, if f % 2 == 0 { 1e9 } else { -1e9 })
                } else {
                    kept += 1;
                    (f, v)
                }
            })
            .collect();
        write_scores(&rows, &scores_path(&poisoned, &id)).unwrap();
    }
    let a = evaluate_dirs(&clean, &labels_dir).unwrap();
    let b = evaluate_dirs(&poisoned, &labels_dir).unwrap();
    let same = serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap();
    let counted = a.counts.n_ignored == ignored && a.counts.n_abnormal + a.counts.n_normal == kept;
    let pass = bad_counts.is_empty() && ignored > 0 && same && counted;
    outcome(
        pass,
        format!(
            "{scenes} scenes with L-15 scores each ({} wrong); {ignored} IGNORE frames excluded, metrics unchanged when they are overwritten: {same}",
            bad_counts.len()
        ),
    )
}

// ------------------------------------------------------------ linear models

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut cvm_max, mut lti_max): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let p0 = [rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)];
        let v = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let track: Vec<[f64; 2]> = (0..16).map(|t| [p0[0] + v[0] * t as f64, p0[1] + v[1] * t as f64]).collect();
        let scale = norm(&p0) + norm(&v) * 16.0;
        cvm_max = cvm_max.max(cvm_reconstruct(&track).1 / scale);
        lti_max = lti_max.max(lti_reconstruct(&track).1 / scale);
    }
    // rounding of the generated points bounds how close to zero the scores can be
    let zero_ok = cvm_max < 1e-12 && lti_max < 1e-12;
    let cvm_hand = cvm_reconstruct(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [6.0, 0.0]]).1;
    let lti_hand = lti_reconstruct(&[[0.0, 0.0], [0.0, 2.0], [4.0, 0.0]]).1;
    let cvm_ok = (cvm_hand - 1.0).abs() < 1e-12;
    let lti_ok = (lti_hand - 8f64.sqrt() / 3.0).abs() < 1e-12;
    outcome(
        zero_ok && cvm_ok && lti_ok,
        format!(
            "relative scores on 200 constant-velocity tracks: CVM {cvm_max:.1e}, LTI {lti_max:.1e}; hand cases CVM {cvm_hand} (1.0), LTI {lti_hand:.15} (sqrt(8)/3)"
        ),
    )
}

// ------------------------------------------------------------------- OC-SVM

fn gaussian(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            let r = (-2.0 * u.ln()).sqrt();
            let t = std::f64::consts::TAU * v;
            vec![r * t.cos(), r * t.sin()]
        })
        .collect()
}

struct SvmCheck {
    outliers: f64,
    svs: f64,
    feasibility: f64,
    serialized: String,
}

/// Recomputes the decision function from the stored dual solution.
fn svm_check(x: &[Vec<f64>], gamma: f64, nu: f64) -> SvmCheck {
    let m: OcSvmModel = fit_ocsvm(x, gamma, nu).unwrap();
    let c = 1.0 / (nu * x.len() as f64);
    let sum: f64 = m.dual_coeffs.iter().sum();
    let bounds = m.dual_coeffs.iter().map(|&a| (-a).max(a - c).max(0.0)).fold(0.0, f64::max);
    let decision = |f: &Vec<f64>| {
        let z: Vec<f64> = f.iter().zip(m.standardizer.mean.iter().zip(&m.standardizer.scale)).map(|(v, (mu, sd))| (v - mu) / sd).collect();
        m.support_vectors.iter().zip(&m.dual_coeffs).map(|(sv, a)| a * gaussian_kernel(sv, &z, gamma)).sum::<f64>()
    };
    let outliers = x.iter().filter(|f| decision(f) < m.rho - 1e-6).count() as f64 / x.len() as f64;
    let svs = m.dual_coeffs.iter().filter(|&&a| a > 0.0).count() as f64 / x.len() as f64;
    SvmCheck { outliers, svs, feasibility: (sum - 1.0).abs().max(bounds), serialized: serde_json::to_string(&m).unwrap() }
}

fn ocsvm_runs() -> Vec<(f64, SvmCheck)> {
    let x = gaussian(200, SEED);
    [0.1, 0.5, 2.0].into_iter().map(|gamma| (gamma, svm_check(&x, gamma, 0.1))).collect()
}

fn criterion_5(runs: &[(f64, SvmCheck)], elapsed: Duration) -> Outcome {
    let pass = runs.iter().all(|(_, r)| r.outliers <= 0.13 && r.svs >= 0.07 && r.feasibility <= 1e-6) && elapsed < Duration::from_secs(30);
    let parts: Vec<String> = runs
        .iter()
        .map(|(g, r)| format!("gamma {g}: outliers {:.3}, SVs {:.3}, feasibility {:.1e}", r.outliers, r.svs, r.feasibility))
        .collect();
    outcome(pass, format!("n=200, nu=0.1; {}; {:.2} s", parts.join("; "), elapsed.as_secs_f64()))
}

// --------------------------------------------------------------- benchmark

fn benchmark_config() -> DatasetConfig {
    let abnormal = [
        (Subclass::Staggering, 3),
        (Subclass::SwervingLeft, 3),
        (Subclass::SwervingRight, 3),
        (Subclass::CancelTurn, 3),
        (Subclass::LastMinuteTurn, 3),
        (Subclass::LeaveRoad, 3),
        (Subclass::AggressiveShearingLeft, 2),
    ];
    let mut classes: Vec<ClassConfig> =
        abnormal.iter().map(|&(subclass, count)| ClassConfig { subclass, count, params: BTreeMap::new() }).collect();
    let normal: Vec<Subclass> = Subclass::normal().collect();
    for (count, subclass) in largest_remainder(20, &vec![1.0; normal.len()]).into_iter().zip(normal) {
        classes.push(ClassConfig { subclass, count, params: BTreeMap::new() });
    }
    DatasetConfig {
        seed: SEED,
        train: SplitConfig { count: 200, duration_s: 5.0 },
        val: SplitConfig { count: 40, duration_s: 5.0 },
        classes,
        ..DatasetConfig::default()
    }
}

/// Trains with the benchmark schedule on `data/train`, selecting on `data/val`.
fn train(data: &Path, out: &Path, model: &str, objective: &str) {
    let (train, val) = (data.join("train"), data.join("val"));
    maad(&[
        "train",
        "--model",
        model,
        "--objective",
        objective,
        "--data",
        s(&train),
        "--val",
        s(&val),
        "--epochs",
        "36",
        "--batch",
        "32",
        "--clips-per-scene",
        "4",
        "--seed",
        "7",
        "--out",
        s(out),
    ]);
}

struct Benchmark {
    root: PathBuf,
    /// Serialized `metrics.json` per model.
    metrics: BTreeMap<&'static str, String>,
    deep_seconds: f64,
}

impl Benchmark {
    fn value(&self, model: &str, key: &str) -> f64 {
        let v: Value = serde_json::from_str(&self.metrics[model]).unwrap();
        v[key].as_f64().unwrap()
    }
}

/// generate -> train -> score -> eval through the `maad` binary.
fn run_benchmark(root: &Path) -> Benchmark {
    let cfg = root.join("dataset.json");
    fs::write(&cfg, serde_json::to_string_pretty(&benchmark_config()).unwrap()).unwrap();
    let data = root.join("data");
    maad(&["generate", "--config", s(&cfg), "--out", s(&data)]);
    let test = data.join("test");
    let mut metrics = BTreeMap::new();
    let start = Instant::now();
    for model in ["seq2seq", "stgae", "cvm", "lti"] {
        let run = root.join("runs").join(model);
        let scores = run.join("scores");
        if model == "cvm" || model == "lti" {
            maad(&["score", "--model", model, "--data", s(&test), "--out", s(&scores)]);
        } else {
            train(&data, &run, model, "recon");
            maad(&["score", "--checkpoint", s(&run.join("model.ckpt")), "--data", s(&test), "--out", s(&scores)]);
        }
        let eval = run.join("eval");
        maad(&["eval", "--scores", s(&scores), "--labels", s(&test), "--out", s(&eval)]);
        metrics.insert(model, fs::read_to_string(eval.join("metrics.json")).unwrap());
    }
    Benchmark { root: root.to_path_buf(), metrics, deep_seconds: start.elapsed().as_secs_f64() }
}

fn criterion_6(b: &Benchmark) -> Outcome {
    let manifest: Value = serde_json::from_str(&fs::read_to_string(b.root.join("data/manifest.json")).unwrap()).unwrap();
    let classes = manifest["classes"].as_array().unwrap();
    let abnormal_classes = classes.iter().filter(|c| c["abnormal_frames"].as_u64().unwrap() > 0).count();
    let abnormal_scenes: u64 =
        classes.iter().filter(|c| c["abnormal_frames"].as_u64().unwrap() > 0).map(|c| c["scenes"].as_u64().unwrap()).sum();
    let layout_ok = manifest["splits"]["train"]["scenes"] == 200
        && manifest["splits"]["test"]["scenes"] == 40
        && abnormal_scenes == 20
        && abnormal_classes >= 6;
    let (s_auroc, s_aupr, t_auroc) = (b.value("seq2seq", "auroc"), b.value("seq2seq", "aupr_abnormal"), b.value("stgae", "auroc"));
    let pass = layout_ok && s_auroc >= 0.80 && s_aupr >= 0.60 && t_auroc >= 0.75 && b.deep_seconds < 15.0 * 60.0;
    outcome(
        pass,
        format!(
            "Seq2Seq AUROC {s_auroc:.4} (>= 0.80), AUPR-Abnormal {s_aupr:.4} (>= 0.60); STGAE AUROC {t_auroc:.4} (>= 0.75); {abnormal_scenes} abnormal scenes over {abnormal_classes} subclasses; {:.0} s",
            b.deep_seconds
        ),
    )
}

fn criterion_7(b: &Benchmark) -> Outcome {
    let a = |m| b.value(m, "aupr_abnormal");
    let deep_min = a("seq2seq").min(a("stgae"));
    let linear_max = a("cvm").max(a("lti"));
    outcome(
        deep_min > linear_max,
        format!("AUPR-Abnormal Seq2Seq {:.4}, STGAE {:.4} > CVM {:.4}, LTI {:.4}", a("seq2seq"), a("stgae"), a("cvm"), a("lti")),
    )
}

fn criterion_8(first: &Benchmark, second: &Benchmark, svm_a: &[(f64, SvmCheck)], svm_b: &[(f64, SvmCheck)]) -> Outcome {
    let differing: Vec<&str> = first.metrics.iter().filter(|(k, v)| second.metrics.get(*k) != Some(v)).map(|(k, _)| *k).collect();
    let svm_same = svm_a.iter().zip(svm_b).all(|(a, b)| a.1.serialized == b.1.serialized);
    outcome(
        differing.is_empty() && svm_same,
        format!(
            "second seeded run: metrics.json byte-identical for {} of {} models, OC-SVM solutions identical: {svm_same}",
            first.metrics.len() - differing.len(),
            first.metrics.len()
        ),
    )
}

fn criterion_9(b: &Benchmark) -> Outcome {
    let run = b.root.join("runs").join("seq2seq_dsvdd");
    train(&b.root.join("data"), &run, "seq2seq", "dsvdd");
    let summary: Value = serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    let init = summary["center_distance_init"].as_f64().unwrap();
    let best = summary["center_distance_best"].as_f64().unwrap();
    let log = fs::read_to_string(run.join("epochs.csv")).unwrap();
    let finite = log.lines().skip(1).flat_map(|l| l.split(',')).all(|v| v.parse::<f64>().is_ok_and(f64::is_finite));
    outcome(
        best < init && finite,
        format!("Seq2Seq DSVDD mean |Z - c| {init:.4} after center init, {best:.4} at best epoch {}", summary["best_epoch"]),
    )
}

fn main() {
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    results.push((1, "gradient correctness", criterion_1()));
    results.push((2, "metric oracles", criterion_2()));

    let first_dir = TempDir::new().unwrap();
    let second_dir = TempDir::new().unwrap();
    let first = run_benchmark(first_dir.path());

    results.push((3, "protocol law", criterion_3(&first.root)));
    results.push((4, "linear-model exactness", criterion_4()));
    let start = Instant::now();
    let svm_first = ocsvm_runs();
    results.push((5, "OC-SVM nu-property", criterion_5(&svm_first, start.elapsed())));
    results.push((6, "synthetic mini-benchmark", criterion_6(&first)));
    results.push((7, "deep over linear ordering", criterion_7(&first)));

    let second = run_benchmark(second_dir.path());
    let svm_second = ocsvm_runs();
    results.push((8, "determinism", criterion_8(&first, &second, &svm_first, &svm_second)));
    results.push((9, "DSVDD sanity", criterion_9(&first)));

    println!();
    for (n, name, o) in &results {
        println!("criterion {n} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("\nacceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
