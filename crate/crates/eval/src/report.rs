use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use maad_core::{FrameLabel, LabelCategory, Subclass};
use maad_dataio::{labels_path, read_labels, read_scores, DataError};
use serde::{Deserialize, Serialize};

use crate::metrics::{aupr, auroc, best_f1_threshold, fpr_at_95_tpr, pr_curve, roc_curve, Pair, Positive};
use crate::{EvalError, Result, ScoreSeries};

/// Scored frames that survived ignore filtering.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Collected {
    pub pairs: Vec<Pair>,
    /// Sub-class label of each pair.
    pub subclasses: Vec<Option<Subclass>>,
    pub n_ignored: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_abnormal: usize,
    pub n_normal: usize,
    pub n_ignored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubclassRecall {
    pub frames: usize,
    pub detected: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub aupr_abnormal: f64,
    pub aupr_normal: f64,
    pub auroc: f64,
    pub fpr_at_95_tpr: f64,
    pub counts: Counts,
    /// Score threshold with the best abnormal-class F1; `per_subclass`
    /// recalls are measured at it.
    pub recall_threshold: Option<f64>,
    pub per_subclass: BTreeMap<String, SubclassRecall>,
    #[serde(skip)]
    pub pr_curve: Vec<(f64, f64)>,
    #[serde(skip)]
    pub roc_curve: Vec<(f64, f64)>,
}

/// Pairs every scored frame with its label and drops IGNORE frames.
pub fn collect(series: &[ScoreSeries], labels: &BTreeMap<String, Vec<FrameLabel>>) -> Result<Collected> {
    let mut out = Collected::default();
    for s in series {
        let scene_labels = labels.get(&s.scene_id).ok_or_else(|| EvalError::MissingLabels { scene: s.scene_id.clone() })?;
        let by_frame: HashMap<usize, &FrameLabel> = scene_labels.iter().map(|l| (l.frame_index, l)).collect();
        for &(frame, score) in &s.entries {
            let label = by_frame.get(&frame).ok_or_else(|| EvalError::MissingLabel { scene: s.scene_id.clone(), frame })?;
            if !score.is_finite() {
                return Err(EvalError::NonFiniteScore { scene: s.scene_id.clone(), frame });
            }
            match label.category {
                LabelCategory::Ignore => out.n_ignored += 1,
                cat => {
                    out.pairs.push(Pair::new(score, cat == LabelCategory::Abnormal));
                    out.subclasses.push(label.subclass);
                }
            }
        }
    }
    Ok(out)
}

/// All four metrics, curves and the per-subclass recall breakdown.
pub fn report(c: &Collected) -> Result<MetricsReport> {
    let n_abnormal = c.pairs.iter().filter(|p| p.abnormal).count();
    let counts = Counts { n_abnormal, n_normal: c.pairs.len() - n_abnormal, n_ignored: c.n_ignored };
    let threshold = best_f1_threshold(&c.pairs);
    let mut per_subclass: BTreeMap<String, SubclassRecall> = BTreeMap::new();
    for (p, sub) in c.pairs.iter().zip(&c.subclasses) {
        let Some(sub) = sub.filter(|_| p.abnormal) else { continue };
        let e = per_subclass.entry(sub.name().to_string()).or_insert(SubclassRecall { frames: 0, detected: 0, recall: 0.0 });
        e.frames += 1;
        if threshold.is_some_and(|t| p.score >= t) {
            e.detected += 1;
        }
    }
    for e in per_subclass.values_mut() {
        e.recall = e.detected as f64 / e.frames as f64;
    }
    Ok(MetricsReport {
        aupr_abnormal: aupr(&c.pairs, Positive::Abnormal)?,
        aupr_normal: aupr(&c.pairs, Positive::Normal)?,
        auroc: auroc(&c.pairs)?,
        fpr_at_95_tpr: fpr_at_95_tpr(&c.pairs)?,
        counts,
        recall_threshold: threshold,
        per_subclass,
        pr_curve: pr_curve(&c.pairs, Positive::Abnormal),
        roc_curve: roc_curve(&c.pairs),
    })
}

fn write_curve(path: &Path, header: [&str; 2], points: &[(f64, f64)]) -> Result<()> {
    let io = |e: csv::Error| DataError::Parse { path: path.to_path_buf(), row: 0, msg: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for (a, b) in points {
        w.write_record([a.to_string(), b.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| DataError::Io { path: path.to_path_buf(), source: e })?;
    Ok(())
}

/// Writes `metrics.json`, `pr_curve.csv` and `roc_curve.csv` into `out_dir`.
pub fn write_report(report: &MetricsReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| DataError::Io { path: out_dir.to_path_buf(), source: e })?;
    let path = out_dir.join("metrics.json");
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    fs::write(&path, text).map_err(|e| DataError::Io { path: path.clone(), source: e })?;
    write_curve(&out_dir.join("pr_curve.csv"), ["recall", "precision"], &report.pr_curve)?;
    write_curve(&out_dir.join("roc_curve.csv"), ["fpr", "tpr"], &report.roc_curve)
}

/// Reads every `<id>.scores.csv` of `scores_dir` and the matching
/// `<id>.labels.json` of `labels_dir`, and computes the report.
pub fn evaluate_dirs(scores_dir: &Path, labels_dir: &Path) -> Result<MetricsReport> {
    let entries = fs::read_dir(scores_dir).map_err(|e| DataError::Io { path: scores_dir.to_path_buf(), source: e })?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| DataError::Io { path: scores_dir.to_path_buf(), source: e })?;
        if let Some(id) = entry.file_name().to_str().and_then(|n| n.strip_suffix(".scores.csv")) {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    if ids.is_empty() {
        return Err(EvalError::NoScores(scores_dir.to_path_buf()));
    }
    let mut series = Vec::with_capacity(ids.len());
    let mut labels = BTreeMap::new();
    for id in ids {
        let lp = labels_path(labels_dir, &id);
        if !lp.exists() {
            return Err(EvalError::MissingLabels { scene: id });
        }
        labels.insert(id.clone(), read_labels(&lp)?);
        let entries = read_scores(&maad_dataio::scores_path(scores_dir, &id))?;
        series.push(ScoreSeries { scene_id: id, entries });
    }
    report(&collect(&series, &labels)?)
}

/// [`evaluate_dirs`] followed by [`write_report`].
pub fn evaluate(scores_dir: &Path, labels_dir: &Path, out_dir: &Path) -> Result<MetricsReport> {
    let r = evaluate_dirs(scores_dir, labels_dir)?;
    write_report(&r, out_dir)?;
    Ok(r)
}
