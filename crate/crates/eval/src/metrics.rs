use serde::{Deserialize, Serialize};

use crate::{EvalError, Result};

/// One scored, labeled frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub score: f64,
    pub abnormal: bool,
}

impl Pair {
    pub fn new(score: f64, abnormal: bool) -> Self {
        Pair { score, abnormal }
    }
}

/// Which label counts as the positive class of a precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positive {
    /// High scores flag abnormal frames.
    Abnormal,
    /// Low scores flag normal frames.
    Normal,
}

/// Cumulative (true positive, false positive) counts after each block of
/// tied scores, sweeping the threshold from the highest score down.
struct Sweep {
    points: Vec<(usize, usize)>,
    positives: usize,
    negatives: usize,
}

fn sweep(pairs: &[Pair], positive: Positive) -> Sweep {
    let mut keyed: Vec<(f64, bool)> = pairs
        .iter()
        .map(|p| match positive {
            Positive::Abnormal => (p.score, p.abnormal),
            Positive::Normal => (-p.score, !p.abnormal),
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    let positives = keyed.iter().filter(|k| k.1).count();
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (i, &(score, pos)) in keyed.iter().enumerate() {
        if pos {
            tp += 1;
        } else {
            fp += 1;
        }
        let block_ends = keyed.get(i + 1).is_none_or(|next| next.0.total_cmp(&score).is_ne());
        if block_ends {
            points.push((tp, fp));
        }
    }
    Sweep { points, positives, negatives: keyed.len() - positives }
}

fn require_both(s: &Sweep) -> Result<()> {
    if s.positives == 0 || s.negatives == 0 {
        return Err(EvalError::SingleClass { positives: s.positives, negatives: s.negatives });
    }
    Ok(())
}

/// Area under the ROC curve with abnormal as the positive class, by
/// trapezoidal integration over tie blocks.
pub fn auroc(pairs: &[Pair]) -> Result<f64> {
    let s = sweep(pairs, Positive::Abnormal);
    require_both(&s)?;
    let (p, n) = (s.positives as f64, s.negatives as f64);
    let mut area = 0.0;
    let (mut tp0, mut fp0) = (0usize, 0usize);
    for &(tp, fp) in &s.points {
        area += (fp - fp0) as f64 * (tp + tp0) as f64;
        (tp0, fp0) = (tp, fp);
    }
    Ok(area / (2.0 * p * n))
}

/// Average precision: sum over tie blocks of recall gain times precision.
pub fn aupr(pairs: &[Pair], positive: Positive) -> Result<f64> {
    let s = sweep(pairs, positive);
    if s.positives == 0 {
        return Err(EvalError::NoPositives);
    }
    let p = s.positives as f64;
    let mut ap = 0.0;
    let mut tp0 = 0;
    for &(tp, fp) in &s.points {
        if tp > tp0 {
            ap += (tp - tp0) as f64 / p * (tp as f64 / (tp + fp) as f64);
        }
        tp0 = tp;
    }
    Ok(ap)
}

/// Smallest false positive rate over thresholds whose true positive rate
/// reaches at least 95 %.
pub fn fpr_at_95_tpr(pairs: &[Pair]) -> Result<f64> {
    let s = sweep(pairs, Positive::Abnormal);
    require_both(&s)?;
    let &(_, fp) = s.points.iter().find(|&&(tp, _)| tp * 100 >= 95 * s.positives).expect("the last block reaches full recall");
    Ok(fp as f64 / s.negatives as f64)
}

/// `(recall, precision)` after every tie block.
pub fn pr_curve(pairs: &[Pair], positive: Positive) -> Vec<(f64, f64)> {
    let s = sweep(pairs, positive);
    let p = s.positives.max(1) as f64;
    s.points.iter().map(|&(tp, fp)| (tp as f64 / p, tp as f64 / (tp + fp) as f64)).collect()
}

/// `(fpr, tpr)` from the origin through every tie block.
pub fn roc_curve(pairs: &[Pair]) -> Vec<(f64, f64)> {
    let s = sweep(pairs, Positive::Abnormal);
    let (p, n) = (s.positives.max(1) as f64, s.negatives.max(1) as f64);
    std::iter::once((0.0, 0.0)).chain(s.points.iter().map(|&(tp, fp)| (fp as f64 / n, tp as f64 / p))).collect()
}

/// Lowest score threshold of the block with the best F1 for abnormal frames.
pub fn best_f1_threshold(pairs: &[Pair]) -> Option<f64> {
    let mut sorted: Vec<f64> = pairs.iter().map(|p| p.score).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup_by(|a, b| a.total_cmp(b).is_eq());
    let s = sweep(pairs, Positive::Abnormal);
    if s.positives == 0 {
        return None;
    }
    let mut best = (f64::NEG_INFINITY, None);
    for (&(tp, fp), &threshold) in s.points.iter().zip(&sorted) {
        let f1 = 2.0 * tp as f64 / (2 * tp + fp + (s.positives - tp)) as f64;
        if f1 > best.0 {
            best = (f1, Some(threshold));
        }
    }
    best.1
}
