use maad_eval::{aupr, Pair, Positive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{fit_ocsvm, OcSvmModel, OneClassError, Result};

pub const DEFAULT_NUS: [f64; 2] = [0.01, 0.1];

/// `2^-10, ..., 2^-1`.
pub fn default_gammas() -> Vec<f64> {
    (1..=10).rev().map(|e| 2f64.powi(-e)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub gamma: f64,
    pub nu: f64,
    /// AUPR-Abnormal on the labeled subset.
    pub aupr: f64,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub best: Candidate,
    /// Every candidate in search order: gamma ascending, then nu ascending.
    pub candidates: Vec<Candidate>,
    /// The model fitted with the best candidate.
    pub model: OcSvmModel,
}

/// Seeded uniform choice of `round(frac * n)` indices (at least one), sorted.
pub fn select_subset(n: usize, frac: f64, seed: u64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let k = ((frac * n as f64).round() as usize).clamp(1, n);
    let mut idx = rand::seq::index::sample(&mut ChaCha8Rng::seed_from_u64(seed), n, k).into_vec();
    idx.sort_unstable();
    idx
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Fits one model per `(gamma, nu)` on `train` and keeps the one with the
/// highest AUPR-Abnormal on `subset` (`true` = abnormal). Ties go to the
/// smaller gamma, then the smaller nu.
pub fn grid_search(train: &[Vec<f64>], subset: &[(Vec<f64>, bool)], gammas: &[f64], nus: &[f64]) -> Result<GridResult> {
    let positives = subset.iter().filter(|s| s.1).count();
    let negatives = subset.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(OneClassError::DegenerateLabels { positives, negatives });
    }
    let mut candidates = Vec::new();
    let mut best: Option<(Candidate, OcSvmModel)> = None;
    for &gamma in &sorted(gammas) {
        for &nu in &sorted(nus) {
            let model = fit_ocsvm(train, gamma, nu)?;
            let pairs: Vec<Pair> = subset.iter().map(|(f, abnormal)| Pair::new(model.score(f), *abnormal)).collect();
            let cand = Candidate { gamma, nu, aupr: aupr(&pairs, Positive::Abnormal)? };
            log::info!("ocsvm gamma {gamma:e} nu {nu}: aupr {:.4}", cand.aupr);
            candidates.push(cand);
            if best.as_ref().is_none_or(|(b, _)| cand.aupr > b.aupr) {
                best = Some((cand, model));
            }
        }
    }
    let (best, model) = best.ok_or_else(|| OneClassError::InvalidParameter("empty grid".into()))?;
    Ok(GridResult { best, candidates, model })
}
