use serde::{Deserialize, Serialize};

use crate::{OneClassError, Result};

/// `exp(-gamma * |u - v|^2)`.
pub fn gaussian_kernel(u: &[f64], v: &[f64], gamma: f64) -> f64 {
    assert_eq!(u.len(), v.len(), "kernel arguments differ in width");
    let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Per-dimension affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Statistics of `features`; constant dimensions keep scale 1.
    pub fn fit(features: &[Vec<f64>]) -> Self {
        let dim = features.first().map_or(0, Vec::len);
        let n = features.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for f in features {
            mean.iter_mut().zip(f).for_each(|(m, x)| *m += x / n);
        }
        let mut var = vec![0.0; dim];
        for f in features {
            var.iter_mut().zip(f.iter().zip(&mean)).for_each(|(v, (x, m))| *v += (x - m) * (x - m) / n);
        }
        let scale = var.into_iter().map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 }).collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter().zip(&self.scale)).map(|(v, (m, s))| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once the maximal KKT violation falls to this value.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tolerance: 1e-6, max_iterations: 100_000 }
    }
}

/// A fitted one-class SVM. Support vectors are kept standardized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcSvmModel {
    pub gamma: f64,
    pub nu: f64,
    pub standardizer: Standardizer,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coeffs: Vec<f64>,
    pub rho: f64,
    /// Training set size; fixes the box bound `1 / (nu * n)`.
    pub n_train: usize,
    /// Maximal KKT violation at termination.
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl OcSvmModel {
    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.nu * self.n_train as f64)
    }

    /// `sum_j a_j k(sv_j, x)` on a raw feature.
    pub fn decision(&self, feature: &[f64]) -> f64 {
        let x = self.standardizer.apply(feature);
        self.support_vectors.iter().zip(&self.dual_coeffs).map(|(sv, a)| a * gaussian_kernel(sv, &x, self.gamma)).sum()
    }

    /// Anomaly score `rho - decision`: positive outside the boundary.
    pub fn score(&self, feature: &[f64]) -> f64 {
        self.rho - self.decision(feature)
    }

    /// Largest violation of `sum a = 1` and `0 <= a <= 1 / (nu n)`.
    pub fn feasibility_residual(&self) -> f64 {
        let c = self.upper_bound();
        let sum: f64 = self.dual_coeffs.iter().sum();
        self.dual_coeffs.iter().map(|&a| (-a).max(a - c).max(0.0)).fold((sum - 1.0).abs(), f64::max)
    }
}

fn check(features: &[Vec<f64>], gamma: f64, nu: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(OneClassError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(OneClassError::InvalidParameter(format!("nu must lie in (0, 1], got {nu}")));
    }
    let dim = features.first().ok_or(OneClassError::EmptyTrainingSet)?.len();
    for (index, f) in features.iter().enumerate() {
        if f.len() != dim {
            return Err(OneClassError::DimensionMismatch { expected: dim, found: f.len() });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(OneClassError::NonFinite { index });
        }
    }
    Ok(dim)
}

pub fn fit_ocsvm(features: &[Vec<f64>], gamma: f64, nu: f64) -> Result<OcSvmModel> {
    fit_ocsvm_with(features, gamma, nu, &SolverConfig::default())
}

/// Solves `min 1/2 a'Ka` subject to `sum a = 1`, `0 <= a <= 1 / (nu n)` by
/// two-coordinate descent, picking the pair of maximal KKT violation with
/// second-order gain.
pub fn fit_ocsvm_with(features: &[Vec<f64>], gamma: f64, nu: f64, config: &SolverConfig) -> Result<OcSvmModel> {
    check(features, gamma, nu)?;
    let standardizer = Standardizer::fit(features);
    let x: Vec<Vec<f64>> = features.iter().map(|f| standardizer.apply(f)).collect();
    let n = x.len();
    let c = 1.0 / (nu * n as f64);

    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = gaussian_kernel(&x[i], &x[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }

    // fill the first coordinates to the bound, the next with the remainder
    let mut alpha = vec![0.0; n];
    let mut left = 1.0;
    for a in alpha.iter_mut() {
        if left <= 0.0 {
            break;
        }
        *a = c.min(left);
        left -= *a;
    }
    let mut grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[i * n + j] * alpha[j]).sum()).collect();

    let mut iterations = 0;
    let residual = loop {
        // i may grow, j may shrink
        let mut i = usize::MAX;
        let mut g_min = f64::INFINITY;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if alpha[t] < c && grad[t] < g_min {
                g_min = grad[t];
                i = t;
            }
            if alpha[t] > 0.0 && grad[t] > g_max {
                g_max = grad[t];
            }
        }
        let violation = (g_max - g_min).max(0.0);
        if violation <= config.tolerance || i == usize::MAX {
            break violation;
        }
        if iterations >= config.max_iterations {
            return Err(OneClassError::SolverDivergence { iterations, residual: violation });
        }
        let mut j = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for t in 0..n {
            if alpha[t] > 0.0 && grad[t] > g_min {
                let eta = (k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t]).max(1e-12);
                let gain = (grad[t] - g_min).powi(2) / eta;
                if gain > best_gain {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        let eta = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(1e-12);
        let step = ((grad[j] - grad[i]) / eta).min(c - alpha[i]).min(alpha[j]);
        if step == c - alpha[i] {
            alpha[j] -= step;
            alpha[i] = c;
        } else if step == alpha[j] {
            alpha[i] += step;
            alpha[j] = 0.0;
        } else {
            alpha[i] += step;
            alpha[j] -= step;
        }
        for t in 0..n {
            grad[t] += step * (k[t * n + i] - k[t * n + j]);
        }
        iterations += 1;
    };

    let free: Vec<f64> = (0..n).filter(|&t| alpha[t] > 0.0 && alpha[t] < c).map(|t| grad[t]).collect();
    let rho = if free.is_empty() {
        // no margin vector: midpoint of the feasible offset interval
        let lo = (0..n).filter(|&t| alpha[t] > 0.0).map(|t| grad[t]).fold(f64::NEG_INFINITY, f64::max);
        let hi = (0..n).filter(|&t| alpha[t] < c).map(|t| grad[t]).fold(f64::INFINITY, f64::min);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo + hi) / 2.0,
            (true, false) => lo,
            _ => hi,
        }
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };

    let keep: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    log::debug!("ocsvm gamma {gamma} nu {nu}: {iterations} iterations, {} support vectors, rho {rho}", keep.len());
    Ok(OcSvmModel {
        gamma,
        nu,
        standardizer,
        support_vectors: keep.iter().map(|&t| x[t].clone()).collect(),
        dual_coeffs: keep.iter().map(|&t| alpha[t]).collect(),
        rho,
        n_train: n,
        kkt_residual: residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_hand_cases() {
        assert_eq!(gaussian_kernel(&[1.0, 2.0], &[1.0, 2.0], 0.7), 1.0);
        let v = gaussian_kernel(&[0.0, 0.0], &[1.0, 1.0], 0.5);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(gaussian_kernel(&[0.3, -2.0], &[1.0, 4.0], 0.2), gaussian_kernel(&[1.0, 4.0], &[0.3, -2.0], 0.2));
    }

    #[test]
    fn single_point_scores_zero_on_itself() {
        let m = fit_ocsvm(&[vec![2.0, -1.0]], 0.5, 0.1).unwrap();
        assert_eq!(m.dual_coeffs, vec![1.0]);
        assert_eq!(m.rho, 1.0);
        assert_eq!(m.score(&[2.0, -1.0]), 0.0);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(fit_ocsvm(&x, 0.0, 0.1), Err(OneClassError::InvalidParameter(_))));
        assert!(matches!(fit_ocsvm(&x, 0.1, 1.5), Err(OneClassError::InvalidParameter(_))));
        assert!(matches!(fit_ocsvm(&[], 0.1, 0.1), Err(OneClassError::EmptyTrainingSet)));
        assert!(matches!(fit_ocsvm(&[vec![0.0], vec![f64::NAN]], 0.1, 0.1), Err(OneClassError::NonFinite { index: 1 })));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos()]).collect();
        let err = fit_ocsvm_with(&x, 0.5, 0.2, &SolverConfig { tolerance: 1e-12, max_iterations: 1 }).unwrap_err();
        assert!(matches!(err, OneClassError::SolverDivergence { iterations: 1, residual } if residual > 0.0));
    }
}
