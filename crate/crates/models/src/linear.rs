use maad_core::Point;

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean per-step Euclidean distance between two aligned sequences; the
/// anomaly score of reconstruction models.
pub fn mean_distance(actual: &[Point], recon: &[Point]) -> f64 {
    assert_eq!(actual.len(), recon.len(), "sequences must be aligned");
    if actual.is_empty() {
        return 0.0;
    }
    actual.iter().zip(recon).map(|(&a, &b)| dist(a, b)).sum::<f64>() / actual.len() as f64
}

/// Mean per-step squared Euclidean distance; the training loss.
pub fn recon_loss(actual: &[Point], recon: &[Point]) -> f64 {
    assert_eq!(actual.len(), recon.len(), "sequences must be aligned");
    if actual.is_empty() {
        return 0.0;
    }
    actual.iter().zip(recon).map(|(&a, &b)| dist(a, b).powi(2)).sum::<f64>() / actual.len() as f64
}

/// Constant-velocity extrapolation from the first two steps.
pub fn cvm_reconstruct(positions: &[Point]) -> (Vec<Point>, f64) {
    let Some(&s0) = positions.first() else { return (Vec::new(), 0.0) };
    let s1 = positions.get(1).copied().unwrap_or(s0);
    let v = [s1[0] - s0[0], s1[1] - s0[1]];
    let recon: Vec<Point> = (0..positions.len()).map(|t| [s0[0] + t as f64 * v[0], s0[1] + t as f64 * v[1]]).collect();
    let alpha = mean_distance(positions, &recon);
    (recon, alpha)
}

/// Equidistant samples on the segment between the first and last step.
pub fn lti_reconstruct(positions: &[Point]) -> (Vec<Point>, f64) {
    let n = positions.len();
    if n < 2 {
        return (positions.to_vec(), 0.0);
    }
    let (a, b) = (positions[0], positions[n - 1]);
    let recon: Vec<Point> = (0..n)
        .map(|t| {
            let u = t as f64 / (n - 1) as f64;
            [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]
        })
        .collect();
    let alpha = mean_distance(positions, &recon);
    (recon, alpha)
}
