use crate::{ModelError, Result};

fn squared_distance(z: &[f64], c: &[f64]) -> f64 {
    assert_eq!(z.len(), c.len(), "latent and center widths differ");
    z.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Distance of a latent code from the center.
pub fn dsvdd_score(z: &[f64], center: &[f64]) -> f64 {
    squared_distance(z, center).sqrt()
}

/// Mean squared distance of a batch of latent codes from the center.
pub fn dsvdd_loss(batch: &[Vec<f64>], center: Option<&[f64]>) -> Result<f64> {
    let c = center.ok_or(ModelError::CenterUninitialized)?;
    if batch.is_empty() {
        return Ok(0.0);
    }
    Ok(batch.iter().map(|z| squared_distance(z, c)).sum::<f64>() / batch.len() as f64)
}

/// Mean of the latent codes.
pub(crate) fn mean_code(codes: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = codes.first().ok_or(ModelError::EmptyTrainingSet)?;
    let mut c = vec![0.0; first.len()];
    for z in codes {
        c.iter_mut().zip(z).for_each(|(a, b)| *a += b);
    }
    let n = codes.len() as f64;
    c.iter_mut().for_each(|a| *a /= n);
    Ok(c)
}
