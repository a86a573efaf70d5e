use super::pca::pca;
use crate::error::{Error, Result};

fn check_dims(vectors: &[Vec<f64>], what: &str, min: usize) -> Result<usize> {
    if vectors.len() < min {
        return Err(Error::params(format!(
            "{what} needs at least {min} vectors, got {}",
            vectors.len()
        )));
    }
    let d = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::LengthMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    if d == 0 {
        return Err(Error::params(format!("{what} needs vectors of positive dimension")));
    }
    Ok(d)
}

/// Mean pairwise Euclidean distance divided by `sqrt(d / 6)`, the root mean
/// squared distance between independent uniform vectors in `[0, 1]^d`.
pub fn mpd(vectors: &[Vec<f64>]) -> Result<f64> {
    let d = check_dims(vectors, "mpd", 2)?;
    let m = vectors.len();
    let mut sum = 0.0;
    for i in 0..m {
        let a = &vectors[i];
        let row: f64 = vectors[i + 1..]
            .iter()
            .map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .sum();
        sum += row;
    }
    let pairs = (m * (m - 1) / 2) as f64;
    Ok(sum / pairs / (d as f64 / 6.0).sqrt())
}

fn centroid_and_spread(vectors: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let m = vectors.len() as f64;
    let d = vectors[0].len();
    let mut c = vec![0.0; d];
    for v in vectors {
        c.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    c.iter_mut().for_each(|a| *a /= m);
    let spread = vectors
        .iter()
        .map(|v| v.iter().zip(&c).map(|(x, a)| (x - a) * (x - a)).sum::<f64>())
        .sum::<f64>()
        / m;
    (c, spread)
}

/// Centroid distance over the pooled spread `sqrt((V_a + V_b) / 2)`, where
/// `V` is the mean squared distance of a set's members to its centroid.
pub fn cohens_d(set_a: &[Vec<f64>], set_b: &[Vec<f64>]) -> Result<f64> {
    let da = check_dims(set_a, "cohens_d", 2)?;
    let db = check_dims(set_b, "cohens_d", 2)?;
    if da != db {
        return Err(Error::LengthMismatch {
            expected: da,
            actual: db,
        });
    }
    let (ca, va) = centroid_and_spread(set_a);
    let (cb, vb) = centroid_and_spread(set_b);
    if va == 0.0 && vb == 0.0 {
        return Err(Error::Undefined("undefined separation: both sets are point masses".into()));
    }
    let dist = ca.iter().zip(&cb).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(dist / ((va + vb) / 2.0).sqrt())
}

/// `(sum l)^2 / sum l^2`.
pub fn participation_ratio(eigenvalues: &[f64]) -> Result<f64> {
    if let Some(bad) = eigenvalues.iter().find(|l| l.is_nan() || **l < 0.0 || l.is_infinite()) {
        return Err(Error::params(format!("eigenvalue {bad} is negative or not finite")));
    }
    let s: f64 = eigenvalues.iter().sum();
    let s2: f64 = eigenvalues.iter().map(|l| l * l).sum();
    if s2 == 0.0 {
        return Err(Error::Undefined("participation ratio of an all-zero spectrum".into()));
    }
    Ok(s * s / s2)
}

/// Covariance spectrum of one set, for [`participation_ratio`].
pub fn set_eigenvalues(vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    Ok(pca(vectors)?.eigenvalues)
}
