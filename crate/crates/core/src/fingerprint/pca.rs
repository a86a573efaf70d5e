use serde::{Deserialize, Serialize};

use super::linalg::symmetric_eigen;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// Non-increasing, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Unit directions, one per eigenvalue.
    pub components: Vec<Vec<f64>>,
    pub explained_ratios: Vec<f64>,
    /// Centered inputs in component coordinates, one row per input.
    pub projections: Vec<Vec<f64>>,
}

impl PcaResult {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Flips a direction so its coordinates sum to a positive value; ties go to
/// the entry of largest magnitude. On fingerprints this puts cooperative
/// strategies on the positive side of the first axis.
fn orient(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0) < 0.0
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Extends `basis` with a unit vector orthogonal to all of its members.
fn complete(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best = Vec::new();
    let mut best_norm = -1.0;
    for axis in 0..dim {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > best_norm {
            best_norm = norm;
            best = v;
        }
        if norm > 0.5 {
            break;
        }
    }
    normalize(&mut best);
    best
}

/// Principal components of the sample covariance (divisor `count - 1`).
///
/// Keeps `min(count - 1, dim)` components. When samples are fewer than
/// dimensions the decomposition runs on the Gram matrix instead, which has
/// the same nonzero spectrum.
#[allow(clippy::needless_range_loop)]
pub fn pca(vectors: &[Vec<f64>]) -> Result<PcaResult> {
    let m = vectors.len();
    if m < 2 {
        return Err(Error::params(format!("pca needs at least 2 vectors, got {m}")));
    }
    let d = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::LengthMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    if d == 0 {
        return Err(Error::params("pca needs vectors of positive dimension"));
    }
    let mut mean = vec![0.0; d];
    for v in vectors {
        mean.iter_mut().zip(v).for_each(|(a, x)| *a += x);
    }
    mean.iter_mut().for_each(|a| *a /= m as f64);
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, a)| x - a).collect())
        .collect();
    let keep = (m - 1).min(d);
    let denom = (m - 1) as f64;

    let (mut eigenvalues, mut components) = if d < m {
        let mut cov = vec![vec![0.0; d]; d];
        for row in &centered {
            for i in 0..d {
                for j in i..d {
                    cov[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                cov[i][j] /= denom;
                cov[j][i] = cov[i][j];
            }
        }
        let (vals, vecs) = symmetric_eigen(&cov);
        (vals, vecs)
    } else {
        let gram: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| dot(&centered[i], &centered[j]) / denom).collect())
            .collect();
        let (vals, us) = symmetric_eigen(&gram);
        let tol = vals.first().copied().unwrap_or(0.0).abs() * 1e-10;
        let mut comps: Vec<Vec<f64>> = Vec::with_capacity(keep);
        for (l, u) in vals.iter().zip(&us).take(keep) {
            let mut v = if *l > tol {
                let mut v = vec![0.0; d];
                for (row, w) in centered.iter().zip(u) {
                    v.iter_mut().zip(row).for_each(|(a, x)| *a += w * x);
                }
                normalize(&mut v);
                v
            } else {
                Vec::new()
            };
            if v.is_empty() {
                v = complete(&comps, d);
            }
            comps.push(v);
        }
        (vals, comps)
    };
    eigenvalues.truncate(keep);
    components.truncate(keep);
    eigenvalues.iter_mut().for_each(|l| *l = l.max(0.0));
    components.iter_mut().for_each(|c| orient(c));

    let total: f64 = eigenvalues.iter().sum();
    let explained_ratios = if total > 0.0 {
        eigenvalues.iter().map(|l| l / total).collect()
    } else {
        vec![0.0; eigenvalues.len()]
    };
    let projections = centered
        .iter()
        .map(|row| components.iter().map(|c| dot(c, row)).collect())
        .collect();
    Ok(PcaResult {
        mean,
        eigenvalues,
        components,
        explained_ratios,
        projections,
    })
}
