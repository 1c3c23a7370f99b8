//! Three points on the probability triangle whose Kullback–Leibler Čech and
//! Rips radii drift apart as the points approach the corners.
//!
//! The points are `x_1 = (½−ε, ½−ε, 2ε)` and its cyclic shifts. Balls are the
//! dual Kullback–Leibler balls `{y : KL(y‖x_j) ≤ r}` intersected with the
//! triangle, so the radius of a set of points is
//! `min_y max_j KL(y‖x_j)` over the triangle. That min–max is computed through
//! its concave dual
//! `max_{λ ∈ Δ} −ln Σ_i exp(Σ_j λ_j ln x_{j,i})`,
//! by enumerating faces of the λ-simplex and running Newton's method on each.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Radii of one demo configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoInterleaving {
    pub epsilon: f64,
    /// Radius at which any two of the balls meet (all pairs are equal).
    pub pairwise: f64,
    /// Radius at which all three balls meet.
    pub triple: f64,
}

impl NoInterleaving {
    pub fn ratio(&self) -> f64 {
        self.triple / self.pairwise
    }
}

/// The demo configuration for `0 < ε < 1/6`.
pub fn demo_points(epsilon: f64) -> Result<[[f64; 3]; 3]> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 6.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1/6), got {epsilon}"
        )));
    }
    let a = 0.5 - epsilon;
    let b = 2.0 * epsilon;
    Ok([[a, a, b], [b, a, a], [a, b, a]])
}

/// Pairwise (Rips) and triple (Čech) radii of the demo configuration.
pub fn no_interleaving_demo(epsilon: f64) -> Result<NoInterleaving> {
    let pts = demo_points(epsilon)?;
    let rows: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let mut pairwise: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            pairwise = pairwise.max(simplex_kl_radius(&[rows[i], rows[j]])?);
        }
    }
    let triple = simplex_kl_radius(&rows)?;
    Ok(NoInterleaving {
        epsilon,
        pairwise,
        triple,
    })
}

/// `min_{y ∈ Δ} max_j KL(y‖x_j)` for points `x_j` in the open probability simplex.
pub fn simplex_kl_radius(points: &[&[f64]]) -> Result<f64> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidArgument("no points".into()));
    };
    let d = first.len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        if p.iter().any(|&v| !(v > 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "{p:?} is not a point of the open probability simplex"
            )));
        }
    }
    if points.len() > 16 {
        return Err(Error::InvalidArgument("face enumeration supports at most 16 points".into()));
    }
    let logs: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|v| v.ln()).collect()).collect();

    let m = points.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << m) {
        let face: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        if let Some(value) = face_maximum(&logs, &face) {
            best = best.max(value);
        }
    }
    // Every vertex of the λ-simplex is feasible with value 0, so `best ≥ 0`.
    Ok(best.max(0.0))
}

fn log_sum_exp(u: &[f64]) -> f64 {
    let m = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + u.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Stationary value of the dual objective on the relative interior of one
/// face, or `None` if the stationary point leaves the face.
fn face_maximum(logs: &[Vec<f64>], face: &[usize]) -> Option<f64> {
    let d = logs[0].len();
    let base = &logs[face[0]];
    let k = face.len() - 1;
    if k == 0 {
        return Some(-log_sum_exp(base));
    }
    let dirs: Vec<Vec<f64>> = face[1..]
        .iter()
        .map(|&j| (0..d).map(|i| logs[j][i] - base[i]).collect())
        .collect();
    let eval = |mu: &[f64]| -> (f64, Vec<f64>) {
        let u: Vec<f64> = (0..d)
            .map(|i| base[i] + dirs.iter().zip(mu).map(|(c, m)| m * c[i]).sum::<f64>())
            .collect();
        let lse = log_sum_exp(&u);
        let w: Vec<f64> = u.iter().map(|v| (v - lse).exp()).collect();
        (-lse, w)
    };

    let mut mu = vec![1.0 / (k + 1) as f64; k];
    let (mut value, mut w) = eval(&mu);
    for _ in 0..200 {
        let mean: Vec<f64> = dirs.iter().map(|c| c.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
        let grad = DVector::from_iterator(k, mean.iter().map(|m| -m));
        if grad.amax() <= 1e-14 {
            break;
        }
        let cov = DMatrix::from_fn(k, k, |s, t| {
            (0..d).map(|i| w[i] * dirs[s][i] * dirs[t][i]).sum::<f64>() - mean[s] * mean[t]
        });
        let step = cov.cholesky()?.solve(&grad);
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = mu.iter().zip(step.iter()).map(|(m, s)| m + alpha * s).collect();
            let (tv, tw) = eval(&trial);
            if tv >= value + 1e-4 * alpha * slope - 1e-15 * (1.0 + value.abs()) {
                mu = trial;
                value = tv;
                w = tw;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                return None;
            }
        }
    }
    let lead = 1.0 - mu.iter().sum::<f64>();
    let feasible = lead >= -1e-12 && mu.iter().all(|&m| m >= -1e-12);
    feasible.then_some(value)
}
