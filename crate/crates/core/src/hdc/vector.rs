//! Vector helpers shared by the encoder, inference and retraining.

use ndarray::{Array1, ArrayView1};

use crate::error::{HdcError, Result};

/// Scales `x` to unit Euclidean norm. The zero vector is returned unchanged.
pub fn normalize_l2(x: ArrayView1<f64>) -> Result<Array1<f64>> {
    if x.is_empty() {
        return Err(HdcError::InvalidInput(
            "cannot normalize an empty vector".into(),
        ));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(HdcError::InvalidInput(format!(
            "non-finite entry at position {i}"
        )));
    }
    let norm = norm_l2(x);
    if norm > 0.0 {
        Ok(x.mapv(|v| v / norm))
    } else {
        Ok(x.to_owned())
    }
}

pub(crate) fn norm_l2(x: ArrayView1<f64>) -> f64 {
    x.dot(&x).sqrt()
}

/// Cosine distance `1 - a·b / (|a| |b|)`, in `[0, 2]`.
///
/// A zero vector is treated as maximally non-similar: the distance is 1.
pub fn cosine_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(HdcError::shape(a.len(), b.len()));
    }
    Ok(distance_from_parts(a.dot(&b), norm_l2(a), norm_l2(b)))
}

/// Distance from a precomputed dot product and norms. Every distance in the
/// crate goes through here so cached and uncached paths agree bitwise.
#[inline]
pub(crate) fn distance_from_parts(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 1.0;
    }
    1.0 - (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
}
