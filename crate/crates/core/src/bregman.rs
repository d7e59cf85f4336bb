//! Bregman divergences used as the dissimilarity measure of the quantizer.
//!
//! Every Bregman divergence has the same weighted minimizer, the weighted
//! arithmetic mean, which is why the online learning rule only ever needs
//! first moments. Asymmetry is allowed: `d(x, y)` is generally not `d(y, x)`.

use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};

/// Default domain floor applied to generalized KL inputs.
pub const DEFAULT_KL_FLOOR: f64 = 1e-12;

/// The divergence family member in use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceKind {
    /// `sum_j (x_j - y_j)^2`
    #[default]
    SquaredEuclidean,
    /// `sum_j [x_j ln(x_j / y_j) - x_j + y_j]`, entries clamped to `floor` first.
    GeneralizedKl { floor: f64 },
}

impl DivergenceKind {
    pub fn generalized_kl() -> Self {
        Self::GeneralizedKl {
            floor: DEFAULT_KL_FLOOR,
        }
    }

    /// Evaluates `d(x, y)` without validating the inputs.
    ///
    /// Hot-path version used by the learners; callers guarantee equal
    /// dimensions and finite entries.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match *self {
            Self::SquaredEuclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum(),
            Self::GeneralizedKl { floor } => x
                .iter()
                .zip(y)
                .map(|(&a, &b)| {
                    let a = a.max(floor);
                    let b = b.max(floor);
                    a * (a / b).ln() - a + b
                })
                .sum::<f64>()
                // rounding can leave tiny negatives on identical inputs
                .max(0.0),
        }
    }

    /// Checked evaluation of `d(x, y)`.
    pub fn divergence(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(OdaError::usage(format!(
                "dimension mismatch: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(OdaError::usage("non-finite input to divergence"));
        }
        if let Self::GeneralizedKl { floor } = *self {
            if !(floor > 0.0) {
                return Err(OdaError::usage("generalized KL floor must be positive"));
            }
        }
        Ok(self.eval(x, y))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SquaredEuclidean => "squared_euclidean",
            Self::GeneralizedKl { .. } => "generalized_kl",
        }
    }
}

/// Convenience wrapper around [`DivergenceKind::divergence`].
pub fn divergence(kind: DivergenceKind, x: &[f64], y: &[f64]) -> Result<f64> {
    kind.divergence(x, y)
}

/// Weighted mean `sum_i w_i x_i / sum_i w_i`.
///
/// This is the minimizer of `sum_i w_i d(x_i, y)` over `y` for every Bregman
/// divergence, so no divergence argument is needed.
pub fn weighted_centroid<P: AsRef<[f64]>>(points: &[P], weights: &[f64]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(OdaError::usage("weighted_centroid needs at least one point"));
    }
    if points.len() != weights.len() {
        return Err(OdaError::usage(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let dim = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != dim) {
        return Err(OdaError::usage("points have differing dimensions"));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(OdaError::usage("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(OdaError::Degenerate("all centroid weights are zero".into()));
    }
    let mut out = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(p.as_ref()) {
            *o += w * v;
        }
    }
    out.iter_mut().for_each(|o| *o /= total);
    Ok(out)
}
