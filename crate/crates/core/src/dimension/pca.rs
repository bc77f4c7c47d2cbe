use serde::Serialize;

use crate::ensemble::{RunFilter, SolutionEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{norm2_iter, singular_values_of_rows};

pub const DEFAULT_TAU_REL: f64 = 1e-3;

/// Singular values of the centered cloud below this multiple of the
/// uncentered cloud's Frobenius norm are solver noise, not directions.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-6;

/// Result of a PCA dimension count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub dimension: usize,
    /// Singular values of the centered data matrix, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Effective cutoff: the larger of `tau_rel * s_max` and the noise floor.
    pub cutoff: f64,
}

impl DimensionEstimate {
    /// Smallest kept over largest rejected singular value; `None` when either
    /// side is empty or the largest rejected value is exactly zero.
    pub fn gap_ratio(&self) -> Option<f64> {
        let d = self.dimension;
        if d == 0 || d >= self.singular_values.len() {
            return None;
        }
        let rejected = self.singular_values[d];
        (rejected > 0.0).then(|| self.singular_values[d - 1] / rejected)
    }
}

/// Number of singular values strictly above `tau_rel * s_max`.
pub fn dimension_from_spectrum(singular_values: &[f64], tau_rel: f64) -> usize {
    let s_max = singular_values.iter().copied().fold(0.0, f64::max);
    if s_max == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > tau_rel * s_max).count()
}

fn check_tau(tau_rel: f64) -> Result<()> {
    if !(tau_rel > 0.0 && tau_rel < 1.0) {
        return Err(Error::Config(format!("tau_rel must lie in (0, 1), got {tau_rel}")));
    }
    Ok(())
}

/// PCA of `points` (one row per sample). Points are centered; a singular
/// value counts when it exceeds both `tau_rel * s_max` and
/// `noise_floor * ||X||_F` of the uncentered points. Both thresholds scale
/// with the data, so the count is invariant under global scaling.
pub fn pca_estimate(points: &[&[f64]], tau_rel: f64, noise_floor: f64) -> Result<DimensionEstimate> {
    check_tau(tau_rel)?;
    if points.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: points.len() });
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::EmptyPatch);
    }
    let mut mean = vec![0.0; dim];
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        for (m, v) in mean.iter_mut().zip(*p) {
            *m += v;
        }
    }
    let count = points.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    let centered: Vec<Vec<f64>> =
        points.iter().map(|p| p.iter().zip(&mean).map(|(v, m)| v - m).collect()).collect();
    let rows: Vec<&[f64]> = centered.iter().map(Vec::as_slice).collect();
    let singular_values = singular_values_of_rows(&rows)?;
    let scale = norm2_iter(points.iter().flat_map(|p| p.iter().copied()));
    let s_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = (tau_rel * s_max).max(noise_floor * scale);
    let dimension = if s_max == 0.0 { 0 } else { singular_values.iter().filter(|&&s| s > cutoff).count() };
    Ok(DimensionEstimate { dimension, singular_values, cutoff })
}

/// PCA dimension with the default noise floor.
pub fn effective_dimension(points: &[&[f64]], tau_rel: f64) -> Result<usize> {
    Ok(pca_estimate(points, tau_rel, DEFAULT_NOISE_FLOOR)?.dimension)
}

/// PCA over whole solution vectors of the converged runs.
pub fn ensemble_dimension(ens: &SolutionEnsemble, tau_rel: f64) -> Result<DimensionEstimate> {
    let points: Vec<&[f64]> = ens.selected(RunFilter::ConvergedOnly).map(|r| r.values.as_slice()).collect();
    pca_estimate(&points, tau_rel, DEFAULT_NOISE_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectra_with_clear_gaps() {
        assert_eq!(dimension_from_spectrum(&[2.1e2, 1.4e-3, 4.0e-4], 1e-3), 1);
        assert_eq!(dimension_from_spectrum(&[1.1e3, 3.8e2, 2.7e-4], 1e-3), 2);
        assert_eq!(dimension_from_spectrum(&[0.0, 0.0], 1e-3), 0);
    }

    #[test]
    fn identical_points_have_dimension_zero() {
        let p = [1.0, 2.0, 3.0];
        assert_eq!(effective_dimension(&[&p, &p, &p], 1e-3).unwrap(), 0);
    }

    #[test]
    fn points_on_a_line_and_a_plane() {
        let line: Vec<Vec<f64>> = (0..10).map(|k| vec![k as f64, 2.0 * k as f64, 1.0]).collect();
        let rows: Vec<&[f64]> = line.iter().map(Vec::as_slice).collect();
        assert_eq!(effective_dimension(&rows, 1e-3).unwrap(), 1);
        let plane: Vec<Vec<f64>> = (0..20).map(|k| vec![(k % 4) as f64, (k / 4) as f64, 0.5]).collect();
        let rows: Vec<&[f64]> = plane.iter().map(Vec::as_slice).collect();
        let est = pca_estimate(&rows, 1e-3, DEFAULT_NOISE_FLOOR).unwrap();
        assert_eq!(est.dimension, 2);
        assert!(est.gap_ratio().is_none());
    }

    #[test]
    fn scale_invariance() {
        let pts: Vec<Vec<f64>> = (0..12).map(|k| vec![(k as f64).sin(), (k as f64 * 0.7).cos(), 1e-9 * k as f64]).collect();
        for scale in [1e-6, 1.0, 1e6] {
            let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * scale).collect()).collect();
            let rows: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
            assert_eq!(effective_dimension(&rows, 1e-3).unwrap(), 2);
        }
    }

    #[test]
    fn bad_inputs() {
        let p = [1.0];
        assert!(matches!(effective_dimension(&[&p], 1e-3), Err(Error::InsufficientData { .. })));
        assert!(matches!(effective_dimension(&[&p, &p], 1.5), Err(Error::Config(_))));
    }
}
