use serde::Serialize;

use super::patch::{extract_patch, PatchSpec};
use super::pca::{pca_estimate, DEFAULT_NOISE_FLOOR};
use crate::discretization::GridSpec;
use crate::ensemble::SolutionEnsemble;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSample {
    pub r: f64,
    pub perimeter: f64,
    pub n_points: usize,
    pub dimension: usize,
}

/// Patch dimensions at several radii around one center and the
/// least-squares line of dimension against perimeter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub center: (f64, f64),
    pub samples: Vec<ScalingSample>,
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("line fit needs at least two distinct abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// `center` is `(x*, t*)` in grid-index units; see [`PatchSpec`].
pub fn perimeter_scaling(
    ens: &SolutionEnsemble,
    grid: &GridSpec,
    center: (f64, f64),
    radii: &[f64],
    tau_rel: f64,
) -> Result<ScalingFit> {
    if radii.len() < 3 {
        return Err(Error::Config(format!("perimeter scaling needs >= 3 radii, got {}", radii.len())));
    }
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        let patch = PatchSpec::new(center.0, center.1, r)?;
        let cloud = extract_patch(ens, grid, &patch)?;
        let est = pca_estimate(&cloud.rows(), tau_rel, DEFAULT_NOISE_FLOOR)?;
        samples.push(ScalingSample { r, perimeter: patch.perimeter(), n_points: cloud.feature_dim(), dimension: est.dimension });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.perimeter).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.dimension as f64).collect();
    let (slope, intercept) = fit_line(&xs, &ys)?;
    Ok(ScalingFit { center, samples, slope, intercept })
}
