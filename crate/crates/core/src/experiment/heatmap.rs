//! PNG rendering of grid quantities.
//!
//! Rows of the matrix are time levels and columns are space indices. Time
//! increases upward in the image, so row 0 is drawn at the bottom. Colors
//! come from a piecewise-linear fit to the viridis map: the smallest value
//! maps to dark purple, the largest to yellow.

use std::path::Path;

use image::{ImageBuffer, Rgb};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorScale {
    #[default]
    Linear,
    /// `log10` of the values; non-positive entries take the smallest
    /// positive value's color.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatmapOptions {
    pub scale: ColorScale,
    /// Pixels per grid cell along each axis.
    pub cell_size: u32,
    /// Inputs whose max minus min is at or below this draw in the lowest
    /// color, so round-off noise on a flat field is not stretched.
    pub min_span: f64,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        Self { scale: ColorScale::Linear, cell_size: 8, min_span: 1e-12 }
    }
}

const VIRIDIS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

/// Color for `s` in `[0, 1]`.
pub fn colormap(s: f64) -> [u8; 3] {
    let s = s.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let k = (s.floor() as usize).min(VIRIDIS.len() - 2);
    let f = s - k as f64;
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = (VIRIDIS[k][c] + f * (VIRIDIS[k + 1][c] - VIRIDIS[k][c])).round() as u8;
    }
    out
}

/// Maps each value to `[0, 1]`; a constant input maps to 0 everywhere.
fn normalize(values: &[f64], scale: ColorScale, min_span: f64) -> Vec<f64> {
    let raw_lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let raw_hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if raw_hi - raw_lo <= min_span {
        return vec![0.0; values.len()];
    }
    let transformed: Vec<f64> = match scale {
        ColorScale::Linear => values.to_vec(),
        ColorScale::Log => {
            let floor = values.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
            if floor.is_infinite() {
                vec![0.0; values.len()]
            } else {
                values.iter().map(|&v| v.max(floor).log10()).collect()
            }
        }
    };
    let lo = transformed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = transformed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    transformed.iter().map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 }).collect()
}

/// Writes `values` (row-major, `n_rows` time levels by `n_cols` space
/// indices) as a PNG.
pub fn render_heatmap(values: &[f64], n_rows: usize, n_cols: usize, path: &Path, opts: &HeatmapOptions) -> Result<()> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::Config("heatmap needs a non-empty matrix".into()));
    }
    if values.len() != n_rows * n_cols {
        return Err(Error::DimensionMismatch { expected: n_rows * n_cols, got: values.len() });
    }
    let bad: Vec<usize> = values.iter().enumerate().filter(|(_, v)| !v.is_finite()).map(|(i, _)| i).collect();
    if !bad.is_empty() {
        return Err(Error::NonFinite(bad));
    }
    if !(opts.min_span >= 0.0) {
        return Err(Error::Config("heatmap.min_span must be >= 0".into()));
    }
    if opts.cell_size == 0 {
        return Err(Error::Config("heatmap.cell_size must be >= 1".into()));
    }
    let level = normalize(values, opts.scale, opts.min_span);
    let cs = opts.cell_size;
    let img = ImageBuffer::from_fn(n_cols as u32 * cs, n_rows as u32 * cs, |px, py| {
        let col = (px / cs) as usize;
        let row = n_rows - 1 - (py / cs) as usize;
        Rgb(colormap(level[row * n_cols + col]))
    });
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
