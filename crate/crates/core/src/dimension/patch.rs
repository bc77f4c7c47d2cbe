use serde::{Deserialize, Serialize};

use crate::discretization::GridSpec;
use crate::ensemble::{RunFilter, SolutionEnsemble};
use crate::error::{Error, Result};
use crate::linalg::GridNode;

/// Rhomb with vertices `(x* +- R, t*)` and `(x*, t* +- R)`, `R = sqrt(2) r`,
/// in grid-index units (`x` = space index, `t` = time index). Its sides
/// follow the unit-slope characteristics; boundary points are excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub x_star: f64,
    pub t_star: f64,
    pub r: f64,
}

impl PatchSpec {
    pub fn new(x_star: f64, t_star: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !x_star.is_finite() || !t_star.is_finite() {
            return Err(Error::Config(format!("patch needs a finite center and r > 0, got r = {r}")));
        }
        Ok(Self { x_star, t_star, r })
    }

    pub fn half_diagonal(&self) -> f64 {
        (2.0 * self.r * self.r).sqrt()
    }

    /// Rhomb perimeter `8 r`.
    pub fn perimeter(&self) -> f64 {
        8.0 * self.r
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        let big_r = self.half_diagonal();
        let (xs, ts) = (self.x_star, self.t_star);
        t < x - (xs - big_r) + ts && t > (xs - big_r) - x + ts && t > x - (xs + big_r) + ts && t < (xs + big_r) - x + ts
    }
}

/// Grid nodes strictly inside the rhomb, ordered by (time, space).
pub fn patch_nodes(grid: &GridSpec, patch: &PatchSpec) -> Vec<GridNode> {
    let big_r = patch.half_diagonal();
    let t_lo = (patch.t_star - big_r).floor().max(0.0) as usize;
    let t_hi = ((patch.t_star + big_r).ceil().max(0.0) as usize).min(grid.n_t - 1);
    let x_lo = (patch.x_star - big_r).floor().max(0.0) as usize;
    let x_hi = ((patch.x_star + big_r).ceil().max(0.0) as usize).min(grid.n_x - 1);
    let mut out = Vec::new();
    for t in t_lo..=t_hi {
        for x in x_lo..=x_hi {
            if patch.contains(x as f64, t as f64) {
                out.push(GridNode::new(x, t));
            }
        }
    }
    out
}

/// Values of each converged run on a fixed node set.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchCloud {
    pub nodes: Vec<GridNode>,
    pub points: Vec<Vec<f64>>,
}

impl PatchCloud {
    pub fn feature_dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn rows(&self) -> Vec<&[f64]> {
        self.points.iter().map(Vec::as_slice).collect()
    }
}

pub fn extract_patch(ens: &SolutionEnsemble, grid: &GridSpec, patch: &PatchSpec) -> Result<PatchCloud> {
    if ens.n_cols != grid.n_nodes() {
        return Err(Error::DimensionMismatch { expected: grid.n_nodes(), got: ens.n_cols });
    }
    let nodes = patch_nodes(grid, patch);
    if nodes.is_empty() {
        return Err(Error::EmptyPatch);
    }
    let idx: Vec<usize> = nodes.iter().map(|&n| grid.index(n)).collect();
    let points = ens.selected(RunFilter::ConvergedOnly).map(|run| idx.iter().map(|&k| run.values[k]).collect()).collect();
    Ok(PatchCloud { nodes, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(grid: &GridSpec, p: &PatchSpec) -> Vec<GridNode> {
        (0..grid.n_nodes()).map(|k| grid.node(k)).filter(|n| p.contains(n.space as f64, n.time as f64)).collect()
    }

    #[test]
    fn tiny_patch_is_center_only() {
        let g = GridSpec::unit_courant(20, 20).unwrap();
        let nodes = patch_nodes(&g, &PatchSpec::new(10.0, 10.0, 0.7).unwrap());
        assert_eq!(nodes, vec![GridNode::new(10, 10)]);
    }

    #[test]
    fn matches_brute_force_scan() {
        let g = GridSpec::unit_courant(15, 25).unwrap();
        for (x, t, r) in [(7.0, 12.0, 3.0), (0.0, 0.0, 4.2), (14.3, 20.5, 2.6), (3.5, 9.25, 1.1), (7.0, 12.0, 30.0)] {
            let p = PatchSpec::new(x, t, r).unwrap();
            assert_eq!(patch_nodes(&g, &p), brute_force(&g, &p));
        }
    }

    #[test]
    fn doubling_radius_quadruples_count() {
        let g = GridSpec::unit_courant(60, 60).unwrap();
        let small = patch_nodes(&g, &PatchSpec::new(30.0, 30.0, 4.0).unwrap()).len() as f64;
        let big = patch_nodes(&g, &PatchSpec::new(30.0, 30.0, 8.0).unwrap()).len() as f64;
        assert!((3.5..=4.5).contains(&(big / small)), "{small} -> {big}");
    }

    #[test]
    fn patch_off_grid_is_empty() {
        let g = GridSpec::unit_courant(10, 10).unwrap();
        let ens = SolutionEnsemble { n_cols: 100, runs: vec![], master_seed: 0 };
        let p = PatchSpec::new(-20.0, -20.0, 1.0).unwrap();
        assert!(matches!(extract_patch(&ens, &g, &p), Err(Error::EmptyPatch)));
    }
}
