use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::GridNode;

/// Uniform rectangular space-time grid for the 1D wave equation.
///
/// Unknowns are ordered time-major: node `(space i, time n)` is column
/// `n * n_x + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_x: usize,
    pub n_t: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub c: f64,
}

impl GridSpec {
    pub fn new(n_x: usize, n_t: usize, x_min: f64, x_max: f64, t_max: f64, c: f64) -> Result<Self> {
        let g = Self { n_x, n_t, x_min, x_max, t_max, c };
        g.validate()?;
        Ok(g)
    }

    /// Grid on `[0, 1]` with `c = 1` and `t_max` chosen so that `c dt / dx = 1`.
    pub fn unit_courant(n_x: usize, n_t: usize) -> Result<Self> {
        if n_x < 3 {
            return Err(Error::Config(format!("grid.n_x must be >= 3, got {n_x}")));
        }
        Self::new(n_x, n_t, 0.0, 1.0, (n_t.max(1) - 1) as f64 / (n_x - 1) as f64, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 3 {
            return Err(Error::Config(format!("grid.n_x must be >= 3, got {}", self.n_x)));
        }
        if self.n_t < 3 {
            return Err(Error::Config(format!("grid.n_t must be >= 3, got {}", self.n_t)));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::Config("grid.x_max must exceed grid.x_min".into()));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config("grid.t_max must be positive".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config("grid.c must be positive".into()));
        }
        Ok(())
    }

    /// Errors when the Courant number exceeds one.
    pub fn check_cfl(&self) -> Result<()> {
        let courant = self.courant();
        if courant > 1.0 {
            return Err(Error::Config(format!(
                "CFL violated: c*dt/dx = {courant} > 1 (grid.n_x={}, grid.n_t={}, grid.t_max={})",
                self.n_x, self.n_t, self.t_max
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_t - 1) as f64
    }

    /// `c dt / dx`, snapped to exactly 1 when within 1e-12 of it.
    pub fn courant(&self) -> f64 {
        let raw = self.c * self.dt() / self.dx();
        if (raw - 1.0).abs() <= 1e-12 {
            1.0
        } else {
            raw
        }
    }

    pub fn is_unit_courant(&self) -> bool {
        self.courant() == 1.0
    }

    pub fn n_nodes(&self) -> usize {
        self.n_x * self.n_t
    }

    pub fn index(&self, node: GridNode) -> usize {
        node.time * self.n_x + node.space
    }

    pub fn node(&self, index: usize) -> GridNode {
        GridNode { space: index % self.n_x, time: index / self.n_x }
    }

    pub fn contains(&self, space: i64, time: i64) -> bool {
        space >= 0 && time >= 0 && (space as usize) < self.n_x && (time as usize) < self.n_t
    }

    pub fn x_coord(&self, space: usize) -> f64 {
        self.x_min + space as f64 * self.dx()
    }

    pub fn t_coord(&self, time: usize) -> f64 {
        time as f64 * self.dt()
    }

    /// The four corner nodes, which no interior stencil touches.
    pub fn corners(&self) -> [GridNode; 4] {
        let (x, t) = (self.n_x - 1, self.n_t - 1);
        [GridNode::new(0, 0), GridNode::new(x, 0), GridNode::new(0, t), GridNode::new(x, t)]
    }
}

/// A slanted band of data nodes: for each time index in `t_lo..=t_hi` the
/// `width` consecutive space indices starting at
/// `x_anchor + slant * (t - t_lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelogramSpec {
    pub t_lo: usize,
    pub t_hi: usize,
    pub x_anchor: usize,
    pub slant: i64,
    pub width: usize,
}

impl ParallelogramSpec {
    /// Band over time indices `[2, n_t / 3]`, slant `+1`, width 10% of `n_x`,
    /// anchored at space index `max(1, n_x / 10)`.
    pub fn default_for(grid: &GridSpec) -> Self {
        Self {
            t_lo: 2,
            t_hi: (grid.n_t / 3).max(2),
            x_anchor: (grid.n_x / 10).max(1),
            slant: 1,
            width: ((0.1 * grid.n_x as f64).round() as usize).max(1),
        }
    }

    /// Enclosed nodes ordered by (time, space).
    pub fn nodes(&self, grid: &GridSpec) -> Result<Vec<GridNode>> {
        if self.t_hi < self.t_lo {
            return Err(Error::Config("parallelogram.t_hi must be >= parallelogram.t_lo".into()));
        }
        if self.width == 0 {
            return Err(Error::Config("parallelogram.width must be >= 1".into()));
        }
        if !(-1..=1).contains(&self.slant) {
            return Err(Error::Config("parallelogram.slant must be -1, 0 or 1".into()));
        }
        let mut out = Vec::new();
        for t in self.t_lo..=self.t_hi {
            let start = self.x_anchor as i64 + self.slant * (t - self.t_lo) as i64;
            for w in 0..self.width as i64 {
                let x = start + w;
                if !grid.contains(x, t as i64) {
                    return Err(Error::Config(format!(
                        "parallelogram node (space {x}, time {t}) lies outside the {}x{} grid",
                        grid.n_x, grid.n_t
                    )));
                }
                out.push(GridNode::new(x as usize, t));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_courant_grid_has_c_one() {
        for (nx, nt) in [(10, 20), (30, 60), (17, 40)] {
            let g = GridSpec::unit_courant(nx, nt).unwrap();
            assert_eq!(g.courant(), 1.0);
            g.check_cfl().unwrap();
        }
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let g = GridSpec::new(30, 10, 0.0, 1.0, 2.0, 1.0).unwrap();
        assert!(matches!(g.check_cfl(), Err(Error::Config(_))));
    }

    #[test]
    fn index_round_trip() {
        let g = GridSpec::unit_courant(7, 5).unwrap();
        for k in 0..g.n_nodes() {
            assert_eq!(g.index(g.node(k)), k);
        }
    }

    #[test]
    fn default_parallelogram_fits_grids() {
        for (nx, nt) in [(10, 20), (30, 60)] {
            let g = GridSpec::unit_courant(nx, nt).unwrap();
            let p = ParallelogramSpec::default_for(&g);
            let nodes = p.nodes(&g).unwrap();
            assert_eq!(nodes.len(), (p.t_hi - p.t_lo + 1) * p.width);
        }
    }

    #[test]
    fn parallelogram_outside_grid_is_rejected() {
        let g = GridSpec::unit_courant(10, 20).unwrap();
        let p = ParallelogramSpec { t_lo: 0, t_hi: 15, x_anchor: 2, slant: 1, width: 2 };
        assert!(p.nodes(&g).is_err());
    }
}
