//! Finite-difference systems for `u_tt = c^2 u_xx` on a rectangular grid.
//!
//! Interior nodes carry the central-time central-space (CTCS) stencil
//!
//! ```text
//! u[n+1,i] + (2C^2 - 2) u[n,i] + u[n-1,i] - C^2 u[n,i-1] - C^2 u[n,i+1] = 0
//! ```
//!
//! with `C = c dt / dx`. All five stencil entries are stored, including the
//! center coefficient that vanishes when `C = 1`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, ParallelogramSpec};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, GridNode, RowTag, SparseRow, TagKind, TaggedSystem};

/// Default initial displacement `u(x, 0) = 0`.
pub fn zero_displacement(_x: f64) -> f64 {
    0.0
}

/// Default initial velocity `u_t(x, 0) = sin(2 pi x / c)`.
pub fn sine_velocity(c: f64) -> impl Fn(f64) -> f64 {
    move |x| (2.0 * std::f64::consts::PI * x / c).sin()
}

fn push_law_rows(grid: &GridSpec, system: &mut TaggedSystem) -> Result<()> {
    let c2 = grid.courant().powi(2);
    for n in 1..grid.n_t - 1 {
        for i in 1..grid.n_x - 1 {
            let at = |space: usize, time: usize| grid.index(GridNode::new(space, time));
            let row = SparseRow::new(
                vec![
                    (at(i, n - 1), 1.0),
                    (at(i - 1, n), -c2),
                    (at(i, n), 2.0 * c2 - 2.0),
                    (at(i + 1, n), -c2),
                    (at(i, n + 1), 1.0),
                ],
                0.0,
            )?;
            system.push(row, RowTag::at(TagKind::Law, GridNode::new(i, n)))?;
        }
    }
    Ok(())
}

/// Square system for the initial-boundary value problem with homogeneous
/// Dirichlet walls. Row blocks, in order:
///
/// * `n_x` displacement rows `u[0,i] = u0(x_i)`;
/// * `n_x - 2` velocity rows linking levels 0 and 1, obtained by eliminating
///   the ghost level `-1` between the central velocity difference and the
///   stencil at `n = 0`:
///   `u[1,i] - (1 - C^2) u[0,i] - C^2/2 (u[0,i-1] + u[0,i+1]) = dt u0t(x_i)`;
/// * `2 (n_t - 1)` wall rows `u[n,0] = u[n,n_x-1] = 0` for `n >= 1`;
/// * `(n_x - 2)(n_t - 2)` stencil rows.
pub fn assemble_wave_wellposed(
    grid: &GridSpec,
    u0: impl Fn(f64) -> f64,
    u0t: impl Fn(f64) -> f64,
) -> Result<TaggedSystem> {
    grid.validate()?;
    grid.check_cfl()?;
    let c2 = grid.courant().powi(2);
    let dt = grid.dt();
    let mut system = TaggedSystem::new(grid.n_nodes());
    let at = |space: usize, time: usize| grid.index(GridNode::new(space, time));

    for i in 0..grid.n_x {
        system.push(
            SparseRow::indicator(at(i, 0), u0(grid.x_coord(i))),
            RowTag::at(TagKind::InitialCondition, GridNode::new(i, 0)),
        )?;
    }
    for i in 1..grid.n_x - 1 {
        let row = SparseRow::new(
            vec![
                (at(i - 1, 0), -0.5 * c2),
                (at(i, 0), c2 - 1.0),
                (at(i + 1, 0), -0.5 * c2),
                (at(i, 1), 1.0),
            ],
            dt * u0t(grid.x_coord(i)),
        )?;
        system.push(row, RowTag::at(TagKind::InitialCondition, GridNode::new(i, 1)))?;
    }
    for n in 1..grid.n_t {
        for i in [0, grid.n_x - 1] {
            system.push(
                SparseRow::indicator(at(i, n), 0.0),
                RowTag::at(TagKind::BoundaryCondition, GridNode::new(i, n)),
            )?;
        }
    }
    push_law_rows(grid, &mut system)?;
    Ok(system)
}

/// Underdetermined system: one unit row per prescribed data value, the
/// interior stencil rows, and optionally a homogeneous Dirichlet row on the
/// left wall for every time index in `reflector`.
pub fn assemble_wave_case_study(
    grid: &GridSpec,
    data: &[(GridNode, f64)],
    reflector: Option<Range<usize>>,
) -> Result<TaggedSystem> {
    grid.validate()?;
    grid.check_cfl()?;
    let mut system = TaggedSystem::new(grid.n_nodes());
    for &(node, value) in data {
        if !grid.contains(node.space as i64, node.time as i64) {
            return Err(Error::Config(format!(
                "data node (space {}, time {}) lies outside the {}x{} grid",
                node.space, node.time, grid.n_x, grid.n_t
            )));
        }
        system.push(SparseRow::indicator(grid.index(node), value), RowTag::at(TagKind::DataConstraint, node))?;
    }
    push_law_rows(grid, &mut system)?;
    if let Some(range) = reflector {
        check_reflector(grid, &range)?;
        for n in range {
            let node = GridNode::new(0, n);
            system.push(SparseRow::indicator(grid.index(node), 0.0), RowTag::at(TagKind::BoundaryCondition, node))?;
        }
    }
    Ok(system)
}

pub(crate) fn check_reflector(grid: &GridSpec, range: &Range<usize>) -> Result<()> {
    if range.start >= range.end || range.end > grid.n_t {
        return Err(Error::Config(format!(
            "reflector time range {}..{} must be non-empty and within 0..{}",
            range.start, range.end, grid.n_t
        )));
    }
    Ok(())
}

/// Pairs each node with its value in a grid-ordered solution vector.
pub fn sample_nodes(grid: &GridSpec, nodes: &[GridNode], solution: &[f64]) -> Vec<(GridNode, f64)> {
    nodes.iter().map(|&n| (n, solution[grid.index(n)])).collect()
}

/// Half-open time range of a left-wall reflector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectorSpec {
    pub start: usize,
    pub end: usize,
}

impl ReflectorSpec {
    /// The first half of the time axis, `0..n_t/2`.
    pub fn lower_half(grid: &GridSpec) -> Self {
        Self { start: 0, end: grid.n_t / 2 }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// A data-only wave problem: values sampled from the well-posed solution
/// over a parallelogram, optionally with a partial left-wall reflector.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveCaseStudy {
    pub grid: GridSpec,
    pub parallelogram: ParallelogramSpec,
    pub reflector: Option<ReflectorSpec>,
}

impl WaveCaseStudy {
    pub fn without_reflector(grid: GridSpec) -> Self {
        Self { parallelogram: ParallelogramSpec::default_for(&grid), grid, reflector: None }
    }

    pub fn with_reflector(grid: GridSpec) -> Self {
        Self {
            parallelogram: ParallelogramSpec::default_for(&grid),
            reflector: Some(ReflectorSpec::lower_half(&grid)),
            grid,
        }
    }

    /// Minimum-norm solution of the well-posed problem with zero initial
    /// displacement and sine initial velocity.
    pub fn ground_truth(&self) -> Result<Vec<f64>> {
        let system = assemble_wave_wellposed(&self.grid, zero_displacement, sine_velocity(self.grid.c))?;
        Ok(min_norm_solve(&system)?.values)
    }

    pub fn data_nodes(&self) -> Result<Vec<GridNode>> {
        self.parallelogram.nodes(&self.grid)
    }

    pub fn assemble(&self, truth: &[f64]) -> Result<TaggedSystem> {
        if truth.len() != self.grid.n_nodes() {
            return Err(Error::DimensionMismatch { expected: self.grid.n_nodes(), got: truth.len() });
        }
        let data = sample_nodes(&self.grid, &self.data_nodes()?, truth);
        assemble_wave_case_study(&self.grid, &data, self.reflector.map(|r| r.range()))
    }
}
