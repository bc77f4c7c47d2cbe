//! Second-order scalar ODEs `y'' + omega^2 y = 0` on a uniform time grid.
//!
//! The grid has `n` interior nodes and two end nodes on `[0, t_max]`, so
//! `dt = t_max / (n + 1)` and there are `n + 2` unknowns. Each interior node
//! carries the law row `y[k-1] + (omega^2 dt^2 - 2) y[k] + y[k+1] = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{GridNode, RowTag, SparseRow, TagKind, TaggedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Value,
    FirstDerivative,
}

/// A prescribed value or slope at time `t`. Times snap to the nearest node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintPoint {
    pub kind: ConstraintKind,
    pub t: f64,
    pub value: f64,
}

impl ConstraintPoint {
    pub fn value(t: f64, value: f64) -> Self {
        Self { kind: ConstraintKind::Value, t, value }
    }

    pub fn derivative(t: f64, value: f64) -> Self {
        Self { kind: ConstraintKind::FirstDerivative, t, value }
    }
}

/// Time grid with `n` interior nodes on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeGrid {
    pub n: usize,
    pub t_max: f64,
}

impl OdeGrid {
    pub fn new(n: usize, t_max: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("ode.n must be >= 1".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Config("ode.t_max must be positive".into()));
        }
        Ok(Self { n, t_max })
    }

    pub fn n_nodes(&self) -> usize {
        self.n + 2
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n + 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|k| self.time(k)).collect()
    }

    /// Nearest node to `t`; errors outside `[0, t_max]`.
    pub fn node_for(&self, t: f64) -> Result<usize> {
        let slack = 1e-9 * self.t_max;
        if !t.is_finite() || t < -slack || t > self.t_max + slack {
            return Err(Error::Config(format!("constraint time {t} outside [0, {}]", self.t_max)));
        }
        Ok(((t / self.dt()).round() as usize).min(self.n + 1))
    }
}

/// Row for `y'(t_k) = value` with the ghost node on the far side of `k`
/// eliminated through the law, which makes it second-order accurate:
/// `(y[k+1] - y[k]) / dt + omega^2 dt / 2 y[k]` (mirrored at the last node).
/// For `omega = 0` this is the two-point forward difference.
fn derivative_row(grid: &OdeGrid, k: usize, omega: f64, value: f64) -> Result<SparseRow> {
    let dt = grid.dt();
    let half = 0.5 * omega * omega * dt;
    if k + 1 < grid.n_nodes() {
        SparseRow::new(vec![(k, -1.0 / dt + half), (k + 1, 1.0 / dt)], value)
    } else {
        SparseRow::new(vec![(k - 1, -1.0 / dt), (k, 1.0 / dt - half)], value)
    }
}

/// Law rows plus one row per constraint, tagged `constraint_tag`.
pub fn assemble_second_order_ode(
    grid: &OdeGrid,
    omega: f64,
    constraints: &[ConstraintPoint],
    constraint_tag: TagKind,
) -> Result<TaggedSystem> {
    if !omega.is_finite() {
        return Err(Error::Config("ode.omega must be finite".into()));
    }
    let dt = grid.dt();
    let center = omega * omega * dt * dt - 2.0;
    let mut system = TaggedSystem::new(grid.n_nodes());
    for k in 1..=grid.n {
        let row = SparseRow::new(vec![(k - 1, 1.0), (k, center), (k + 1, 1.0)], 0.0)?;
        system.push(row, RowTag::at(TagKind::Law, GridNode::new(0, k)))?;
    }
    for c in constraints {
        let k = grid.node_for(c.t)?;
        let row = match c.kind {
            ConstraintKind::Value => SparseRow::indicator(k, c.value),
            ConstraintKind::FirstDerivative => derivative_row(grid, k, omega, c.value)?,
        };
        system.push(row, RowTag::at(constraint_tag, GridNode::new(0, k)))?;
    }
    Ok(system)
}

/// `y'' = 0` on `[0, 1]` with `n` interior nodes; constraints are tagged as
/// boundary conditions.
pub fn assemble_line_ode(n: usize, constraints: &[ConstraintPoint]) -> Result<TaggedSystem> {
    assemble_second_order_ode(&OdeGrid::new(n, 1.0)?, 0.0, constraints, TagKind::BoundaryCondition)
}

/// `x'' = -omega^2 x` on `[0, t_max]` with at most two initial conditions.
pub fn assemble_harmonic_oscillator(
    n: usize,
    t_max: f64,
    ics: &[ConstraintPoint],
    omega: f64,
) -> Result<TaggedSystem> {
    if ics.len() > 2 {
        return Err(Error::Config(format!("harmonic oscillator takes at most 2 initial conditions, got {}", ics.len())));
    }
    assemble_second_order_ode(&OdeGrid::new(n, t_max)?, omega, ics, TagKind::InitialCondition)
}

/// Samples `slope * t + intercept` on the nodes of the `y'' = 0` grid.
pub fn sample_line(n: usize, slope: f64, intercept: f64) -> Vec<f64> {
    let grid = OdeGrid { n, t_max: 1.0 };
    grid.times().into_iter().map(|t| slope * t + intercept).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_norm_solve, DenseSvd};

    #[test]
    fn two_point_line() {
        let s = assemble_line_ode(3, &[ConstraintPoint::value(0.0, 0.0), ConstraintPoint::value(1.0, 1.0)]).unwrap();
        assert_eq!((s.n_rows(), s.n_cols()), (5, 5));
        let svd = DenseSvd::of_system(&s).unwrap();
        assert_eq!(svd.rank(), 5);
        let sol = min_norm_solve(&s).unwrap();
        for (v, e) in sol.values.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn three_points_off_a_line_are_inconsistent() {
        let s = assemble_line_ode(
            9,
            &[ConstraintPoint::value(0.0, 0.0), ConstraintPoint::value(1.0, 1.0), ConstraintPoint::value(0.5, 0.0)],
        )
        .unwrap();
        assert!(min_norm_solve(&s).unwrap().residual_norm > 1e-3);
    }

    #[test]
    fn value_and_slope_give_a_line() {
        let s = assemble_line_ode(8, &[ConstraintPoint::value(0.0, 1.0), ConstraintPoint::derivative(0.0, -2.0)]).unwrap();
        let sol = min_norm_solve(&s).unwrap();
        for (v, e) in sol.values.iter().zip(sample_line(8, -2.0, 1.0)) {
            assert!((v - e).abs() < 1e-10);
        }
    }

    #[test]
    fn oscillator_null_space_dimensions() {
        let one = [ConstraintPoint::value(0.0, 2.0)];
        let two = [ConstraintPoint::value(0.0, 2.0), ConstraintPoint::derivative(0.0, 1.0)];
        for (ics, nullity) in [(&two[..], 0), (&one[..], 1), (&[][..], 2)] {
            let s = assemble_harmonic_oscillator(60, 10.0, ics, 1.0).unwrap();
            assert_eq!(DenseSvd::of_system(&s).unwrap().null_space_dimension(), nullity);
        }
    }

    #[test]
    fn oscillator_rejects_three_conditions() {
        let ics = [ConstraintPoint::value(0.0, 1.0); 3];
        assert!(matches!(assemble_harmonic_oscillator(10, 1.0, &ics, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn constraint_snaps_to_nearest_node() {
        let g = OdeGrid::new(9, 1.0).unwrap();
        assert_eq!(g.node_for(0.5).unwrap(), 5);
        assert_eq!(g.node_for(0.54).unwrap(), 5);
        assert_eq!(g.node_for(0.56).unwrap(), 6);
        assert!(g.node_for(1.2).is_err());
    }
}
