//! Tagged sparse systems, dense minimum-norm solves and randomized-start
//! least-squares solves.

mod dense;
mod iterative;
mod system;

use serde::{Deserialize, Serialize};

pub use dense::{
    default_feasibility_tol, min_norm_solve, project_onto_affine_solution_set, relative_residual,
    singular_values_of_rows, AffineProjector, DenseSvd, DENSE_LIMIT,
};
pub use iterative::{cgls, solve_from_seed, start_point, SolverOptions};
pub(crate) use system::norm2_iter;
pub use system::{dot, max_abs_diff, norm2, GridNode, RowTag, SparseRow, TagKind, TaggedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached; the solution holds the last iterate.
    MaxIterations,
}

/// A candidate solution and the residual it attains on its system.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    /// `||A values - b||_2`
    pub residual_norm: f64,
    pub seed: Option<u64>,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}
