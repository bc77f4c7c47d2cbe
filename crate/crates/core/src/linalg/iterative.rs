use serde::{Deserialize, Serialize};

use super::dense::default_feasibility_tol;
use super::system::{dot, TaggedSystem};
use super::{Solution, SolveStatus};
use crate::error::{Error, Result};
use crate::rng::{normal_vector, rng_from_seed};

/// Settings for [`solve_from_seed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Iteration cap; `None` means `50 * n_cols`.
    pub max_iterations: Option<usize>,
    /// Stop once `||A^T r||` has dropped by this factor from the start point.
    pub grad_tol: f64,
    /// Standard deviation of the normal start point.
    pub start_scale: f64,
    /// Residual bound for consistent systems; `None` means
    /// `1e-8 * max(1, ||b||)`.
    pub tol_feasible: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: None, grad_tol: 1e-12, start_scale: 1.0, tol_feasible: None }
    }
}

impl SolverOptions {
    pub fn iteration_cap(&self, n_cols: usize) -> usize {
        self.max_iterations.unwrap_or(50 * n_cols.max(1))
    }

    pub fn feasibility_tol(&self, system: &TaggedSystem) -> f64 {
        self.tol_feasible.unwrap_or_else(|| default_feasibility_tol(system))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0 && self.grad_tol < 1.0) {
            return Err(Error::Config("solver.grad_tol must lie in (0, 1)".into()));
        }
        if !(self.start_scale >= 0.0 && self.start_scale.is_finite()) {
            return Err(Error::Config("solver.start_scale must be finite and >= 0".into()));
        }
        if let Some(t) = self.tol_feasible {
            if !(t > 0.0) {
                return Err(Error::Config("solver.tol_feasible must be > 0".into()));
            }
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config("solver.max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Start point of run `seed`: i.i.d. `N(0, start_scale^2)` components.
pub fn start_point(n_cols: usize, seed: u64, opts: &SolverOptions) -> Vec<f64> {
    normal_vector(&mut rng_from_seed(seed), n_cols, opts.start_scale)
}

/// Minimizes `0.5 ||A x - b||^2` by CGLS from a random start point.
///
/// Every CGLS update lies in `range(A^T)`, so the iterate converges to the
/// orthogonal projection of the start point onto the least-squares solution
/// set: the min-norm solution plus the null-space component of the start.
pub fn solve_from_seed(system: &TaggedSystem, seed: u64, opts: &SolverOptions) -> Result<Solution> {
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    let x0 = start_point(system.n_cols(), seed, opts);
    let mut sol = cgls(system, x0, opts)?;
    sol.seed = Some(seed);
    Ok(sol)
}

/// CGLS iteration from an explicit start point.
pub fn cgls(system: &TaggedSystem, x0: Vec<f64>, opts: &SolverOptions) -> Result<Solution> {
    let n = system.n_cols();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let cap = opts.iteration_cap(n);
    let mut x = x0;
    let mut r: Vec<f64> = system.residual(&x)?.into_iter().map(|v| -v).collect();
    let mut s = system.apply_transpose(&r)?;
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let target = opts.grad_tol * gamma.sqrt();
    let mut q = vec![0.0; system.n_rows()];

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    while iterations < cap {
        if gamma.sqrt() <= target || gamma == 0.0 {
            status = SolveStatus::Converged;
            break;
        }
        for (qi, row) in q.iter_mut().zip(system.rows()) {
            *qi = row.dot(&p);
        }
        let delta = dot(&q, &q);
        if delta == 0.0 {
            status = SolveStatus::Converged;
            break;
        }
        let alpha = gamma / delta;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        s.iter_mut().for_each(|v| *v = 0.0);
        for (row, &ri) in system.rows().iter().zip(&r) {
            row.axpy_into(ri, &mut s);
        }
        let gamma_new = dot(&s, &s);
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        iterations += 1;
    }
    if status == SolveStatus::MaxIterations && (gamma.sqrt() <= target || gamma == 0.0) {
        status = SolveStatus::Converged;
    }
    let residual_norm = system.residual_norm(&x)?;
    Ok(Solution { values: x, residual_norm, seed: None, status, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_norm_solve, RowTag, SparseRow, TagKind};

    fn tag() -> RowTag {
        RowTag::new(TagKind::Law, None)
    }

    fn small_full_rank() -> TaggedSystem {
        let mut s = TaggedSystem::new(3);
        s.push(SparseRow::new(vec![(0, 2.0), (1, 1.0)], 1.0).unwrap(), tag()).unwrap();
        s.push(SparseRow::new(vec![(1, 3.0), (2, -1.0)], 2.0).unwrap(), tag()).unwrap();
        s.push(SparseRow::new(vec![(0, 1.0), (2, 4.0)], -1.0).unwrap(), tag()).unwrap();
        s
    }

    #[test]
    fn full_rank_seeds_agree() {
        let s = small_full_rank();
        let opts = SolverOptions::default();
        let a = solve_from_seed(&s, 1, &opts).unwrap();
        let b = solve_from_seed(&s, 2, &opts).unwrap();
        assert_eq!(a.status, SolveStatus::Converged);
        let exact = min_norm_solve(&s).unwrap();
        for i in 0..3 {
            assert!((a.values[i] - b.values[i]).abs() < 1e-10);
            assert!((a.values[i] - exact.values[i]).abs() < 1e-10);
        }
        assert!((a.residual_norm - s.residual_norm(&a.values).unwrap()).abs() <= 1e-10 * a.residual_norm.max(1e-300));
    }

    #[test]
    fn underdetermined_keeps_null_component_of_start() {
        // x0 + x1 = 2: solution set is (1,1) + t(1,-1)
        let mut s = TaggedSystem::new(2);
        s.push(SparseRow::new(vec![(0, 1.0), (1, 1.0)], 2.0).unwrap(), tag()).unwrap();
        let opts = SolverOptions::default();
        let start = start_point(2, 5, &opts);
        let sol = solve_from_seed(&s, 5, &opts).unwrap();
        let t = (start[0] - start[1]) / 2.0;
        assert!((sol.values[0] - (1.0 + t)).abs() < 1e-12);
        assert!((sol.values[1] - (1.0 - t)).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let s = small_full_rank();
        let opts = SolverOptions { max_iterations: Some(1), ..Default::default() };
        let sol = solve_from_seed(&s, 3, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::MaxIterations);
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let s = small_full_rank();
        let opts = SolverOptions::default();
        assert_eq!(solve_from_seed(&s, 9, &opts).unwrap(), solve_from_seed(&s, 9, &opts).unwrap());
    }
}
