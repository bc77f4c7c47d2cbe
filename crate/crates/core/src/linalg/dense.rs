//! Dense SVD factorizations of tagged systems: minimum-norm solves and
//! orthogonal projections onto affine solution sets.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{self, ComputeSvdVectors};
use faer::diag::Diag;
use faer::{Mat, Par};

use super::system::TaggedSystem;
use super::{Solution, SolveStatus};
use crate::error::{Error, Result};

/// Largest column count accepted by the dense routines.
pub const DENSE_LIMIT: usize = 4000;

/// Default consistency tolerance: `1e-8 * max(1, ||b||)`.
pub fn default_feasibility_tol(system: &TaggedSystem) -> f64 {
    1e-8 * system.rhs_norm().max(1.0)
}

/// Thin SVD `A = U S V^T` truncated to numerical rank.
///
/// Singular values at or below `max(E, N) * eps * s_max` are treated as zero.
/// The factorization runs single-threaded so results are bitwise stable
/// regardless of the ambient thread pool.
#[derive(Debug, Clone)]
pub struct DenseSvd {
    n_rows: usize,
    n_cols: usize,
    singular_values: Vec<f64>,
    rank: usize,
    u: Mat<f64>,
    v: Mat<f64>,
}

impl DenseSvd {
    pub fn of_system(system: &TaggedSystem) -> Result<Self> {
        let (m, n) = (system.n_rows(), system.n_cols());
        if m == 0 {
            return Err(Error::EmptySystem);
        }
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge { n_cols: n, limit: DENSE_LIMIT });
        }
        let mut a = Mat::<f64>::zeros(m, n);
        for (i, row) in system.rows().iter().enumerate() {
            for &(j, val) in row.entries() {
                a[(i, j)] = val;
            }
        }
        Self::of_matrix(a)
    }

    fn of_matrix(a: Mat<f64>) -> Result<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        let k = m.min(n);
        let mut s = Diag::<f64>::zeros(k);
        let mut u = Mat::<f64>::zeros(m, k);
        let mut v = Mat::<f64>::zeros(n, k);
        let par = Par::Seq;
        let mut buf = MemBuffer::new(svd::svd_scratch::<f64>(
            m,
            n,
            ComputeSvdVectors::Thin,
            ComputeSvdVectors::Thin,
            par,
            Default::default(),
        ));
        svd::svd(
            a.as_ref(),
            s.as_mut(),
            Some(u.as_mut()),
            Some(v.as_mut()),
            par,
            MemStack::new(&mut buf),
            Default::default(),
        )
        .map_err(|_| Error::SvdFailed)?;

        let singular_values: Vec<f64> = (0..k).map(|i| s[i]).collect();
        let s_max = singular_values.first().copied().unwrap_or(0.0);
        let cutoff = m.max(n) as f64 * f64::EPSILON * s_max;
        let rank = singular_values.iter().take_while(|&&x| x > cutoff).count();
        Ok(Self { n_rows: m, n_cols: n, singular_values, rank, u, v })
    }

    /// All `min(E, N)` singular values, nonincreasing.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn null_space_dimension(&self) -> usize {
        self.n_cols - self.rank
    }

    /// `A^+ y`
    pub fn pinv_apply(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n_rows);
        let mut coeffs = vec![0.0; self.rank];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &yi) in y.iter().enumerate() {
                acc += self.u[(i, k)] * yi;
            }
            *c = acc / self.singular_values[k];
        }
        self.combine_v(&coeffs)
    }

    /// Orthogonal projection onto the row space of `A`.
    pub fn project_row_space(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let coeffs: Vec<f64> = (0..self.rank)
            .map(|k| (0..self.n_cols).map(|j| self.v[(j, k)] * x[j]).sum())
            .collect();
        self.combine_v(&coeffs)
    }

    /// Orthogonal projection onto `null(A)`.
    pub fn project_null_space(&self, x: &[f64]) -> Vec<f64> {
        let row = self.project_row_space(x);
        x.iter().zip(row).map(|(a, b)| a - b).collect()
    }

    fn combine_v(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.v[(j, k)] * c;
            }
        }
        out
    }
}

/// Singular values (nonincreasing) of the matrix whose rows are `rows`.
pub fn singular_values_of_rows(rows: &[&[f64]]) -> Result<Vec<f64>> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 {
        return Err(Error::EmptySystem);
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: rows.iter().map(|r| r.len()).find(|&l| l != n).unwrap_or(0) });
    }
    let a = Mat::<f64>::from_fn(m, n, |i, j| rows[i][j]);
    let k = m.min(n);
    let mut s = Diag::<f64>::zeros(k);
    let par = Par::Seq;
    let mut buf = MemBuffer::new(svd::svd_scratch::<f64>(
        m,
        n,
        ComputeSvdVectors::No,
        ComputeSvdVectors::No,
        par,
        Default::default(),
    ));
    svd::svd(a.as_ref(), s.as_mut(), None, None, par, MemStack::new(&mut buf), Default::default())
        .map_err(|_| Error::SvdFailed)?;
    Ok((0..k).map(|i| s[i]).collect())
}

/// Minimum-Euclidean-norm least-squares solution `A^+ b`.
///
/// Rank deficiency is handled through the truncated SVD. Systems wider than
/// [`DENSE_LIMIT`] columns are refused.
pub fn min_norm_solve(system: &TaggedSystem) -> Result<Solution> {
    let svd = DenseSvd::of_system(system)?;
    let values = svd.pinv_apply(&system.rhs());
    let residual_norm = system.residual_norm(&values)?;
    Ok(Solution {
        values,
        residual_norm,
        seed: None,
        status: SolveStatus::Converged,
        iterations: 0,
    })
}

/// Projector onto the affine set `{z : A z = b}` of a consistent system.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    system: TaggedSystem,
    svd: DenseSvd,
}

impl AffineProjector {
    /// Fails with [`Error::InfeasibleSubset`] when the min-norm residual
    /// exceeds `tol`.
    pub fn new(system: &TaggedSystem, tol: f64) -> Result<Self> {
        let svd = DenseSvd::of_system(system)?;
        let x_mn = svd.pinv_apply(&system.rhs());
        let residual = system.residual_norm(&x_mn)?;
        if residual > tol {
            return Err(Error::InfeasibleSubset { residual, tol });
        }
        Ok(Self { system: system.clone(), svd })
    }

    /// `x - A^+ (A x - b)`
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.system.residual(x)?;
        let correction = self.svd.pinv_apply(&r);
        Ok(x.iter().zip(correction).map(|(a, c)| a - c).collect())
    }

    /// Component of `direction` inside `null(A)`.
    pub fn project_direction(&self, direction: &[f64]) -> Vec<f64> {
        self.svd.project_null_space(direction)
    }

    pub fn svd(&self) -> &DenseSvd {
        &self.svd
    }
}

/// Euclidean projection of `x` onto `{z : A z = b}`.
///
/// `system` must be consistent to [`default_feasibility_tol`].
pub fn project_onto_affine_solution_set(system: &TaggedSystem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != system.n_cols() {
        return Err(Error::DimensionMismatch { expected: system.n_cols(), got: x.len() });
    }
    AffineProjector::new(system, default_feasibility_tol(system))?.project(x)
}

/// Relative residual `||A x - b|| / max(1, ||b||)`.
pub fn relative_residual(system: &TaggedSystem, x: &[f64]) -> Result<f64> {
    Ok(system.residual_norm(x)? / system.rhs_norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{RowTag, SparseRow, TagKind};

    fn tag() -> RowTag {
        RowTag::new(TagKind::Law, None)
    }

    #[test]
    fn homogeneous_consistent_system_gives_zero() {
        let mut s = TaggedSystem::new(3);
        s.push(SparseRow::new(vec![(0, 1.0), (1, 1.0)], 0.0).unwrap(), tag()).unwrap();
        s.push(SparseRow::new(vec![(1, 2.0), (2, -1.0)], 0.0).unwrap(), tag()).unwrap();
        let sol = min_norm_solve(&s).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
        assert_eq!(sol.residual_norm, 0.0);
    }

    #[test]
    fn underdetermined_single_equation() {
        // x + y = 2 -> minimum norm (1, 1)
        let mut s = TaggedSystem::new(2);
        s.push(SparseRow::new(vec![(0, 1.0), (1, 1.0)], 2.0).unwrap(), tag()).unwrap();
        let sol = min_norm_solve(&s).unwrap();
        assert!((sol.values[0] - 1.0).abs() < 1e-14);
        assert!((sol.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_and_null_space() {
        let mut s = TaggedSystem::new(4);
        s.push(SparseRow::new(vec![(0, 1.0), (1, -1.0)], 0.0).unwrap(), tag()).unwrap();
        s.push(SparseRow::new(vec![(0, 2.0), (1, -2.0)], 0.0).unwrap(), tag()).unwrap();
        let svd = DenseSvd::of_system(&s).unwrap();
        assert_eq!(svd.rank(), 1);
        assert_eq!(svd.null_space_dimension(), 3);
        let p = svd.project_null_space(&[1.0, 0.0, 0.0, 0.0]);
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn empty_system_is_refused() {
        assert!(matches!(min_norm_solve(&TaggedSystem::new(2)), Err(Error::EmptySystem)));
    }

    #[test]
    fn oversized_system_is_refused() {
        let mut s = TaggedSystem::new(DENSE_LIMIT + 1);
        s.push(SparseRow::indicator(0, 1.0), tag()).unwrap();
        assert!(matches!(min_norm_solve(&s), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn axis_aligned_projection() {
        let mut s = TaggedSystem::new(2);
        s.push(SparseRow::indicator(0, 1.0), tag()).unwrap();
        assert_eq!(project_onto_affine_solution_set(&s, &[0.0, 5.0]).unwrap(), vec![1.0, 5.0]);
        assert_eq!(project_onto_affine_solution_set(&s, &[1.0, 5.0]).unwrap(), vec![1.0, 5.0]);
    }

    #[test]
    fn inconsistent_subset_is_rejected() {
        let mut s = TaggedSystem::new(1);
        s.push(SparseRow::indicator(0, 1.0), tag()).unwrap();
        s.push(SparseRow::indicator(0, 2.0), tag()).unwrap();
        assert!(matches!(
            project_onto_affine_solution_set(&s, &[0.0]),
            Err(Error::InfeasibleSubset { .. })
        ));
    }
}
