#![allow(dead_code)]

use nalgebra::DMatrix;
use wellprobe::discretization::GridSpec;
use wellprobe::linalg::{GridNode, RowTag, SparseRow, TagKind, TaggedSystem};
use wellprobe::rng::{normal_vector, rng_from_seed};

/// `A^+ b` through nalgebra's SVD with the same rank cutoff rule.
pub fn nalgebra_pinv_solve(system: &TaggedSystem) -> Vec<f64> {
    let dense = system.to_dense();
    let (m, n) = (system.n_rows(), system.n_cols());
    let a = DMatrix::from_fn(m, n, |i, j| dense[i][j]);
    let svd = a.svd(true, true);
    let s_max = svd.singular_values.max();
    let cutoff = m.max(n) as f64 * f64::EPSILON * s_max;
    let pinv = svd.pseudo_inverse(cutoff).unwrap();
    let b = nalgebra::DVector::from_vec(system.rhs());
    (pinv * b).iter().copied().collect()
}

/// Explicit time marching of the same scheme the wave assembler encodes.
pub fn march_wave(grid: &GridSpec, u0: impl Fn(f64) -> f64, u0t: impl Fn(f64) -> f64) -> Vec<f64> {
    let (nx, nt) = (grid.n_x, grid.n_t);
    let c2 = grid.courant().powi(2);
    let dt = grid.dt();
    let mut u = vec![0.0; nx * nt];
    let at = |i: usize, n: usize| grid.index(GridNode::new(i, n));
    for i in 0..nx {
        u[at(i, 0)] = u0(grid.x_coord(i));
    }
    for i in 1..nx - 1 {
        u[at(i, 1)] = (1.0 - c2) * u[at(i, 0)] + 0.5 * c2 * (u[at(i - 1, 0)] + u[at(i + 1, 0)]) + dt * u0t(grid.x_coord(i));
    }
    for n in 1..nt - 1 {
        for i in 1..nx - 1 {
            u[at(i, n + 1)] =
                2.0 * (1.0 - c2) * u[at(i, n)] + c2 * (u[at(i - 1, n)] + u[at(i + 1, n)]) - u[at(i, n - 1)];
        }
    }
    u
}

/// Random dense system `rows x cols` of rank at most `rank`, consistent
/// when `consistent` is set.
pub fn random_low_rank(rows: usize, cols: usize, rank: usize, seed: u64, consistent: bool) -> TaggedSystem {
    let mut rng = rng_from_seed(seed);
    let left: Vec<Vec<f64>> = (0..rows).map(|_| normal_vector(&mut rng, rank, 1.0)).collect();
    let right: Vec<Vec<f64>> = (0..rank).map(|_| normal_vector(&mut rng, cols, 1.0)).collect();
    let x = normal_vector(&mut rng, cols, 1.0);
    let noise = normal_vector(&mut rng, rows, 1.0);
    let mut s = TaggedSystem::new(cols);
    for (i, l) in left.iter().enumerate() {
        let row: Vec<f64> = (0..cols).map(|j| (0..rank).map(|k| l[k] * right[k][j]).sum()).collect();
        let mut b: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
        if !consistent {
            b += noise[i];
        }
        let entries: Vec<(usize, f64)> = row.into_iter().enumerate().collect();
        s.push(SparseRow::new(entries, b).unwrap(), RowTag::new(TagKind::DataConstraint, None)).unwrap();
    }
    s
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
