//! Small contradictory systems for `y'' = 0` with known answers.

use crate::discretization::{assemble_line_ode, sample_line, ConstraintPoint};
use crate::linalg::TaggedSystem;

/// `y'' = 0` on 9 interior nodes with `y(0) = 0`, `y(1) = 1`, `y(0.5) = 0`.
/// Any two of the three conditions are satisfiable, all three are not.
pub fn three_bc_fixture() -> TaggedSystem {
    assemble_line_ode(
        9,
        &[ConstraintPoint::value(0.0, 0.0), ConstraintPoint::value(1.0, 1.0), ConstraintPoint::value(0.5, 0.0)],
    )
    .expect("fixed fixture is valid")
}

/// `y'' = 0` with 15 point values at `t = j / 14`: ten on `0.5 t + 0.1`,
/// five (every `j` with `j % 3 == 2`) on `-0.8 t + 0.9`.
#[derive(Debug, Clone)]
pub struct TwoLineFixture {
    pub system: TaggedSystem,
    pub line1: Vec<f64>,
    pub line2: Vec<f64>,
}

pub fn two_line_fixture() -> TwoLineFixture {
    // 27 interior nodes put every t = j/14 exactly on node 2j.
    let n = 27;
    let (l1, l2) = ((0.5, 0.1), (-0.8, 0.9));
    let constraints: Vec<ConstraintPoint> = (0..15)
        .map(|j| {
            let t = j as f64 / 14.0;
            let (m, c) = if j % 3 == 2 { l2 } else { l1 };
            ConstraintPoint::value(t, m * t + c)
        })
        .collect();
    TwoLineFixture {
        system: assemble_line_ode(n, &constraints).expect("fixed fixture is valid"),
        line1: sample_line(n, l1.0, l1.1),
        line2: sample_line(n, l2.0, l2.1),
    }
}

/// `|y[k-1] - 2 y[k] + y[k+1]|` for interior `k`; entry `k - 1` belongs to node `k`.
pub fn second_difference(y: &[f64]) -> Vec<f64> {
    y.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()).collect()
}
