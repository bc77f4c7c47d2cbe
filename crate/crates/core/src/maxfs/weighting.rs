use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, Solution, TagKind, TaggedSystem};

/// Default consistency tolerance `1e-8 (1 + ||b||)`.
pub fn contradiction_tol(system: &TaggedSystem) -> f64 {
    1e-8 * (1.0 + system.rhs_norm())
}

/// Min-norm solution of a reweighted system with residuals measured on the
/// original, unweighted rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSolution {
    pub weight: f64,
    #[serde(skip)]
    pub solution: Solution,
    /// Residual norm of the law rows.
    pub law_residual: f64,
    /// Residual norm of all non-law rows.
    pub constraint_residual: f64,
    /// Residual norm per row kind present in the system.
    pub per_tag: Vec<(TagKind, f64)>,
}

/// Scales every non-law row (coefficients and right-hand side) by
/// `constraint_weight` and solves in the minimum-norm least-squares sense.
pub fn weighted_solve(system: &TaggedSystem, constraint_weight: f64) -> Result<WeightedSolution> {
    if !(constraint_weight > 0.0 && constraint_weight.is_finite()) {
        return Err(Error::Config(format!("constraint weight must be positive, got {constraint_weight}")));
    }
    let weighted = system.reweighted(|tag| if tag.kind.is_law() { 1.0 } else { constraint_weight });
    let mut solution = min_norm_solve(&weighted)?;
    let x = &solution.values;
    solution.residual_norm = system.residual_norm(x)?;
    let law_residual = system.residual_norm_where(x, |t| t.kind.is_law())?;
    let constraint_residual = system.residual_norm_where(x, |t| !t.kind.is_law())?;
    let per_tag = system
        .tag_counts()
        .into_iter()
        .map(|(kind, _)| Ok((kind, system.residual_norm_where(x, |t| t.kind == kind)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedSolution { weight: constraint_weight, solution, law_residual, constraint_residual, per_tag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_line_ode, ConstraintPoint};
    use crate::maxfs::three_bc_fixture;

    #[test]
    fn unit_weight_is_plain_min_norm() {
        let s = three_bc_fixture();
        let w = weighted_solve(&s, 1.0).unwrap();
        assert_eq!(w.solution.values, min_norm_solve(&s).unwrap().values);
    }

    #[test]
    fn sweep_trades_law_for_constraints() {
        let s = three_bc_fixture();
        let sweep: Vec<WeightedSolution> = [1.0, 10.0, 100.0, 1000.0].iter().map(|&w| weighted_solve(&s, w).unwrap()).collect();
        for pair in sweep.windows(2) {
            assert!(pair[1].constraint_residual <= pair[0].constraint_residual);
            assert!(pair[1].law_residual >= pair[0].law_residual);
        }
    }

    #[test]
    fn consistent_system_unaffected() {
        let s = assemble_line_ode(9, &[ConstraintPoint::value(0.0, 0.0), ConstraintPoint::value(1.0, 1.0)]).unwrap();
        for w in [0.1, 1.0, 1e3] {
            let r = weighted_solve(&s, w).unwrap();
            assert!(r.law_residual <= 1e-10 && r.constraint_residual <= 1e-10);
        }
    }

    #[test]
    fn rejects_non_positive_weight() {
        assert!(weighted_solve(&three_bc_fixture(), 0.0).is_err());
    }
}
