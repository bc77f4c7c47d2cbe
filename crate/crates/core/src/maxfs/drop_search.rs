use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weighting::contradiction_tol;
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, RowTag, Solution, TaggedSystem};

pub const DEFAULT_BUDGET: u128 = 100_000;

/// Which rows a drop search may remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Droppable {
    /// Every non-law row.
    #[default]
    Constraints,
    Law,
    Any,
}

impl Droppable {
    fn admits(self, tag: &RowTag) -> bool {
        match self {
            Droppable::Constraints => !tag.kind.is_law(),
            Droppable::Law => tag.kind.is_law(),
            Droppable::Any => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DropSearchConfig {
    /// Largest subset size tried.
    pub k: usize,
    pub droppable: Droppable,
    /// Consistency tolerance; `None` means `1e-8 (1 + ||b||)`.
    pub tol: Option<f64>,
    /// Refuse to enumerate more subsets than this.
    pub budget: u128,
}

impl Default for DropSearchConfig {
    fn default() -> Self {
        Self { k: 1, droppable: Droppable::Constraints, tol: None, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropCandidate {
    /// Row indices into the searched system, ascending.
    pub dropped: Vec<usize>,
    #[serde(skip)]
    pub solution: Solution,
    pub residual_on_kept: f64,
    /// Non-law rows of the full system satisfied to within the tolerance.
    pub satisfied_constraint_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxfsReport {
    pub tol: f64,
    pub subsets_examined: u128,
    /// Whether the full system is already consistent.
    pub consistent_without_drops: bool,
    pub candidates: Vec<DropCandidate>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn subset_count(n: usize, k: usize) -> u128 {
    (1..=k.min(n)).fold(0u128, |acc, s| acc.saturating_add(binomial(n, s)))
}

/// All subsets of `pool` with 1..=k elements, by size then lexicographically.
fn subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=k.min(pool.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&i| pool[i]).collect());
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < pool.len() - size + p) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

/// Tries every removal of 1..=k droppable rows and reports each subset whose
/// removal leaves a consistent system. Subsets are solved in parallel; the
/// report lists them by size, then lexicographically.
pub fn exhaustive_drop_search(system: &TaggedSystem, cfg: &DropSearchConfig) -> Result<MaxfsReport> {
    if cfg.k == 0 {
        return Err(Error::Config("drop_search.k must be >= 1".into()));
    }
    let tol = cfg.tol.unwrap_or_else(|| contradiction_tol(system));
    let pool: Vec<usize> = (0..system.n_rows()).filter(|&i| cfg.droppable.admits(&system.tag(i))).collect();
    let total = subset_count(pool.len(), cfg.k);
    if total > cfg.budget {
        return Err(Error::BudgetExceeded { subsets: total, budget: cfg.budget });
    }
    let consistent_without_drops = min_norm_solve(system)?.residual_norm <= tol;
    let candidates = subsets(&pool, cfg.k)
        .into_par_iter()
        .map(|dropped| evaluate(system, dropped, tol))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(MaxfsReport { tol, subsets_examined: total, consistent_without_drops, candidates })
}

fn evaluate(system: &TaggedSystem, dropped: Vec<usize>, tol: f64) -> Result<Option<DropCandidate>> {
    let kept = system.filter_rows(|i, _| dropped.binary_search(&i).is_err());
    if kept.is_empty() {
        return Ok(None);
    }
    let solution = min_norm_solve(&kept)?;
    if solution.residual_norm > tol {
        return Ok(None);
    }
    let satisfied_constraint_count = (0..system.n_rows())
        .filter(|&i| !system.tag(i).kind.is_law() && system.row(i).defect(&solution.values).abs() <= tol)
        .count();
    Ok(Some(DropCandidate { residual_on_kept: solution.residual_norm, dropped, solution, satisfied_constraint_count }))
}
