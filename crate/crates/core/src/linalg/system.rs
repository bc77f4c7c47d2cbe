use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One equation `sum_j a_j x_j = rhs` with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    entries: Vec<(usize, f64)>,
    rhs: f64,
}

impl SparseRow {
    /// Builds a row from entries in any order. Duplicate columns and rows
    /// without a single nonzero coefficient are rejected. Explicit zero
    /// coefficients are kept so stencils keep their structural shape.
    pub fn new(mut entries: Vec<(usize, f64)>, rhs: f64) -> Result<Self> {
        entries.sort_by_key(|&(c, _)| c);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidRow("duplicate column index".into()));
        }
        if !entries.iter().any(|&(_, v)| v != 0.0) {
            return Err(Error::InvalidRow("row has no nonzero coefficient".into()));
        }
        if entries.iter().any(|&(_, v)| !v.is_finite()) || !rhs.is_finite() {
            return Err(Error::InvalidRow("non-finite coefficient".into()));
        }
        Ok(Self { entries, rhs })
    }

    /// Unit coefficient at `column`.
    pub fn indicator(column: usize, rhs: f64) -> Self {
        Self { entries: vec![(column, 1.0)], rhs }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(c, v)| v * x[c]).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    /// `rhs - <a, x>`
    pub fn defect(&self, x: &[f64]) -> f64 {
        self.rhs - self.dot(x)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(c, v)| (c, v * factor)).collect(),
            rhs: self.rhs * factor,
        }
    }

    /// `y += alpha * a`
    pub fn axpy_into(&self, alpha: f64, y: &mut [f64]) {
        for &(c, v) in &self.entries {
            y[c] += alpha * v;
        }
    }
}

/// Which kind of equation a row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagKind {
    Law,
    InitialCondition,
    BoundaryCondition,
    DataConstraint,
}

impl TagKind {
    pub fn is_law(self) -> bool {
        self == TagKind::Law
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Law => "law",
            TagKind::InitialCondition => "initial_condition",
            TagKind::BoundaryCondition => "boundary_condition",
            TagKind::DataConstraint => "data_constraint",
        }
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A node of a space-time grid. ODE grids use `space = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridNode {
    pub space: usize,
    pub time: usize,
}

impl GridNode {
    pub fn new(space: usize, time: usize) -> Self {
        Self { space, time }
    }
}

/// Provenance of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowTag {
    pub kind: TagKind,
    pub location: Option<GridNode>,
}

impl RowTag {
    pub fn new(kind: TagKind, location: Option<GridNode>) -> Self {
        Self { kind, location }
    }

    pub fn at(kind: TagKind, node: GridNode) -> Self {
        Self { kind, location: Some(node) }
    }
}

/// Sparse linear system `A x = b` whose rows each carry a [`RowTag`].
///
/// Immutable once built; share it by reference across solver threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedSystem {
    n_cols: usize,
    rows: Vec<SparseRow>,
    tags: Vec<RowTag>,
}

impl TaggedSystem {
    pub fn new(n_cols: usize) -> Self {
        Self { n_cols, rows: Vec::new(), tags: Vec::new() }
    }

    pub fn push(&mut self, row: SparseRow, tag: RowTag) -> Result<()> {
        if let Some(&(column, _)) = row.entries.last() {
            if column >= self.n_cols {
                return Err(Error::ColumnOutOfRange { column, n_cols: self.n_cols });
            }
        }
        self.rows.push(row);
        self.tags.push(tag);
        Ok(())
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn tags(&self) -> &[RowTag] {
        &self.tags
    }

    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn tag(&self, i: usize) -> RowTag {
        self.tags[i]
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rhs).collect()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.entries.len()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows.iter().map(SparseRow::norm_squared).sum::<f64>().sqrt()
    }

    pub fn rhs_norm(&self) -> f64 {
        norm2_iter(self.rows.iter().map(|r| r.rhs))
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        Ok(())
    }

    /// `A x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(self.rows.iter().map(|r| r.dot(x)).collect())
    }

    /// `A^T y`
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows.len() {
            return Err(Error::DimensionMismatch { expected: self.rows.len(), got: y.len() });
        }
        let mut out = vec![0.0; self.n_cols];
        for (row, &yi) in self.rows.iter().zip(y) {
            row.axpy_into(yi, &mut out);
        }
        Ok(out)
    }

    /// Componentwise `A x - b`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(self.rows.iter().map(|r| r.dot(x) - r.rhs).collect())
    }

    pub fn residual_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(norm2(&self.residual(x)?))
    }

    /// Residual norm restricted to rows whose tag satisfies `keep`.
    pub fn residual_norm_where(&self, x: &[f64], keep: impl Fn(&RowTag) -> bool) -> Result<f64> {
        self.check_len(x)?;
        Ok(norm2_iter(
            self.rows
                .iter()
                .zip(&self.tags)
                .filter(|(_, t)| keep(t))
                .map(|(r, _)| r.dot(x) - r.rhs),
        ))
    }

    /// New system holding the rows selected by `keep(index, tag)`, in order.
    pub fn filter_rows(&self, keep: impl Fn(usize, &RowTag) -> bool) -> TaggedSystem {
        let mut out = TaggedSystem::new(self.n_cols);
        for (i, (row, tag)) in self.rows.iter().zip(&self.tags).enumerate() {
            if keep(i, tag) {
                out.rows.push(row.clone());
                out.tags.push(*tag);
            }
        }
        out
    }

    /// The rows tagged [`TagKind::Law`].
    pub fn law_block(&self) -> TaggedSystem {
        self.filter_rows(|_, t| t.kind.is_law())
    }

    /// Copy with every row scaled by `weight(tag)`.
    pub fn reweighted(&self, weight: impl Fn(&RowTag) -> f64) -> TaggedSystem {
        TaggedSystem {
            n_cols: self.n_cols,
            rows: self.rows.iter().zip(&self.tags).map(|(r, t)| r.scaled(weight(t))).collect(),
            tags: self.tags.clone(),
        }
    }

    /// Appends all rows of `other`, which must have the same column count.
    pub fn extend_from(&mut self, other: &TaggedSystem) -> Result<()> {
        if other.n_cols != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: other.n_cols });
        }
        self.rows.extend(other.rows.iter().cloned());
        self.tags.extend(other.tags.iter().copied());
        Ok(())
    }

    /// Row-major dense copy of `A`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut dense = vec![0.0; self.n_cols];
                for &(c, v) in &r.entries {
                    dense[c] = v;
                }
                dense
            })
            .collect()
    }

    /// Count of rows per tag kind, in [`TagKind`] order.
    pub fn tag_counts(&self) -> Vec<(TagKind, usize)> {
        let kinds = [
            TagKind::Law,
            TagKind::InitialCondition,
            TagKind::BoundaryCondition,
            TagKind::DataConstraint,
        ];
        kinds
            .iter()
            .map(|&k| (k, self.tags.iter().filter(|t| t.kind == k).count()))
            .filter(|&(_, n)| n > 0)
            .collect()
    }

    /// Feeds a canonical byte encoding of the system to `sink`. Used for
    /// cache keys.
    pub fn write_canonical_bytes(&self, sink: &mut impl FnMut(&[u8])) {
        sink(&(self.n_cols as u64).to_le_bytes());
        sink(&(self.rows.len() as u64).to_le_bytes());
        for (row, tag) in self.rows.iter().zip(&self.tags) {
            sink(&[tag.kind as u8]);
            sink(&(row.entries.len() as u64).to_le_bytes());
            for &(c, v) in &row.entries {
                sink(&(c as u64).to_le_bytes());
                sink(&v.to_bits().to_le_bytes());
            }
            sink(&row.rhs.to_bits().to_le_bytes());
        }
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    norm2_iter(v.iter().copied())
}

pub(crate) fn norm2_iter(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> RowTag {
        RowTag::new(TagKind::Law, None)
    }

    #[test]
    fn row_rejects_duplicates_and_all_zero() {
        assert!(SparseRow::new(vec![(1, 1.0), (1, 2.0)], 0.0).is_err());
        assert!(SparseRow::new(vec![(0, 0.0)], 0.0).is_err());
        assert!(SparseRow::new(vec![], 0.0).is_err());
        let r = SparseRow::new(vec![(3, 1.0), (0, 0.0), (1, -2.0)], 4.0).unwrap();
        assert_eq!(r.entries(), &[(0, 0.0), (1, -2.0), (3, 1.0)]);
    }

    #[test]
    fn push_checks_column_bounds() {
        let mut s = TaggedSystem::new(2);
        assert!(matches!(
            s.push(SparseRow::indicator(2, 0.0), law()),
            Err(Error::ColumnOutOfRange { column: 2, n_cols: 2 })
        ));
    }

    #[test]
    fn residual_of_empty_system_is_empty() {
        let s = TaggedSystem::new(3);
        assert!(s.residual(&[1.0, 2.0, 3.0]).unwrap().is_empty());
    }

    #[test]
    fn residual_exact_satisfaction() {
        let mut s = TaggedSystem::new(1);
        s.push(SparseRow::indicator(0, 1.0), law()).unwrap();
        assert_eq!(s.residual(&[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn residual_hand_arithmetic() {
        let mut s = TaggedSystem::new(2);
        s.push(SparseRow::new(vec![(0, 2.0), (1, -1.0)], 0.0).unwrap(), law()).unwrap();
        assert_eq!(s.residual(&[1.0, 1.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn residual_length_mismatch() {
        let s = TaggedSystem::new(2);
        assert!(matches!(s.residual(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn transpose_matches_dense() {
        let mut s = TaggedSystem::new(3);
        s.push(SparseRow::new(vec![(0, 1.0), (2, 2.0)], 0.0).unwrap(), law()).unwrap();
        s.push(SparseRow::new(vec![(1, -1.0), (2, 3.0)], 0.0).unwrap(), law()).unwrap();
        let y = [2.0, -1.0];
        assert_eq!(s.apply_transpose(&y).unwrap(), vec![2.0, 1.0, 1.0]);
    }
}
