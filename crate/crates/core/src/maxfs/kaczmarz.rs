use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use super::weighting::contradiction_tol;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, AffineProjector, Solution, SolveStatus, SparseRow, TaggedSystem};
use crate::rng::{child_seed, normal_vector, rng_from_seed, ProbeRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KaczmarzVariant {
    #[default]
    Plain,
    Quantile,
    QuantileSubspaceConstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KaczmarzConfig {
    pub variant: KaczmarzVariant,
    /// Quantile level in (0, 1].
    pub q: f64,
    /// Rows per quantile sample; `None` means `min(30, pool size)`.
    pub sample_size: Option<usize>,
    pub max_iters: usize,
    /// Step size under which the iterate counts as stationary; `None` means
    /// `1e-8 (1 + ||b||)`.
    pub tol: Option<f64>,
    pub seed: u64,
    /// Record a trace entry every this many iterations.
    pub trace_every: usize,
}

impl Default for KaczmarzConfig {
    fn default() -> Self {
        Self {
            variant: KaczmarzVariant::Plain,
            q: 0.7,
            sample_size: None,
            max_iters: 5000,
            tol: None,
            seed: 0,
            trace_every: 1,
        }
    }
}

impl KaczmarzConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::Config(format!("kaczmarz.q must lie in (0, 1], got {}", self.q)));
        }
        if self.sample_size == Some(0) {
            return Err(Error::Config("kaczmarz.sample_size must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("kaczmarz.max_iters must be >= 1".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::Config("kaczmarz.trace_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Projection of `x` onto the hyperplane of one row:
/// `x + (b_i - <a_i, x>) / ||a_i||^2 a_i`.
pub fn kaczmarz_step(system: &TaggedSystem, x: &[f64], row_index: usize) -> Result<Vec<f64>> {
    if row_index >= system.n_rows() {
        return Err(Error::InvalidRow(format!("row {row_index} out of {}", system.n_rows())));
    }
    if x.len() != system.n_cols() {
        return Err(Error::DimensionMismatch { expected: system.n_cols(), got: x.len() });
    }
    let row = system.row(row_index);
    let nsq = row.norm_squared();
    if nsq == 0.0 {
        return Err(Error::DegenerateRow(row_index));
    }
    let mut out = x.to_vec();
    row.axpy_into(row.defect(x) / nsq, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub law_residual_max: f64,
    pub constraint_residual_median: f64,
    pub constraint_residual_max: f64,
    /// Euclidean distance to each reference vector.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaczmarzRun {
    pub solution: Solution,
    pub trace: Vec<TraceRecord>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Constraint rows left out because their law-null-space component is
    /// zero (subspace-constrained variant only).
    pub skipped_rows: usize,
}

/// One Kaczmarz direction: the row itself, or its law-null-space component.
enum Direction {
    Sparse,
    Dense(Vec<f64>),
}

struct Pool {
    rows: Vec<usize>,
    dirs: Vec<Direction>,
    norms_sq: Vec<f64>,
}

impl Pool {
    fn distance(&self, system: &TaggedSystem, k: usize, x: &[f64]) -> f64 {
        system.row(self.rows[k]).defect(x).abs() / self.norms_sq[k].sqrt()
    }

    fn step(&self, system: &TaggedSystem, k: usize, x: &mut [f64]) -> f64 {
        let row: &SparseRow = system.row(self.rows[k]);
        let alpha = row.defect(x) / self.norms_sq[k];
        match &self.dirs[k] {
            Direction::Sparse => {
                row.axpy_into(alpha, x);
                alpha.abs() * self.norms_sq[k].sqrt()
            }
            Direction::Dense(d) => {
                for (xi, di) in x.iter_mut().zip(d) {
                    *xi += alpha * di;
                }
                alpha.abs() * self.norms_sq[k].sqrt()
            }
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn record(system: &TaggedSystem, x: &[f64], iteration: usize, references: &[Vec<f64>]) -> TraceRecord {
    let mut law_max: f64 = 0.0;
    let mut cons = Vec::new();
    for (row, tag) in system.rows().iter().zip(system.tags()) {
        let d = row.defect(x).abs();
        if tag.kind.is_law() {
            law_max = law_max.max(d);
        } else {
            cons.push(d);
        }
    }
    let cons_max = cons.iter().copied().fold(0.0, f64::max);
    let distances = references
        .iter()
        .map(|r| norm2(&x.iter().zip(r).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect();
    TraceRecord {
        iteration,
        law_residual_max: law_max,
        constraint_residual_median: median(cons),
        constraint_residual_max: cons_max,
        distances,
    }
}

/// Randomized Kaczmarz from a normal random start.
///
/// * `Plain` picks rows with probability proportional to `||a_i||^2`.
/// * `Quantile` picks a row the same way, then draws `sample_size - 1`
///   further rows uniformly without replacement. The step is taken only if
///   the picked row's distance `|r_i| / ||a_i||` is at most the `q`-quantile
///   of the sample's distances; otherwise it is rejected. With `q = 1` every
///   step is accepted and the iterates equal those of `Plain`.
/// * `QuantileSubspaceConstrained` first projects the start onto the law
///   rows' solution set and then uses only non-law rows, each replaced by its
///   component `P a_i` in the null space of the law block. Steps never leave
///   the law solution set. Rows with `P a_i = 0` are skipped and counted.
///
/// The solution is `Converged` when every step in the last tenth of the
/// iterations moved the iterate by at most `tol`.
pub fn run_kaczmarz(system: &TaggedSystem, cfg: &KaczmarzConfig, references: &[Vec<f64>]) -> Result<KaczmarzRun> {
    cfg.validate()?;
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    let n = system.n_cols();
    if let Some(r) = references.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: r.len() });
    }
    let tol = cfg.tol.unwrap_or_else(|| contradiction_tol(system));
    let mut x = normal_vector(&mut rng_from_seed(child_seed(cfg.seed, 0)), n, 1.0);
    let mut skipped_rows = 0;

    let pool = match cfg.variant {
        KaczmarzVariant::Plain | KaczmarzVariant::Quantile => {
            let rows: Vec<usize> = (0..system.n_rows()).collect();
            let norms_sq = rows.iter().map(|&i| system.row(i).norm_squared()).collect();
            Pool { dirs: rows.iter().map(|_| Direction::Sparse).collect(), rows, norms_sq }
        }
        KaczmarzVariant::QuantileSubspaceConstrained => {
            let law = system.law_block();
            if law.is_empty() {
                return Err(Error::Config("subspace-constrained Kaczmarz needs law rows".into()));
            }
            let projector = AffineProjector::new(&law, contradiction_tol(&law))?;
            x = projector.project(&x)?;
            let dense = system.to_dense();
            let mut pool = Pool { rows: Vec::new(), dirs: Vec::new(), norms_sq: Vec::new() };
            for i in (0..system.n_rows()).filter(|&i| !system.tag(i).kind.is_law()) {
                let pa = projector.project_direction(&dense[i]);
                let nsq = dot(&pa, &pa);
                // relative to ||a_i||^2; anything this small is round-off
                if nsq <= 1e-24 * system.row(i).norm_squared() {
                    skipped_rows += 1;
                    continue;
                }
                pool.rows.push(i);
                pool.dirs.push(Direction::Dense(pa));
                pool.norms_sq.push(nsq);
            }
            pool
        }
    };

    let mut trace = vec![record(system, &x, 0, references)];
    let (mut accepted, mut rejected) = (0, 0);
    if pool.rows.is_empty() {
        let residual_norm = system.residual_norm(&x)?;
        let solution = Solution { values: x, residual_norm, seed: Some(cfg.seed), status: SolveStatus::Converged, iterations: 0 };
        return Ok(KaczmarzRun { solution, trace, accepted_steps: 0, rejected_steps: 0, skipped_rows });
    }
    let picker = WeightedIndex::new(&pool.norms_sq).map_err(|e| Error::Config(format!("row weights: {e}")))?;
    let mut pick_rng: ProbeRng = rng_from_seed(child_seed(cfg.seed, 1));
    let mut sample_rng: ProbeRng = rng_from_seed(child_seed(cfg.seed, 2));
    let sample_size = cfg.sample_size.unwrap_or(30).min(pool.rows.len());
    let tail_start = cfg.max_iters - (cfg.max_iters / 10).max(1);
    let mut tail_max_step: f64 = 0.0;
    let mut distances = Vec::with_capacity(sample_size);

    for it in 1..=cfg.max_iters {
        let k = picker.sample(&mut pick_rng);
        let take = match cfg.variant {
            KaczmarzVariant::Plain => true,
            _ => {
                let own = pool.distance(system, k, &x);
                distances.clear();
                distances.push(own);
                let others = pool.rows.len() - 1;
                for j in sample_indices(&mut sample_rng, others, (sample_size - 1).min(others)) {
                    let j = if j >= k { j + 1 } else { j };
                    distances.push(pool.distance(system, j, &x));
                }
                distances.sort_by(f64::total_cmp);
                let idx = ((cfg.q * distances.len() as f64).ceil() as usize).clamp(1, distances.len()) - 1;
                own <= distances[idx]
            }
        };
        if take {
            let moved = pool.step(system, k, &mut x);
            accepted += 1;
            if it > tail_start {
                tail_max_step = tail_max_step.max(moved);
            }
        } else {
            rejected += 1;
        }
        if it % cfg.trace_every == 0 || it == cfg.max_iters {
            trace.push(record(system, &x, it, references));
        }
    }

    let status = if tail_max_step <= tol { SolveStatus::Converged } else { SolveStatus::MaxIterations };
    let residual_norm = system.residual_norm(&x)?;
    let solution = Solution { values: x, residual_norm, seed: Some(cfg.seed), status, iterations: cfg.max_iters };
    Ok(KaczmarzRun { solution, trace, accepted_steps: accepted, rejected_steps: rejected, skipped_rows })
}

/// `iteration,law_residual_max,constraint_residual_median,constraint_residual_max,distance_0,...`
pub fn write_trace_csv(trace: &[TraceRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n_ref = trace.first().map_or(0, |t| t.distances.len());
    let mut header = String::from("iteration,law_residual_max,constraint_residual_median,constraint_residual_max");
    for j in 0..n_ref {
        header.push_str(&format!(",distance_{j}"));
    }
    writeln!(w, "{header}")?;
    for t in trace {
        write!(w, "{},{},{},{}", t.iteration, t.law_residual_max, t.constraint_residual_median, t.constraint_residual_max)?;
        for d in &t.distances {
            write!(w, ",{d}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
