//! Ensembles of randomized-start solves and their pointwise statistics.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{solve_from_seed, Solution, SolveStatus, SolverOptions, TaggedSystem};
use crate::rng::child_seed;

/// `M` solutions of one system. Run `k` was started from
/// [`child_seed`]`(master_seed, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionEnsemble {
    pub n_cols: usize,
    pub runs: Vec<Solution>,
    pub master_seed: u64,
}

impl SolutionEnsemble {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn converged_count(&self) -> usize {
        self.runs.iter().filter(|r| r.converged()).count()
    }

    /// Runs admitted by `filter`, in run order.
    pub fn selected(&self, filter: RunFilter) -> impl Iterator<Item = &Solution> {
        self.runs.iter().filter(move |r| filter.admits(r))
    }

    /// Writes one line per run with `n_cols` comma-separated values, preceded
    /// by a header `c0,c1,...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let header: Vec<String> = (0..self.n_cols).map(|j| format!("c{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for run in &self.runs {
            let line: Vec<String> = run.values.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-run metadata: `run,seed,status,iterations,residual_norm`.
    pub fn write_runs_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "run,seed,status,iterations,residual_norm")?;
        for (k, run) in self.runs.iter().enumerate() {
            let status = match run.status {
                SolveStatus::Converged => "converged",
                SolveStatus::MaxIterations => "max_iterations",
            };
            writeln!(w, "{k},{},{status},{},{}", run.seed.unwrap_or(0), run.iterations, run.residual_norm)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `m` solves in parallel. Content is independent of thread count and
/// scheduling because each run owns its seed and output slot.
///
/// A run that hits the iteration cap is kept and flagged, and a run whose
/// residual exceeds the feasibility tolerance stays `Converged` (the system
/// may be inconsistent); [`compute_stats`] decides what to include.
pub fn run_ensemble(system: &TaggedSystem, m: usize, master_seed: u64, opts: &SolverOptions) -> Result<SolutionEnsemble> {
    if m == 0 {
        return Err(Error::Config("ensemble size M must be >= 1".into()));
    }
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    opts.validate()?;
    let runs = (0..m as u64)
        .into_par_iter()
        .map(|k| solve_from_seed(system, child_seed(master_seed, k), opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionEnsemble { n_cols: system.n_cols(), runs, master_seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunFilter {
    /// Only runs that met the gradient tolerance.
    #[default]
    ConvergedOnly,
    All,
}

impl RunFilter {
    fn admits(self, run: &Solution) -> bool {
        match self {
            RunFilter::ConvergedOnly => run.converged(),
            RunFilter::All => true,
        }
    }
}

/// Pointwise ensemble statistics. `variance` is the population variance
/// (divides by the number of runs used).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// `mean - ground_truth`
    pub error_of_mean: Option<Vec<f64>>,
    pub converged_count: usize,
    pub runs_used: usize,
}

impl StatsReport {
    pub fn max_variance(&self) -> f64 {
        self.variance.iter().copied().fold(0.0, f64::max)
    }
}

/// Statistics over converged runs.
pub fn compute_stats(ens: &SolutionEnsemble, ground_truth: Option<&[f64]>) -> Result<StatsReport> {
    compute_stats_with(ens, ground_truth, RunFilter::ConvergedOnly)
}

/// Mean and population variance, shifted by the first admitted run so that
/// identical runs give a mean equal to that run and a variance of exactly 0.
pub fn compute_stats_with(ens: &SolutionEnsemble, ground_truth: Option<&[f64]>, filter: RunFilter) -> Result<StatsReport> {
    let used: Vec<&[f64]> = ens.selected(filter).map(|r| r.values.as_slice()).collect();
    if used.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: used.len() });
    }
    let n = ens.n_cols;
    if let Some(gt) = ground_truth {
        if gt.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: gt.len() });
        }
    }
    let count = used.len() as f64;
    let shift = used[0];
    let mut mean_shifted = vec![0.0; n];
    for run in &used {
        for ((m, v), s) in mean_shifted.iter_mut().zip(*run).zip(shift) {
            *m += v - s;
        }
    }
    mean_shifted.iter_mut().for_each(|m| *m /= count);
    let mut variance = vec![0.0; n];
    for run in &used {
        for (j, var) in variance.iter_mut().enumerate() {
            let d = run[j] - shift[j] - mean_shifted[j];
            *var += d * d;
        }
    }
    variance.iter_mut().for_each(|v| *v /= count);
    let mean: Vec<f64> = shift.iter().zip(&mean_shifted).map(|(s, m)| s + m).collect();
    let error_of_mean = ground_truth.map(|gt| mean.iter().zip(gt).map(|(m, g)| m - g).collect());
    Ok(StatsReport { mean, variance, error_of_mean, converged_count: ens.converged_count(), runs_used: used.len() })
}

const CACHE_MAGIC: &[u8; 8] = b"WPENS\x00\x00\x01";

/// Hex SHA-256 over the system's canonical bytes, the master seed, `M` and
/// the solver options.
pub fn cache_key(system: &TaggedSystem, m: usize, master_seed: u64, opts: &SolverOptions) -> String {
    let mut h = Sha256::new();
    system.write_canonical_bytes(&mut |b: &[u8]| h.update(b));
    h.update(master_seed.to_le_bytes());
    h.update((m as u64).to_le_bytes());
    h.update(opts.max_iterations.map_or(u64::MAX, |v| v as u64).to_le_bytes());
    h.update(opts.grad_tol.to_le_bytes());
    h.update(opts.start_scale.to_le_bytes());
    h.update(opts.tol_feasible.unwrap_or(f64::NAN).to_bits().to_le_bytes());
    hex::encode(h.finalize())
}

/// Little-endian binary dump: magic, key, `n_cols`, `M`, master seed, then
/// per run its seed, status byte, iteration count, residual and values.
pub fn write_cache(ens: &SolutionEnsemble, key: &str, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    let key_bytes = key.as_bytes();
    w.write_all(&(key_bytes.len() as u64).to_le_bytes())?;
    w.write_all(key_bytes)?;
    for v in [ens.n_cols as u64, ens.runs.len() as u64, ens.master_seed] {
        w.write_all(&v.to_le_bytes())?;
    }
    for run in &ens.runs {
        w.write_all(&run.seed.unwrap_or(0).to_le_bytes())?;
        w.write_all(&[u8::from(run.status == SolveStatus::Converged)])?;
        w.write_all(&(run.iterations as u64).to_le_bytes())?;
        w.write_all(&run.residual_norm.to_le_bytes())?;
        for v in &run.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a cache file, returning `None` when its key differs from `key`.
pub fn read_cache(path: &Path, key: &str) -> Result<Option<SolutionEnsemble>> {
    let mut r = BufReader::new(File::open(path)?);
    let corrupt = |what: &str| Error::CorruptCache(format!("{}: {what}", path.display()));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| corrupt("truncated header"))?;
    if &magic != CACHE_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let read_u64 = |r: &mut BufReader<File>| -> Result<u64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(|_| corrupt("truncated"))?;
        Ok(u64::from_le_bytes(b))
    };
    let key_len = read_u64(&mut r)? as usize;
    if key_len > 1024 {
        return Err(corrupt("key too long"));
    }
    let mut stored = vec![0u8; key_len];
    r.read_exact(&mut stored).map_err(|_| corrupt("truncated key"))?;
    if stored != key.as_bytes() {
        return Ok(None);
    }
    let n_cols = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    let master_seed = read_u64(&mut r)?;
    let mut runs = Vec::with_capacity(m);
    for _ in 0..m {
        let seed = read_u64(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag).map_err(|_| corrupt("truncated"))?;
        let iterations = read_u64(&mut r)? as usize;
        let residual_norm = f64::from_bits(read_u64(&mut r)?);
        let mut values = Vec::with_capacity(n_cols);
        for _ in 0..n_cols {
            values.push(f64::from_bits(read_u64(&mut r)?));
        }
        let status = if flag[0] == 1 { SolveStatus::Converged } else { SolveStatus::MaxIterations };
        runs.push(Solution { values, residual_norm, seed: Some(seed), status, iterations });
    }
    Ok(Some(SolutionEnsemble { n_cols, runs, master_seed }))
}

/// [`run_ensemble`] backed by a cache file in `dir` named after the key.
pub fn run_ensemble_cached(
    system: &TaggedSystem,
    m: usize,
    master_seed: u64,
    opts: &SolverOptions,
    dir: &Path,
) -> Result<SolutionEnsemble> {
    let key = cache_key(system, m, master_seed, opts);
    let path: PathBuf = dir.join(format!("ensemble-{}.bin", &key[..16]));
    if path.exists() {
        if let Some(ens) = read_cache(&path, &key)? {
            return Ok(ens);
        }
    }
    let ens = run_ensemble(system, m, master_seed, opts)?;
    std::fs::create_dir_all(dir)?;
    write_cache(&ens, &key, &path)?;
    Ok(ens)
}
