use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, Mode, Problem, SCHEMA_VERSION};
use super::heatmap::render_heatmap;
use crate::dimension::{
    determined_region_oracle, ensemble_dimension, perimeter_scaling, RegionClass, RegionMap,
};
use crate::discretization::{
    assemble_harmonic_oscillator, assemble_second_order_ode, assemble_wave_wellposed, sine_velocity,
    zero_displacement, GridSpec, OdeGrid, ParallelogramSpec, ReflectorSpec, WaveCaseStudy,
};
use crate::ensemble::{compute_stats_with, run_ensemble, run_ensemble_cached, RunFilter, SolutionEnsemble, StatsReport};
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, GridNode, TagKind, TaggedSystem};
use crate::maxfs::{exhaustive_drop_search, run_kaczmarz, weighted_solve, write_trace_csv, KaczmarzConfig};
use crate::rng::child_seed;

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub config_hash: String,
    pub problem: Problem,
    pub mode: Mode,
    pub runs: usize,
    pub master_seed: u64,
    /// Command-line overrides as given.
    pub flags: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, Value>,
    /// Emitted files, relative to the output directory.
    pub files: Vec<String>,
    /// Solver-level problems that did not stop the run.
    pub failures: Vec<String>,
}

/// An assembled problem with whatever context its analyses need.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub system: TaggedSystem,
    pub grid: Option<GridSpec>,
    pub ode_grid: Option<OdeGrid>,
    pub truth: Option<Vec<f64>>,
    pub parallelogram: Option<ParallelogramSpec>,
    pub reflector: Option<ReflectorSpec>,
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<BuiltProblem> {
    let mut built = BuiltProblem { system: TaggedSystem::new(0), grid: None, ode_grid: None, truth: None, parallelogram: None, reflector: None };
    match cfg.problem {
        Problem::WaveWellPosed => {
            let grid = cfg.grid.to_spec()?;
            let system = assemble_wave_wellposed(&grid, zero_displacement, sine_velocity(grid.c))?;
            built.truth = Some(min_norm_solve(&system)?.values);
            built.system = system;
            built.grid = Some(grid);
        }
        Problem::WaveCaseStudy1 | Problem::WaveCaseStudy2 => {
            let grid = cfg.grid.to_spec()?;
            let reflector = match cfg.problem {
                Problem::WaveCaseStudy2 => Some(cfg.reflector.unwrap_or_else(|| ReflectorSpec::lower_half(&grid))),
                _ => cfg.reflector,
            };
            let case = WaveCaseStudy {
                grid,
                parallelogram: cfg.parallelogram.unwrap_or_else(|| ParallelogramSpec::default_for(&grid)),
                reflector,
            };
            let truth = case.ground_truth()?;
            built.system = case.assemble(&truth)?;
            built.truth = Some(truth);
            built.grid = Some(grid);
            built.parallelogram = Some(case.parallelogram);
            built.reflector = case.reflector;
        }
        Problem::LineOde | Problem::HarmonicOscillator => {
            let (n, t_max, omega) = cfg.ode.resolved(cfg.problem);
            let ode_grid = OdeGrid::new(n, t_max)?;
            built.system = if cfg.problem == Problem::LineOde {
                assemble_second_order_ode(&ode_grid, omega, &cfg.ode.constraints, TagKind::BoundaryCondition)?
            } else {
                assemble_harmonic_oscillator(n, t_max, &cfg.ode.constraints, omega)?
            };
            built.ode_grid = Some(ode_grid);
        }
    }
    Ok(built)
}

/// `t_index,x_index,value`, time-major.
pub fn write_grid_csv(path: &Path, grid: &GridSpec, values: &[f64]) -> Result<()> {
    if values.len() != grid.n_nodes() {
        return Err(Error::DimensionMismatch { expected: grid.n_nodes(), got: values.len() });
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_index,x_index,value")?;
    for n in 0..grid.n_t {
        for i in 0..grid.n_x {
            writeln!(w, "{n},{i},{}", values[grid.index(GridNode::new(i, n))])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn table(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the configured pipeline and writes its outputs plus `summary.json`
/// into `cfg.output_dir`. Solver-level shortfalls (too few converged runs,
/// for instance) are listed under `failures`; only setup and I/O problems
/// return an error.
pub fn run_experiment(cfg: &ExperimentConfig, flags: &BTreeMap<String, String>) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut out = Output { dir: cfg.output_dir.clone(), files: Vec::new() };
    let mut metrics = BTreeMap::new();
    let mut failures = Vec::new();
    let built = build_problem(cfg)?;
    metrics.insert("n_rows".into(), json!(built.system.n_rows()));
    metrics.insert("n_cols".into(), json!(built.system.n_cols()));

    match cfg.mode {
        Mode::Ensemble => ensemble_mode(cfg, &built, &mut out, &mut metrics, &mut failures)?,
        Mode::PerimeterScaling => scaling_mode(cfg, &built, &mut out, &mut metrics, &mut failures)?,
        Mode::Kaczmarz => kaczmarz_mode(cfg, &built, &mut out, &mut metrics)?,
        Mode::DropSearch => drop_mode(cfg, &built, &mut out, &mut metrics)?,
        Mode::WeightSweep => sweep_mode(cfg, &built, &mut out, &mut metrics)?,
    }

    out.files.push("summary.json".into());
    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        config_hash: cfg.hash()?,
        problem: cfg.problem,
        mode: cfg.mode,
        runs: cfg.runs,
        master_seed: cfg.master_seed,
        flags: flags.clone(),
        metrics,
        files: out.files.clone(),
        failures,
    };
    let mut w = BufWriter::new(File::create(cfg.output_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| Error::Config(format!("summary.json: {e}")))?;
    writeln!(w)?;
    w.flush()?;
    Ok(summary)
}

fn ensemble_for(cfg: &ExperimentConfig, system: &TaggedSystem) -> Result<SolutionEnsemble> {
    match &cfg.cache_dir {
        Some(dir) => run_ensemble_cached(system, cfg.runs, cfg.master_seed, &cfg.solver, dir),
        None => run_ensemble(system, cfg.runs, cfg.master_seed, &cfg.solver),
    }
}

fn filter(cfg: &ExperimentConfig) -> RunFilter {
    if cfg.stats.include_nonconverged {
        RunFilter::All
    } else {
        RunFilter::ConvergedOnly
    }
}

fn oracle_for(cfg: &ExperimentConfig, built: &BuiltProblem) -> Result<Option<RegionMap>> {
    match (built.grid, built.parallelogram) {
        (Some(grid), Some(p)) if grid.is_unit_courant() => {
            Ok(Some(determined_region_oracle(&grid, &p, built.reflector.as_ref(), &cfg.oracle)?))
        }
        _ => Ok(None),
    }
}

fn record_ensemble(ens: &SolutionEnsemble, out: &mut Output, metrics: &mut BTreeMap<String, Value>) -> Result<()> {
    ens.write_csv(&out.path("ensemble.csv"))?;
    ens.write_runs_csv(&out.path("runs.csv"))?;
    metrics.insert("converged_count".into(), json!(ens.converged_count()));
    let max_res = ens.runs.iter().map(|r| r.residual_norm).fold(0.0, f64::max);
    metrics.insert("max_residual_norm".into(), json!(max_res));
    let max_it = ens.runs.iter().map(|r| r.iterations).max().unwrap_or(0);
    metrics.insert("max_iterations_used".into(), json!(max_it));
    Ok(())
}

fn stats_or_failure(
    cfg: &ExperimentConfig,
    built: &BuiltProblem,
    ens: &SolutionEnsemble,
    failures: &mut Vec<String>,
) -> Result<Option<StatsReport>> {
    match compute_stats_with(ens, built.truth.as_deref(), filter(cfg)) {
        Ok(s) => Ok(Some(s)),
        Err(e @ Error::InsufficientData { .. }) => {
            failures.push(format!("statistics unavailable: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn ensemble_mode(
    cfg: &ExperimentConfig,
    built: &BuiltProblem,
    out: &mut Output,
    metrics: &mut BTreeMap<String, Value>,
    failures: &mut Vec<String>,
) -> Result<()> {
    let ens = ensemble_for(cfg, &built.system)?;
    record_ensemble(&ens, out, metrics)?;
    let Some(stats) = stats_or_failure(cfg, built, &ens, failures)? else {
        return Ok(());
    };
    let peak = stats.max_variance();
    metrics.insert("runs_used".into(), json!(stats.runs_used));
    metrics.insert("max_variance".into(), json!(peak));

    if let Some(grid) = built.grid {
        let mut panels = vec![("mean", stats.mean.clone()), ("variance", stats.variance.clone())];
        if let Some(err) = &stats.error_of_mean {
            metrics.insert("max_abs_error_of_mean".into(), json!(err.iter().fold(0.0f64, |a, v| a.max(v.abs()))));
            panels.push(("error_of_mean", err.clone()));
        }
        for (name, values) in &panels {
            write_grid_csv(&out.path(&format!("{name}.csv")), &grid, values)?;
            render_heatmap(values, grid.n_t, grid.n_x, &out.path(&format!("{name}.png")), &cfg.heatmap)?;
        }
        if let Some(map) = oracle_for(cfg, built)? {
            let eps = 1e-8 * peak;
            let low: Vec<bool> = stats.variance.iter().map(|&v| v <= eps).collect();
            metrics.insert("low_variance_nodes".into(), json!(low.iter().filter(|&&b| b).count()));
            map.write_csv(&out.path("region.csv"))?;
            let det = map.determined_mask();
            let agree = det.iter().zip(&low).filter(|(a, b)| a == b).count() as f64 / det.len() as f64;
            let max_det = stats.variance.iter().zip(&det).filter(|p| *p.1).map(|p| *p.0).fold(0.0, f64::max);
            metrics.insert("determined_nodes".into(), json!(map.count(RegionClass::Determined)));
            metrics.insert("one_characteristic_nodes".into(), json!(map.count(RegionClass::OneCharacteristic)));
            metrics.insert("oracle_agreement".into(), json!(agree));
            metrics.insert("max_variance_in_determined".into(), json!(max_det));
        }
    } else if let Some(ode) = built.ode_grid {
        let times = ode.times();
        out.table(
            "stats.csv",
            "index,t,mean,variance",
            (0..stats.mean.len()).map(|k| format!("{k},{},{},{}", times[k], stats.mean[k], stats.variance[k])),
        )?;
        let est = ensemble_dimension(&ens, cfg.scaling.tau_rel)?;
        metrics.insert("effective_dimension".into(), json!(est.dimension));
        metrics.insert("gap_ratio".into(), json!(est.gap_ratio()));
        let head: Vec<f64> = est.singular_values.iter().take(6).copied().collect();
        metrics.insert("leading_singular_values".into(), json!(head));
        out.table(
            "spectrum.csv",
            "index,singular_value",
            est.singular_values.iter().enumerate().map(|(k, s)| format!("{k},{s}")),
        )?;
    }
    Ok(())
}

fn scaling_mode(
    cfg: &ExperimentConfig,
    built: &BuiltProblem,
    out: &mut Output,
    metrics: &mut BTreeMap<String, Value>,
    failures: &mut Vec<String>,
) -> Result<()> {
    let grid = built.grid.ok_or_else(|| Error::Config("perimeter_scaling needs a wave problem".into()))?;
    let ens = ensemble_for(cfg, &built.system)?;
    record_ensemble(&ens, out, metrics)?;
    let map = oracle_for(cfg, built)?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &[x, t] in &cfg.scaling.centers {
        let fit = match perimeter_scaling(&ens, &grid, (x, t), &cfg.scaling.radii, cfg.scaling.tau_rel) {
            Ok(f) => f,
            Err(e @ (Error::InsufficientData { .. } | Error::EmptyPatch)) => {
                failures.push(format!("center ({x}, {t}): {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        for s in &fit.samples {
            rows.push(format!("{x},{t},{},{},{},{}", s.r, s.perimeter, s.n_points, s.dimension));
        }
        let class = map.as_ref().and_then(|m| {
            let (i, n) = (x.round(), t.round());
            (i >= 0.0 && n >= 0.0 && (i as usize) < grid.n_x && (n as usize) < grid.n_t)
                .then(|| m.get(GridNode::new(i as usize, n as usize)).as_str())
        });
        fits.push(json!({
            "center": [x, t],
            "slope": fit.slope,
            "intercept": fit.intercept,
            "dimensions": fit.samples.iter().map(|s| s.dimension).collect::<Vec<_>>(),
            "center_class": class,
        }));
    }
    out.table("scaling.csv", "center_x,center_t,r,perimeter,n_points,dimension", rows)?;
    metrics.insert("fits".into(), Value::Array(fits));
    Ok(())
}

fn ode_references(cfg: &ExperimentConfig, built: &BuiltProblem) -> Result<Vec<Vec<f64>>> {
    if cfg.kaczmarz.reference_lines.is_empty() {
        return Ok(Vec::new());
    }
    let ode = built
        .ode_grid
        .ok_or_else(|| Error::Config("kaczmarz.reference_lines needs an ODE problem".into()))?;
    Ok(cfg
        .kaczmarz
        .reference_lines
        .iter()
        .map(|&[m, c]| ode.times().iter().map(|t| m * t + c).collect())
        .collect())
}

fn kaczmarz_mode(
    cfg: &ExperimentConfig,
    built: &BuiltProblem,
    out: &mut Output,
    metrics: &mut BTreeMap<String, Value>,
) -> Result<()> {
    let refs = ode_references(cfg, built)?;
    let k = &cfg.kaczmarz;
    let results = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|run| {
            let kc = KaczmarzConfig {
                variant: k.variant,
                q: k.q,
                sample_size: k.sample_size,
                max_iters: k.max_iters,
                tol: k.tol,
                seed: child_seed(cfg.master_seed, run),
                trace_every: k.trace_every,
            };
            run_kaczmarz(&built.system, &kc, &refs)
        })
        .collect::<Result<Vec<_>>>()?;

    let width = results.len().saturating_sub(1).to_string().len().max(3);
    let mut reached = vec![0usize; refs.len()];
    let mut law_max: f64 = 0.0;
    let mut rows = Vec::new();
    for (run, res) in results.iter().enumerate() {
        write_trace_csv(&res.trace, &out.path(&format!("trace_{run:0width$}.csv")))?;
        let run_law = res.trace.iter().map(|t| t.law_residual_max).fold(0.0, f64::max);
        law_max = law_max.max(run_law);
        let last = res.trace.last().expect("trace has the start record");
        let hit = last.distances.iter().position(|&d| d <= k.reach_tol);
        if let Some(j) = hit {
            reached[j] += 1;
        }
        rows.push(format!(
            "{run},{},{},{},{},{},{},{},{}",
            res.solution.seed.unwrap_or(0),
            res.accepted_steps,
            res.rejected_steps,
            res.skipped_rows,
            if res.solution.converged() { "converged" } else { "max_iterations" },
            run_law,
            last.constraint_residual_max,
            hit.map_or(-1, |j| j as i64)
        ));
    }
    out.table(
        "kaczmarz.csv",
        "run,seed,accepted,rejected,skipped_rows,status,law_residual_max,final_constraint_residual_max,reached_reference",
        rows,
    )?;
    metrics.insert("law_residual_max".into(), json!(law_max));
    metrics.insert("reached_per_reference".into(), json!(reached));
    metrics.insert("reached_any".into(), json!(reached.iter().sum::<usize>()));
    Ok(())
}

fn drop_mode(
    cfg: &ExperimentConfig,
    built: &BuiltProblem,
    out: &mut Output,
    metrics: &mut BTreeMap<String, Value>,
) -> Result<()> {
    let report = exhaustive_drop_search(&built.system, &cfg.drop_search)?;
    let system = &built.system;
    let rows = report.candidates.iter().enumerate().map(|(c, cand)| {
        let idx: Vec<String> = cand.dropped.iter().map(|i| i.to_string()).collect();
        let kinds: Vec<&str> = cand.dropped.iter().map(|&i| system.tag(i).kind.as_str()).collect();
        format!("{c},{},{},{},{}", idx.join(" "), kinds.join(" "), cand.residual_on_kept, cand.satisfied_constraint_count)
    });
    out.table("candidates.csv", "candidate,dropped_rows,dropped_kinds,residual_on_kept,satisfied_constraint_count", rows)?;
    let sol_rows = report.candidates.iter().enumerate().flat_map(|(c, cand)| {
        cand.solution.values.iter().enumerate().map(move |(k, v)| format!("{c},{k},{v}"))
    });
    out.table("candidate_solutions.csv", "candidate,index,value", sol_rows)?;
    metrics.insert("candidates".into(), json!(report.candidates.len()));
    metrics.insert("subsets_examined".into(), json!(report.subsets_examined.to_string()));
    metrics.insert("consistent_without_drops".into(), json!(report.consistent_without_drops));
    metrics.insert("tol".into(), json!(report.tol));
    Ok(())
}

fn sweep_mode(
    cfg: &ExperimentConfig,
    built: &BuiltProblem,
    out: &mut Output,
    metrics: &mut BTreeMap<String, Value>,
) -> Result<()> {
    let results = cfg
        .weight_sweep
        .weights
        .iter()
        .map(|&w| weighted_solve(&built.system, w))
        .collect::<Result<Vec<_>>>()?;
    out.table(
        "weights.csv",
        "weight,law_residual,constraint_residual",
        results.iter().map(|r| format!("{},{},{}", r.weight, r.law_residual, r.constraint_residual)),
    )?;
    let sol_rows = results
        .iter()
        .flat_map(|r| r.solution.values.iter().enumerate().map(move |(k, v)| format!("{},{k},{v}", r.weight)));
    out.table("weight_solutions.csv", "weight,index,value", sol_rows)?;
    metrics.insert("sweep".into(), json!(results));
    Ok(())
}
