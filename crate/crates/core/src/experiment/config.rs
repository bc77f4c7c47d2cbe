//! Declarative experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::heatmap::HeatmapOptions;
use crate::dimension::{OracleConfig, DEFAULT_TAU_REL};
use crate::discretization::{ConstraintPoint, GridSpec, ParallelogramSpec, ReflectorSpec};
use crate::error::{Error, Result};
use crate::linalg::SolverOptions;
use crate::maxfs::{DropSearchConfig, KaczmarzVariant};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    WaveWellPosed,
    /// Parallelogram data only.
    WaveCaseStudy1,
    /// Parallelogram data plus a left-wall reflector.
    WaveCaseStudy2,
    LineOde,
    HarmonicOscillator,
}

impl Problem {
    pub fn is_wave(self) -> bool {
        matches!(self, Problem::WaveWellPosed | Problem::WaveCaseStudy1 | Problem::WaveCaseStudy2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    Ensemble,
    Kaczmarz,
    DropSearch,
    WeightSweep,
    PerimeterScaling,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ensemble => "ensemble",
            Mode::Kaczmarz => "kaczmarz",
            Mode::DropSearch => "drop_search",
            Mode::WeightSweep => "weight_sweep",
            Mode::PerimeterScaling => "perimeter_scaling",
        }
    }
}

/// Wave grid. Omitted fields give `[0, 1]`, `c = 1` and the `t_max` that
/// makes `c dt / dx = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_x: usize,
    pub n_t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_x: 30, n_t: 60, x_min: None, x_max: None, t_max: None, c: None }
    }
}

impl GridConfig {
    pub fn to_spec(&self) -> Result<GridSpec> {
        let x_min = self.x_min.unwrap_or(0.0);
        let x_max = self.x_max.unwrap_or(1.0);
        let c = self.c.unwrap_or(1.0);
        if self.n_x < 3 || self.n_t < 3 {
            return Err(Error::Config(format!("grid.n_x and grid.n_t must be >= 3, got {}x{}", self.n_x, self.n_t)));
        }
        let t_max = self
            .t_max
            .unwrap_or((self.n_t - 1) as f64 * (x_max - x_min) / ((self.n_x - 1) as f64 * c));
        GridSpec::new(self.n_x, self.n_t, x_min, x_max, t_max, c)
    }
}

/// Scalar ODE settings. Unset fields default per problem: the line ODE uses
/// 9 interior nodes on `[0, 1]` with `omega = 0`, the oscillator 200 nodes on
/// `[0, 10]` with `omega = 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    /// Interior node count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub constraints: Vec<ConstraintPoint>,
}

impl OdeConfig {
    pub fn resolved(&self, problem: Problem) -> (usize, f64, f64) {
        let (n, t_max, omega) = match problem {
            Problem::HarmonicOscillator => (200, 10.0, 1.0),
            _ => (9, 1.0, 0.0),
        };
        (self.n.unwrap_or(n), self.t_max.unwrap_or(t_max), self.omega.unwrap_or(omega))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    /// Patch centers `[x, t]` in grid-index units.
    pub centers: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
    pub tau_rel: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            centers: vec![[15.0, 45.0], [10.0, 20.0]],
            radii: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            tau_rel: DEFAULT_TAU_REL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KaczmarzSection {
    pub variant: KaczmarzVariant,
    pub q: f64,
    pub sample_size: Option<usize>,
    pub max_iters: usize,
    pub tol: Option<f64>,
    pub trace_every: usize,
    /// Known solution lines `[slope, intercept]` of the line ODE; traces
    /// record the distance to each and the summary counts which one each run
    /// reaches.
    pub reference_lines: Vec<[f64; 2]>,
    /// Distance under which a run counts as having reached a reference.
    pub reach_tol: f64,
}

impl Default for KaczmarzSection {
    fn default() -> Self {
        Self {
            variant: KaczmarzVariant::QuantileSubspaceConstrained,
            q: 0.7,
            sample_size: None,
            max_iters: 3000,
            tol: None,
            trace_every: 1,
            reference_lines: Vec::new(),
            reach_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSweepConfig {
    pub weights: Vec<f64>,
}

impl Default for WeightSweepConfig {
    fn default() -> Self {
        Self { weights: vec![1.0, 10.0, 100.0, 1000.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    /// Include runs that hit the iteration cap.
    pub include_nonconverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: Problem,
    pub mode: Mode,
    /// Ensemble size, or number of Kaczmarz seeds.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelogram: Option<ParallelogramSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflector: Option<ReflectorSpec>,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub stats: StatsConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub kaczmarz: KaczmarzSection,
    #[serde(default)]
    pub drop_search: DropSearchConfig,
    #[serde(default)]
    pub weight_sweep: WeightSweepConfig,
    #[serde(default)]
    pub heatmap: HeatmapOptions,
    /// Directory for binary ensemble caches; no caching when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

fn default_runs() -> usize {
    200
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML form, ignoring the output and cache
    /// directories.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.cache_dir = None;
        Ok(hex::encode(Sha256::digest(canonical.to_toml_string()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        self.solver.validate()?;
        if self.problem.is_wave() {
            self.grid.to_spec()?;
        } else {
            let (n, t_max, omega) = self.ode.resolved(self.problem);
            if n == 0 || !(t_max > 0.0) || !omega.is_finite() {
                return Err(Error::Config("ode needs n >= 1, t_max > 0 and a finite omega".into()));
            }
            if self.problem == Problem::LineOde && omega != 0.0 {
                return Err(Error::Config("ode.omega must be 0 for line_ode".into()));
            }
        }
        let needs_variance = matches!(self.mode, Mode::Ensemble | Mode::PerimeterScaling);
        if needs_variance && self.runs < 2 {
            return Err(Error::Config(format!("runs must be >= 2 for mode {}, got {}", self.mode.as_str(), self.runs)));
        }
        match self.mode {
            Mode::PerimeterScaling => {
                if !self.problem.is_wave() {
                    return Err(Error::Config("mode perimeter_scaling needs a wave problem".into()));
                }
                if self.scaling.radii.len() < 3 {
                    return Err(Error::Config("scaling.radii needs at least 3 entries".into()));
                }
                if self.scaling.centers.is_empty() {
                    return Err(Error::Config("scaling.centers must not be empty".into()));
                }
            }
            Mode::Kaczmarz | Mode::DropSearch | Mode::WeightSweep => {
                if self.mode == Mode::WeightSweep
                    && (self.weight_sweep.weights.is_empty() || self.weight_sweep.weights.iter().any(|&w| !(w > 0.0)))
                {
                    return Err(Error::Config("weight_sweep.weights must be non-empty and positive".into()));
                }
                if !(self.kaczmarz.q > 0.0 && self.kaczmarz.q <= 1.0) {
                    return Err(Error::Config("kaczmarz.q must lie in (0, 1]".into()));
                }
            }
            Mode::Ensemble => {}
        }
        Ok(())
    }
}
