//! Config-driven pipelines: assemble a problem, run the selected analysis
//! and write CSV tables, heatmaps and a `summary.json`.

mod config;
mod heatmap;
mod runner;

pub use config::{
    ExperimentConfig, GridConfig, KaczmarzSection, Mode, OdeConfig, Problem, ScalingConfig, StatsConfig,
    WeightSweepConfig, SCHEMA_VERSION,
};
pub use heatmap::{colormap, render_heatmap, ColorScale, HeatmapOptions};
pub use runner::{build_problem, run_experiment, write_grid_csv, BuiltProblem, RunSummary};
