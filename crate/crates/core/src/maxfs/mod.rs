//! Overconstrained and contradictory systems: constraint reweighting,
//! exhaustive row-drop search and randomized Kaczmarz iterations.

mod drop_search;
mod fixtures;
mod kaczmarz;
mod weighting;

pub use drop_search::{exhaustive_drop_search, DropCandidate, DropSearchConfig, Droppable, MaxfsReport, DEFAULT_BUDGET};
pub use fixtures::{second_difference, three_bc_fixture, two_line_fixture, TwoLineFixture};
pub use kaczmarz::{
    kaczmarz_step, run_kaczmarz, write_trace_csv, KaczmarzConfig, KaczmarzRun, KaczmarzVariant, TraceRecord,
};
pub use weighting::{contradiction_tol, weighted_solve, WeightedSolution};
