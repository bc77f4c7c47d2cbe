//! Probe the well-posedness of discretized differential equations.
//!
//! A discretized problem is a [`linalg::TaggedSystem`]: a sparse linear system
//! whose rows know whether they encode the differential law, an initial or
//! boundary condition, or an observed data value. Solving it many times from
//! random start points ([`ensemble`]) samples its solution set; pointwise
//! variance and local PCA dimension ([`dimension`]) reveal where the data
//! determine the solution and how much freedom remains elsewhere.
//! Overconstrained systems are examined by reweighting, exhaustive row-drop
//! search and randomized Kaczmarz variants ([`maxfs`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod discretization;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod maxfs;
pub mod rng;

pub use error::{Error, Result};
