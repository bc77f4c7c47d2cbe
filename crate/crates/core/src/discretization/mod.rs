//! Assembly of tagged linear systems for the wave equation, the line ODE
//! `y'' = 0` and the harmonic oscillator.

mod grid;
mod ode;
mod wave;

pub use grid::{GridSpec, ParallelogramSpec};
pub use ode::{
    assemble_harmonic_oscillator, assemble_line_ode, assemble_second_order_ode, sample_line, ConstraintKind,
    ConstraintPoint, OdeGrid,
};
pub(crate) use wave::check_reflector;
pub use wave::{
    assemble_wave_case_study, assemble_wave_wellposed, sample_nodes, sine_velocity, zero_displacement,
    ReflectorSpec, WaveCaseStudy,
};
