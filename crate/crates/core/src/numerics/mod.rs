//! Generic numerical building blocks: dense normal-equation solves, a
//! damped least-squares solver and golden-section search.

pub mod golden;
pub mod linalg;
pub mod lsq;

pub use golden::{golden_section_max, grid_then_golden_max};
pub use lsq::{nonlinear_least_squares, FitParam, FitResult, LsqOptions, ResidualModel, Termination};
