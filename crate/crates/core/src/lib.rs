//! Continuous max-flow reconstruction for images whose intensity is cyclic.
//!
//! Phase in complex-valued MRI and hue in natural colour images live on a
//! circle: the largest and smallest representable values are neighbours, so
//! treating them as an ordered line penalizes wrap-around jumps that are in
//! fact small. This crate reconstructs such images by relaxing the labeling
//! problem onto a cylinder (the spatial domain crossed with a cyclic
//! intensity axis) and solving the resulting max-flow problem.
//!
//! Two solvers are provided:
//! - [`solver::al`]: an augmented-Lagrangian primal-dual scheme that carries
//!   explicit source/sink/spatial flow variables and drives the flow
//!   conservation residual to zero.
//! - [`solver::pf`]: a pseudo-flow scheme that eliminates the flow variables
//!   analytically and alternates entropic (Bregman proximal) label updates
//!   with projected flow ascent.
//!
//! [`oracle`] holds exhaustive and dynamic-programming solvers for the
//! discrete counterpart of the model at desk scale, used as ground truth in
//! the test suites.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm` for the float math. The optional `parallel`
//! feature (implies `std`) runs the node-parallel kernels on rayon; results
//! are bit-identical at any thread count because every parallel map writes
//! each element from its index alone and all reductions stay sequential.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("cyclic-maxflow requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod data_term;
pub mod diff_ops;
mod error;
pub mod grid;
mod math;
pub mod oracle;
mod par;
pub mod solver;

pub use error::Error;
pub use grid::{CyclicScalarField, CylinderGrid, FlowField, SpatialScalarField};
pub use solver::{ConvergenceTrace, ReconstructionResult, SolverConfig, SolverKind};
