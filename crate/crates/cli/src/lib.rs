//! IO companion for the cyclic max-flow library: the raw field file format,
//! image ingestion, synthetic data generation, run configuration, and the
//! drivers behind the `cmf` command-line tool.

pub mod config;
pub mod format;
pub mod images;
pub mod run;
pub mod synth;
pub mod trace;
pub mod viz;

pub use config::{InputKind, PreviewMode, RunConfig, Smoothness, SolverChoice};
pub use format::{read_field, write_cyclic, write_flow, write_spatial, AnyField, FormatError};
pub use run::{load_input, run, RunOutcome};
