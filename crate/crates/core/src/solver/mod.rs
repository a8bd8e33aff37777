//! Solver configuration, convergence traces, and results shared by the
//! augmented-Lagrangian and pseudo-flow schemes.

use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{CyclicScalarField, SpatialScalarField};

pub mod al;
pub mod pf;

/// Which solver produced a result or trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Augmented-Lagrangian with explicit source/sink/spatial flows.
    AugmentedLagrangian,
    /// Bregman-proximal pseudo-flow.
    PseudoFlow,
}

/// Optional geometric annealing of the proximal weight `c` (pseudo-flow
/// only): each iteration multiplies `c` by `factor` down to `floor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annealing {
    pub factor: f64,
    pub floor: f64,
}

/// Iteration controls shared by both solvers. `tolerance` is compared
/// against the mean conservation residual |G| for the augmented-Lagrangian
/// scheme and against the maximum per-node label change for the pseudo-flow
/// scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Augmentation weight (AL) or proximal/softmin temperature (PF).
    pub c: f64,
    /// Descent step of the projected flow update.
    pub tau: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    /// Record a trace point every this many iterations (the final iteration
    /// is always recorded).
    pub log_every: usize,
    /// Geometric schedule for `c`; ignored by the AL solver.
    pub c_anneal: Option<Annealing>,
}

impl SolverConfig {
    /// Defaults for the augmented-Lagrangian solver.
    pub fn augmented_lagrangian() -> Self {
        Self {
            c: 0.25,
            tau: 0.1,
            max_iters: 5000,
            tolerance: 1e-3,
            log_every: 10,
            c_anneal: None,
        }
    }

    /// Defaults for the pseudo-flow solver.
    pub fn pseudo_flow() -> Self {
        Self {
            c: 0.1,
            tau: 0.1,
            max_iters: 5000,
            tolerance: 1e-6,
            log_every: 10,
            c_anneal: None,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), Error> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::BadConfig("c must be positive and finite"));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::BadConfig("tau must be positive and finite"));
        }
        if self.max_iters < 1 {
            return Err(Error::BadConfig("max_iters must be at least 1"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::BadConfig("tolerance must be non-negative"));
        }
        if self.log_every < 1 {
            return Err(Error::BadConfig("log_every must be at least 1"));
        }
        if let Some(a) = self.c_anneal {
            if !(a.factor > 0.0 && a.factor <= 1.0) {
                return Err(Error::BadConfig("anneal factor must be in (0, 1]"));
            }
            if !(a.floor > 0.0) || !a.floor.is_finite() {
                return Err(Error::BadConfig("anneal floor must be positive"));
            }
        }
        Ok(())
    }
}

/// Solver-specific residual pair carried by each trace record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TraceMetrics {
    /// Mean and max of the flow conservation residual |G|.
    Al { mean_g: f64, max_g: f64 },
    /// Pseudo-flow objective `sum_x min_theta (D + div q)` and the maximum
    /// per-node label change of the iteration.
    Pf { objective: f64, max_du: f64 },
}

/// One logged iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Primal energy of the current labeling (clipped to u >= 0 for the AL
    /// solver, whose multiplier may transiently go negative).
    pub energy: f64,
    pub metrics: TraceMetrics,
    /// Worst per-voxel normalization error `max_v |integral(u) - 1|`.
    pub norm_err: f64,
}

/// Convergence log of a solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace {
    pub solver: SolverKind,
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    /// CSV column names for this solver's records.
    pub fn column_names(&self) -> [&'static str; 5] {
        match self.solver {
            SolverKind::AugmentedLagrangian => {
                ["iteration", "energy", "mean_G", "max_G", "norm_err"]
            }
            SolverKind::PseudoFlow => ["iteration", "energy", "pf_objective", "max_du", "norm_err"],
        }
    }

    /// The two metric values of a record in column order.
    pub fn metric_values(record: &TraceRecord) -> (f64, f64) {
        match record.metrics {
            TraceMetrics::Al { mean_g, max_g } => (mean_g, max_g),
            TraceMetrics::Pf { objective, max_du } => (objective, max_du),
        }
    }
}

/// Worst per-voxel deviation of the theta integral of `u` from 1.
pub(crate) fn normalization_error(u: &CyclicScalarField) -> f64 {
    let dt = u.grid().delta_theta();
    let mut worst = 0.0;
    for v in 0..u.grid().num_voxels() {
        let mut acc = 0.0;
        for &x in u.theta_slice(v) {
            acc += x;
        }
        let err = crate::math::abs(acc * dt - 1.0);
        if err > worst {
            worst = err;
        }
    }
    worst
}

/// Output of a solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    /// Reconstructed angle per voxel (argmax bin center, in [-pi, pi)).
    pub labels: SpatialScalarField,
    /// Final labeling density.
    pub final_u: CyclicScalarField,
    pub trace: ConvergenceTrace,
    /// Whether the stopping tolerance was met within `max_iters`.
    pub converged: bool,
    /// Echo of the configuration the run used.
    pub config: SolverConfig,
}
