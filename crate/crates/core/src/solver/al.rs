//! Augmented-Lagrangian solver.
//!
//! Carries the full primal-dual state: the labeling density `u` acting as a
//! Lagrange multiplier on flow conservation, sink flows bounded by the data
//! cost, a source flow per voxel, and the spatial/cyclic flow `q` bounded by
//! the smoothness cost. Each iteration applies four whole-field updates in a
//! fixed order:
//!
//! 1. Chambolle-style projected ascent of `q` with step `tau`;
//! 2. sink flow capped at `D`;
//! 3. closed-form source flow from the theta integral;
//! 4. multiplier descent on the conservation residual with weight `c`.
//!
//! Within each step every node reads only values completed by earlier steps
//! (Jacobi semantics), so parallel execution is deterministic. `u` is not
//! clipped during iteration - the multiplier may transiently leave the
//! simplex; normalization and positivity hold at the saddle point and are
//! reported in the trace, with clipping applied only for energy reporting.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::data_term::{self, energy_parts};
use crate::diff_ops::{divergence_into, gradient_into, project_in_place};
use crate::error::Error;
use crate::grid::{CyclicScalarField, CylinderGrid, FlowField, SpatialScalarField};
use crate::math;
use crate::par;
use crate::solver::{
    normalization_error, ConvergenceTrace, ReconstructionResult, SolverConfig, SolverKind,
    TraceMetrics, TraceRecord,
};

/// Full primal-dual state of the augmented-Lagrangian iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct AlState {
    /// Labeling density / Lagrange multiplier.
    pub u: CyclicScalarField,
    /// Sink flow, capped node-wise by the data cost.
    pub p_sink: CyclicScalarField,
    /// Source flow per voxel.
    pub p_source: SpatialScalarField,
    /// Spatial/cyclic flow, capped node-wise by the smoothness cost.
    pub q: FlowField,
}

impl AlState {
    /// The solver's starting point: uniform `u = 1/(2*pi)`, zero spatial
    /// flow, and source/sink flows at the per-voxel minimum of the data
    /// cost, so the sink capacity constraint is feasible from the first
    /// step.
    pub fn initial(d: &CyclicScalarField) -> Self {
        let grid = d.grid();
        let mut p_source = SpatialScalarField::zeros(grid);
        for (v, o) in p_source.values_mut().iter_mut().enumerate() {
            let slice = d.theta_slice(v);
            let mut m = slice[0];
            for &x in &slice[1..] {
                if x < m {
                    m = x;
                }
            }
            *o = m;
        }
        let mut p_sink = CyclicScalarField::zeros(grid);
        let n_theta = grid.n_theta();
        for (node, o) in p_sink.values_mut().iter_mut().enumerate() {
            *o = p_source.values()[node / n_theta];
        }
        Self {
            u: CyclicScalarField::uniform_indicator(grid),
            p_sink,
            p_source,
            q: FlowField::zeros(grid),
        }
    }

    fn grid(&self) -> &CylinderGrid {
        self.u.grid()
    }

    fn check_consistent(&self) {
        assert_eq!(
            self.u.grid(),
            self.p_sink.grid(),
            "state fields on different grids"
        );
        assert_eq!(
            self.u.grid(),
            self.p_source.grid(),
            "state fields on different grids"
        );
        assert_eq!(
            self.u.grid(),
            self.q.grid(),
            "state fields on different grids"
        );
    }
}

/// Flow conservation residual `G = div q + p_sink - p_source` (the source
/// flow broadcast over theta). Zero everywhere at a feasible max-flow.
pub fn residual_g(state: &AlState) -> Result<CyclicScalarField, Error> {
    if state.u.grid() != state.p_sink.grid()
        || state.u.grid() != state.p_source.grid()
        || state.u.grid() != state.q.grid()
    {
        return Err(Error::GridMismatch);
    }
    let grid = state.grid();
    let mut g = CyclicScalarField::zeros(grid);
    divergence_into(&state.q, g.values_mut());
    let n_theta = grid.n_theta();
    let p_sink = state.p_sink.values();
    let p_source = state.p_source.values();
    par::update_indexed(g.values_mut(), |node, div| {
        div + p_sink[node] - p_source[node / n_theta]
    });
    Ok(g)
}

struct Workspace {
    div_q: Vec<f64>,
    arg: Vec<f64>,
    grad: FlowField,
    clipped_u: Vec<f64>,
}

impl Workspace {
    fn new(grid: &CylinderGrid) -> Self {
        let n = grid.num_nodes();
        Self {
            div_q: vec![0.0; n],
            arg: vec![0.0; n],
            grad: FlowField::zeros(grid),
            clipped_u: vec![0.0; n],
        }
    }
}

/// One full four-step iteration; leaves `ws.div_q` holding the divergence of
/// the updated flow so the caller can form the residual without recomputing.
fn step(state: &mut AlState, ws: &mut Workspace, d: &[f64], s: &[f64], cfg: &SolverConfig) {
    let grid = state.u.grid().clone();
    let n_theta = grid.n_theta();
    let dt = grid.delta_theta();
    let c = cfg.c;
    let tau = cfg.tau;

    // 1. q <- Proj_{|q|<=S}( q + tau * grad(div q + p_sink - p_source - u/c) )
    divergence_into(&state.q, &mut ws.div_q);
    {
        let div_q = &ws.div_q;
        let p_sink = state.p_sink.values();
        let p_source = state.p_source.values();
        let u = state.u.values();
        par::fill_indexed(&mut ws.arg, |node| {
            div_q[node] + p_sink[node] - p_source[node / n_theta] - u[node] / c
        });
    }
    gradient_into(&ws.arg, &grid, &mut ws.grad);
    {
        let grad = ws.grad.components();
        par::update_indexed(state.q.components_mut(), |i, old| old + tau * grad[i]);
    }
    project_in_place(&mut state.q, s);

    // 2. p_sink <- min{ D, p_source - div q + u/c }
    divergence_into(&state.q, &mut ws.div_q);
    {
        let div_q = &ws.div_q;
        let p_source = state.p_source.values();
        let u = state.u.values();
        par::fill_indexed(state.p_sink.values_mut(), |node| {
            let unconstrained = p_source[node / n_theta] - div_q[node] + u[node] / c;
            if d[node] < unconstrained {
                d[node]
            } else {
                unconstrained
            }
        });
    }

    // 3. p_source <- (1/(2*pi)) * ( 1/c + integral(p_sink + div q - u/c) )
    {
        let div_q = &ws.div_q;
        let p_sink = state.p_sink.values();
        let u = state.u.values();
        par::fill_indexed(state.p_source.values_mut(), |v| {
            let base = v * n_theta;
            let mut acc = 0.0;
            for k in 0..n_theta {
                let node = base + k;
                acc += p_sink[node] + div_q[node] - u[node] / c;
            }
            (1.0 / c + acc * dt) / TAU
        });
    }

    // 4. u <- u - c * (div q - p_source + p_sink)
    {
        let div_q = &ws.div_q;
        let p_sink = state.p_sink.values();
        let p_source = state.p_source.values();
        par::update_indexed(state.u.values_mut(), |node, old| {
            old - c * (div_q[node] - p_source[node / n_theta] + p_sink[node])
        });
    }
}

/// Applies one iteration of the four-step scheme and returns the updated
/// state.
///
/// Panics if the state, `d`, and `s` are not all on the same grid or if the
/// configuration is invalid; use [`solve_al`] for validated end-to-end runs.
pub fn al_step(
    mut state: AlState,
    d: &CyclicScalarField,
    s: &CyclicScalarField,
    cfg: &SolverConfig,
) -> AlState {
    state.check_consistent();
    assert_eq!(state.u.grid(), d.grid(), "data cost on a different grid");
    assert_eq!(
        state.u.grid(),
        s.grid(),
        "smoothness cost on a different grid"
    );
    cfg.validate().expect("invalid solver config");
    let mut ws = Workspace::new(state.u.grid());
    step(&mut state, &mut ws, d.values(), s.values(), cfg);
    state
}

fn residual_stats(ws: &Workspace, state: &AlState) -> (f64, f64) {
    let n_theta = state.u.grid().n_theta();
    let p_sink = state.p_sink.values();
    let p_source = state.p_source.values();
    let mut sum = 0.0;
    let mut max = 0.0;
    for (node, &div) in ws.div_q.iter().enumerate() {
        let g = math::abs(div + p_sink[node] - p_source[node / n_theta]);
        sum += g;
        if g > max {
            max = g;
        }
    }
    (sum / ws.div_q.len() as f64, max)
}

fn logged_energy(
    ws: &mut Workspace,
    u: &CyclicScalarField,
    d: &CyclicScalarField,
    s: &CyclicScalarField,
) -> f64 {
    for (o, &x) in ws.clipped_u.iter_mut().zip(u.values()) {
        *o = if x > 0.0 { x } else { 0.0 };
    }
    let (de, se) = energy_parts(&ws.clipped_u, d, s, &mut ws.grad);
    de + se
}

/// Runs the augmented-Lagrangian solver from the canonical initialization
/// until the mean conservation residual drops below `cfg.tolerance` or
/// `cfg.max_iters` is reached. Non-convergence is reported through the
/// result flag, not as an error.
pub fn solve_al(
    d: &CyclicScalarField,
    s: &CyclicScalarField,
    cfg: &SolverConfig,
) -> Result<ReconstructionResult, Error> {
    cfg.validate()?;
    if d.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    if !d.is_finite() || !s.is_finite() {
        return Err(Error::NonFinite);
    }
    if s.values().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeCapacity);
    }

    let mut state = AlState::initial(d);
    let mut ws = Workspace::new(d.grid());
    let mut records = Vec::new();
    let mut converged = false;

    for iter in 1..=cfg.max_iters {
        step(&mut state, &mut ws, d.values(), s.values(), cfg);
        let (mean_g, max_g) = residual_stats(&ws, &state);
        converged = mean_g <= cfg.tolerance;
        if iter % cfg.log_every == 0 || converged || iter == cfg.max_iters {
            records.push(TraceRecord {
                iteration: iter,
                energy: logged_energy(&mut ws, &state.u, d, s),
                metrics: TraceMetrics::Al { mean_g, max_g },
                norm_err: normalization_error(&state.u),
            });
        }
        if converged {
            break;
        }
    }

    Ok(ReconstructionResult {
        labels: data_term::extract_labels(&state.u),
        final_u: state.u,
        trace: ConvergenceTrace {
            solver: SolverKind::AugmentedLagrangian,
            records,
        },
        converged,
        config: cfg.clone(),
    })
}
