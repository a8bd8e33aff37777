//! Pseudo-flow (Bregman proximal) solver.
//!
//! The source and sink flows are eliminated analytically, leaving a max-min
//! model over the spatial flow alone: maximize `sum_x min_theta (D + div
//! q)`. The min is smoothed by an entropic Bregman proximal term with weight
//! `c`, which makes the label update a closed-form softmin reweighting of
//! the previous labeling, and the flow update a Chambolle-style projected
//! step on the reweighted density. `u` stays exactly feasible (nonnegative,
//! unit theta integral per voxel) after every iteration, in contrast with
//! the augmented-Lagrangian scheme where feasibility only holds at the
//! saddle point.

use alloc::vec;
use alloc::vec::Vec;

use crate::data_term::{self, energy_parts};
use crate::diff_ops::{divergence_into, gradient_into, project_in_place};
use crate::error::Error;
use crate::grid::{CyclicScalarField, CylinderGrid, FlowField};
use crate::math;
use crate::par;
use crate::solver::{
    normalization_error, ConvergenceTrace, ReconstructionResult, SolverConfig, SolverKind,
    TraceMetrics, TraceRecord,
};

/// Floor applied to the previous labeling before it enters the proximal
/// update, so `ln(u/v)` stays defined and mass can return to emptied bins.
const DENSITY_FLOOR: f64 = 1e-300;

/// State of the pseudo-flow iteration: the feasible labeling density and
/// the capacity-bounded flow.
#[derive(Clone, Debug, PartialEq)]
pub struct PfState {
    pub u: CyclicScalarField,
    pub q: FlowField,
}

/// Entropy-induced Bregman distance `sum (u ln(u/v) - u + v) * dtheta`, with
/// `0 ln 0 = 0`. Requires `u >= 0` and `v > 0` wherever `u` carries mass.
pub fn bregman_distance(u: &CyclicScalarField, v: &CyclicScalarField) -> Result<f64, Error> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let mut acc = 0.0;
    for (&x, &y) in u.values().iter().zip(v.values()) {
        if x < 0.0 {
            return Err(Error::NegativeDensity(x));
        }
        if x > 0.0 {
            if y <= 0.0 {
                return Err(Error::ZeroBregmanReference);
            }
            acc += x * math::ln(x / y) - x + y;
        } else {
            acc += y;
        }
    }
    Ok(acc * u.grid().delta_theta())
}

/// Closed-form proximal label update: `u' proportional to u * exp(-(D + div
/// q)/c)`, renormalized to unit theta integral per voxel. The exponent is
/// shifted by its per-voxel maximum before exponentiation; the shift cancels
/// in the normalization but keeps the arithmetic in range for small `c`.
pub fn pf_label_update(
    u: &CyclicScalarField,
    d: &CyclicScalarField,
    q: &FlowField,
    c: f64,
) -> CyclicScalarField {
    assert_eq!(u.grid(), d.grid(), "data cost on a different grid");
    assert_eq!(u.grid(), q.grid(), "flow on a different grid");
    assert!(c > 0.0, "proximal weight must be positive");
    let grid = u.grid();
    let mut div_q = vec![0.0; grid.num_nodes()];
    divergence_into(q, &mut div_q);
    let mut out = CyclicScalarField::zeros(grid);
    label_update_into(u.values(), d.values(), &div_q, grid, c, out.values_mut());
    out
}

fn label_update_into(
    u: &[f64],
    d: &[f64],
    div_q: &[f64],
    grid: &CylinderGrid,
    c: f64,
    out: &mut [f64],
) {
    let n_theta = grid.n_theta();
    let dt = grid.delta_theta();
    par::for_each_chunk(out, n_theta, |v, slice| {
        let base = v * n_theta;
        let mut max_w = f64::NEG_INFINITY;
        for k in 0..n_theta {
            let node = base + k;
            let uf = if u[node] > DENSITY_FLOOR {
                u[node]
            } else {
                DENSITY_FLOOR
            };
            let w = math::ln(uf) - (d[node] + div_q[node]) / c;
            slice[k] = w;
            if w > max_w {
                max_w = w;
            }
        }
        let mut sum = 0.0;
        for w in slice.iter_mut() {
            *w = math::exp(*w - max_w);
            sum += *w;
        }
        // the max term contributes exp(0) = 1, so sum >= 1
        let norm = sum * dt;
        for w in slice.iter_mut() {
            *w /= norm;
        }
    });
}

/// Chambolle-style projected flow step of the pseudo-flow scheme:
/// `q <- Proj_{|q|<=S}( q - c*tau * grad(u * exp(-(D + div q)/c)) )`.
pub fn pf_flow_update(
    q: &FlowField,
    u: &CyclicScalarField,
    d: &CyclicScalarField,
    s: &CyclicScalarField,
    c: f64,
    tau: f64,
) -> FlowField {
    assert_eq!(u.grid(), d.grid(), "data cost on a different grid");
    assert_eq!(u.grid(), s.grid(), "smoothness cost on a different grid");
    assert_eq!(u.grid(), q.grid(), "flow on a different grid");
    assert!(c > 0.0 && tau > 0.0, "c and tau must be positive");
    let grid = u.grid();
    let mut ws = Workspace::new(grid);
    let mut out = q.clone();
    flow_update_in_place(
        &mut out,
        u.values(),
        d.values(),
        s.values(),
        c,
        tau,
        &mut ws,
    );
    out
}

struct Workspace {
    div_q: Vec<f64>,
    weights: Vec<f64>,
    grad: FlowField,
    u_next: Vec<f64>,
}

impl Workspace {
    fn new(grid: &CylinderGrid) -> Self {
        let n = grid.num_nodes();
        Self {
            div_q: vec![0.0; n],
            weights: vec![0.0; n],
            grad: FlowField::zeros(grid),
            u_next: vec![0.0; n],
        }
    }
}

fn flow_update_in_place(
    q: &mut FlowField,
    u: &[f64],
    d: &[f64],
    s: &[f64],
    c: f64,
    tau: f64,
    ws: &mut Workspace,
) {
    let grid = q.grid().clone();
    divergence_into(q, &mut ws.div_q);
    {
        let div_q = &ws.div_q;
        par::fill_indexed(&mut ws.weights, |node| {
            u[node] * math::exp(-(d[node] + div_q[node]) / c)
        });
    }
    gradient_into(&ws.weights, &grid, &mut ws.grad);
    {
        let grad = ws.grad.components();
        let step = c * tau;
        par::update_indexed(q.components_mut(), |i, old| old - step * grad[i]);
    }
    project_in_place(q, s);
}

/// Pseudo-flow objective `sum_x min_theta (D + div q)`; a lower bound on the
/// primal energy of any feasible labeling by weak duality.
fn pseudo_flow_objective(d: &[f64], div_q: &[f64], n_theta: usize) -> f64 {
    let mut acc = 0.0;
    let num_voxels = d.len() / n_theta;
    for v in 0..num_voxels {
        let base = v * n_theta;
        let mut m = d[base] + div_q[base];
        for k in 1..n_theta {
            let x = d[base + k] + div_q[base + k];
            if x < m {
                m = x;
            }
        }
        acc += m;
    }
    acc
}

/// Runs the pseudo-flow solver from the uniform initialization until the
/// maximum per-node label change drops below `cfg.tolerance` or
/// `cfg.max_iters` is reached. Non-convergence is reported through the
/// result flag, not as an error.
pub fn solve_pf(
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

    let grid = d.grid();
    let mut u = CyclicScalarField::uniform_indicator(grid);
    let mut q = FlowField::zeros(grid);
    let mut ws = Workspace::new(grid);
    let mut records = Vec::new();
    let mut converged = false;
    let mut c_cur = cfg.c;

    for iter in 1..=cfg.max_iters {
        flow_update_in_place(
            &mut q,
            u.values(),
            d.values(),
            s.values(),
            c_cur,
            cfg.tau,
            &mut ws,
        );
        divergence_into(&q, &mut ws.div_q);
        label_update_into(
            u.values(),
            d.values(),
            &ws.div_q,
            grid,
            c_cur,
            &mut ws.u_next,
        );

        let mut max_du = 0.0;
        for (&new, &old) in ws.u_next.iter().zip(u.values()) {
            let delta = math::abs(new - old);
            if delta > max_du {
                max_du = delta;
            }
        }
        u.values_mut().copy_from_slice(&ws.u_next);

        converged = max_du <= cfg.tolerance;
        if iter % cfg.log_every == 0 || converged || iter == cfg.max_iters {
            let (de, se) = energy_parts(u.values(), d, s, &mut ws.grad);
            records.push(TraceRecord {
                iteration: iter,
                energy: de + se,
                metrics: TraceMetrics::Pf {
                    objective: pseudo_flow_objective(d.values(), &ws.div_q, grid.n_theta()),
                    max_du,
                },
                norm_err: normalization_error(&u),
            });
        }
        if converged {
            break;
        }
        if let Some(a) = cfg.c_anneal {
            c_cur = (c_cur * a.factor).max(a.floor);
        }
    }

    Ok(ReconstructionResult {
        labels: data_term::extract_labels(&u),
        final_u: u,
        trace: ConvergenceTrace {
            solver: SolverKind::PseudoFlow,
            records,
        },
        converged,
        config: cfg.clone(),
    })
}
