//! End-to-end reconstruction driver: ingest the observation, build the cost
//! fields, dispatch a solver, and write the requested outputs.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use cyclic_maxflow::data_term::{
    build_data_term, hue_from_rgb, phase_from_complex, CyclicObservation,
};
use cyclic_maxflow::solver::{al::solve_al, pf::solve_pf};
use cyclic_maxflow::{CyclicScalarField, CylinderGrid, ReconstructionResult};

use crate::config::{InputKind, RunConfig, Smoothness, SolverChoice};
use crate::format::{self, AnyField};
use crate::images;
use crate::trace;
use crate::viz;

/// One scalar plane: raw field values pass through untouched, image samples
/// are mapped so mid-gray is 0 and full scale is +-1.
fn load_plane(path: &std::path::Path) -> Result<(Vec<f64>, Vec<usize>)> {
    if format::has_field_magic(path) {
        let field = format::read_spatial(path)
            .with_context(|| format!("loading field {}", path.display()))?;
        Ok((
            field.values().to_vec(),
            field.grid().spatial_dims().to_vec(),
        ))
    } else {
        let (values, w, h) = images::load_signed_plane(path)?;
        Ok((values, vec![w as usize, h as usize]))
    }
}

/// Builds the observation the configuration describes.
pub fn load_input(cfg: &RunConfig) -> Result<CyclicObservation> {
    match cfg.kind {
        InputKind::ComplexPair => {
            let imag_path = cfg
                .imag
                .as_deref()
                .ok_or_else(|| anyhow!("complex-pair input needs `imag`"))?;
            let (real, dims_r) = load_plane(&cfg.input)?;
            let (imag, dims_i) = load_plane(imag_path)?;
            if dims_r != dims_i {
                bail!(
                    "real and imaginary parts disagree on shape: {:?} vs {:?}",
                    dims_r,
                    dims_i
                );
            }
            let grid = CylinderGrid::new(&dims_r, cfg.n_theta).map_err(|e| anyhow!("{e}"))?;
            phase_from_complex(&grid, &real, &imag).map_err(|e| anyhow!("{e}"))
        }
        InputKind::Rgb => {
            if format::has_field_magic(&cfg.input) {
                bail!(
                    "rgb input must be an image, {} is a raw field",
                    cfg.input.display()
                );
            }
            let (r, g, b, w, h) = images::load_rgb(&cfg.input)?;
            let grid = CylinderGrid::new(&[w as usize, h as usize], cfg.n_theta)
                .map_err(|e| anyhow!("{e}"))?;
            hue_from_rgb(&grid, &r, &g, &b).map_err(|e| anyhow!("{e}"))
        }
        InputKind::RawField => {
            let field = format::read_spatial(&cfg.input)
                .with_context(|| format!("loading angle field {}", cfg.input.display()))?;
            let grid = CylinderGrid::new(field.grid().spatial_dims(), cfg.n_theta)
                .map_err(|e| anyhow!("{e}"))?;
            let weights = match &cfg.weights {
                None => vec![1.0; grid.num_voxels()],
                Some(path) => {
                    let wf = format::read_spatial(path)
                        .with_context(|| format!("loading weight field {}", path.display()))?;
                    if wf.grid().spatial_dims() != grid.spatial_dims() {
                        bail!(
                            "weight field shape {:?} does not match input shape {:?}",
                            wf.grid().spatial_dims(),
                            grid.spatial_dims()
                        );
                    }
                    wf.values().to_vec()
                }
            };
            CyclicObservation::new(&grid, field.values().to_vec(), weights)
                .map_err(|e| anyhow!("{e}"))
        }
    }
}

fn smoothness_field(cfg: &RunConfig, grid: &CylinderGrid) -> Result<CyclicScalarField> {
    match &cfg.smoothness {
        Smoothness::Constant(v) => Ok(CyclicScalarField::constant(grid, *v)),
        Smoothness::MapPath(path) => {
            let field = format::read_field(path)
                .with_context(|| format!("loading smoothness map {}", path.display()))?;
            match field {
                AnyField::Spatial(f) => {
                    if f.grid().spatial_dims() != grid.spatial_dims() {
                        bail!(
                            "smoothness map shape {:?} does not match input shape {:?}",
                            f.grid().spatial_dims(),
                            grid.spatial_dims()
                        );
                    }
                    let mut s = CyclicScalarField::zeros(grid);
                    let n_theta = grid.n_theta();
                    for (node, o) in s.values_mut().iter_mut().enumerate() {
                        *o = f.values()[node / n_theta];
                    }
                    Ok(s)
                }
                AnyField::Cyclic(f) => {
                    if f.grid() != grid {
                        bail!(
                            "cyclic smoothness map must match the full grid (dims {:?}, n_theta {})",
                            grid.spatial_dims(),
                            grid.n_theta()
                        );
                    }
                    Ok(f)
                }
                AnyField::Flow(_) => bail!("smoothness map cannot be a flow field"),
            }
        }
    }
}

/// A finished run plus every file it wrote.
pub struct RunOutcome {
    pub result: ReconstructionResult,
    pub written: Vec<PathBuf>,
}

/// Runs a full reconstruction per the configuration. Solver non-convergence
/// is not an error: the outputs are still written and the flag is reported
/// in [`ReconstructionResult::converged`].
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let obs = load_input(cfg)?;
    let d = build_data_term(&obs, cfg.power, cfg.scale).map_err(|e| anyhow!("{e}"))?;
    let s = smoothness_field(cfg, obs.grid())?;

    let result = match cfg.solver {
        SolverChoice::Al => solve_al(&d, &s, &cfg.solver_config),
        SolverChoice::Pf => solve_pf(&d, &s, &cfg.solver_config),
    }
    .map_err(|e| anyhow!("solver: {e}"))?;

    let mut written = Vec::new();
    if let Some(path) = &cfg.out_labels {
        format::write_spatial(path, &result.labels)
            .with_context(|| format!("writing labels to {}", path.display()))?;
        written.push(path.clone());
    }
    if let Some(path) = &cfg.out_u {
        format::write_cyclic(path, &result.final_u)
            .with_context(|| format!("writing labeling density to {}", path.display()))?;
        written.push(path.clone());
    }
    if let Some(path) = &cfg.out_trace {
        trace::write_trace(path, &result.trace)?;
        written.push(path.clone());
    }
    if let Some(path) = &cfg.out_preview {
        viz::write_preview(path, &result.labels, cfg.preview)?;
        written.push(path.clone());
    }
    Ok(RunOutcome { result, written })
}
