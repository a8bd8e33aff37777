//! Data and smoothness cost construction from cyclic observations, the
//! primal energy, and label extraction.
//!
//! The max-flow model takes the per-node data cost `D` as given; this module
//! builds it from the observations the model is meant for: wrapped phase of
//! a complex image, or hue of a colour image. The cost at (voxel, bin) is a
//! power of the cyclic distance between the bin center and the observed
//! angle, weighted per voxel (complex magnitude, colour saturation) so that
//! meaningless observations cost nothing everywhere.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::diff_ops;
use crate::error::Error;
use crate::grid::{CyclicScalarField, CylinderGrid, FlowField, SpatialScalarField};
use crate::math;

/// Geodesic distance between two angles on the circle, in [0, pi].
pub fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = math::rem_euclid(a - b, TAU);
    if d > TAU - d {
        TAU - d
    } else {
        d
    }
}

/// One observed angle and one confidence weight per voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicObservation {
    grid: CylinderGrid,
    angles: Vec<f64>,
    weights: Vec<f64>,
}

impl CyclicObservation {
    /// Validates angles in [-pi, pi) and weights >= 0, both finite.
    pub fn new(grid: &CylinderGrid, angles: Vec<f64>, weights: Vec<f64>) -> Result<Self, Error> {
        let n = grid.num_voxels();
        if angles.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: angles.len(),
            });
        }
        if weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        for &a in &angles {
            if !a.is_finite() {
                return Err(Error::NonFinite);
            }
            if !(-PI..PI).contains(&a) {
                return Err(Error::AngleOutOfRange(a));
            }
        }
        for &w in &weights {
            if !w.is_finite() {
                return Err(Error::NonFinite);
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight(w));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            angles,
            weights,
        })
    }

    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Observation from the real/imaginary parts of a complex image: angle is
/// the four-quadrant arctangent, weight the modulus. A zero sample gets
/// angle 0 by convention; its zero weight kills the data cost there anyway.
pub fn phase_from_complex(
    grid: &CylinderGrid,
    real: &[f64],
    imag: &[f64],
) -> Result<CyclicObservation, Error> {
    let n = grid.num_voxels();
    if real.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: real.len(),
        });
    }
    if imag.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: imag.len(),
        });
    }
    let mut angles = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&re, &im) in real.iter().zip(imag) {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut a = math::atan2(im, re);
        // atan2 returns (-pi, pi]; fold the seam onto -pi
        if a == PI {
            a = -PI;
        }
        angles.push(a);
        weights.push(math::sqrt(re * re + im * im));
    }
    CyclicObservation::new(grid, angles, weights)
}

/// Observation from RGB channels in [0, 1]: angle is the hexcone hue with
/// red at 0 mapped onto [-pi, pi), weight is saturation times value (the
/// chroma), so gray pixels carry no hue information.
pub fn hue_from_rgb(
    grid: &CylinderGrid,
    r: &[f64],
    g: &[f64],
    b: &[f64],
) -> Result<CyclicObservation, Error> {
    let n = grid.num_voxels();
    for ch in [r, g, b] {
        if ch.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: ch.len(),
            });
        }
    }
    let mut angles = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let (cr, cg, cb) = (r[i], g[i], b[i]);
        for v in [cr, cg, cb] {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ChannelOutOfRange(v));
            }
        }
        let max = cr.max(cg).max(cb);
        let min = cr.min(cg).min(cb);
        let chroma = max - min;
        if chroma == 0.0 {
            angles.push(0.0);
            weights.push(0.0);
            continue;
        }
        let sector = if max == cr {
            math::rem_euclid((cg - cb) / chroma, 6.0)
        } else if max == cg {
            (cb - cr) / chroma + 2.0
        } else {
            (cr - cg) / chroma + 4.0
        };
        let mut angle = sector * (PI / 3.0); // [0, 2*pi)
        if angle >= PI {
            angle -= TAU;
        }
        angles.push(angle);
        weights.push(chroma);
    }
    CyclicObservation::new(grid, angles, weights)
}

/// Builds the data cost `D(v, k) = scale * weight(v) *
/// cyclic_distance(theta_k, angle(v))^power` with `power` 1 or 2.
pub fn build_data_term(
    obs: &CyclicObservation,
    power: f64,
    scale: f64,
) -> Result<CyclicScalarField, Error> {
    if power != 1.0 && power != 2.0 {
        return Err(Error::InvalidDataPower(power));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NonPositiveScale(scale));
    }
    let grid = obs.grid();
    let mut d = CyclicScalarField::zeros(grid);
    let n_theta = grid.n_theta();
    for v in 0..grid.num_voxels() {
        let w = obs.weights()[v];
        let angle = obs.angles()[v];
        for k in 0..n_theta {
            let dist = cyclic_distance(grid.theta_center(k), angle);
            let pd = if power == 2.0 { dist * dist } else { dist };
            *d.at_mut(v, k) = scale * w * pd;
        }
    }
    Ok(d)
}

/// Primal energy split into its data and smoothness parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub data_energy: f64,
    pub smoothness_energy: f64,
    pub total: f64,
}

/// Primal energy of a labeling density `u` under costs `D` and `S`:
/// `sum D*u*dtheta + sum S*|grad u|*dtheta` over all nodes (unit voxel
/// volume). Summation is sequential in node order so energies are
/// bit-reproducible.
pub fn energy(
    u: &CyclicScalarField,
    d: &CyclicScalarField,
    s: &CyclicScalarField,
) -> Result<EnergyReport, Error> {
    if u.grid() != d.grid() || u.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    let mut scratch = FlowField::zeros(u.grid());
    let (data_energy, smoothness_energy) = energy_parts(u.values(), d, s, &mut scratch);
    Ok(EnergyReport {
        data_energy,
        smoothness_energy,
        total: data_energy + smoothness_energy,
    })
}

/// Shared kernel for [`energy`] and the solver traces; `grad_scratch` is
/// overwritten with the gradient of `u`.
pub(crate) fn energy_parts(
    u_values: &[f64],
    d: &CyclicScalarField,
    s: &CyclicScalarField,
    grad_scratch: &mut FlowField,
) -> (f64, f64) {
    let grid = d.grid();
    let dt = grid.delta_theta();
    diff_ops::gradient_into(u_values, grid, grad_scratch);
    let mut data = 0.0;
    for (uv, dv) in u_values.iter().zip(d.values()) {
        data += uv * dv;
    }
    let mut smooth = 0.0;
    for (node, sv) in s.values().iter().enumerate() {
        smooth += sv * grad_scratch.node_norm(node);
    }
    (data * dt, smooth * dt)
}

/// Per-voxel argmax bin of `u`, ties to the lowest bin index.
pub fn extract_label_bins(u: &CyclicScalarField) -> Vec<usize> {
    let grid = u.grid();
    let mut bins = Vec::with_capacity(grid.num_voxels());
    for v in 0..grid.num_voxels() {
        let slice = u.theta_slice(v);
        let mut best = 0;
        for (k, &val) in slice.iter().enumerate() {
            if val > slice[best] {
                best = k;
            }
        }
        bins.push(best);
    }
    bins
}

/// Reads the reconstructed angle off the labeling density: per voxel, the
/// center angle of the maximal bin (argmax rather than a circular mean,
/// which is ill-defined for multimodal u near the seam).
pub fn extract_labels(u: &CyclicScalarField) -> SpatialScalarField {
    let grid = u.grid();
    let bins = extract_label_bins(u);
    let values = bins.iter().map(|&k| grid.theta_center(k)).collect();
    SpatialScalarField::from_values(grid, values).expect("bin centers are finite")
}
