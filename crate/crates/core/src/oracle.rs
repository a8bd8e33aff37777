//! Exact solvers for the discrete counterpart of the cyclic labeling model
//! at desk scale: exhaustive enumeration and chain dynamic programming.
//!
//! The discrete energy assigns one bin per voxel and charges the data cost
//! of that bin plus, per spatial edge, a weight times the cyclic distance
//! between the two bin-center angles (the piecewise-constant reading of the
//! continuous model's smoothness term). These solvers provide ground-truth
//! optima that the continuous solvers' rounded labelings are tested against.

use alloc::vec;
use alloc::vec::Vec;

use crate::data_term::cyclic_distance;
use crate::error::Error;
use crate::grid::{CyclicScalarField, CylinderGrid};

/// Enumeration cap for [`brute_force`]: `n_theta ^ num_voxels` must not
/// exceed this.
pub const MAX_EXHAUSTIVE_LABELINGS: u64 = 1 << 24;

/// A desk-scale discrete instance: data cost per (voxel, bin) plus one
/// smoothness weight applied to every spatial edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteInstance {
    d: CyclicScalarField,
    edge_weight: f64,
}

impl DiscreteInstance {
    pub fn new(d: CyclicScalarField, edge_weight: f64) -> Result<Self, Error> {
        if !edge_weight.is_finite() {
            return Err(Error::NonFinite);
        }
        if edge_weight < 0.0 {
            return Err(Error::NegativeCapacity);
        }
        Ok(Self { d, edge_weight })
    }

    pub fn grid(&self) -> &CylinderGrid {
        self.d.grid()
    }

    pub fn data_cost(&self) -> &CyclicScalarField {
        &self.d
    }

    pub fn edge_weight(&self) -> f64 {
        self.edge_weight
    }

    /// `n_theta ^ num_voxels`, or None on overflow.
    pub fn num_labelings(&self) -> Option<u64> {
        let n = self.grid().n_theta() as u64;
        let mut acc: u64 = 1;
        for _ in 0..self.grid().num_voxels() {
            acc = acc.checked_mul(n)?;
        }
        Some(acc)
    }
}

/// Energy of a full labeling: data costs in voxel order, then edge terms
/// axis by axis. The summation order is fixed so that both oracles report
/// identical floats for identical labelings.
pub fn discrete_energy(labels: &[usize], inst: &DiscreteInstance) -> Result<f64, Error> {
    let grid = inst.grid();
    if labels.len() != grid.num_voxels() {
        return Err(Error::LengthMismatch {
            expected: grid.num_voxels(),
            got: labels.len(),
        });
    }
    let n_theta = grid.n_theta();
    for &l in labels {
        if l >= n_theta {
            return Err(Error::InvalidLabel { label: l, n_theta });
        }
    }
    let mut acc = 0.0;
    for (v, &l) in labels.iter().enumerate() {
        acc += inst.d.at(v, l);
    }
    let w = inst.edge_weight;
    for a in 0..grid.num_spatial_axes() {
        let stride = grid.spatial_stride(a);
        let dim = grid.spatial_dims()[a];
        for v in 0..grid.num_voxels() {
            if grid.coord(v, a) + 1 < dim {
                let n = v + stride;
                acc +=
                    w * cyclic_distance(grid.theta_center(labels[v]), grid.theta_center(labels[n]));
            }
        }
    }
    Ok(acc)
}

/// Global minimizer by lexicographic enumeration; ties go to the
/// lexicographically smallest labeling. Errors if the instance exceeds
/// [`MAX_EXHAUSTIVE_LABELINGS`].
pub fn brute_force(inst: &DiscreteInstance) -> Result<(Vec<usize>, f64), Error> {
    let total = inst.num_labelings().ok_or(Error::InstanceTooLarge)?;
    if total > MAX_EXHAUSTIVE_LABELINGS {
        return Err(Error::InstanceTooLarge);
    }
    let grid = inst.grid();
    let num_voxels = grid.num_voxels();
    let n_theta = grid.n_theta();

    let mut labels = vec![0usize; num_voxels];
    let mut best_labels = labels.clone();
    let mut best = discrete_energy(&labels, inst)?;
    'enumerate: loop {
        // odometer increment, last voxel fastest: lexicographic order
        let mut v = num_voxels;
        loop {
            if v == 0 {
                break 'enumerate;
            }
            v -= 1;
            labels[v] += 1;
            if labels[v] < n_theta {
                break;
            }
            labels[v] = 0;
        }
        let e = discrete_energy(&labels, inst)?;
        if e < best {
            best = e;
            best_labels.copy_from_slice(&labels);
        }
    }
    Ok((best_labels, best))
}

/// Exact minimizer over a 1-D chain by dynamic programming. The returned
/// energy is re-evaluated through [`discrete_energy`], so on instances where
/// both run it equals the brute-force optimum exactly.
pub fn chain_dp(inst: &DiscreteInstance) -> Result<(Vec<usize>, f64), Error> {
    let grid = inst.grid();
    if grid.num_spatial_axes() != 1 {
        return Err(Error::NotAChain);
    }
    let num_voxels = grid.num_voxels();
    let n_theta = grid.n_theta();
    let w = inst.edge_weight;

    // pairwise label transition costs
    let mut pair = vec![0.0; n_theta * n_theta];
    for j in 0..n_theta {
        for k in 0..n_theta {
            pair[j * n_theta + k] = w * cyclic_distance(grid.theta_center(j), grid.theta_center(k));
        }
    }

    let mut dp: Vec<f64> = (0..n_theta).map(|k| inst.d.at(0, k)).collect();
    let mut back = vec![0usize; num_voxels * n_theta];
    let mut next = vec![0.0; n_theta];
    for v in 1..num_voxels {
        for k in 0..n_theta {
            let mut best_j = 0;
            let mut best = dp[0] + pair[k];
            for j in 1..n_theta {
                let cand = dp[j] + pair[j * n_theta + k];
                if cand < best {
                    best = cand;
                    best_j = j;
                }
            }
            next[k] = inst.d.at(v, k) + best;
            back[v * n_theta + k] = best_j;
        }
        dp.copy_from_slice(&next);
    }

    let mut last = 0;
    for k in 1..n_theta {
        if dp[k] < dp[last] {
            last = k;
        }
    }
    let mut labels = vec![0usize; num_voxels];
    labels[num_voxels - 1] = last;
    for v in (1..num_voxels).rev() {
        labels[v - 1] = back[v * n_theta + labels[v]];
    }
    let energy = discrete_energy(&labels, inst)?;
    Ok((labels, energy))
}
