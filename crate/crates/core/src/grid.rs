//! The discretized cylinder domain and the field containers living on it.
//!
//! The domain is the Cartesian product of a 1-, 2- or 3-axis voxel grid with
//! a cyclic intensity axis split into `n_theta` bins. Bin centers sit at
//! half offsets, `theta_k = -pi + (k + 1/2) * delta_theta`, so no bin center
//! falls on the wrap seam at +-pi and midpoint sums over theta are symmetric
//! quadrature.
//!
//! Memory layout: theta is the fastest-varying axis (`node = voxel * n_theta
//! + bin`), spatial axis 0 is the fastest voxel axis. [`FlowField`] stores
//! the per-node component tuple contiguously (spatial axes first, theta
//! last) so the capacity projection touches one small chunk per node.
//!
//! Containers are plain owned buffers: immutable sharing across threads is
//! safe, and the solvers mutate them single-owner per iteration phase.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::error::Error;

/// Most spatial axes a grid can have.
pub const MAX_SPATIAL_AXES: usize = 3;

/// Discretization of the cylinder: spatial voxel grid x cyclic theta axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderGrid {
    spatial_dims: Vec<usize>,
    n_theta: usize,
}

impl CylinderGrid {
    /// Builds a grid with the given voxel counts per spatial axis and
    /// `n_theta` cyclic bins. All dims must be >= 1 and `n_theta` >= 2.
    pub fn new(spatial_dims: &[usize], n_theta: usize) -> Result<Self, Error> {
        if spatial_dims.is_empty() {
            return Err(Error::EmptySpatialDims);
        }
        if spatial_dims.len() > MAX_SPATIAL_AXES {
            return Err(Error::TooManySpatialDims(spatial_dims.len()));
        }
        if spatial_dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroSpatialDim);
        }
        if n_theta < 2 {
            return Err(Error::TooFewThetaBins(n_theta));
        }
        Ok(Self {
            spatial_dims: spatial_dims.to_vec(),
            n_theta,
        })
    }

    /// Voxel counts per spatial axis.
    pub fn spatial_dims(&self) -> &[usize] {
        &self.spatial_dims
    }

    /// Number of spatial axes (1 to 3).
    pub fn num_spatial_axes(&self) -> usize {
        self.spatial_dims.len()
    }

    /// Number of flow components per node: spatial axes plus theta.
    pub fn num_flow_axes(&self) -> usize {
        self.spatial_dims.len() + 1
    }

    /// Number of cyclic bins.
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Angular bin width, `2*pi / n_theta`.
    pub fn delta_theta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    /// Center angle of bin `k`, in [-pi, pi).
    pub fn theta_center(&self, k: usize) -> f64 {
        debug_assert!(k < self.n_theta);
        -PI + (k as f64 + 0.5) * self.delta_theta()
    }

    /// Total voxel count.
    pub fn num_voxels(&self) -> usize {
        self.spatial_dims.iter().product()
    }

    /// Total node count: voxels times theta bins.
    pub fn num_nodes(&self) -> usize {
        self.num_voxels() * self.n_theta
    }

    /// Voxel-index stride of a unit step along spatial `axis`.
    pub fn spatial_stride(&self, axis: usize) -> usize {
        self.spatial_dims[..axis].iter().product()
    }

    /// Coordinate of voxel `v` along spatial `axis`.
    #[inline]
    pub fn coord(&self, voxel: usize, axis: usize) -> usize {
        (voxel / self.spatial_stride(axis)) % self.spatial_dims[axis]
    }

    /// Flat node index of (voxel, bin).
    #[inline]
    pub fn node_index(&self, voxel: usize, bin: usize) -> usize {
        voxel * self.n_theta + bin
    }
}

fn check_values(grid: &CylinderGrid, values: &[f64], expected: usize) -> Result<(), Error> {
    if values.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: values.len(),
        });
    }
    let _ = grid;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// One real value per (voxel, theta bin). Houses the labeling density u, the
/// sink flow, and the data/smoothness cost fields.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicScalarField {
    grid: CylinderGrid,
    values: Vec<f64>,
}

impl CyclicScalarField {
    /// All-zero field.
    pub fn zeros(grid: &CylinderGrid) -> Self {
        Self {
            values: vec![0.0; grid.num_nodes()],
            grid: grid.clone(),
        }
    }

    /// Field with every node set to `value`.
    pub fn constant(grid: &CylinderGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.num_nodes()],
            grid: grid.clone(),
        }
    }

    /// The uniform labeling density `1/(2*pi)`; its theta integral is 1 per
    /// voxel, the canonical solver initialization.
    pub fn uniform_indicator(grid: &CylinderGrid) -> Self {
        Self::constant(grid, 1.0 / TAU)
    }

    /// Wraps an existing buffer, checking length and finiteness.
    pub fn from_values(grid: &CylinderGrid, values: Vec<f64>) -> Result<Self, Error> {
        check_values(grid, &values, grid.num_nodes())?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value at (voxel, bin).
    #[inline]
    pub fn at(&self, voxel: usize, bin: usize) -> f64 {
        self.values[self.grid.node_index(voxel, bin)]
    }

    /// Mutable value at (voxel, bin).
    #[inline]
    pub fn at_mut(&mut self, voxel: usize, bin: usize) -> &mut f64 {
        &mut self.values[self.grid.node_index(voxel, bin)]
    }

    /// The theta slice of one voxel.
    #[inline]
    pub fn theta_slice(&self, voxel: usize) -> &[f64] {
        let n = self.grid.n_theta;
        &self.values[voxel * n..(voxel + 1) * n]
    }

    /// Midpoint quadrature over theta per voxel: `sum_k f(v,k) * delta_theta`.
    pub fn integrate_theta(&self) -> SpatialScalarField {
        let dt = self.grid.delta_theta();
        let mut out = SpatialScalarField::zeros(&self.grid);
        for (v, o) in out.values.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &x in self.theta_slice(v) {
                acc += x;
            }
            *o = acc * dt;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// One real value per voxel (no theta axis). Houses the source flow and the
/// extracted label map.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialScalarField {
    grid: CylinderGrid,
    values: Vec<f64>,
}

impl SpatialScalarField {
    pub fn zeros(grid: &CylinderGrid) -> Self {
        Self {
            values: vec![0.0; grid.num_voxels()],
            grid: grid.clone(),
        }
    }

    pub fn constant(grid: &CylinderGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.num_voxels()],
            grid: grid.clone(),
        }
    }

    pub fn from_values(grid: &CylinderGrid, values: Vec<f64>) -> Result<Self, Error> {
        check_values(grid, &values, grid.num_voxels())?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Vector field over the cylinder: one component per spatial axis plus one
/// theta component, stored interleaved per node (spatial first, theta last).
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    grid: CylinderGrid,
    components: Vec<f64>,
}

impl FlowField {
    pub fn zeros(grid: &CylinderGrid) -> Self {
        Self {
            components: vec![0.0; grid.num_nodes() * grid.num_flow_axes()],
            grid: grid.clone(),
        }
    }

    pub fn from_components(grid: &CylinderGrid, components: Vec<f64>) -> Result<Self, Error> {
        check_values(grid, &components, grid.num_nodes() * grid.num_flow_axes())?;
        Ok(Self {
            grid: grid.clone(),
            components,
        })
    }

    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    /// Raw interleaved component buffer, `node * num_flow_axes + axis`.
    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.components
    }

    /// Component `axis` at `node`. Axis `num_spatial_axes()` is theta.
    #[inline]
    pub fn at(&self, node: usize, axis: usize) -> f64 {
        self.components[node * self.grid.num_flow_axes() + axis]
    }

    /// Mutable component `axis` at `node`.
    #[inline]
    pub fn at_mut(&mut self, node: usize, axis: usize) -> &mut f64 {
        &mut self.components[node * self.grid.num_flow_axes() + axis]
    }

    /// Euclidean norm of the component tuple at `node`.
    pub fn node_norm(&self, node: usize) -> f64 {
        let a = self.grid.num_flow_axes();
        let mut sq = 0.0;
        for &c in &self.components[node * a..(node + 1) * a] {
            sq += c * c;
        }
        crate::math::sqrt(sq)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_spacing() {
        let g = CylinderGrid::new(&[4], 8).unwrap();
        assert_eq!(g.num_nodes(), 32);
        assert!((g.delta_theta() - PI / 4.0).abs() < 1e-15);

        let g = CylinderGrid::new(&[2, 3], 4).unwrap();
        assert_eq!(g.num_nodes(), 24);
        assert_eq!(g.num_voxels(), 6);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert_eq!(CylinderGrid::new(&[4], 1), Err(Error::TooFewThetaBins(1)));
        assert_eq!(CylinderGrid::new(&[0], 4), Err(Error::ZeroSpatialDim));
        assert_eq!(CylinderGrid::new(&[], 4), Err(Error::EmptySpatialDims));
        assert_eq!(
            CylinderGrid::new(&[2, 2, 2, 2], 4),
            Err(Error::TooManySpatialDims(4))
        );
    }

    #[test]
    fn bin_centers_inside_range_and_off_seam() {
        for n in [2, 3, 5, 8, 32] {
            let g = CylinderGrid::new(&[1], n).unwrap();
            for k in 0..n {
                let t = g.theta_center(k);
                assert!(t >= -PI && t < PI, "theta {t} out of range for n={n}");
            }
            // first bin center is half a bin away from the seam
            assert!((g.theta_center(0) + PI - 0.5 * g.delta_theta()).abs() < 1e-15);
        }
    }

    #[test]
    fn strides_and_coords() {
        let g = CylinderGrid::new(&[3, 4, 2], 2).unwrap();
        assert_eq!(g.spatial_stride(0), 1);
        assert_eq!(g.spatial_stride(1), 3);
        assert_eq!(g.spatial_stride(2), 12);
        let v = 1 + 3 * 2 + 12 * 1; // (1, 2, 1)
        assert_eq!(g.coord(v, 0), 1);
        assert_eq!(g.coord(v, 1), 2);
        assert_eq!(g.coord(v, 2), 1);
    }

    #[test]
    fn uniform_indicator_integrates_to_one() {
        for (dims, n) in [(&[1][..], 4), (&[2][..], 8), (&[3, 2][..], 5)] {
            let g = CylinderGrid::new(dims, n).unwrap();
            let u = CyclicScalarField::uniform_indicator(&g);
            assert!(u.values().iter().all(|&v| v > 0.0));
            let integral = u.integrate_theta();
            for &s in integral.values() {
                assert!((s - 1.0).abs() < 1e-12, "per-voxel integral {s}");
            }
        }
    }

    #[test]
    fn integrate_theta_zero_and_one_hot() {
        let g = CylinderGrid::new(&[2], 4).unwrap();
        let z = CyclicScalarField::zeros(&g);
        assert!(z.integrate_theta().values().iter().all(|&v| v == 0.0));

        let mut one_hot = CyclicScalarField::zeros(&g);
        *one_hot.at_mut(0, 2) = 1.0 / g.delta_theta();
        *one_hot.at_mut(1, 0) = 1.0 / g.delta_theta();
        for &s in one_hot.integrate_theta().values() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn from_values_validates() {
        let g = CylinderGrid::new(&[2], 4).unwrap();
        assert_eq!(
            CyclicScalarField::from_values(&g, vec![0.0; 7]),
            Err(Error::LengthMismatch {
                expected: 8,
                got: 7
            })
        );
        assert_eq!(
            CyclicScalarField::from_values(&g, vec![f64::NAN; 8]),
            Err(Error::NonFinite)
        );
        assert!(CyclicScalarField::from_values(&g, vec![1.0; 8]).is_ok());
    }
}
