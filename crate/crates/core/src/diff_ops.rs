//! Discrete gradient, divergence, and capacity projection on the cylinder.
//!
//! Forward differences for the gradient, backward differences for the
//! divergence, both collocated at nodes. The theta axis wraps; spatial axes
//! get zero-flux boundaries: the forward difference at the last voxel of an
//! axis is 0, and the divergence ignores the flow component stored there.
//! With these conventions `<div q, u> = -<q, grad u>` holds exactly in exact
//! arithmetic, which is the identity the dual equivalence of the max-flow
//! model rests on. Unit grid spacing is used on every axis, including theta;
//! the effective anisotropy is absorbed into the smoothness field.

use crate::error::Error;
use crate::grid::{CyclicScalarField, CylinderGrid, FlowField, MAX_SPATIAL_AXES};
use crate::math;
use crate::par;

#[derive(Clone, Copy)]
struct GridGeom {
    n_theta: usize,
    num_axes: usize,
    dims: [usize; MAX_SPATIAL_AXES],
    // node-index stride of a unit step along each spatial axis
    node_strides: [usize; MAX_SPATIAL_AXES],
    voxel_strides: [usize; MAX_SPATIAL_AXES],
}

impl GridGeom {
    fn of(grid: &CylinderGrid) -> Self {
        let mut dims = [1; MAX_SPATIAL_AXES];
        let mut node_strides = [0; MAX_SPATIAL_AXES];
        let mut voxel_strides = [0; MAX_SPATIAL_AXES];
        for (a, &d) in grid.spatial_dims().iter().enumerate() {
            dims[a] = d;
            voxel_strides[a] = grid.spatial_stride(a);
            node_strides[a] = voxel_strides[a] * grid.n_theta();
        }
        Self {
            n_theta: grid.n_theta(),
            num_axes: grid.num_spatial_axes(),
            dims,
            node_strides,
            voxel_strides,
        }
    }
}

/// Forward-difference gradient of `u` over the cylinder. The result has one
/// component per spatial axis plus the wrapping theta component.
pub fn gradient(u: &CyclicScalarField) -> FlowField {
    let mut out = FlowField::zeros(u.grid());
    gradient_into(u.values(), u.grid(), &mut out);
    out
}

pub(crate) fn gradient_into(u: &[f64], grid: &CylinderGrid, out: &mut FlowField) {
    debug_assert_eq!(u.len(), grid.num_nodes());
    debug_assert_eq!(out.grid(), grid);
    let g = GridGeom::of(grid);
    let flow_axes = g.num_axes + 1;
    par::for_each_chunk(out.components_mut(), flow_axes, |node, comps| {
        let v = node / g.n_theta;
        let k = node % g.n_theta;
        let center = u[node];
        for a in 0..g.num_axes {
            let c = (v / g.voxel_strides[a]) % g.dims[a];
            comps[a] = if c + 1 < g.dims[a] {
                u[node + g.node_strides[a]] - center
            } else {
                0.0
            };
        }
        let up = if k + 1 < g.n_theta {
            u[node + 1]
        } else {
            u[node + 1 - g.n_theta]
        };
        comps[g.num_axes] = up - center;
    });
}

/// Backward-difference divergence of `q`, the exact negative adjoint of
/// [`gradient`]: `<div q, u> + <q, grad u> = 0` up to roundoff.
pub fn divergence(q: &FlowField) -> CyclicScalarField {
    let mut out = CyclicScalarField::zeros(q.grid());
    divergence_into(q, out.values_mut());
    out
}

pub(crate) fn divergence_into(q: &FlowField, out: &mut [f64]) {
    let grid = q.grid();
    debug_assert_eq!(out.len(), grid.num_nodes());
    let g = GridGeom::of(grid);
    let flow_axes = g.num_axes + 1;
    let comps = q.components();
    par::fill_indexed(out, |node| {
        let v = node / g.n_theta;
        let k = node % g.n_theta;
        let mut acc = 0.0;
        for a in 0..g.num_axes {
            let c = (v / g.voxel_strides[a]) % g.dims[a];
            // outgoing flux at the last voxel never entered the gradient, so
            // zero-flux consistency means ignoring the component stored there
            let plus = if c + 1 < g.dims[a] {
                comps[node * flow_axes + a]
            } else {
                0.0
            };
            let minus = if c > 0 {
                comps[(node - g.node_strides[a]) * flow_axes + a]
            } else {
                0.0
            };
            acc += plus - minus;
        }
        let prev = if k > 0 {
            node - 1
        } else {
            node + g.n_theta - 1
        };
        acc += comps[node * flow_axes + g.num_axes] - comps[prev * flow_axes + g.num_axes];
        acc
    });
}

/// Projects each node's component tuple onto the Euclidean ball of radius
/// `s` at that node. Nodes already inside their ball are left untouched
/// bit-for-bit, and projected nodes end with a recomputed norm <= s, so the
/// projection is bit-exactly idempotent.
pub fn project_capacity(q: &FlowField, s: &CyclicScalarField) -> Result<FlowField, Error> {
    if q.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    if s.values().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeCapacity);
    }
    let mut out = q.clone();
    project_in_place(&mut out, s.values());
    Ok(out)
}

pub(crate) fn project_in_place(q: &mut FlowField, s: &[f64]) {
    let flow_axes = q.grid().num_flow_axes();
    par::for_each_chunk(q.components_mut(), flow_axes, |node, comps| {
        let cap = s[node];
        if cap == 0.0 {
            comps.fill(0.0);
            return;
        }
        // rescale until the recomputed norm is inside the ball, so that
        // re-projecting is a no-op; takes one or two passes in practice
        for _pass in 0..8 {
            let mut sq = 0.0;
            for &c in comps.iter() {
                sq += c * c;
            }
            let norm = math::sqrt(sq);
            if norm <= cap {
                return;
            }
            let mut t = cap / norm;
            if t >= 1.0 {
                t = 1.0 - f64::EPSILON;
            }
            for c in comps.iter_mut() {
                *c *= t;
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn norm(a: &[f64]) -> f64 {
        dot(a, a).sqrt()
    }

    // splitmix64, enough randomness for numeric smoke tests
    struct Rng(u64);
    impl Rng {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z >> 11) as f64 / (1u64 << 53) as f64
        }
        fn sym(&mut self) -> f64 {
            2.0 * self.next_f64() - 1.0
        }
    }

    fn random_scalar(grid: &CylinderGrid, rng: &mut Rng) -> CyclicScalarField {
        let v: Vec<f64> = (0..grid.num_nodes()).map(|_| rng.sym()).collect();
        CyclicScalarField::from_values(grid, v).unwrap()
    }

    fn random_flow(grid: &CylinderGrid, rng: &mut Rng) -> FlowField {
        let v: Vec<f64> = (0..grid.num_nodes() * grid.num_flow_axes())
            .map(|_| rng.sym())
            .collect();
        FlowField::from_components(grid, v).unwrap()
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let g = CylinderGrid::new(&[3, 2], 5).unwrap();
        let u = CyclicScalarField::constant(&g, 2.5);
        let grad = gradient(&u);
        assert!(grad.components().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn theta_forward_difference_wraps() {
        let g = CylinderGrid::new(&[1], 4).unwrap();
        let u = CyclicScalarField::from_values(&g, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let grad = gradient(&u);
        let theta_axis = g.num_spatial_axes();
        let diffs: Vec<f64> = (0..4).map(|k| grad.at(k, theta_axis)).collect();
        assert_eq!(diffs, vec![1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn spatial_variation_leaves_theta_component_zero() {
        let g = CylinderGrid::new(&[4], 3).unwrap();
        let mut u = CyclicScalarField::zeros(&g);
        for v in 0..4 {
            for k in 0..3 {
                *u.at_mut(v, k) = v as f64;
            }
        }
        let grad = gradient(&u);
        let theta_axis = g.num_spatial_axes();
        for node in 0..g.num_nodes() {
            assert_eq!(grad.at(node, theta_axis), 0.0);
        }
        // zero-flux: last voxel's spatial difference is 0
        for k in 0..3 {
            assert_eq!(grad.at(g.node_index(3, k), 0), 0.0);
            assert_eq!(grad.at(g.node_index(1, k), 0), 1.0);
        }
    }

    #[test]
    fn divergence_of_zero_flow_is_zero() {
        let g = CylinderGrid::new(&[2, 2], 4).unwrap();
        let q = FlowField::zeros(&g);
        assert!(divergence(&q).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn theta_constant_flow_has_zero_theta_divergence() {
        let g = CylinderGrid::new(&[3], 6).unwrap();
        let mut q = FlowField::zeros(&g);
        let theta_axis = g.num_spatial_axes();
        for v in 0..3 {
            for k in 0..6 {
                *q.at_mut(g.node_index(v, k), theta_axis) = 0.7 * (v as f64 + 1.0);
            }
        }
        // wrap makes the backward difference cancel exactly
        assert!(divergence(&q).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_is_negative_adjoint_of_gradient() {
        let mut rng = Rng(42);
        for dims in [&[3usize][..], &[4, 4][..], &[2, 3, 2][..]] {
            let g = CylinderGrid::new(dims, 5).unwrap();
            for _ in 0..10 {
                let u = random_scalar(&g, &mut rng);
                let q = random_flow(&g, &mut rng);
                let grad_u = gradient(&u);
                let div_q = divergence(&q);
                let lhs = dot(div_q.values(), u.values());
                let rhs = dot(q.components(), grad_u.components());
                let scale = norm(q.components()) * norm(grad_u.components()) + 1.0;
                assert!(
                    (lhs + rhs).abs() <= 1e-10 * scale,
                    "adjointness violated: {lhs} + {rhs} on {dims:?}"
                );
            }
        }
    }

    #[test]
    fn gradient_theta_shift_equivariance_is_exact() {
        let mut rng = Rng(7);
        let g = CylinderGrid::new(&[3, 2], 8).unwrap();
        let u = random_scalar(&g, &mut rng);
        let shift = 3;
        let mut shifted = CyclicScalarField::zeros(&g);
        for v in 0..g.num_voxels() {
            for k in 0..8 {
                *shifted.at_mut(v, (k + shift) % 8) = u.at(v, k);
            }
        }
        let grad = gradient(&u);
        let grad_shifted = gradient(&shifted);
        for v in 0..g.num_voxels() {
            for k in 0..8 {
                for a in 0..g.num_flow_axes() {
                    let lhs = grad_shifted.at(g.node_index(v, (k + shift) % 8), a);
                    let rhs = grad.at(g.node_index(v, k), a);
                    assert_eq!(lhs.to_bits(), rhs.to_bits());
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let g = CylinderGrid::new(&[1], 2).unwrap(); // 2 nodes, 2 components each
        let mut q = FlowField::zeros(&g);
        *q.at_mut(0, 0) = 2.0;
        *q.at_mut(1, 0) = 0.3;
        *q.at_mut(1, 1) = 0.4;
        let s = CyclicScalarField::constant(&g, 1.0);
        let p = project_capacity(&q, &s).unwrap();
        assert!((p.at(0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(p.at(0, 1), 0.0);
        // inside the ball: untouched bit-for-bit
        assert_eq!(p.at(1, 0).to_bits(), (0.3f64).to_bits());
        assert_eq!(p.at(1, 1).to_bits(), (0.4f64).to_bits());
    }

    #[test]
    fn projection_zero_capacity_zeroes_flow() {
        let g = CylinderGrid::new(&[2], 3).unwrap();
        let mut rng = Rng(3);
        let q = random_flow(&g, &mut rng);
        let s = CyclicScalarField::zeros(&g);
        let p = project_capacity(&q, &s).unwrap();
        assert!(p.components().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn projection_rejects_negative_capacity() {
        let g = CylinderGrid::new(&[1], 2).unwrap();
        let q = FlowField::zeros(&g);
        let mut s = CyclicScalarField::zeros(&g);
        *s.at_mut(0, 0) = -0.5;
        assert_eq!(project_capacity(&q, &s), Err(Error::NegativeCapacity));
    }

    #[test]
    fn projection_is_idempotent_and_feasible() {
        let mut rng = Rng(11);
        let g = CylinderGrid::new(&[3, 3], 4).unwrap();
        for _ in 0..20 {
            let q = random_flow(&g, &mut rng);
            let mut s = CyclicScalarField::zeros(&g);
            for v in s.values_mut() {
                *v = rng.next_f64() * 1.2;
            }
            let once = project_capacity(&q, &s).unwrap();
            let twice = project_capacity(&once, &s).unwrap();
            assert_eq!(once, twice);
            for node in 0..g.num_nodes() {
                let norm = once.node_norm(node);
                assert!(norm <= s.values()[node] + 1e-12);
                assert!(norm <= q.node_norm(node) + 1e-12);
            }
        }
    }
}
