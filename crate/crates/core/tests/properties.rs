//! Property tests for the geometric and algebraic invariants the solvers
//! rest on.

use core::f64::consts::{PI, TAU};

use cyclic_maxflow::data_term::{build_data_term, cyclic_distance, CyclicObservation};
use cyclic_maxflow::diff_ops::{divergence, gradient, project_capacity};
use cyclic_maxflow::solver::pf::{bregman_distance, pf_label_update};
use cyclic_maxflow::{CyclicScalarField, CylinderGrid, FlowField};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    // slightly inside the half-open interval to dodge the seam itself
    -PI..PI - 1e-9
}

fn grid_strategy() -> impl Strategy<Value = CylinderGrid> {
    (prop::collection::vec(1usize..=4, 1..=2), 2usize..=8)
        .prop_map(|(dims, n_theta)| CylinderGrid::new(&dims, n_theta).unwrap())
}

fn scalar_field(grid: CylinderGrid) -> impl Strategy<Value = CyclicScalarField> {
    prop::collection::vec(-1.0f64..1.0, grid.num_nodes())
        .prop_map(move |v| CyclicScalarField::from_values(&grid, v).unwrap())
}

fn flow_field(grid: CylinderGrid) -> impl Strategy<Value = FlowField> {
    prop::collection::vec(-1.0f64..1.0, grid.num_nodes() * grid.num_flow_axes())
        .prop_map(move |v| FlowField::from_components(&grid, v).unwrap())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclic_distance_is_a_metric(a in angle(), b in angle(), c in angle()) {
        let dab = cyclic_distance(a, b);
        let dba = cyclic_distance(b, a);
        prop_assert!((dab - dba).abs() < 1e-12, "symmetry: {dab} vs {dba}");
        prop_assert!(cyclic_distance(a, a) == 0.0);
        prop_assert!((0.0..=PI + 1e-12).contains(&dab));
        let dac = cyclic_distance(a, c);
        let dcb = cyclic_distance(c, b);
        prop_assert!(dab <= dac + dcb + 1e-12, "triangle: {dab} > {dac} + {dcb}");
    }

    #[test]
    fn adjointness_of_gradient_and_divergence(
        (u, q) in grid_strategy().prop_flat_map(|g| (scalar_field(g.clone()), flow_field(g)))
    ) {
        let grad_u = gradient(&u);
        let div_q = divergence(&q);
        let lhs = dot(div_q.values(), u.values());
        let rhs = dot(q.components(), grad_u.components());
        let scale = dot(q.components(), q.components()).sqrt()
            * dot(grad_u.components(), grad_u.components()).sqrt()
            + 1.0;
        prop_assert!((lhs + rhs).abs() <= 1e-10 * scale);
    }

    #[test]
    fn projection_is_idempotent_and_contractive(
        (q, caps) in grid_strategy().prop_flat_map(|g| {
            let n = g.num_nodes();
            (flow_field(g), prop::collection::vec(0.0f64..1.5, n))
        })
    ) {
        let s = CyclicScalarField::from_values(q.grid(), caps).unwrap();
        let once = project_capacity(&q, &s).unwrap();
        let twice = project_capacity(&once, &s).unwrap();
        prop_assert_eq!(&once, &twice);
        for node in 0..q.grid().num_nodes() {
            prop_assert!(once.node_norm(node) <= s.values()[node] + 1e-12);
            prop_assert!(once.node_norm(node) <= q.node_norm(node) + 1e-12);
        }
    }

    #[test]
    fn gradient_commutes_with_theta_shift(
        (u, shift) in grid_strategy().prop_flat_map(|g| {
            let n = g.n_theta();
            (scalar_field(g), 0usize..n)
        })
    ) {
        let grid = u.grid().clone();
        let n = grid.n_theta();
        let mut shifted = CyclicScalarField::zeros(&grid);
        for v in 0..grid.num_voxels() {
            for k in 0..n {
                *shifted.at_mut(v, (k + shift) % n) = u.at(v, k);
            }
        }
        let grad = gradient(&u);
        let grad_shifted = gradient(&shifted);
        for v in 0..grid.num_voxels() {
            for k in 0..n {
                for a in 0..grid.num_flow_axes() {
                    let lhs = grad_shifted.at(grid.node_index(v, (k + shift) % n), a);
                    let rhs = grad.at(grid.node_index(v, k), a);
                    prop_assert_eq!(lhs.to_bits(), rhs.to_bits());
                }
            }
        }
    }

    #[test]
    fn data_term_shifts_with_rotated_observations(
        (angles, weights, shift, n_theta) in (2usize..=8).prop_flat_map(|n| (
            prop::collection::vec(-PI..PI - 1e-9, 3),
            prop::collection::vec(0.0f64..2.0, 3),
            0usize..n,
            Just(n),
        ))
    ) {
        let grid = CylinderGrid::new(&[3], n_theta).unwrap();
        let obs = CyclicObservation::new(&grid, angles.clone(), weights.clone()).unwrap();
        let d = build_data_term(&obs, 1.0, 1.0).unwrap();
        let dt = grid.delta_theta();
        let rotated: Vec<f64> = angles
            .iter()
            .map(|&a| {
                let mut r = a + shift as f64 * dt;
                while r >= PI {
                    r -= TAU;
                }
                r
            })
            .collect();
        let obs_rot = CyclicObservation::new(&grid, rotated, weights).unwrap();
        let d_rot = build_data_term(&obs_rot, 1.0, 1.0).unwrap();
        for v in 0..3 {
            for k in 0..n_theta {
                let got = d_rot.at(v, (k + shift) % n_theta);
                let want = d.at(v, k);
                prop_assert!((got - want).abs() < 1e-12, "({v},{k}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn bregman_distance_nonnegative_and_zero_on_diagonal(
        (u_raw, v_raw, n_theta) in (2usize..=8).prop_flat_map(|n| (
            prop::collection::vec(0.01f64..2.0, 2 * n),
            prop::collection::vec(0.01f64..2.0, 2 * n),
            Just(n),
        ))
    ) {
        let grid = CylinderGrid::new(&[2], n_theta).unwrap();
        let dt = grid.delta_theta();
        let normalize = |raw: Vec<f64>| {
            let mut f = CyclicScalarField::zeros(&grid);
            for v in 0..2 {
                let sum: f64 = raw[v * n_theta..(v + 1) * n_theta].iter().sum();
                for k in 0..n_theta {
                    *f.at_mut(v, k) = raw[v * n_theta + k] / (sum * dt);
                }
            }
            f
        };
        let u = normalize(u_raw);
        let v = normalize(v_raw);
        prop_assert!(bregman_distance(&u, &v).unwrap() >= 0.0);
        prop_assert_eq!(bregman_distance(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn label_update_from_uniform_is_softmin(
        (costs, n_theta, c) in (2usize..=8).prop_flat_map(|n| (
            prop::collection::vec(0.0f64..3.0, 2 * n),
            Just(n),
            0.05f64..1.0,
        ))
    ) {
        let grid = CylinderGrid::new(&[2], n_theta).unwrap();
        let d = CyclicScalarField::from_values(&grid, costs).unwrap();
        let u = CyclicScalarField::uniform_indicator(&grid);
        let q = FlowField::zeros(&grid);
        let next = pf_label_update(&u, &d, &q, c);
        let dt = grid.delta_theta();
        for v in 0..2 {
            let z: f64 = (0..n_theta).map(|k| (-d.at(v, k) / c).exp()).sum();
            for k in 0..n_theta {
                let want = (-d.at(v, k) / c).exp() / (z * dt);
                prop_assert!((next.at(v, k) - want).abs() < 1e-12 * (1.0 + want));
            }
        }
    }

    #[test]
    fn uniform_indicator_normalizes(grid in grid_strategy()) {
        let u = CyclicScalarField::uniform_indicator(&grid);
        for &s in u.integrate_theta().values() {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
