//! Coarse-level steps: initialization, causal sweeps and the weighted update.

use rayon::prelude::*;

use super::{interface_normals, CoarseState, FineState, Problem};
use crate::error::{Error, Result};
use crate::grid::CoarseGrid;
use crate::sweep::{candidate, for_each_in_order, fsm_solve, is_inf, orderings, Field, Wind, INF};

/// Skeleton index and slowness of every node of `grid`, in field layout.
fn grid_nodes(problem: &Problem, grid: &CoarseGrid) -> (Vec<usize>, Vec<f64>) {
    let m = problem.spec().m();
    let sk = problem.skeleton();
    let mut idx = Vec::with_capacity(grid.len());
    let mut r = Vec::with_capacity(grid.len());
    for a in 0..grid.nx {
        for b in 0..grid.ny {
            let (gx, gy) = grid.lattice(a, b, m);
            idx.push(sk.index(gx, gy).expect("coarse grid node lies on the skeleton"));
            r.push(problem.r_at(gx, gy));
        }
    }
    (idx, r)
}

fn scatter(len: usize, parts: Vec<(Vec<usize>, Field)>) -> (Vec<f64>, Vec<Wind>) {
    let mut values = vec![INF; len];
    let mut winds = vec![Wind::UNSET; len];
    for (idx, field) in parts {
        for (t, &p) in idx.iter().enumerate() {
            values[p] = field.values[t];
            winds[p] = field.winds[t];
        }
    }
    (values, winds)
}

/// Solves every coarse grid independently, then runs one causal sweep.
pub fn initialize_coarse(problem: &Problem, max_rounds: usize) -> Result<CoarseState> {
    let spec = problem.spec();
    let big_h = spec.coarse_spacing();
    let opts = problem.sweep_options(max_rounds);
    let parts = problem
        .grids()
        .par_iter()
        .map(|grid| {
            let (idx, r) = grid_nodes(problem, grid);
            let mut field = Field::new(grid.nx, grid.ny);
            for a in 0..grid.nx {
                for b in 0..grid.ny {
                    let (gx, gy) = grid.lattice(a, b, spec.m());
                    let t = field.idx(a, b);
                    if let Some((v, w)) = problem.boundary().fixed_value(spec, gx, gy, big_h, r[t]) {
                        field.fix(a, b, v, w);
                    }
                }
            }
            if !field.has_fixed() {
                return Err(Error::Config(format!(
                    "coarse grid {:?} contains no boundary node; the boundary data cannot reach it",
                    grid.family
                )));
            }
            fsm_solve(&mut field, &r, big_h, opts);
            Ok((idx, field))
        })
        .collect::<Result<Vec<_>>>()?;
    let (values, winds) = scatter(problem.skeleton().len(), parts);
    let mut state = CoarseState { k: 0, values, winds };
    causal_sweep(problem, &mut state);
    Ok(state)
}

/// Sequential sweep over all coarse grids, interleaved line by line, in each
/// of the `2^d` orderings. A node whose wind says its value came from a
/// neighbour on the same line is raised to that neighbour's value if it
/// undercuts it. Values only increase; winds are left alone.
pub fn causal_sweep(problem: &Problem, state: &mut CoarseState) {
    let spec = problem.spec();
    let sk = problem.skeleton();
    let m = spec.m();
    let (nx, ny) = problem.lattice_shape();
    let one_d = spec.dim() == 1;
    // neighbours along a skeleton line are h apart in 2D and H apart in 1D
    let step = if one_d { m } else { 1 };
    for &order in orderings(spec.dim()) {
        for_each_in_order(nx, ny, order, |gx, gy| {
            let Some(p) = sk.index(gx, gy) else { return };
            if problem.gamma(p).is_some() {
                return;
            }
            let w = state.winds[p];
            let mut u = state.values[p];
            let mut raise = |q: Option<usize>| {
                if let Some(q) = q {
                    let v = state.values[q];
                    if !is_inf(v) && u < v {
                        u = v;
                    }
                }
            };
            if one_d || gy % m == 0 {
                if w.x() > 0 && gx >= step {
                    raise(sk.index(gx - step, gy));
                } else if w.x() < 0 && gx + step < nx {
                    raise(sk.index(gx + step, gy));
                }
            }
            if !one_d && gx % m == 0 {
                if w.y() > 0 && gy >= 1 {
                    raise(sk.index(gx, gy - 1));
                } else if w.y() < 0 && gy + 1 < ny {
                    raise(sk.index(gx, gy + 1));
                }
            }
            state.values[p] = u;
        });
    }
}

/// `C(nbrs(U))` at every skeleton node: the Godunov update from the node's
/// neighbours on its own coarse grid.
pub fn coarse_values_of_solver(problem: &Problem, state: &CoarseState) -> Vec<f64> {
    let big_h = problem.spec().coarse_spacing();
    let parts = problem
        .grids()
        .par_iter()
        .map(|grid| {
            let (idx, r) = grid_nodes(problem, grid);
            let mut field = Field::new(grid.nx, grid.ny);
            for (t, &p) in idx.iter().enumerate() {
                field.values[t] = state.values[p];
            }
            let mut out = field.clone();
            for a in 0..grid.nx {
                for b in 0..grid.ny {
                    let t = field.idx(a, b);
                    out.values[t] = candidate(&field.neighbors(a, b), r[t], big_h).0;
                }
            }
            (idx, out)
        })
        .collect();
    scatter(problem.skeleton().len(), parts).0
}

/// Whether the weighted correction applies: in 1D all three winds agree; in
/// 2D they all point into one adjacent subdomain (nonnegative dot with each
/// of its inward normals).
fn gated(problem: &Problem, p: usize, fine: Wind, coarse: Wind, fresh: Wind) -> bool {
    if problem.spec().dim() == 1 {
        return fine.x() != 0 && fine.x() == coarse.x() && coarse.x() == fresh.x();
    }
    let (gx, gy) = problem.skeleton().lattice(p);
    problem.skeleton().adjacent(gx, gy).iter().any(|q| {
        interface_normals(problem.spec(), gx, gy, &q.normals)
            .iter()
            .all(|&n| fine.dot(n) >= 0 && coarse.dot(n) >= 0 && fresh.dot(n) >= 0)
    })
}

/// Weighted coarse update followed by a causal sweep. `c_k` is
/// `C(nbrs(U^k))` per node and `thetas` the weight per node. Returns the new
/// state and the number of nodes that took the weighted branch.
pub fn coarse_update(
    problem: &Problem,
    coarse: &CoarseState,
    fine: &FineState,
    c_k: &[f64],
    thetas: &[f64],
    rounds: usize,
) -> (CoarseState, usize) {
    let spec = problem.spec();
    let big_h = spec.coarse_spacing();
    let parts: Vec<(Vec<usize>, Field, usize)> = problem
        .grids()
        .par_iter()
        .map(|grid| {
            let (idx, r) = grid_nodes(problem, grid);
            let mut field = Field::new(grid.nx, grid.ny);
            for (t, &p) in idx.iter().enumerate() {
                if let Some((v, w)) = problem.gamma(p) {
                    field.values[t] = v;
                    field.winds[t] = w;
                    field.fixed[t] = true;
                } else if is_inf(fine.values[p]) {
                    field.values[t] = coarse.values[p];
                    field.winds[t] = coarse.winds[p];
                } else {
                    field.values[t] = fine.values[p];
                    field.winds[t] = fine.winds[p];
                }
            }
            let mut weighted = vec![false; idx.len()];
            for _ in 0..rounds {
                for &order in orderings(spec.dim()) {
                    for_each_in_order(grid.nx, grid.ny, order, |a, b| {
                        let t = field.idx(a, b);
                        if field.fixed[t] {
                            return;
                        }
                        let p = idx[t];
                        let u_k = fine.values[p];
                        if is_inf(u_k) {
                            field.values[t] = coarse.values[p];
                            weighted[t] = false;
                            return;
                        }
                        let (fresh, fresh_wind) = candidate(&field.neighbors(a, b), r[t], big_h);
                        let use_weight = !is_inf(fresh)
                            && !is_inf(c_k[p])
                            && gated(problem, p, fine.winds[p], coarse.winds[p], fresh_wind);
                        field.values[t] = if use_weight { u_k + thetas[p] * (fresh - c_k[p]) } else { u_k };
                        weighted[t] = use_weight;
                    });
                }
            }
            let count = weighted.iter().filter(|&&w| w).count();
            (idx, field, count)
        })
        .collect();
    let weighted = parts.iter().map(|p| p.2).sum();
    let (values, winds) = scatter(problem.skeleton().len(), parts.into_iter().map(|(i, f, _)| (i, f)).collect());
    let mut next = CoarseState { k: coarse.k + 1, values, winds };
    causal_sweep(problem, &mut next);
    (next, weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryData;
    use crate::grid::GridSpec;
    use crate::slowness::{SlownessField, SlownessKind};
    use crate::twoscale::solve_fine;
    use proptest::prelude::*;

    fn problem(dim: usize) -> Problem {
        let spec = GridSpec::new(dim, 3, 4).unwrap();
        let kind = SlownessKind::Sine2d { amplitude: 0.5, frequency: 3.0 };
        Problem::new(spec, &SlownessField::from_catalog(&kind, 0).unwrap(), BoundaryData::point(0.0, 0.0)).unwrap()
    }

    #[test]
    fn initialization_reaches_every_node() {
        for dim in [1, 2] {
            let p = problem(dim);
            let s = initialize_coarse(&p, 50).unwrap();
            assert_eq!(s.k, 0);
            assert!(s.values.iter().all(|v| !is_inf(*v)));
        }
    }

    #[test]
    fn zero_theta_injects_fine_values() {
        let p = problem(2);
        let coarse = initialize_coarse(&p, 50).unwrap();
        let fine = solve_fine(&p, &coarse, 50);
        let c_k = coarse_values_of_solver(&p, &coarse);
        let thetas = vec![0.0; c_k.len()];
        let (next, _) = coarse_update(&p, &coarse, &fine, &c_k, &thetas, 1);
        assert_eq!(next.k, 1);
        for (a, b) in next.values.iter().zip(&fine.values) {
            // the causal sweep may only raise
            assert!(a >= b);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn causal_sweep_never_lowers(noise in prop::collection::vec(-0.05f64..0.05, 64)) {
            let p = problem(2);
            let mut s = initialize_coarse(&p, 50).unwrap();
            for (i, v) in s.values.iter_mut().enumerate() {
                if p.gamma(i).is_none() {
                    *v += noise[i % noise.len()];
                }
            }
            let before = s.values.clone();
            causal_sweep(&p, &mut s);
            for (i, (a, b)) in s.values.iter().zip(&before).enumerate() {
                prop_assert!(a >= b);
                if p.gamma(i).is_some() {
                    prop_assert_eq!(a, b);
                }
            }
        }
    }
}
