//! The two-scale iteration.
//!
//! 1. Every coarse grid (the base grid and its `2(M−1)` shifted copies) is
//!    solved by fast sweeping, then all of them are swept sequentially to
//!    repair causality across grids.
//! 2. Each subdomain takes the coarse values whose wind arrives through its
//!    boundary as Dirichlet data; everything else on the boundary is free.
//! 3. Subdomains are solved independently on the fine grid and their values
//!    on the skeleton are merged by wind.
//! 4. The coarse grids are re-swept with the θ-weighted correction
//!    `U = θ·Ũ + u^k − θ·C(U^k)`, followed by another causal sweep.
//!
//! Steps 2–4 repeat until the coarse values and winds stop changing.

mod coarse;
mod fine;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryData;
use crate::error::{Error, Result};
use crate::grid::{CoarseGrid, GridSpec, Normal, Skeleton};
use crate::metrics::ErrorNorms;
use crate::slowness::SlownessField;
use crate::sweep::{fsm_solve, is_inf, Field, SweepOptions, SweepReport, Wind};
use crate::theta::{theta_used, ThetaParams, HISTORY};

pub use coarse::{causal_sweep, coarse_update, coarse_values_of_solver, initialize_coarse};
pub use fine::{merge, patch, solve_fine, solve_subdomain, subdomain_bcs, BcEntry};

/// A discretized problem: geometry, sampled slowness and boundary data.
#[derive(Clone, Debug)]
pub struct Problem {
    spec: GridSpec,
    skeleton: Skeleton,
    grids: Vec<CoarseGrid>,
    /// Slowness on the global fine lattice, x-major.
    slowness: Vec<f64>,
    max_slowness: f64,
    boundary: BoundaryData,
    /// Fine-level boundary data on each skeleton node.
    gamma: Vec<Option<(f64, Wind)>>,
}

impl Problem {
    pub fn new(spec: GridSpec, slowness: &SlownessField, boundary: BoundaryData) -> Result<Self> {
        boundary.validate(spec.dim())?;
        let (nx, ny) = lattice_shape(&spec);
        let values: Vec<f64> =
            (0..nx * ny).into_par_iter().map(|k| slowness.eval(spec.point(k / ny, k % ny))).collect();
        Self::from_samples(spec, values, boundary)
    }

    /// Builds a problem from slowness already sampled on the fine lattice.
    pub fn from_samples(spec: GridSpec, slowness: Vec<f64>, boundary: BoundaryData) -> Result<Self> {
        boundary.validate(spec.dim())?;
        let (nx, ny) = lattice_shape(&spec);
        if slowness.len() != nx * ny {
            return Err(Error::Shape { left: slowness.len(), right: nx * ny });
        }
        if let Some(bad) = slowness.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Config(format!("slowness must be positive and finite, found {bad}")));
        }
        let max_slowness = slowness.iter().cloned().fold(0.0, f64::max);
        let skeleton = Skeleton::new(spec);
        let grids = skeleton.coarse_grids();
        let h = spec.fine_spacing();
        let gamma = skeleton
            .nodes()
            .iter()
            .map(|&(gx, gy)| boundary.fixed_value(&spec, gx, gy, h, slowness[gx * ny + gy]))
            .collect();
        Ok(Self { spec, skeleton, grids, slowness, max_slowness, boundary, gamma })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn grids(&self) -> &[CoarseGrid] {
        &self.grids
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    /// Slowness on the global fine lattice.
    pub fn slowness(&self) -> &[f64] {
        &self.slowness
    }

    pub fn lattice_shape(&self) -> (usize, usize) {
        lattice_shape(&self.spec)
    }

    #[inline]
    pub fn r_at(&self, gx: usize, gy: usize) -> f64 {
        self.slowness[gx * self.lattice_shape().1 + gy]
    }

    /// Fine-level boundary data on skeleton node `idx`.
    pub fn gamma(&self, idx: usize) -> Option<(f64, Wind)> {
        self.gamma[idx]
    }

    pub fn sweep_options(&self, max_rounds: usize) -> SweepOptions {
        SweepOptions { max_rounds, ..SweepOptions::for_problem(self.spec.dim(), self.max_slowness) }
    }

    /// Whole-domain fast sweeping on the fine lattice: the fine solution `u^f`.
    pub fn reference(&self, max_rounds: usize) -> (Field, SweepReport) {
        let (nx, ny) = self.lattice_shape();
        let h = self.spec.fine_spacing();
        let mut field = Field::new(nx, ny);
        for gx in 0..nx {
            for gy in 0..ny {
                if let Some((v, w)) = self.boundary.fixed_value(&self.spec, gx, gy, h, self.r_at(gx, gy)) {
                    field.fix(gx, gy, v, w);
                }
            }
        }
        let report = fsm_solve(&mut field, &self.slowness, h, self.sweep_options(max_rounds));
        (field, report)
    }

    /// Restricts a lattice field to the skeleton.
    pub fn on_skeleton(&self, lattice: &[f64]) -> Vec<f64> {
        let ny = self.lattice_shape().1;
        self.skeleton.nodes().iter().map(|&(gx, gy)| lattice[gx * ny + gy]).collect()
    }
}

/// Normals at `(gx, gy)` that cross an interface between subdomains; normals
/// through the outer boundary of the domain are dropped.
pub(crate) fn interface_normals(spec: &GridSpec, gx: usize, gy: usize, normals: &[Normal]) -> Vec<Normal> {
    let nf = spec.fine_cells();
    let inner = |v: usize| v > 0 && v < nf;
    normals.iter().copied().filter(|n| if n[0] != 0 { inner(gx) } else { inner(gy) }).collect()
}

fn lattice_shape(spec: &GridSpec) -> (usize, usize) {
    let nf = spec.fine_cells() + 1;
    if spec.dim() == 1 {
        (nf, 1)
    } else {
        (nf, nf)
    }
}

/// Values and winds on every skeleton node at iteration `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseState {
    pub k: usize,
    pub values: Vec<f64>,
    pub winds: Vec<Wind>,
}

/// Subdomain solutions and their merge onto the skeleton.
#[derive(Clone, Debug)]
pub struct FineState {
    /// `u^k` on the skeleton.
    pub values: Vec<f64>,
    /// `w^k` on the skeleton.
    pub winds: Vec<Wind>,
    /// One field per subdomain, in [`GridSpec::subdomain`] order.
    pub subdomains: Vec<Field>,
}

/// How the correction weight θ is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ThetaRule {
    Fixed {
        theta: f64,
    },
    Estimated {
        #[serde(default)]
        params: ThetaParams,
    },
}

impl Default for ThetaRule {
    fn default() -> Self {
        ThetaRule::Estimated { params: ThetaParams::default() }
    }
}

impl ThetaRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThetaRule::Fixed { theta } if !(*theta >= 0.0 && theta.is_finite()) => {
                Err(Error::Config(format!("theta: fixed value {theta} must be finite and nonnegative")))
            }
            ThetaRule::Estimated { params } => params.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Converged once no coarse value moves by this much and no wind changes.
    pub conv_tol: f64,
    /// Round budget of every fast-sweeping solve.
    pub max_rounds: usize,
    /// Rounds of `2^d` orderings in the weighted coarse update.
    pub coarse_rounds: usize,
    pub theta: ThetaRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 50,
            conv_tol: 1e-10,
            max_rounds: SweepOptions::DEFAULT_MAX_ROUNDS,
            coarse_rounds: 1,
            theta: ThetaRule::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 || self.coarse_rounds == 0 {
            return Err(Error::Config("solver: max_rounds and coarse_rounds must be at least 1".into()));
        }
        if !(self.conv_tol >= 0.0) {
            return Err(Error::Config("solver: conv_tol must be nonnegative".into()));
        }
        self.theta.validate()
    }
}

/// Per-iteration diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `U^k` against the fine solution on the skeleton.
    pub coarse_error: Option<ErrorNorms>,
    /// Patched subdomain solutions against the fine solution.
    pub patched_error: Option<ErrorNorms>,
    /// `max |U^k − U^{k−1}|` (absent at `k = 0`).
    pub max_change: Option<f64>,
    pub winds_changed: usize,
    /// Nodes that took the weighted branch when `U^k` was computed.
    pub weighted_nodes: usize,
    /// Largest raw estimate `θ̄` and largest applied θ when `U^k` was computed.
    pub max_theta_bar: Option<f64>,
    pub max_theta_used: Option<f64>,
    /// Milliseconds from the start of the run to the end of this iteration.
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub coarse: CoarseState,
    pub fine: FineState,
    /// Subdomain solutions assembled on the global fine lattice.
    pub patched: Vec<f64>,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.coarse.k
    }
}

/// Builds a thread pool with `workers` threads (hardware parallelism if `None`).
pub fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs the iteration. `reference` is the fine solution on the whole
/// lattice, used only for diagnostics; `observe` sees every iterate.
pub fn run(
    problem: &Problem,
    options: &SolverOptions,
    reference: Option<&[f64]>,
    mut observe: impl FnMut(&IterationRecord, &CoarseState, &FineState, &[f64]),
) -> Result<RunResult> {
    options.validate()?;
    let start = Instant::now();
    let spec = problem.spec();
    let ref_skeleton = reference.map(|r| problem.on_skeleton(r));
    let cell = problem.spec.fine_spacing().powi(spec.dim() as i32);
    // skeleton nodes are spaced h along lines that are H apart
    let coarse_cell = if spec.dim() == 1 { spec.coarse_spacing() } else { spec.coarse_spacing() * spec.fine_spacing() };

    let mut coarse = initialize_coarse(problem, options.max_rounds)?;
    let mut history = Vec::new();
    // C(U^k), C(U^{k−1}), … on every skeleton node, newest first
    let mut c_hist = vec![coarse_values_of_solver(problem, &coarse)];
    let mut u_prev: Option<Vec<f64>> = None;
    let mut pending = IterationRecord {
        k: 0,
        coarse_error: None,
        patched_error: None,
        max_change: None,
        winds_changed: 0,
        weighted_nodes: 0,
        max_theta_bar: None,
        max_theta_used: None,
        wall_ms: 0.0,
    };
    let mut converged = false;
    loop {
        let fine = solve_fine(problem, &coarse, options.max_rounds);
        let patched = patch(problem, &fine);
        if let (Some(r), Some(rs)) = (reference, &ref_skeleton) {
            pending.coarse_error = Some(ErrorNorms::compute(&coarse.values, rs, coarse_cell)?);
            pending.patched_error = Some(ErrorNorms::compute(&patched, r, cell)?);
        }
        pending.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        observe(&pending, &coarse, &fine, &patched);
        history.push(pending.clone());
        if converged || coarse.k >= options.max_iters {
            return Ok(RunResult { history, converged, coarse, fine, patched });
        }

        let thetas: Vec<(Option<f64>, f64)> = match options.theta {
            ThetaRule::Fixed { theta } => vec![(None, theta); coarse.values.len()],
            ThetaRule::Estimated { params } => (0..coarse.values.len())
                .map(|p| {
                    let Some(prev) = &u_prev else { return (None, params.bootstrap) };
                    let involved = [fine.values[p], prev[p]].into_iter().chain(c_hist.iter().map(|c| c[p]));
                    if involved.clone().any(is_inf) {
                        return (None, params.bootstrap);
                    }
                    let dc: Vec<f64> = c_hist.windows(2).take(HISTORY).map(|w| w[0][p] - w[1][p]).collect();
                    theta_used(fine.values[p] - prev[p], &dc, &params)
                })
                .collect(),
        };
        let used: Vec<f64> = thetas.iter().map(|t| t.1).collect();
        let (next, weighted) = coarse_update(problem, &coarse, &fine, &c_hist[0], &used, options.coarse_rounds);

        let max_change = coarse.values.iter().zip(&next.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let winds_changed = coarse.winds.iter().zip(&next.winds).filter(|(a, b)| a != b).count();
        converged = max_change < options.conv_tol && winds_changed == 0;

        pending = IterationRecord {
            k: next.k,
            coarse_error: None,
            patched_error: None,
            max_change: Some(max_change),
            winds_changed,
            weighted_nodes: weighted,
            max_theta_bar: thetas.iter().filter_map(|t| t.0).reduce(f64::max),
            max_theta_used: used.iter().cloned().reduce(f64::max),
            wall_ms: 0.0,
        };
        c_hist.insert(0, coarse_values_of_solver(problem, &next));
        c_hist.truncate(HISTORY + 1);
        u_prev = Some(fine.values);
        coarse = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::EdgeValue;
    use crate::slowness::SlownessKind;

    fn problem(dim: usize, kind: SlownessKind, boundary: BoundaryData) -> Problem {
        let spec = GridSpec::new(dim, 4, 6).unwrap();
        Problem::new(spec, &SlownessField::from_catalog(&kind, 0).unwrap(), boundary).unwrap()
    }

    fn solve(p: &Problem, options: &SolverOptions) -> (RunResult, Field) {
        let (reference, _) = p.reference(options.max_rounds);
        let r = run(p, options, Some(&reference.values), |_, _, _, _| {}).unwrap();
        (r, reference)
    }

    fn max_gap(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn interface_normals_drop_outer_boundary() {
        let spec = GridSpec::new(2, 2, 3).unwrap();
        let all = [[1, 0], [-1, 0], [0, 1], [0, -1]];
        assert_eq!(interface_normals(&spec, 0, 3, &all), vec![[0, 1], [0, -1]]);
        assert_eq!(interface_normals(&spec, 3, 3, &all), all.to_vec());
        assert!(interface_normals(&spec, 6, 0, &all[..2]).is_empty());
    }

    #[test]
    fn converges_to_fine_solution() {
        let cases = [
            problem(
                1,
                SlownessKind::Gauss1d { amplitude: 10.0, center: 0.75, width: 0.05 },
                BoundaryData::whole_boundary(EdgeValue::Zero),
            ),
            problem(2, SlownessKind::Constant { value: 1.0 }, BoundaryData::point(0.0, 0.0)),
            problem(2, SlownessKind::Sine2d { amplitude: 0.5, frequency: 2.0 }, BoundaryData::point(0.3, 0.6)),
        ];
        for p in &cases {
            let (r, reference) = solve(p, &SolverOptions::default());
            assert!(r.converged, "{:?}", p.spec());
            assert!(max_gap(&r.patched, &reference.values) < 1e-10);
            assert!(max_gap(&r.coarse.values, &p.on_skeleton(&reference.values)) < 1e-10);
        }
    }

    #[test]
    fn history_is_indexed_by_iteration() {
        let p = problem(2, SlownessKind::Constant { value: 1.0 }, BoundaryData::point(0.0, 0.0));
        let (r, _) = solve(&p, &SolverOptions::default());
        assert_eq!(r.history.len(), r.iterations() + 1);
        assert!(r.history.iter().enumerate().all(|(k, h)| h.k == k));
        assert!(r.history[0].max_change.is_none());
    }

    #[test]
    fn max_iters_stops_early() {
        let p = problem(2, SlownessKind::Sine2d { amplitude: 0.5, frequency: 2.0 }, BoundaryData::point(0.0, 0.0));
        let options = SolverOptions { max_iters: 1, ..SolverOptions::default() };
        let (r, _) = solve(&p, &options);
        assert_eq!(r.iterations(), 1);
        assert!(!r.converged);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = problem(2, SlownessKind::Maze, BoundaryData::point(0.0, 0.0));
        let options = SolverOptions { max_iters: 6, ..SolverOptions::default() };
        let go = |w| thread_pool(Some(w)).unwrap().install(|| run(&p, &options, None, |_, _, _, _| {}).unwrap());
        let (a, b) = (go(1), go(3));
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.coarse.values), bits(&b.coarse.values));
        assert_eq!(bits(&a.patched), bits(&b.patched));
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(thread_pool(Some(0)).is_err());
    }
}
