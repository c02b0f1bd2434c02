//! Strip model problem for studying θ.
//!
//! `|∇u| = 1` on `[0,1]×[0,H]` with `u = √(x²+y²)` on the bottom and left
//! edges. The coarse nodes `(iH, jh)` form `M + 1` horizontal rows; every row
//! but the top one is advanced by `U_{i−1,j} + H`, the top row by the
//! two-dimensional Godunov update from `U_{i−1,M}` and `U_{i,0}`. Because all
//! characteristics point up and to the right, the weighted correction applies
//! at every node, and `U^k` equals the fine solution on columns `i ≤ k`.

use serde::{Deserialize, Serialize};

use super::{theta_used, ThetaParams, HISTORY};
use crate::error::{Error, Result};
use crate::sweep::{fsm_solve, godunov_solve, Field, SweepOptions, Wind};

/// How θ is chosen at each node and iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ThetaPolicy {
    Fixed {
        theta: f64,
    },
    Estimated {
        #[serde(default)]
        params: ThetaParams,
    },
    /// `θ = m̃ + fraction·(M̄ − m̃)`, using the fine solution.
    Oracle {
        fraction: f64,
    },
}

impl ThetaPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThetaPolicy::Fixed { theta } if !(*theta >= 0.0 && theta.is_finite()) => {
                Err(Error::Config(format!("theta: fixed value {theta} must be finite and nonnegative")))
            }
            ThetaPolicy::Estimated { params } => params.validate(),
            ThetaPolicy::Oracle { fraction } if !(*fraction > 0.0 && *fraction < 1.0) => {
                Err(Error::Config(format!("theta: oracle fraction {fraction} must lie in (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

/// Admissible window `(m̃, M̄)` at one node. `d` is `C(U^{k+1}) − C(U^k)`;
/// a zero difference leaves θ unconstrained and both bounds are `+∞`.
pub fn oracle_bounds(u_fine: f64, u_k: f64, big_u_k: f64, d: f64) -> (f64, f64) {
    if d == 0.0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    let upper = (u_fine - u_k) / d;
    let lower = ((big_u_k - u_k) / d).max(0.0);
    (lower, upper)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelProblem {
    n: usize,
    m: usize,
}

/// Values on the coarse nodes, `(N+1)·(M+1)` entries indexed `i·(M+1) + j`.
pub type CoarseValues = Vec<f64>;

#[derive(Clone, Debug, Serialize)]
pub struct ModelIterate {
    pub k: usize,
    /// `max |U^k − u^f|` over all coarse nodes.
    pub linf: f64,
    /// `H·h·Σ |U^k − u^f|` divided by the strip area `H`.
    pub l1_abs: f64,
    /// Smallest positive `M̄` over nodes with `d < 0`, where it is an upper
    /// bound on θ, met while computing `U^k` (`NaN` at `k = 0`).
    pub min_mbar: f64,
    /// Largest θ applied while computing `U^k` (`NaN` at `k = 0`).
    pub max_theta_used: f64,
    /// `max |U^k − u^f|` over columns `i ≤ k`.
    pub settled_error: f64,
}

/// Per-node window and applied weight while computing one iterate; `NaN` on
/// the boundary rows.
#[derive(Clone, Debug)]
pub struct ModelStep {
    pub lower: CoarseValues,
    pub upper: CoarseValues,
    pub theta: CoarseValues,
}

#[derive(Clone, Debug)]
pub struct ModelRun {
    pub history: Vec<ModelIterate>,
    /// `U^0, U^1, …`.
    pub iterates: Vec<CoarseValues>,
    /// `steps[k]` produced `iterates[k + 1]`.
    pub steps: Vec<ModelStep>,
    /// Fine solution restricted to the coarse nodes.
    pub fine: CoarseValues,
}

impl ModelProblem {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::Config(format!("model problem needs N, M ≥ 2 (got N={n}, M={m})")));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coarse_spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn fine_spacing(&self) -> f64 {
        1.0 / (self.n * self.m) as f64
    }

    pub fn exact(x: f64, y: f64) -> f64 {
        x.hypot(y)
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.m + 1) + j
    }

    /// Coarse solver at row `j` from the left neighbour and the row-0 value below.
    pub fn coarse_solver(&self, left: f64, bottom: f64, j: usize) -> f64 {
        let big_h = self.coarse_spacing();
        if j == self.m {
            godunov_solve(left, bottom, 1.0, big_h)
        } else {
            left + big_h
        }
    }

    fn c_of(&self, u: &[f64], i: usize, j: usize) -> f64 {
        self.coarse_solver(u[self.at(i - 1, j)], u[self.at(i, 0)], j)
    }

    /// Fast sweeping on the whole strip, `(NM+1)×(M+1)` nodes.
    pub fn fine_reference(&self) -> Field {
        let (nx, ny) = (self.n * self.m + 1, self.m + 1);
        let h = self.fine_spacing();
        let mut field = Field::new(nx, ny);
        for l in 0..nx {
            field.fix(l, 0, l as f64 * h, Wind::UNSET);
        }
        for m in 1..ny {
            field.fix(0, m, m as f64 * h, Wind::UNSET);
        }
        let r = vec![1.0; nx * ny];
        fsm_solve(&mut field, &r, h, SweepOptions::for_problem(2, 1.0));
        field
    }

    /// `h²·Σ |u^f − u^{exact}|` over the fine strip nodes, divided by the strip
    /// area: the L1 discretization error per unit area.
    pub fn discretization_error(&self, fine: &Field) -> f64 {
        let h = self.fine_spacing();
        let mut sum = 0.0;
        for l in 0..fine.nx() {
            for m in 0..fine.ny() {
                sum += (fine.get(l, m) - Self::exact(l as f64 * h, m as f64 * h)).abs();
            }
        }
        h * h * sum / self.coarse_spacing()
    }

    /// `u^f` on the coarse nodes.
    pub fn fine_on_coarse(&self, fine: &Field) -> CoarseValues {
        let mut out = vec![0.0; (self.n + 1) * (self.m + 1)];
        for i in 0..=self.n {
            for j in 0..=self.m {
                out[self.at(i, j)] = fine.get(i * self.m, j);
            }
        }
        out
    }

    /// Fine solve on the subdomain `[(i−1)H, iH]×[0,H]` with its left column
    /// fixed to `left` (rows `0..=M`); returns the right column.
    pub fn subdomain_solve(&self, i: usize, left: &[f64]) -> Vec<f64> {
        let ny = self.m + 1;
        let h = self.fine_spacing();
        let mut field = Field::new(ny, ny);
        for (j, &v) in left.iter().enumerate() {
            field.fix(0, j, v, Wind::new(1, 0));
        }
        let x0 = (i - 1) * self.m;
        for l in 1..ny {
            field.fix(l, 0, (x0 + l) as f64 * h, Wind::UNSET);
        }
        let r = vec![1.0; ny * ny];
        fsm_solve(&mut field, &r, h, SweepOptions::for_problem(2, 1.0));
        (0..ny).map(|j| field.get(self.m, j)).collect()
    }

    /// `u^k` on the coarse nodes from boundary data `U^k`.
    pub fn fine_pass(&self, big_u: &[f64], fine: &[f64]) -> CoarseValues {
        let mut out = fine.to_vec();
        for i in 1..=self.n {
            let left = &big_u[self.at(i - 1, 0)..=self.at(i - 1, self.m)];
            for (j, v) in self.subdomain_solve(i, left).into_iter().enumerate().skip(1) {
                out[self.at(i, j)] = v;
            }
        }
        out
    }

    /// `U^0`: coarse solver alone, column by column.
    pub fn initial(&self, fine: &[f64]) -> CoarseValues {
        let mut u = vec![0.0; fine.len()];
        for j in 0..=self.m {
            u[self.at(0, j)] = fine[self.at(0, j)];
        }
        for i in 1..=self.n {
            u[self.at(i, 0)] = fine[self.at(i, 0)];
            for j in 1..=self.m {
                u[self.at(i, j)] = self.c_of(&u, i, j);
            }
        }
        u
    }

    /// Runs `max_k` weighted-correction iterations.
    pub fn run(&self, policy: &ThetaPolicy, max_k: usize) -> Result<ModelRun> {
        policy.validate()?;
        let fine = self.fine_on_coarse(&self.fine_reference());
        // coarse nodes are H apart in x and h apart in y; the strip has area H
        let cell = self.fine_spacing();
        let len = fine.len();

        let record = |k: usize, u: &[f64], min_mbar: f64, max_theta: f64| {
            let mut linf = 0.0f64;
            let mut sum = 0.0;
            let mut settled = 0.0f64;
            for i in 0..=self.n {
                for j in 0..=self.m {
                    let e = (u[self.at(i, j)] - fine[self.at(i, j)]).abs();
                    linf = linf.max(e);
                    sum += e;
                    if i <= k {
                        settled = settled.max(e);
                    }
                }
            }
            ModelIterate { k, linf, l1_abs: cell * sum, min_mbar, max_theta_used: max_theta, settled_error: settled }
        };

        let mut big_u = self.initial(&fine);
        let mut history = vec![record(0, &big_u, f64::NAN, f64::NAN)];
        let mut iterates = vec![big_u.clone()];
        let mut steps = Vec::with_capacity(max_k);
        let mut u_prev: Option<CoarseValues> = None;
        // C^k, C^{k−1}, … on every node, newest first
        let mut c_hist: Vec<CoarseValues> = vec![self.c_all(&big_u)];

        for k in 0..max_k {
            let u_k = self.fine_pass(&big_u, &fine);
            let mut next = vec![0.0; len];
            for j in 0..=self.m {
                next[self.at(0, j)] = fine[self.at(0, j)];
            }
            let mut min_mbar = f64::INFINITY;
            let mut max_theta = 0.0f64;
            let mut step =
                ModelStep { lower: vec![f64::NAN; len], upper: vec![f64::NAN; len], theta: vec![f64::NAN; len] };
            for i in 1..=self.n {
                next[self.at(i, 0)] = fine[self.at(i, 0)];
                for j in 1..=self.m {
                    let p = self.at(i, j);
                    let c_new = self.c_of(&next, i, j);
                    let d = c_new - c_hist[0][p];
                    let (lower, upper) = oracle_bounds(fine[p], u_k[p], big_u[p], d);
                    // with d > 0 the same quotient bounds θ from below
                    if d < 0.0 && upper > 0.0 {
                        min_mbar = min_mbar.min(upper);
                    }
                    let theta = match policy {
                        ThetaPolicy::Fixed { theta } => *theta,
                        ThetaPolicy::Estimated { params } => match &u_prev {
                            None => params.bootstrap,
                            Some(prev) => {
                                let dc: Vec<f64> = c_hist.windows(2).take(HISTORY).map(|w| w[0][p] - w[1][p]).collect();
                                theta_used(u_k[p] - prev[p], &dc, params).1
                            }
                        },
                        ThetaPolicy::Oracle { fraction } => {
                            if d == 0.0 {
                                0.0
                            } else {
                                lower + fraction * (upper - lower)
                            }
                        }
                    };
                    max_theta = max_theta.max(theta);
                    (step.lower[p], step.upper[p], step.theta[p]) = (lower, upper, theta);
                    next[p] = theta * d + u_k[p];
                }
            }
            big_u = next;
            steps.push(step);
            c_hist.insert(0, self.c_all(&big_u));
            c_hist.truncate(HISTORY + 1);
            u_prev = Some(u_k);
            let min_mbar = if min_mbar.is_finite() { min_mbar } else { f64::NAN };
            history.push(record(k + 1, &big_u, min_mbar, max_theta));
            iterates.push(big_u.clone());
        }
        Ok(ModelRun { history, iterates, steps, fine })
    }

    fn c_all(&self, u: &[f64]) -> CoarseValues {
        let mut c = vec![f64::NAN; u.len()];
        for i in 1..=self.n {
            for j in 1..=self.m {
                c[self.at(i, j)] = self.c_of(u, i, j);
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(oracle_bounds(1.0, 1.0, 2.0, -0.5), (0.0, 0.0));
        let (lo, hi) = oracle_bounds(1.0, 1.2, 1.5, -0.4);
        assert!((hi - 0.5).abs() < 1e-15);
        assert_eq!(lo, 0.0);
        let (lo, _) = oracle_bounds(1.0, 1.2, 1.1, -0.4);
        assert!((lo - 0.25).abs() < 1e-15);
        assert_eq!(oracle_bounds(1.0, 1.2, 1.1, 0.0), (f64::INFINITY, f64::INFINITY));
    }

    #[test]
    fn fine_reference_overestimates_exact() {
        let p = ModelProblem::new(4, 5).unwrap();
        let f = p.fine_reference();
        let h = p.fine_spacing();
        for l in 0..f.nx() {
            for m in 0..f.ny() {
                let e = ModelProblem::exact(l as f64 * h, m as f64 * h);
                assert!(f.get(l, m) >= e - 1e-14);
                assert!(f.get(l, m) - e < h, "{} {}", f.get(l, m) - e, h);
            }
        }
    }

    #[test]
    fn exactness_on_settled_columns() {
        let p = ModelProblem::new(6, 8).unwrap();
        for policy in [
            ThetaPolicy::Fixed { theta: 1.0 },
            ThetaPolicy::Fixed { theta: 0.3 },
            ThetaPolicy::Estimated { params: ThetaParams::default() },
            ThetaPolicy::Oracle { fraction: 0.5 },
        ] {
            let run = p.run(&policy, 6).unwrap();
            for it in &run.history {
                assert!(it.settled_error <= 1e-12, "{policy:?} k={} {}", it.k, it.settled_error);
            }
            assert!(run.history[6].linf <= 1e-12, "{policy:?}");
        }
    }

    #[test]
    fn zero_theta_injects_fine_values() {
        let p = ModelProblem::new(4, 4).unwrap();
        let run = p.run(&ThetaPolicy::Fixed { theta: 0.0 }, 2).unwrap();
        let u0 = p.fine_pass(&run.iterates[0], &run.fine);
        assert_eq!(run.iterates[1], u0);
    }

    #[test]
    fn invalid_policies() {
        let p = ModelProblem::new(4, 4).unwrap();
        assert!(p.run(&ThetaPolicy::Fixed { theta: -1.0 }, 1).is_err());
        assert!(p.run(&ThetaPolicy::Oracle { fraction: 1.0 }, 1).is_err());
        assert!(ModelProblem::new(1, 4).is_err());
    }
}
