//! Relaxation weights for the coarse correction.
//!
//! `θ̄ = (u^k − u^{k−1}) / D`, where `D` is a weighted average of the most
//! recent differences `C^{k−s} − C^{k−1−s}` of the coarse solver output; the
//! weight actually applied is the sigmoid-damped
//! `θ_used = [σ(θ̄)·θ̄ + (1 − σ(θ̄))·δ·θ̄]⁺` with `σ(t) = 1 / (1 + e^{(t − x₀)/γ})`.

pub mod model;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of coarse-solver differences kept for the weighted denominator.
pub const HISTORY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaParams {
    pub x0: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Weights of the latest, previous and oldest coarse differences.
    pub omega: [f64; HISTORY],
    /// Weight used while no estimate is available.
    pub bootstrap: f64,
    /// Denominators smaller than this in magnitude fall back to `bootstrap`.
    pub denom_guard: f64,
    /// Upper bound on the applied weight; `None` leaves it unbounded.
    pub cap: Option<f64>,
}

impl Default for ThetaParams {
    fn default() -> Self {
        Self {
            x0: 0.9,
            gamma: 0.75,
            delta: 0.01,
            omega: [4.0, 2.0, 1.0],
            bootstrap: 0.01,
            denom_guard: 1e-14,
            cap: Some(1.0),
        }
    }
}

impl ThetaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("theta: {what}")));
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive");
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        if self.omega.iter().any(|w| !(*w >= 0.0)) || self.omega.iter().all(|w| *w == 0.0) {
            return bad("omega must be nonnegative and not all zero");
        }
        if !(self.bootstrap >= 0.0) || !(self.denom_guard >= 0.0) || !self.x0.is_finite() {
            return bad("bootstrap, denom_guard and x0 must be finite and nonnegative");
        }
        if self.cap.is_some_and(|c| !(c >= 0.0 && c.is_finite())) {
            return bad("cap must be finite and nonnegative");
        }
        Ok(())
    }
}

/// `θ̄ = du / (Σ ω_s·dc[s] / Σ ω_s)` over the available differences, `dc[0]`
/// being the most recent. Returns `None` when no usable estimate exists.
pub fn estimate_theta(du: f64, dc: &[f64], params: &ThetaParams) -> Option<f64> {
    let avail = dc.len().min(HISTORY);
    let (num, wsum) = (0..avail).fold((0.0, 0.0), |(n, w), s| (n + params.omega[s] * dc[s], w + params.omega[s]));
    if wsum == 0.0 {
        return None;
    }
    let den = num / wsum;
    if !den.is_finite() || den.abs() < params.denom_guard {
        return None;
    }
    let theta = du / den;
    theta.is_finite().then_some(theta)
}

/// The single-difference estimate `du / dc`.
pub fn first_estimate(du: f64, dc: f64) -> f64 {
    du / dc
}

fn sigmoid(t: f64, params: &ThetaParams) -> f64 {
    let z = (t - params.x0) / params.gamma;
    if z > 700.0 {
        0.0
    } else if z < -700.0 {
        1.0
    } else {
        1.0 / (1.0 + z.exp())
    }
}

pub fn damp_theta(theta_bar: f64, params: &ThetaParams) -> f64 {
    let s = sigmoid(theta_bar, params);
    (s * theta_bar + (1.0 - s) * params.delta * theta_bar).max(0.0)
}

/// Estimate, damp and cap; `bootstrap` when no estimate is available.
pub fn theta_used(du: f64, dc: &[f64], params: &ThetaParams) -> (Option<f64>, f64) {
    let (bar, used) = match estimate_theta(du, dc, params) {
        Some(bar) => (Some(bar), damp_theta(bar, params)),
        None => (None, params.bootstrap),
    };
    (bar, params.cap.map_or(used, |c| used.min(c)))
}
