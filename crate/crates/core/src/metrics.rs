//! Error norms and the flop model for the two-scale iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(u: &[f64], reference: &[f64]) -> Result<()> {
    if u.len() != reference.len() {
        return Err(Error::Shape { left: u.len(), right: reference.len() });
    }
    Ok(())
}

/// `Σ|u − ref| / Σ|ref|` over nodes. The spacing cancels.
pub fn l1_relative(u: &[f64], reference: &[f64]) -> Result<f64> {
    check(u, reference)?;
    let num: f64 = u.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum();
    let den: f64 = reference.iter().map(|b| b.abs()).sum();
    if den == 0.0 {
        return Err(Error::Config("relative error against an identically zero reference".into()));
    }
    Ok(num / den)
}

/// `cell · Σ|u − ref|`, where `cell` is the node's cell measure (`h^d` on a uniform grid).
pub fn l1_absolute(u: &[f64], reference: &[f64], cell: f64) -> Result<f64> {
    check(u, reference)?;
    Ok(cell * u.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

pub fn linf(u: &[f64], reference: &[f64]) -> Result<f64> {
    check(u, reference)?;
    Ok(u.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// The three norms reported per iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub l1_rel: f64,
    pub l1_abs: f64,
    pub linf: f64,
}

impl ErrorNorms {
    pub fn compute(u: &[f64], reference: &[f64], cell: f64) -> Result<Self> {
        Ok(Self {
            l1_rel: l1_relative(u, reference)?,
            l1_abs: l1_absolute(u, reference, cell)?,
            linf: linf(u, reference)?,
        })
    }
}

/// Flop model: `A(N, d) = C · 2^d · (N + 1)^d` for one fast-sweeping solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlopModel {
    pub n: u64,
    pub m: u64,
    pub d: u32,
    /// Sweep-count constant.
    pub c: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpeedupEstimate {
    /// Iteration count below which the parallel method pays off.
    pub threshold: f64,
    /// `A(N·M, d)`: serial fast sweeping on the whole fine grid.
    pub serial_fine: f64,
    /// All coarse grids plus the causal sweep, one iteration.
    pub coarse_phase: f64,
    /// All subdomain solves, one iteration.
    pub fine_phase: f64,
}

impl FlopModel {
    pub fn new(n: u64, m: u64, d: u32, c: u64) -> Result<Self> {
        if n == 0 || m == 0 || c == 0 || !(d == 1 || d == 2) {
            return Err(Error::Config(format!("invalid flop model N={n} M={m} d={d} C={c}")));
        }
        Ok(Self { n, m, d, c })
    }

    /// `A(points, d)`.
    pub fn fsm_flops(&self, points: u64) -> f64 {
        self.c as f64 * 2f64.powi(self.d as i32) * ((points + 1) as f64).powi(self.d as i32)
    }

    fn causal_flops(&self) -> f64 {
        2f64.powi(self.d as i32) * self.m as f64 * ((self.n + 1) as f64).powi(self.d as i32)
    }

    pub fn speedup_threshold(&self) -> SpeedupEstimate {
        let (n, m, d) = (self.n, self.m, self.d as f64);
        let serial_fine = self.fsm_flops(n * m);
        let causal = self.causal_flops();
        SpeedupEstimate {
            threshold: serial_fine / (self.fsm_flops(n) + self.fsm_flops(m) + causal),
            serial_fine,
            coarse_phase: d * m as f64 * self.fsm_flops(n) + causal,
            fine_phase: (n as f64).powf(d) * self.fsm_flops(m),
        }
    }
}
