//! Slowness functions `r(x) > 0` on `[0, 1]^d`.
//!
//! Fields are built from a [`SlownessKind`] (the serialisable catalog entry)
//! plus a seed, and evaluated pointwise at grid nodes.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value inside maze barriers.
pub const BARRIER: f64 = 1000.0;
/// Value inside fast obstacles.
pub const FAST_OBSTACLE: f64 = 0.01;

/// Catalog entry, as it appears in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlownessKind {
    Constant {
        value: f64,
    },
    /// `1 + amplitude·exp(−(x − center)² / (2·width²))`, a function of `x` only.
    Gauss1d {
        #[serde(default = "default_gauss_amplitude")]
        amplitude: f64,
        #[serde(default = "default_gauss_center")]
        center: f64,
        #[serde(default = "default_gauss_width")]
        width: f64,
    },
    /// `1 + amplitude·sin(frequency·πx)·sin(frequency·πy)`.
    Sine2d {
        amplitude: f64,
        frequency: f64,
    },
    /// `1 + 0.5·sin(πx/ε)·sin(πy/ε)` with `ε(x, y) = (|x| + |y| + 0.001)/50`.
    VarSine,
    Obstacles {
        shapes: Vec<Shape>,
        #[serde(default = "default_background")]
        background: f64,
    },
    /// Preset: two curved barriers (one enclosing a subdomain for `H = 1/10`)
    /// and a small fast disk. Approximates the curved-maze experiment.
    Maze,
    /// Preset: fast obstacle on `[0.26, 0.27] × [0, 0.6]`.
    FastStrip,
    /// `r = 1` on the lines `x ∈ εZ` or `y ∈ εZ`, `r = 2` elsewhere.
    /// `line_tol` is the half-thickness of the lines; configs default it to `h/2`.
    Squares {
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        line_tol: Option<f64>,
    },
    /// Random checkerboard of `ε`-cells with `r ∈ {1, 2}`, each with probability 1/2.
    Checkerboard {
        eps: f64,
    },
}

fn default_gauss_amplitude() -> f64 {
    10.0
}
fn default_gauss_center() -> f64 {
    0.75
}
fn default_gauss_width() -> f64 {
    0.01
}
fn default_background() -> f64 {
    1.0
}

/// Obstacle primitive. Later shapes take precedence over earlier ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Rect {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        value: f64,
    },
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
        value: f64,
    },
    /// Annular sector, angles in degrees measured counter-clockwise from `start_deg` to `end_deg`.
    Arc {
        cx: f64,
        cy: f64,
        r_inner: f64,
        r_outer: f64,
        start_deg: f64,
        end_deg: f64,
        value: f64,
    },
}

impl Shape {
    fn value(&self) -> f64 {
        match *self {
            Shape::Rect { value, .. } | Shape::Disk { value, .. } | Shape::Arc { value, .. } => value,
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { x0, x1, y0, y1, .. } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Shape::Disk { cx, cy, r, .. } => (x - cx).hypot(y - cy) <= r,
            Shape::Arc { cx, cy, r_inner, r_outer, start_deg, end_deg, .. } => {
                let rho = (x - cx).hypot(y - cy);
                if rho < r_inner || rho > r_outer {
                    return false;
                }
                let ang = (y - cy).atan2(x - cx).to_degrees();
                let span = (end_deg - start_deg).rem_euclid(360.0);
                let off = (ang - start_deg).rem_euclid(360.0);
                span == 0.0 || off <= span
            }
        }
    }
}

/// Shapes used by [`SlownessKind::Maze`].
pub fn maze_shapes() -> Vec<Shape> {
    vec![
        // quarter ring around the source with a gap along the x-axis
        Shape::Arc { cx: 0.0, cy: 0.0, r_inner: 0.30, r_outer: 0.32, start_deg: 12.0, end_deg: 90.0, value: BARRIER },
        // ring enclosing the subdomain [0.5, 0.6]², open towards the upper right
        Shape::Arc { cx: 0.55, cy: 0.55, r_inner: 0.09, r_outer: 0.11, start_deg: 75.0, end_deg: 15.0, value: BARRIER },
        Shape::Disk { cx: 0.85, cy: 0.15, r: 0.03, value: FAST_OBSTACLE },
    ]
}

/// Shapes used by [`SlownessKind::FastStrip`].
pub fn fast_strip_shapes() -> Vec<Shape> {
    vec![Shape::Rect { x0: 0.26, x1: 0.27, y0: 0.0, y1: 0.6, value: FAST_OBSTACLE }]
}

#[derive(Clone, Debug)]
enum Profile {
    Constant(f64),
    Gauss { amplitude: f64, center: f64, width: f64 },
    Sine { amplitude: f64, frequency: f64 },
    VarSine,
    Obstacles { shapes: Vec<Shape>, background: f64 },
    Squares { eps: f64, tol: f64 },
    Checkerboard { eps: f64, seed: u64 },
}

/// An evaluable slowness function. Immutable and `Sync`.
#[derive(Clone, Debug)]
pub struct SlownessField {
    profile: Profile,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl SlownessField {
    /// Builds a field from a catalog entry. `seed` only matters for random kinds.
    pub fn from_catalog(kind: &SlownessKind, seed: u64) -> Result<Self> {
        let profile = match kind {
            SlownessKind::Constant { value } => Profile::Constant(positive("constant value", *value)?),
            SlownessKind::Gauss1d { amplitude, center, width } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) || !center.is_finite() {
                    return Err(Error::Config("gauss1d amplitude must be >= 0 and center finite".into()));
                }
                Profile::Gauss { amplitude: *amplitude, center: *center, width: positive("gauss1d width", *width)? }
            }
            SlownessKind::Sine2d { amplitude, frequency } => {
                if !(amplitude.abs() < 1.0) || !frequency.is_finite() {
                    return Err(Error::Config(format!("sine2d needs |amplitude| < 1 for positivity, got {amplitude}")));
                }
                Profile::Sine { amplitude: *amplitude, frequency: *frequency }
            }
            SlownessKind::VarSine => Profile::VarSine,
            SlownessKind::Obstacles { shapes, background } => {
                for s in shapes {
                    positive("obstacle value", s.value())?;
                }
                Profile::Obstacles { shapes: shapes.clone(), background: positive("background", *background)? }
            }
            SlownessKind::Maze => Profile::Obstacles { shapes: maze_shapes(), background: 1.0 },
            SlownessKind::FastStrip => Profile::Obstacles { shapes: fast_strip_shapes(), background: 1.0 },
            SlownessKind::Squares { eps, line_tol } => {
                let tol = line_tol.ok_or_else(|| Error::Config("squares needs line_tol".into()))?;
                if !(tol.is_finite() && tol >= 0.0) {
                    return Err(Error::Config(format!("squares line_tol must be >= 0, got {tol}")));
                }
                Profile::Squares { eps: positive("squares eps", *eps)?, tol }
            }
            SlownessKind::Checkerboard { eps } => {
                Profile::Checkerboard { eps: positive("checkerboard eps", *eps)?, seed }
            }
        };
        Ok(Self { profile })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::from_catalog(&SlownessKind::Constant { value }, 0)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        let r = match &self.profile {
            Profile::Constant(c) => *c,
            Profile::Gauss { amplitude, center, width } => {
                let d = x - center;
                1.0 + amplitude * (-(d * d) / (2.0 * width * width)).exp()
            }
            Profile::Sine { amplitude, frequency } => {
                1.0 + amplitude * (frequency * PI * x).sin() * (frequency * PI * y).sin()
            }
            Profile::VarSine => {
                let eps = (x.abs() + y.abs() + 0.001) / 50.0;
                1.0 + 0.5 * (PI * x / eps).sin() * (PI * y / eps).sin()
            }
            Profile::Obstacles { shapes, background } => {
                shapes.iter().rev().find(|s| s.contains(x, y)).map_or(*background, Shape::value)
            }
            Profile::Squares { eps, tol } => {
                let on_line = |v: f64| (v - (v / eps).round() * eps).abs() <= *tol;
                if on_line(x) || on_line(y) {
                    1.0
                } else {
                    2.0
                }
            }
            Profile::Checkerboard { eps, seed } => {
                let cell = |v: f64| (v / eps + 1e-9).floor().max(0.0) as u64;
                checker_cell(*seed, cell(x), cell(y))
            }
        };
        debug_assert!(r > 0.0 && r.is_finite(), "slowness {r} at {p:?}");
        r
    }
}

/// Cell value from a counter-based stream: independent of evaluation order.
fn checker_cell(seed: u64, cx: u64, cy: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((cx << 32) | (cy & 0xffff_ffff));
    if rng.random_bool(0.5) {
        2.0
    } else {
        1.0
    }
}
