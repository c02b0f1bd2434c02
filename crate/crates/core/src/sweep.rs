//! Serial Eikonal core: the Godunov upwind local solver, wind tracking and
//! Gauss-Seidel fast sweeping over the `2^d` axis orderings.
//!
//! Winds use a single convention everywhere: a component of `+1` along an
//! axis means the characteristic flows in the `+` direction, so the upwind
//! neighbour sits on the `−` side. With that convention `wind · n > 0` for an
//! inward normal `n` means "arriving".

use crate::grid::Normal;

/// Sentinel for unreached nodes. Comparisons against it never overflow.
pub const INF: f64 = f64::MAX / 2.0;

#[inline]
pub fn is_inf(v: f64) -> bool {
    v >= INF
}

/// Characteristic direction at a node, in `{-1, 0, 1}^2 \ {0}`, or unset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Wind {
    x: i8,
    y: i8,
}

impl Wind {
    pub const UNSET: Wind = Wind { x: 0, y: 0 };

    /// Panics on components outside `{-1, 0, 1}`.
    pub fn new(x: i8, y: i8) -> Self {
        assert!((-1..=1).contains(&x) && (-1..=1).contains(&y), "wind components must be in -1..=1");
        Wind { x, y }
    }

    pub fn x(self) -> i8 {
        self.x
    }

    pub fn y(self) -> i8 {
        self.y
    }

    pub fn is_unset(self) -> bool {
        self == Wind::UNSET
    }

    pub fn dot(self, n: Normal) -> i32 {
        self.x as i32 * n[0] as i32 + self.y as i32 * n[1] as i32
    }
}

/// Closed-form Godunov update from the upwind x-value `a` and y-value `b`
/// at slowness `r` and spacing `s`.
///
/// A single [`INF`] input reduces to the one-dimensional update; two give [`INF`].
pub fn godunov_solve(a: f64, b: f64, r: f64, s: f64) -> f64 {
    match (is_inf(a), is_inf(b)) {
        (true, true) => INF,
        (true, false) => b + r * s,
        (false, true) => a + r * s,
        (false, false) => {
            let rs = r * s;
            let d = a - b;
            if d.abs() < rs {
                0.5 * (a + b + (2.0 * rs * rs - d * d).sqrt())
            } else {
                a.min(b) + rs
            }
        }
    }
}

/// Neighbour values of a node. Missing neighbours (outside the grid) are [`INF`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbors {
    pub left: f64,
    pub right: f64,
    pub down: f64,
    pub up: f64,
}

impl Neighbors {
    /// 1D neighbours; the y-pair is absent.
    pub fn along_x(left: f64, right: f64) -> Self {
        Self { left, right, down: INF, up: INF }
    }
}

/// Candidate value and its wind, without the min-update.
pub fn candidate(nbrs: &Neighbors, r: f64, s: f64) -> (f64, Wind) {
    let wx = if nbrs.left < nbrs.right { 1 } else { -1 };
    let wy = if nbrs.down < nbrs.up { 1 } else { -1 };
    let a = nbrs.left.min(nbrs.right);
    let b = nbrs.down.min(nbrs.up);
    let u = godunov_solve(a, b, r, s);
    let wind = if u < b {
        Wind { x: wx, y: 0 }
    } else if u < a {
        Wind { x: 0, y: wy }
    } else {
        Wind { x: wx, y: wy }
    };
    (u, wind)
}

/// One Gauss-Seidel update: candidate from the neighbours, then `min` with
/// the current value. The wind follows whichever value survives.
pub fn local_update(nbrs: &Neighbors, current: f64, current_wind: Wind, r: f64, s: f64) -> (f64, Wind) {
    let (u, wind) = candidate(nbrs, r, s);
    if u < current {
        (u, wind)
    } else {
        (current, current_wind)
    }
}

/// Values, winds and fixed flags on an `nx × ny` rectangular lattice
/// (`ny == 1` is the 1D case). Storage is x-major: `idx = i·ny + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    pub values: Vec<f64>,
    pub winds: Vec<Wind>,
    pub fixed: Vec<bool>,
}

impl Field {
    /// All nodes free and unreached.
    pub fn new(nx: usize, ny: usize) -> Self {
        let len = nx * ny;
        Self { nx, ny, values: vec![INF; len], winds: vec![Wind::UNSET; len], fixed: vec![false; len] }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn fix(&mut self, i: usize, j: usize, value: f64, wind: Wind) {
        let k = self.idx(i, j);
        self.values[k] = value;
        self.winds[k] = wind;
        self.fixed[k] = true;
    }

    pub fn has_fixed(&self) -> bool {
        self.fixed.iter().any(|&f| f)
    }

    /// Neighbour values of `(i, j)` with one-sided differences at the edges.
    #[inline]
    pub fn neighbors(&self, i: usize, j: usize) -> Neighbors {
        let k = self.idx(i, j);
        let v = &self.values;
        Neighbors {
            left: if i > 0 { v[k - self.ny] } else { INF },
            right: if i + 1 < self.nx { v[k + self.ny] } else { INF },
            down: if j > 0 { v[k - 1] } else { INF },
            up: if j + 1 < self.ny { v[k + 1] } else { INF },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub max_rounds: usize,
    /// A round ends the solve once no value moved by `tol` or more.
    pub tol: f64,
}

impl SweepOptions {
    pub const DEFAULT_MAX_ROUNDS: usize = 50;

    /// Default tolerance `1e-12 · diameter · max r` on the unit box.
    pub fn for_problem(dim: usize, max_r: f64) -> Self {
        let diameter = (dim as f64).sqrt();
        Self { max_rounds: Self::DEFAULT_MAX_ROUNDS, tol: 1e-12 * diameter * max_r }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepReport {
    /// Rounds of `2^d` sweeps performed.
    pub rounds: usize,
    pub converged: bool,
    /// Largest change seen in the last round.
    pub last_change: f64,
}

/// Axis orderings `(s1, s2)` in the order the loop nest visits them.
pub fn orderings(dim: usize) -> &'static [(i8, i8)] {
    if dim == 1 {
        &[(-1, 1), (1, 1)]
    } else {
        &[(-1, -1), (-1, 1), (1, -1), (1, 1)]
    }
}

/// Visits every `(i, j)` of an `nx × ny` lattice in the ordering `(s1, s2)`:
/// outer loop over `i` in direction `s1`, inner over `j` in direction `s2`.
#[inline]
pub fn for_each_in_order(nx: usize, ny: usize, (s1, s2): (i8, i8), mut f: impl FnMut(usize, usize)) {
    for ii in 0..nx {
        let i = if s1 < 0 { nx - 1 - ii } else { ii };
        for jj in 0..ny {
            let j = if s2 < 0 { ny - 1 - jj } else { jj };
            f(i, j);
        }
    }
}

/// Fast sweeping: repeats rounds of the `2^d` Gauss-Seidel orderings until no
/// node changes by `tol` or more, or `max_rounds` is reached.
///
/// `slowness` holds `r` at each node in the field's layout.
pub fn fsm_solve(field: &mut Field, slowness: &[f64], spacing: f64, opts: SweepOptions) -> SweepReport {
    assert_eq!(slowness.len(), field.len(), "slowness must match the field layout");
    let (nx, ny) = (field.nx, field.ny);
    let mut rounds = 0;
    let mut last_change = f64::INFINITY;
    while rounds < opts.max_rounds.max(1) {
        rounds += 1;
        let mut change = 0.0f64;
        for &order in orderings(field.dim()) {
            for_each_in_order(nx, ny, order, |i, j| {
                let k = i * ny + j;
                if field.fixed[k] {
                    return;
                }
                let nbrs = field.neighbors(i, j);
                let cur = field.values[k];
                let (u, w) = local_update(&nbrs, cur, field.winds[k], slowness[k], spacing);
                if u < cur {
                    let d = if is_inf(cur) { f64::INFINITY } else { cur - u };
                    change = change.max(d);
                    field.values[k] = u;
                    field.winds[k] = w;
                }
            });
        }
        last_change = change;
        if change < opts.tol {
            return SweepReport { rounds, converged: true, last_change };
        }
    }
    SweepReport { rounds, converged: false, last_change }
}
