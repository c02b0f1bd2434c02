//! The boundary set Γ and its data g.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sweep::Wind;

/// A side of the unit square (in 1D only `west` and `east` exist).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    West,
    East,
    South,
    North,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeValue {
    Zero,
    /// Euclidean distance to a point.
    Distance {
        from: [f64; 2],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    /// Point sources. A node within one grid spacing of a source is fixed to
    /// `r · |x − p|` with a radial wind.
    Points { points: Vec<[f64; 2]> },
    /// Whole sides of the domain with prescribed values.
    Edges {
        #[serde(default = "all_sides")]
        sides: Vec<Side>,
        #[serde(default = "zero")]
        value: EdgeValue,
    },
}

fn all_sides() -> Vec<Side> {
    vec![Side::West, Side::East, Side::South, Side::North]
}

fn zero() -> EdgeValue {
    EdgeValue::Zero
}

fn sign(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

impl BoundaryData {
    pub fn point(x: f64, y: f64) -> Self {
        BoundaryData::Points { points: vec![[x, y]] }
    }

    pub fn whole_boundary(value: EdgeValue) -> Self {
        BoundaryData::Edges { sides: all_sides(), value }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            BoundaryData::Points { points } => {
                if points.is_empty() {
                    return Err(Error::Config("boundary: no source points".into()));
                }
                for p in points {
                    let inside = |v: f64| (0.0..=1.0).contains(&v);
                    if !inside(p[0]) || !inside(p[1]) || (dim == 1 && p[1] != 0.0) {
                        return Err(Error::Config(format!("boundary: source {p:?} outside the domain")));
                    }
                }
            }
            BoundaryData::Edges { sides, .. } => {
                if sides.is_empty() {
                    return Err(Error::Config("boundary: no sides selected".into()));
                }
                if dim == 1 && !sides.iter().any(|s| matches!(s, Side::West | Side::East)) {
                    return Err(Error::Config("boundary: 1D problems only have west and east sides".into()));
                }
            }
        }
        Ok(())
    }

    /// Value and wind at lattice node `(gx, gy)` if the node belongs to Γ on a
    /// grid of the given spacing; `r` is the slowness at the node.
    pub fn fixed_value(&self, spec: &GridSpec, gx: usize, gy: usize, spacing: f64, r: f64) -> Option<(f64, Wind)> {
        let p = spec.point(gx, gy);
        match self {
            BoundaryData::Points { points } => {
                let reach = spacing * (1.0 + 1e-9);
                let tol = 1e-9 * spec.fine_spacing();
                let mut best: Option<(f64, Wind)> = None;
                for q in points {
                    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                    let d = dx.hypot(dy);
                    if d <= reach && best.is_none_or(|(v, _)| r * d < v) {
                        best = Some((r * d, Wind::new(sign(dx, tol), sign(dy, tol))));
                    }
                }
                best
            }
            BoundaryData::Edges { sides, value } => {
                let nf = spec.fine_cells();
                let on = sides.iter().any(|s| match s {
                    Side::West => gx == 0,
                    Side::East => gx == nf,
                    Side::South => spec.dim() == 2 && gy == 0,
                    Side::North => spec.dim() == 2 && gy == nf,
                });
                on.then(|| {
                    let v = match value {
                        EdgeValue::Zero => 0.0,
                        EdgeValue::Distance { from } => (p[0] - from[0]).hypot(p[1] - from[1]),
                    };
                    (v, Wind::UNSET)
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_source_collar() {
        let spec = GridSpec::new(2, 4, 5).unwrap();
        let b = BoundaryData::point(0.0, 0.0);
        let h = spec.fine_spacing();
        assert_eq!(b.fixed_value(&spec, 0, 0, h, 1.0), Some((0.0, Wind::UNSET)));
        let (v, w) = b.fixed_value(&spec, 1, 0, h, 2.0).unwrap();
        assert!((v - 2.0 * h).abs() < 1e-15);
        assert_eq!(w, Wind::new(1, 0));
        assert_eq!(b.fixed_value(&spec, 1, 1, h, 1.0), None);
        let (v, w) = b.fixed_value(&spec, 1, 1, 2.0 * h, 1.0).unwrap();
        assert!((v - 2f64.sqrt() * h).abs() < 1e-15);
        assert_eq!(w, Wind::new(1, 1));
    }

    #[test]
    fn nearest_source_wins() {
        let spec = GridSpec::new(1, 2, 2).unwrap();
        let b = BoundaryData::Points { points: vec![[0.0, 0.0], [0.5, 0.0]] };
        let (v, w) = b.fixed_value(&spec, 1, 0, 0.5, 1.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert_eq!(w, Wind::new(1, 0));
        let (v, w) = b.fixed_value(&spec, 3, 0, 0.5, 1.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert_eq!(w, Wind::new(1, 0));
    }

    #[test]
    fn edges() {
        let spec = GridSpec::new(2, 2, 3).unwrap();
        let b = BoundaryData::Edges {
            sides: vec![Side::South, Side::West],
            value: EdgeValue::Distance { from: [0.0, 0.0] },
        };
        let (v, _) = b.fixed_value(&spec, 3, 0, 0.1, 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(b.fixed_value(&spec, 6, 3, 0.1, 1.0).is_none());
        assert!(BoundaryData::whole_boundary(EdgeValue::Zero).fixed_value(&spec, 6, 3, 0.1, 1.0).is_some());
    }

    #[test]
    fn validation() {
        assert!(BoundaryData::Points { points: vec![] }.validate(2).is_err());
        assert!(BoundaryData::point(1.5, 0.0).validate(2).is_err());
        assert!(BoundaryData::point(0.5, 0.5).validate(1).is_err());
        assert!(BoundaryData::whole_boundary(EdgeValue::Zero).validate(1).is_ok());
        let top = BoundaryData::Edges { sides: vec![Side::North], value: EdgeValue::Zero };
        assert!(top.validate(1).is_err());
        let ends = BoundaryData::Edges { sides: vec![Side::West, Side::East], value: EdgeValue::Zero };
        assert!(ends.validate(1).is_ok());
    }

    #[test]
    fn json_defaults() {
        let b: BoundaryData = serde_json::from_str(r#"{"kind":"edges"}"#).unwrap();
        assert_eq!(b, BoundaryData::whole_boundary(EdgeValue::Zero));
        let p: BoundaryData = serde_json::from_str(r#"{"kind":"points","points":[[0,0]]}"#).unwrap();
        assert_eq!(p, BoundaryData::point(0.0, 0.0));
    }
}
