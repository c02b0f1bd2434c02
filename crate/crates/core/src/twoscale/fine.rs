//! Fine-level steps: subdomain boundary data, subdomain solves and the merge
//! onto the skeleton.

use rayon::prelude::*;

use super::{interface_normals, CoarseState, FineState, Problem};
use crate::error::Result;
use crate::grid::NodeId;
use crate::sweep::{fsm_solve, is_inf, Field, Wind, INF};

/// Boundary datum of one subdomain node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BcEntry {
    pub node: NodeId,
    /// Position inside the subdomain.
    pub local: (usize, usize),
    pub skeleton: usize,
    /// Coarse value if its wind arrives through the boundary, [`INF`] otherwise.
    pub value: f64,
    pub wind: Wind,
}

/// Edge nodes keep the coarse value when `W·n > 0`; corners when either
/// `W·n¹ > 0` or `W·n² > 0`. Only normals across subdomain interfaces count.
pub fn subdomain_bcs(problem: &Problem, coarse: &CoarseState, i: usize, j: usize) -> Result<Vec<BcEntry>> {
    let spec = problem.spec();
    let m = spec.m();
    let boundary = spec.boundary_of(i, j)?;
    boundary
        .entries
        .iter()
        .map(|e| {
            let (gx, gy) = e.node.lattice(spec)?;
            let p = problem.skeleton().index(gx, gy).expect("subdomain boundary lies on the skeleton");
            let w = coarse.winds[p];
            let arriving = interface_normals(spec, gx, gy, &e.normals).iter().any(|&n| w.dot(n) > 0);
            Ok(BcEntry {
                node: e.node,
                local: (gx - i * m, gy - j * m),
                skeleton: p,
                value: if arriving { coarse.values[p] } else { INF },
                wind: w,
            })
        })
        .collect()
}

/// Fast sweeping on one subdomain. Arriving coarse values initialise their
/// boundary nodes, which are then min-updated with one-sided differences like
/// every other node; Γ nodes stay fixed and take precedence.
pub fn solve_subdomain(problem: &Problem, coarse: &CoarseState, flat: usize, max_rounds: usize) -> Field {
    let spec = problem.spec();
    let m = spec.m();
    let h = spec.fine_spacing();
    let (i, j) = spec.subdomain(flat);
    let (nx, ny) = if spec.dim() == 1 { (m + 1, 1) } else { (m + 1, m + 1) };
    let mut field = Field::new(nx, ny);
    let mut r = vec![0.0; nx * ny];
    for a in 0..nx {
        for b in 0..ny {
            let (gx, gy) = (i * m + a, j * m + b);
            let t = field.idx(a, b);
            r[t] = problem.r_at(gx, gy);
            if let Some((v, w)) = problem.boundary().fixed_value(spec, gx, gy, h, r[t]) {
                field.fix(a, b, v, w);
            }
        }
    }
    let bcs = subdomain_bcs(problem, coarse, i, j).expect("subdomain index in range");
    for e in bcs {
        let t = field.idx(e.local.0, e.local.1);
        if !field.fixed[t] && !is_inf(e.value) {
            field.values[t] = e.value;
            field.winds[t] = e.wind;
        }
    }
    fsm_solve(&mut field, &r, h, problem.sweep_options(max_rounds));
    field
}

/// Solves all subdomains in parallel and merges them onto the skeleton.
pub fn solve_fine(problem: &Problem, coarse: &CoarseState, max_rounds: usize) -> FineState {
    let subdomains: Vec<Field> = (0..problem.spec().subdomain_count())
        .into_par_iter()
        .map(|s| solve_subdomain(problem, coarse, s, max_rounds))
        .collect();
    let (values, winds) = merge(problem, coarse, &subdomains);
    FineState { values, winds, subdomains }
}

fn first_min(cands: &[(f64, Wind)]) -> (f64, Wind) {
    cands.iter().skip(1).fold(cands[0], |best, &c| if c.0 < best.0 { c } else { best })
}

/// Picks one subdomain value per skeleton node.
///
/// If the coarse wind and every candidate's fine wind point into one
/// subdomain, the value comes from the subdomain opposite it across the node
/// (upwind); otherwise the smallest candidate wins. In 1D only the two fine
/// winds are compared. The wind follows the chosen value.
///
/// A subdomain that received the node as arriving data and returned it
/// unchanged only echoes `U`; such candidates are left out of the minimum, so
/// an undershooting coarse value cannot sustain itself. Some adjacent
/// subdomain always sees the node as departing.
pub fn merge(problem: &Problem, coarse: &CoarseState, subdomains: &[Field]) -> (Vec<f64>, Vec<Wind>) {
    let spec = problem.spec();
    let sk = problem.skeleton();
    let m = spec.m();
    (0..sk.len())
        .into_par_iter()
        .map(|p| {
            if let Some(g) = problem.gamma(p) {
                return g;
            }
            let (gx, gy) = sk.lattice(p);
            let adj = sk.adjacent(gx, gy);
            let big_w = coarse.winds[p];
            let mut cands = Vec::with_capacity(adj.len());
            let mut computed = Vec::with_capacity(adj.len());
            for q in &adj {
                let f = &subdomains[spec.subdomain_index(q.sub.0, q.sub.1)];
                let t = f.idx(gx - q.sub.0 * m, gy - q.sub.1 * m);
                let c = (f.values[t], f.winds[t]);
                let arriving = interface_normals(spec, gx, gy, &q.normals).iter().any(|&n| big_w.dot(n) > 0);
                if !(arriving && c.0.to_bits() == coarse.values[p].to_bits()) {
                    computed.push(c);
                }
                cands.push(c);
            }
            if cands.len() == 1 {
                return cands[0];
            }
            let fallback = || if computed.is_empty() { first_min(&cands) } else { first_min(&computed) };
            if spec.dim() == 1 {
                let (left, right) = (cands[0], cands[1]);
                return match (left.1.x(), right.1.x()) {
                    (1, 1) => left,
                    (-1, -1) => right,
                    _ => fallback(),
                };
            }
            let other =
                |pick: fn(&(usize, usize)) -> usize, q: usize| adj.iter().map(|a| pick(&a.sub)).find(|&v| v != q);
            for q in &adj {
                let into_q = interface_normals(spec, gx, gy, &q.normals)
                    .iter()
                    .all(|&n| big_w.dot(n) >= 0 && cands.iter().all(|c| c.1.dot(n) >= 0));
                if !into_q {
                    continue;
                }
                let partner = (other(|s| s.0, q.sub.0).unwrap_or(q.sub.0), other(|s| s.1, q.sub.1).unwrap_or(q.sub.1));
                if let Some(k) = adj.iter().position(|a| a.sub == partner) {
                    if !is_inf(cands[k].0) {
                        return cands[k];
                    }
                }
                break;
            }
            fallback()
        })
        .unzip()
}

/// Subdomain solutions on the global lattice, with merged skeleton values.
pub fn patch(problem: &Problem, fine: &FineState) -> Vec<f64> {
    let spec = problem.spec();
    let m = spec.m();
    let (nx, ny) = problem.lattice_shape();
    let mut out = vec![INF; nx * ny];
    for (s, f) in fine.subdomains.iter().enumerate() {
        let (i, j) = spec.subdomain(s);
        for a in 0..f.nx() {
            for b in 0..f.ny() {
                out[(i * m + a) * ny + j * m + b] = f.get(a, b);
            }
        }
    }
    for (p, &(gx, gy)) in problem.skeleton().nodes().iter().enumerate() {
        out[gx * ny + gy] = fine.values[p];
    }
    out
}
