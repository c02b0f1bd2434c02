//! Two-level grid geometry.
//!
//! Everything lives on the global fine lattice `{0, .., N·M}^d`: a node is
//! addressed by its integer lattice coordinates `(gx, gy)` and its position is
//! `(gx, gy) / (N·M)`. The coarse families (the non-shifted grid and the
//! `M − 1` horizontally and `M − 1` vertically shifted copies) are exactly the
//! lattice nodes lying on a subdomain edge, i.e. the nodes with
//! `gx % M == 0` or `gy % M == 0`. That set is called the *skeleton* here.
//!
//! In one dimension there are no shifted grids; the skeleton is the coarse
//! grid itself and `gy` is always zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer unit vector used for inward normals, e.g. `[1, 0]`.
pub type Normal = [i8; 2];

/// Coarse/fine geometry on `[0, 1]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    m: usize,
}

impl GridSpec {
    /// `n` coarse cells per axis, `m` fine cells per coarse cell.
    pub fn new(dim: usize, n: usize, m: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 2 {
            return Err(Error::Config(format!("N must be at least 2, got {n}")));
        }
        if m < 2 {
            return Err(Error::Config(format!("M must be at least 2, got {m}")));
        }
        Ok(Self { dim, n, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `H = 1/N`.
    pub fn coarse_spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `h = 1/(N·M)`.
    pub fn fine_spacing(&self) -> f64 {
        1.0 / self.fine_cells() as f64
    }

    /// Fine cells per axis, `N·M`.
    pub fn fine_cells(&self) -> usize {
        self.n * self.m
    }

    /// Fine lattice nodes along x and y (`ny == 1` in 1D).
    pub fn fine_shape(&self) -> (usize, usize) {
        let nf = self.fine_cells() + 1;
        if self.dim == 1 {
            (nf, 1)
        } else {
            (nf, nf)
        }
    }

    /// Position of a lattice coordinate.
    pub fn lattice_coord(&self, g: usize) -> f64 {
        g as f64 / self.fine_cells() as f64
    }

    pub fn point(&self, gx: usize, gy: usize) -> [f64; 2] {
        [self.lattice_coord(gx), self.lattice_coord(gy)]
    }

    /// Number of subdomains (`N^d`).
    pub fn subdomain_count(&self) -> usize {
        if self.dim == 1 {
            self.n
        } else {
            self.n * self.n
        }
    }

    /// Subdomain `(i, j)` for a flat index; `j == 0` in 1D.
    pub fn subdomain(&self, flat: usize) -> (usize, usize) {
        if self.dim == 1 {
            (flat, 0)
        } else {
            (flat % self.n, flat / self.n)
        }
    }

    pub fn subdomain_index(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            j * self.n + i
        }
    }

    /// Whether a lattice node lies on the outer boundary of `[0, 1]^d`.
    pub fn on_domain_boundary(&self, gx: usize, gy: usize) -> bool {
        let nf = self.fine_cells();
        gx == 0 || gx == nf || (self.dim == 2 && (gy == 0 || gy == nf))
    }

    pub fn coords(&self, id: NodeId) -> Result<[f64; 2]> {
        let (gx, gy) = id.lattice(self)?;
        Ok(self.point(gx, gy))
    }

    /// Coarse-family nodes on the boundary of subdomain `(i, j)` with the
    /// subdomain's inward normals. Corners carry two normals (one in 1D).
    pub fn boundary_of(&self, i: usize, j: usize) -> Result<SubdomainBoundary> {
        let n = self.n;
        if i >= n || (self.dim == 2 && j >= n) || (self.dim == 1 && j != 0) {
            return Err(Error::Range(format!("subdomain ({i}, {j}) with N = {n}")));
        }
        let mut entries = Vec::new();
        if self.dim == 1 {
            entries.push(BoundaryEntry { node: NodeId::Coarse { i, j: 0 }, normals: vec![[1, 0]] });
            entries.push(BoundaryEntry { node: NodeId::Coarse { i: i + 1, j: 0 }, normals: vec![[-1, 0]] });
            return Ok(SubdomainBoundary { subdomain: (i, j), entries });
        }

        for (ci, cj, nx, ny) in [(i, j, 1, 1), (i + 1, j, -1, 1), (i, j + 1, 1, -1), (i + 1, j + 1, -1, -1)] {
            entries.push(BoundaryEntry { node: NodeId::Coarse { i: ci, j: cj }, normals: vec![[nx, 0], [0, ny]] });
        }
        for l in 1..self.m {
            entries.push(BoundaryEntry { node: NodeId::HShift { i, l, j }, normals: vec![[0, 1]] });
            entries.push(BoundaryEntry { node: NodeId::HShift { i, l, j: j + 1 }, normals: vec![[0, -1]] });
            entries.push(BoundaryEntry { node: NodeId::VShift { i, j, m: l }, normals: vec![[1, 0]] });
            entries.push(BoundaryEntry { node: NodeId::VShift { i: i + 1, j, m: l }, normals: vec![[-1, 0]] });
        }
        Ok(SubdomainBoundary { subdomain: (i, j), entries })
    }
}

/// A node of one of the grid families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeId {
    /// `(iH, jH)`.
    Coarse { i: usize, j: usize },
    /// `(iH + l·h, jH)` on the `l`-th horizontally shifted grid.
    HShift { i: usize, l: usize, j: usize },
    /// `(iH, jH + m·h)` on the `m`-th vertically shifted grid.
    VShift { i: usize, j: usize, m: usize },
    /// `(iH + l·h, jH + m·h)` in subdomain `(i, j)`.
    Fine { i: usize, j: usize, l: usize, m: usize },
}

impl NodeId {
    /// Global lattice coordinates, checking every index against its range.
    pub fn lattice(self, spec: &GridSpec) -> Result<(usize, usize)> {
        let (n, mm) = (spec.n, spec.m);
        let one_d = spec.dim == 1;
        let bad = || Error::Range(format!("{self:?} with N = {n}, M = {mm}, d = {}", spec.dim));
        match self {
            NodeId::Coarse { i, j } => {
                if i > n || (one_d && j != 0) || j > n {
                    return Err(bad());
                }
                Ok((i * mm, j * mm))
            }
            NodeId::HShift { i, l, j } => {
                if one_d || i >= n || j > n || l == 0 || l >= mm {
                    return Err(bad());
                }
                Ok((i * mm + l, j * mm))
            }
            NodeId::VShift { i, j, m } => {
                if one_d || i > n || j >= n || m == 0 || m >= mm {
                    return Err(bad());
                }
                Ok((i * mm, j * mm + m))
            }
            NodeId::Fine { i, j, l, m } => {
                let j_ok = if one_d { j == 0 && m == 0 } else { j < n && m <= mm };
                if i >= n || l > mm || !j_ok {
                    return Err(bad());
                }
                Ok((i * mm + l, j * mm + m))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryEntry {
    pub node: NodeId,
    pub normals: Vec<Normal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdomainBoundary {
    pub subdomain: (usize, usize),
    pub entries: Vec<BoundaryEntry>,
}

/// Which coarse grid family a [`CoarseGrid`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Base,
    HShift(usize),
    VShift(usize),
}

/// One coarse grid: node `(a, b)` sits at lattice `(ox + a·M, oy + b·M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoarseGrid {
    pub family: Family,
    pub ox: usize,
    pub oy: usize,
    pub nx: usize,
    pub ny: usize,
}

impl CoarseGrid {
    pub fn lattice(&self, a: usize, b: usize, m: usize) -> (usize, usize) {
        (self.ox + a * m, self.oy + b * m)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A subdomain touching a skeleton node, with its inward normals there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacent {
    pub sub: (usize, usize),
    pub normals: Vec<Normal>,
}

/// Dense indexing of all coarse-family nodes.
#[derive(Clone, Debug)]
pub struct Skeleton {
    spec: GridSpec,
    nodes: Vec<(usize, usize)>,
}

impl Skeleton {
    pub fn new(spec: GridSpec) -> Self {
        let (n, m, nf) = (spec.n, spec.m, spec.fine_cells());
        let mut nodes = Vec::new();
        if spec.dim == 1 {
            nodes.extend((0..=n).map(|i| (i * m, 0)));
        } else {
            for j in 0..=n {
                nodes.extend((0..=nf).map(|gx| (gx, j * m)));
            }
            for i in 0..=n {
                for gy in (0..nf).filter(|gy| gy % m != 0) {
                    nodes.push((i * m, gy));
                }
            }
        }
        let sk = Self { spec, nodes };
        debug_assert!(sk.nodes.iter().enumerate().all(|(k, &(gx, gy))| sk.index(gx, gy) == Some(k)));
        sk
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lattice(&self, idx: usize) -> (usize, usize) {
        self.nodes[idx]
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    /// Skeleton index of a lattice node, `None` if it is not a coarse-family node.
    pub fn index(&self, gx: usize, gy: usize) -> Option<usize> {
        let (n, m, nf) = (self.spec.n, self.spec.m, self.spec.fine_cells());
        if gx > nf || gy > nf {
            return None;
        }
        if self.spec.dim == 1 {
            return (gy == 0 && gx.is_multiple_of(m)).then_some(gx / m);
        }
        if gy.is_multiple_of(m) {
            Some((gy / m) * (nf + 1) + gx)
        } else if gx.is_multiple_of(m) {
            let base = (n + 1) * (nf + 1);
            Some(base + (gx / m) * n * (m - 1) + (gy / m) * (m - 1) + (gy % m - 1))
        } else {
            None
        }
    }

    pub fn node_id(&self, idx: usize) -> NodeId {
        let (gx, gy) = self.nodes[idx];
        let m = self.spec.m;
        match (gx % m == 0, gy % m == 0) {
            (true, true) => NodeId::Coarse { i: gx / m, j: gy / m },
            (false, _) => NodeId::HShift { i: gx / m, l: gx % m, j: gy / m },
            (true, false) => NodeId::VShift { i: gx / m, j: gy / m, m: gy % m },
        }
    }

    /// The `1 + 2(M − 1)` coarse grids (just the base grid in 1D).
    pub fn coarse_grids(&self) -> Vec<CoarseGrid> {
        let n = self.spec.n;
        if self.spec.dim == 1 {
            return vec![CoarseGrid { family: Family::Base, ox: 0, oy: 0, nx: n + 1, ny: 1 }];
        }
        let mut grids = vec![CoarseGrid { family: Family::Base, ox: 0, oy: 0, nx: n + 1, ny: n + 1 }];
        for l in 1..self.spec.m {
            grids.push(CoarseGrid { family: Family::HShift(l), ox: l, oy: 0, nx: n, ny: n + 1 });
        }
        for m in 1..self.spec.m {
            grids.push(CoarseGrid { family: Family::VShift(m), ox: 0, oy: m, nx: n + 1, ny: n });
        }
        grids
    }

    /// Subdomains containing lattice node `(gx, gy)`, ordered by `(j, i)`,
    /// each with its inward normals at the node.
    pub fn adjacent(&self, gx: usize, gy: usize) -> Vec<Adjacent> {
        let (n, m) = (self.spec.n, self.spec.m);
        let cells = |g: usize| -> Vec<usize> {
            if g.is_multiple_of(m) {
                let c = g / m;
                [c.checked_sub(1), (c < n).then_some(c)].into_iter().flatten().collect()
            } else {
                vec![g / m]
            }
        };
        let xs = cells(gx);
        let ys = if self.spec.dim == 1 { vec![0] } else { cells(gy) };
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &sj in &ys {
            for &si in &xs {
                let mut normals = Vec::with_capacity(2);
                if gx == si * m {
                    normals.push([1, 0]);
                } else if gx == (si + 1) * m {
                    normals.push([-1, 0]);
                }
                if self.spec.dim == 2 {
                    if gy == sj * m {
                        normals.push([0, 1]);
                    } else if gy == (sj + 1) * m {
                        normals.push([0, -1]);
                    }
                }
                out.push(Adjacent { sub: (si, sj), normals });
            }
        }
        out
    }
}
