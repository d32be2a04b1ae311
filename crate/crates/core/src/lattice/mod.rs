//! The toroidal hexagonal lattice `H_n` and the graphs derived from it.
//!
//! Coordinates: cell `(x, y)` holds a black vertex `b(x, y)` and a white
//! vertex `w(x, y)` one unit to its right. The three edges owned by the cell
//! all start at the white vertex:
//!
//! ```text
//!   A (horizontal): w(x, y) - b(x, y)
//!   B (NW/SE):      w(x, y) - b(x + 1, y)
//!   C (NE/SW):      w(x, y) - b(x, y + 1)
//! ```
//!
//! `tau1` shifts `x` and `tau2` shifts `y`. Cells are numbered row-major
//! (`y * n + x`), vertices as `2 * cell + colour` (black 0, white 1) and edges
//! as `3 * cell + kind` (A, B, C).

mod decorated;
mod half_edge;
mod path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;
/// Cartesian images of `tau1` and `tau2` (unit edge length).
pub const TAU1: (f64, f64) = (1.5, -SQRT3_2);
pub const TAU2: (f64, f64) = (1.5, SQRT3_2);

pub use decorated::{
    build_decorated, config_to_dimer, DecoratedEdge, DecoratedGraph, DimerCover, EdgeClass, Gadget,
    Template, TemplateEdge, LOCAL_VERTICES,
};
pub use half_edge::{build_half_edge, HalfEdge, HalfEdgeGraph};
pub use path::{diagonal_path, trace_path, DiagonalPath, PassedVertex};

/// Deterministic edge type: horizontal (A), NW/SE (B) or NE/SW (C).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    A,
    B,
    C,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::A, EdgeKind::B, EdgeKind::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> EdgeKind {
        Self::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            EdgeKind::A => 'A',
            EdgeKind::B => 'B',
            EdgeKind::C => 'C',
        }
    }
}

/// Vertex colour within a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colour {
    Black = 0,
    White = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseEdge {
    pub white: usize,
    pub black: usize,
    pub kind: EdgeKind,
    /// Owning cell `(x, y)`.
    pub cell: (usize, usize),
}

impl BaseEdge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.white {
            self.black
        } else {
            self.white
        }
    }
}

/// The quotient `H_n` of the hexagonal lattice by `tau1^n, tau2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusLattice {
    n: usize,
    edges: Vec<BaseEdge>,
    incident: Vec<[usize; 3]>,
}

/// Builds `H_n`. Rejects `n < 2`: at `n = 1` the B and C edges of the single
/// cell join the same pair of vertices as the A edge.
pub fn build_torus(n: usize) -> Result<TorusLattice> {
    if n < 2 {
        return Err(Error::Size(n));
    }
    let mut edges = Vec::with_capacity(3 * n * n);
    let mut incident = vec![[usize::MAX; 3]; 2 * n * n];
    let vid = |x: usize, y: usize, c: Colour| 2 * ((y % n) * n + (x % n)) + c as usize;
    for y in 0..n {
        for x in 0..n {
            let white = vid(x, y, Colour::White);
            let blacks = [
                vid(x, y, Colour::Black),
                vid(x + 1, y, Colour::Black),
                vid(x, y + 1, Colour::Black),
            ];
            for (k, &black) in blacks.iter().enumerate() {
                let id = edges.len();
                edges.push(BaseEdge {
                    white,
                    black,
                    kind: EdgeKind::from_index(k),
                    cell: (x, y),
                });
                incident[white][k] = id;
                incident[black][k] = id;
            }
        }
    }
    Ok(TorusLattice { n, edges, incident })
}

impl TorusLattice {
    pub fn new(n: usize) -> Result<Self> {
        build_torus(n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.n * self.n
    }

    pub fn edges(&self) -> &[BaseEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &BaseEdge {
        &self.edges[e]
    }

    /// Incident edges of `v`, indexed by kind.
    pub fn incident(&self, v: usize) -> [usize; 3] {
        self.incident[v]
    }

    pub fn cell_index(&self, x: i64, y: i64) -> usize {
        let n = self.n as i64;
        (y.rem_euclid(n) * n + x.rem_euclid(n)) as usize
    }

    pub fn cell_of(&self, cell: usize) -> (usize, usize) {
        (cell % self.n, cell / self.n)
    }

    pub fn vertex(&self, x: i64, y: i64, colour: Colour) -> usize {
        2 * self.cell_index(x, y) + colour as usize
    }

    pub fn vertex_cell(&self, v: usize) -> (usize, usize) {
        self.cell_of(v / 2)
    }

    pub fn colour(&self, v: usize) -> Colour {
        if v % 2 == 0 {
            Colour::Black
        } else {
            Colour::White
        }
    }

    pub fn edge_at(&self, x: i64, y: i64, kind: EdgeKind) -> usize {
        3 * self.cell_index(x, y) + kind.index()
    }

    /// Moves from `v` along its edge of the given kind, returning the neighbour
    /// and the cell displacement in the universal cover.
    pub fn step(&self, v: usize, kind: EdgeKind) -> (usize, (i64, i64)) {
        let u = self.edges[self.incident[v][kind.index()]].other(v);
        let d = match (self.colour(v), kind) {
            (_, EdgeKind::A) => (0, 0),
            (Colour::White, EdgeKind::B) => (1, 0),
            (Colour::White, EdgeKind::C) => (0, 1),
            (Colour::Black, EdgeKind::B) => (-1, 0),
            (Colour::Black, EdgeKind::C) => (0, -1),
        };
        (u, d)
    }

    /// Corners of the hexagonal face owned by cell `(x, y)`, counterclockwise
    /// starting from `b(x, y)`, the face's eastern corner.
    pub fn face_corners(&self, x: i64, y: i64) -> [usize; 6] {
        use Colour::*;
        [
            self.vertex(x, y, Black),
            self.vertex(x - 1, y, White),
            self.vertex(x - 1, y, Black),
            self.vertex(x - 1, y - 1, White),
            self.vertex(x, y - 1, Black),
            self.vertex(x, y - 1, White),
        ]
    }

    /// Boundary edges of face `(x, y)`; edge `i` joins corners `i` and `i + 1`.
    pub fn face_edges(&self, x: i64, y: i64) -> [usize; 6] {
        use EdgeKind::*;
        [
            self.edge_at(x - 1, y, B),
            self.edge_at(x - 1, y, A),
            self.edge_at(x - 1, y - 1, C),
            self.edge_at(x - 1, y - 1, B),
            self.edge_at(x, y - 1, A),
            self.edge_at(x, y - 1, C),
        ]
    }

    /// Face ids are cell ids.
    pub fn face_edges_by_id(&self, face: usize) -> [usize; 6] {
        let (x, y) = self.cell_of(face);
        self.face_edges(x as i64, y as i64)
    }

    pub fn face_corners_by_id(&self, face: usize) -> [usize; 6] {
        let (x, y) = self.cell_of(face);
        self.face_corners(x as i64, y as i64)
    }

    /// Planar position of vertex `v` translated by `shift` cells.
    pub fn position(&self, v: usize, shift: (i64, i64)) -> (f64, f64) {
        let (x, y) = self.vertex_cell(v);
        let (x, y) = ((x as i64 + shift.0) as f64, (y as i64 + shift.1) as f64);
        let dx = match self.colour(v) {
            Colour::Black => 0.0,
            Colour::White => 1.0,
        };
        (x * TAU1.0 + y * TAU2.0 + dx, x * TAU1.1 + y * TAU2.1)
    }

    /// `tau1^d1 tau2^d2` applied to a vertex.
    pub fn shift_vertex(&self, v: usize, d1: i64, d2: i64) -> usize {
        let (x, y) = self.vertex_cell(v);
        self.vertex(x as i64 + d1, y as i64 + d2, self.colour(v))
    }

    pub fn shift_edge(&self, e: usize, d1: i64, d2: i64) -> usize {
        let BaseEdge {
            cell: (x, y), kind, ..
        } = self.edges[e];
        self.edge_at(x as i64 + d1, y as i64 + d2, kind)
    }

    pub fn tau1(&self, v: usize) -> usize {
        self.shift_vertex(v, 1, 0)
    }

    pub fn tau2(&self, v: usize) -> usize {
        self.shift_vertex(v, 0, 1)
    }

    /// Whether the edge crosses the seam `x = n - 1 | 0` (homology cycle
    /// `gamma_x`) and the seam `y = n - 1 | 0` (`gamma_y`).
    pub fn crossings(&self, e: usize) -> (bool, bool) {
        let BaseEdge {
            cell: (x, y), kind, ..
        } = self.edges[e];
        let last = self.n - 1;
        (
            kind == EdgeKind::B && x == last,
            kind == EdgeKind::C && y == last,
        )
    }

    pub fn to_json_graph(&self) -> GraphJson {
        GraphJson {
            vertices: self.num_vertices(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| {
                    let (gx, gy) = self.crossings(id);
                    EdgeJson {
                        id,
                        u: e.white,
                        v: e.black,
                        kind: e.kind.letter().to_string(),
                        weight: 1.0,
                        crosses_gx: gx,
                        crosses_gy: gy,
                    }
                })
                .collect(),
        }
    }
}

/// JSON adjacency-list export used for debugging and golden files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub kind: String,
    pub weight: f64,
    pub crosses_gx: bool,
    pub crosses_gy: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sizes() {
        let l = build_torus(2).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges()), (8, 12));
        for kind in EdgeKind::ALL {
            assert_eq!(l.edges().iter().filter(|e| e.kind == kind).count(), 4);
        }
        let l = build_torus(3).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges()), (18, 27));
    }

    #[test]
    fn rejects_multigraph_size() {
        assert_eq!(build_torus(1), Err(Error::Size(1)));
        assert_eq!(build_torus(0), Err(Error::Size(0)));
    }

    #[test]
    fn simple_trivalent_one_edge_per_kind() {
        for n in 2..6 {
            let l = build_torus(n).unwrap();
            let mut pairs = HashSet::new();
            for e in l.edges() {
                assert_ne!(e.white, e.black);
                assert!(pairs.insert((e.white, e.black)), "multi-edge at n={n}");
            }
            for v in 0..l.num_vertices() {
                let inc = l.incident(v);
                for (k, &e) in inc.iter().enumerate() {
                    assert_eq!(l.edge(e).kind.index(), k);
                    assert!(l.edge(e).white == v || l.edge(e).black == v);
                }
            }
        }
    }

    #[test]
    fn connected() {
        let l = build_torus(5).unwrap();
        let mut seen = vec![false; l.num_vertices()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for kind in EdgeKind::ALL {
                let (u, _) = l.step(v, kind);
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn shifts_commute_have_order_n_and_preserve_kind() {
        let n = 4;
        let l = build_torus(n).unwrap();
        for v in 0..l.num_vertices() {
            assert_eq!(l.tau1(l.tau2(v)), l.tau2(l.tau1(v)));
            let mut w = v;
            for _ in 0..n {
                w = l.tau1(w);
            }
            assert_eq!(w, v);
        }
        for e in 0..l.num_edges() {
            let s = l.shift_edge(e, 1, 0);
            let (a, b) = (l.edge(e), l.edge(s));
            assert_eq!(a.kind, b.kind);
            assert_eq!(l.tau1(a.white), b.white);
            assert_eq!(l.tau1(a.black), b.black);
        }
    }

    #[test]
    fn faces_are_hexagons_covering_each_edge_twice() {
        for n in 2..5 {
            let l = build_torus(n).unwrap();
            let mut count = vec![0; l.num_edges()];
            for f in 0..l.num_faces() {
                let corners = l.face_corners_by_id(f);
                let edges = l.face_edges_by_id(f);
                let distinct: HashSet<_> = corners.iter().collect();
                assert_eq!(distinct.len(), 6);
                for i in 0..6 {
                    let e = l.edge(edges[i]);
                    let ends = [corners[i], corners[(i + 1) % 6]];
                    assert!(ends.contains(&e.white) && ends.contains(&e.black));
                    count[edges[i]] += 1;
                }
            }
            assert!(count.iter().all(|&c| c == 2));
        }
    }

    #[test]
    fn step_is_consistent_with_incidence() {
        let l = build_torus(3).unwrap();
        for v in 0..l.num_vertices() {
            for kind in EdgeKind::ALL {
                let (u, (dx, dy)) = l.step(v, kind);
                let (x, y) = l.vertex_cell(v);
                assert_eq!(l.vertex_cell(u), {
                    let c = l.cell_index(x as i64 + dx, y as i64 + dy);
                    l.cell_of(c)
                });
                let (back, d) = l.step(u, kind);
                assert_eq!(back, v);
                assert_eq!(d, (-dx, -dy));
            }
        }
    }
}
