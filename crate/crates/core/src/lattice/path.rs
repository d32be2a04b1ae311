use super::{decorated::DecoratedGraph, EdgeKind, TorusLattice};
use crate::error::{Error, Result};

/// An interior vertex of a path in `H_n`, with the bisector edge the path
/// passes there and the vertex's cell in the universal cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassedVertex {
    pub vertex: usize,
    pub bisector: EdgeKind,
    pub cell: (i64, i64),
}

impl PassedVertex {
    /// Decorated edge id of the passed bisector.
    pub fn edge(&self, d: &DecoratedGraph) -> usize {
        d.bisector(self.vertex, self.bisector)
    }
}

/// Walks a path given as a sequence of base edges and returns its interior
/// vertices. At each interior vertex the bisector passed is the one of the
/// third kind, so that its presence means the two path edges share a state.
pub fn trace_path(lattice: &TorusLattice, edges: &[usize]) -> Result<Vec<PassedVertex>> {
    let Some(&first) = edges.first() else {
        return Err(Error::Path("empty path".into()));
    };
    if let Some(&e) = edges.iter().find(|&&e| e >= lattice.num_edges()) {
        return Err(Error::Path(format!("edge {e} out of range")));
    }
    let e0 = lattice.edge(first);
    let mut v = match edges.get(1).map(|&e| lattice.edge(e)) {
        None => e0.white,
        Some(e1) if e1.white == e0.black || e1.black == e0.black => e0.white,
        Some(e1) if e1.white == e0.white || e1.black == e0.white => e0.black,
        Some(_) => {
            return Err(Error::Path(format!(
                "edges {} and {} do not meet",
                first, edges[1]
            )))
        }
    };
    let (x, y) = lattice.vertex_cell(v);
    let mut cell = (x as i64, y as i64);
    let mut visited = vec![v];
    let mut passed = Vec::with_capacity(edges.len().saturating_sub(1));
    for (i, &e) in edges.iter().enumerate() {
        let kind = lattice.edge(e).kind;
        if lattice.incident(v)[kind.index()] != e {
            return Err(Error::Path(format!(
                "edge {e} is not incident to vertex {v}"
            )));
        }
        if i > 0 {
            let prev = lattice.edge(edges[i - 1]).kind;
            let third = EdgeKind::from_index(3 - prev.index() - kind.index());
            passed.push(PassedVertex {
                vertex: v,
                bisector: third,
                cell,
            });
        }
        let (u, (dx, dy)) = lattice.step(v, kind);
        if visited.contains(&u) {
            return Err(Error::Path(format!("path revisits vertex {u}")));
        }
        visited.push(u);
        v = u;
        cell = (cell.0 + dx, cell.1 + dy);
    }
    Ok(passed)
}

/// The path `pi(e, f)` between the midpoints of two NW/SE edges on a common
/// diagonal, using horizontal and NW/SE half-edges only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalPath {
    pub e: usize,
    pub f: usize,
    /// Base edges whose halves the path traverses, in order from `e` to `f`.
    pub edges: Vec<usize>,
    /// Traversed half-edges (`2 * edge` white half, `2 * edge + 1` black half).
    pub half_edges: Vec<usize>,
    /// The `2k` interior vertices, each passing one NE/SW bisector.
    pub passed: Vec<PassedVertex>,
}

impl DiagonalPath {
    pub fn k(&self) -> usize {
        self.passed.len() / 2
    }

    /// Decorated ids of the `2k` bisector edges, in traversal order.
    pub fn bisector_edges(&self, d: &DecoratedGraph) -> Vec<usize> {
        self.passed.iter().map(|p| p.edge(d)).collect()
    }
}

/// Builds `pi(e, f)` the short way round the torus (forward on ties).
pub fn diagonal_path(lattice: &TorusLattice, e: usize, f: usize) -> Result<DiagonalPath> {
    for g in [e, f] {
        if g >= lattice.num_edges() {
            return Err(Error::Path(format!("edge {g} out of range")));
        }
        let kind = lattice.edge(g).kind;
        if kind != EdgeKind::B {
            return Err(Error::Kind {
                edge: g,
                found: kind.letter(),
                expected: 'B',
            });
        }
    }
    if e == f {
        return Ok(DiagonalPath {
            e,
            f,
            edges: vec![e],
            half_edges: Vec::new(),
            passed: Vec::new(),
        });
    }
    let n = lattice.n() as i64;
    let (xe, ye) = lattice.edge(e).cell;
    let (xf, yf) = lattice.edge(f).cell;
    if ye != yf {
        return Err(Error::NotDiagonal(e, f));
    }
    let (xe, y) = (xe as i64, ye as i64);
    let forward = (xf as i64 - xe).rem_euclid(n);
    let mut edges = vec![e];
    if 2 * forward <= n {
        for j in 1..=forward {
            edges.push(lattice.edge_at(xe + j, y, EdgeKind::A));
            edges.push(lattice.edge_at(xe + j, y, EdgeKind::B));
        }
    } else {
        for j in 0..n - forward {
            edges.push(lattice.edge_at(xe - j, y, EdgeKind::A));
            edges.push(lattice.edge_at(xe - j - 1, y, EdgeKind::B));
        }
    }
    let passed = trace_path(lattice, &edges)?;
    let half = |g: usize, v: usize| {
        if lattice.edge(g).white == v {
            2 * g
        } else {
            2 * g + 1
        }
    };
    let mut half_edges = Vec::with_capacity(2 * edges.len() - 2);
    for (i, &g) in edges.iter().enumerate() {
        if i > 0 {
            half_edges.push(half(g, passed[i - 1].vertex));
        }
        if i < passed.len() {
            half_edges.push(half(g, passed[i].vertex));
        }
    }
    Ok(DiagonalPath {
        e,
        f,
        edges,
        half_edges,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_torus, Colour};

    #[test]
    fn adjacent_pair_passes_two_bisectors() {
        let l = build_torus(4).unwrap();
        let e = l.edge_at(0, 1, EdgeKind::B);
        let f = l.edge_at(1, 1, EdgeKind::B);
        let p = diagonal_path(&l, e, f).unwrap();
        assert_eq!(p.k(), 1);
        assert_eq!(p.passed[0].vertex, l.vertex(1, 1, Colour::Black));
        assert_eq!(p.passed[1].vertex, l.vertex(1, 1, Colour::White));
        assert!(p.passed.iter().all(|v| v.bisector == EdgeKind::C));
        assert_eq!(p.half_edges.len(), 4);
    }

    #[test]
    fn separation_is_short_way_round() {
        let l = build_torus(6).unwrap();
        let e = l.edge_at(0, 2, EdgeKind::B);
        for (x, k) in [(1, 1), (2, 2), (3, 3), (4, 2), (5, 1)] {
            let p = diagonal_path(&l, e, l.edge_at(x, 2, EdgeKind::B)).unwrap();
            assert_eq!(p.k(), k, "x = {x}");
            assert_eq!(p.passed.len() % 2, 0);
            assert_eq!(*p.edges.last().unwrap(), l.edge_at(x, 2, EdgeKind::B));
            for &g in &p.edges {
                assert_ne!(l.edge(g).kind, EdgeKind::C);
            }
        }
    }

    #[test]
    fn half_edges_are_connected() {
        let l = build_torus(5).unwrap();
        let e = l.edge_at(3, 0, EdgeKind::B);
        for x in 0..5 {
            let f = l.edge_at(x, 0, EdgeKind::B);
            let p = diagonal_path(&l, e, f).unwrap();
            if e == f {
                continue;
            }
            // consecutive half-edges alternate sharing a vertex and a midpoint
            let h = &p.half_edges;
            assert_eq!(h[0] / 2, e);
            assert_eq!(h[h.len() - 1] / 2, f);
            for i in (1..h.len() - 1).step_by(2) {
                assert_eq!(h[i] / 2, h[i + 1] / 2);
            }
        }
    }

    #[test]
    fn degenerate_and_invalid_pairs() {
        let l = build_torus(4).unwrap();
        let e = l.edge_at(0, 0, EdgeKind::B);
        assert_eq!(diagonal_path(&l, e, e).unwrap().k(), 0);
        let a = l.edge_at(1, 0, EdgeKind::A);
        assert!(matches!(diagonal_path(&l, e, a), Err(Error::Kind { .. })));
        let off = l.edge_at(1, 1, EdgeKind::B);
        assert_eq!(diagonal_path(&l, e, off), Err(Error::NotDiagonal(e, off)));
    }

    #[test]
    fn trace_rejects_broken_paths() {
        let l = build_torus(4).unwrap();
        let a = l.edge_at(0, 0, EdgeKind::A);
        let far = l.edge_at(2, 2, EdgeKind::A);
        assert!(matches!(trace_path(&l, &[a, far]), Err(Error::Path(_))));
        // the hexagon boundary closes on itself
        let hex = l.face_edges(1, 1);
        assert!(matches!(trace_path(&l, &hex), Err(Error::Path(_))));
        assert!(trace_path(&l, &hex[..5]).is_ok());
    }
}
