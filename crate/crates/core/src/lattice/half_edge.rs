use super::{EdgeKind, TorusLattice};

/// Half-edge `<v, Me>`: the segment from base vertex `v` to the midpoint of `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub vertex: usize,
    /// Midpoint index, equal to the base edge index.
    pub midpoint: usize,
    pub kind: EdgeKind,
}

/// `H_n` with a vertex added at the midpoint of every edge.
///
/// Half-edge `2e` is the white half of edge `e`, `2e + 1` the black half.
#[derive(Debug, Clone)]
pub struct HalfEdgeGraph {
    base: TorusLattice,
    half_edges: Vec<HalfEdge>,
}

pub fn build_half_edge(lattice: &TorusLattice) -> HalfEdgeGraph {
    let half_edges = lattice
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(id, e)| {
            [e.white, e.black].map(|vertex| HalfEdge {
                vertex,
                midpoint: id,
                kind: e.kind,
            })
        })
        .collect();
    HalfEdgeGraph {
        base: lattice.clone(),
        half_edges,
    }
}

impl HalfEdgeGraph {
    pub fn base(&self) -> &TorusLattice {
        &self.base
    }

    pub fn num_midpoints(&self) -> usize {
        self.base.num_edges()
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    /// The two half-edges meeting at a midpoint.
    pub fn midpoint_half_edges(&self, midpoint: usize) -> [usize; 2] {
        [2 * midpoint, 2 * midpoint + 1]
    }

    /// Half-edge of base edge `e` touching `v`.
    pub fn half_edge_at(&self, e: usize, v: usize) -> usize {
        if self.base.edge(e).white == v {
            2 * e
        } else {
            2 * e + 1
        }
    }

    pub fn midpoint_degree(&self, midpoint: usize) -> usize {
        self.midpoint_half_edges(midpoint).len()
    }

    pub fn vertex_degree(&self, v: usize) -> usize {
        self.half_edges.iter().filter(|h| h.vertex == v).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_torus;

    #[test]
    fn counts_and_degrees() {
        let l = build_torus(2).unwrap();
        let h = build_half_edge(&l);
        assert_eq!(h.num_midpoints(), 12);
        assert_eq!(h.half_edges().len(), 24);
        for m in 0..h.num_midpoints() {
            assert_eq!(h.midpoint_degree(m), 2);
            for he in h.midpoint_half_edges(m) {
                assert_eq!(h.half_edges()[he].midpoint, m);
            }
        }
        for v in 0..l.num_vertices() {
            assert_eq!(h.vertex_degree(v), 3);
        }
    }

    #[test]
    fn half_edge_lookup() {
        let l = build_torus(3).unwrap();
        let h = build_half_edge(&l);
        for (id, e) in l.edges().iter().enumerate() {
            assert_eq!(h.half_edges()[h.half_edge_at(id, e.white)].vertex, e.white);
            assert_eq!(h.half_edges()[h.half_edge_at(id, e.black)].vertex, e.black);
        }
    }
}
