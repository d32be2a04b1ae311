use super::{first_violation, vertex_signature, OneTwoConfig, Signature};
use crate::error::{Error, Result};
use crate::lattice::{EdgeKind, TorusLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentShape {
    Path,
    Cycle,
}

/// A connected component of the present-edge subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub shape: ComponentShape,
}

/// A maximal connected set of vertices sharing one signature word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousCluster {
    pub word: Signature,
    pub vertices: Vec<usize>,
    /// Whether the cluster winds around the torus in the `tau1` / `tau2`
    /// direction.
    pub wraps: (bool, bool),
}

impl HomogeneousCluster {
    pub fn spanning(&self) -> bool {
        self.wraps.0 || self.wraps.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterDecomposition {
    pub components: Vec<Component>,
    pub signatures: Vec<Signature>,
    pub clusters: Vec<HomogeneousCluster>,
}

impl ClusterDecomposition {
    fn of_word(&self, word: Signature) -> impl Iterator<Item = &HomogeneousCluster> {
        self.clusters.iter().filter(move |c| c.word == word)
    }

    pub fn largest(&self, word: Signature) -> usize {
        self.of_word(word)
            .map(|c| c.vertices.len())
            .max()
            .unwrap_or(0)
    }

    pub fn spanning(&self, word: Signature) -> bool {
        self.of_word(word).any(HomogeneousCluster::spanning)
    }

    pub fn count(&self, word: Signature) -> usize {
        self.of_word(word).count()
    }

    /// Largest type-`kind` cluster: the larger of the two words of that kind.
    pub fn largest_of_type(&self, kind: EdgeKind) -> usize {
        Signature::ALLOWED
            .iter()
            .filter(|w| w.weight_kind() == Some(kind))
            .map(|&w| self.largest(w))
            .max()
            .unwrap_or(0)
    }

    pub fn spanning_of_type(&self, kind: EdgeKind) -> bool {
        Signature::ALLOWED
            .iter()
            .any(|&w| w.weight_kind() == Some(kind) && self.spanning(w))
    }

    /// Edge counts of the path components.
    pub fn path_lengths(&self) -> Vec<usize> {
        self.components
            .iter()
            .filter(|c| c.shape == ComponentShape::Path)
            .map(|c| c.edges.len())
            .collect()
    }

    pub fn cycle_count(&self) -> usize {
        self.components
            .iter()
            .filter(|c| c.shape == ComponentShape::Cycle)
            .count()
    }
}

/// Splits a configuration into path/cycle components and homogeneous
/// clusters. Cluster winding is detected by tracking universal-cover cell
/// coordinates during the search: a cluster wraps iff some edge closes a
/// loop with nonzero displacement.
pub fn cluster_decompose(
    lattice: &TorusLattice,
    sigma: &OneTwoConfig,
) -> Result<ClusterDecomposition> {
    if let Some(vertex) = first_violation(lattice, sigma) {
        return Err(Error::Constraint { vertex });
    }
    let nv = lattice.num_vertices();
    let signatures: Vec<Signature> = (0..nv)
        .map(|v| vertex_signature(lattice, sigma, v))
        .collect();

    let mut components = Vec::new();
    let mut seen = vec![false; nv];
    for start in 0..nv {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut vertices = vec![start];
        let mut edges = Vec::new();
        let mut i = 0;
        while i < vertices.len() {
            let v = vertices[i];
            i += 1;
            for e in lattice.incident(v) {
                if !sigma.is_present(e) {
                    continue;
                }
                let u = lattice.edge(e).other(v);
                edges.push(e);
                if !seen[u] {
                    seen[u] = true;
                    vertices.push(u);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let shape = if edges.len() == vertices.len() {
            ComponentShape::Cycle
        } else {
            ComponentShape::Path
        };
        vertices.sort_unstable();
        components.push(Component {
            vertices,
            edges,
            shape,
        });
    }

    let mut clusters = Vec::new();
    let mut position: Vec<Option<(i64, i64)>> = vec![None; nv];
    for start in 0..nv {
        if position[start].is_some() {
            continue;
        }
        let word = signatures[start];
        position[start] = Some((0, 0));
        let mut vertices = vec![start];
        let mut wraps = (false, false);
        let mut i = 0;
        while i < vertices.len() {
            let v = vertices[i];
            i += 1;
            let (px, py) = position[v].unwrap();
            for kind in EdgeKind::ALL {
                let (u, (dx, dy)) = lattice.step(v, kind);
                if signatures[u] != word {
                    continue;
                }
                let q = (px + dx, py + dy);
                match position[u] {
                    None => {
                        position[u] = Some(q);
                        vertices.push(u);
                    }
                    Some(r) => {
                        wraps.0 |= r.0 != q.0;
                        wraps.1 |= r.1 != q.1;
                    }
                }
            }
        }
        vertices.sort_unstable();
        clusters.push(HomogeneousCluster {
            word,
            vertices,
            wraps,
        });
    }

    Ok(ClusterDecomposition {
        components,
        signatures,
        clusters,
    })
}
