//! The gadget-decorated graph `H_Delta` carrying the dimer model.
//!
//! Every hexagonal face is filled with a gadget: a chain of four triangles
//! with six terminals, one per corner of the face. The base edges are
//! dropped; each base vertex keeps three *bisector* edges, one into each of
//! its three faces, joining it to the terminal at that corner. A bisector is
//! occupied exactly when the two base edges bounding its angle carry the same
//! state, and the gadget admits a unique completion for every even set of
//! occupied terminals, so configurations map two-to-one onto dimer covers.
//!
//! The decoration is periodic. [`Template`] describes one cell (two base
//! vertices, one gadget) with cell offsets on the edges that leave it;
//! [`DecoratedGraph`] is its `n x n` periodic instance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Colour, EdgeJson, EdgeKind, GraphJson, TorusLattice, TAU1, TAU2};
use crate::error::{Error, Result};
use crate::model::{is_valid, ModelParams, OneTwoConfig};

/// Decorated vertices per cell: black, white and twelve gadget vertices.
pub const LOCAL_VERTICES: usize = 14;

/// Gadget vertices start at this local index.
const GADGET_BASE: usize = 2;

/// Corner `k` of the face owned by cell `(0, 0)`, as (colour, cell offset).
const CORNERS: [(Colour, (i64, i64)); 6] = [
    (Colour::Black, (0, 0)),
    (Colour::White, (-1, 0)),
    (Colour::Black, (-1, 0)),
    (Colour::White, (-1, -1)),
    (Colour::Black, (0, -1)),
    (Colour::White, (0, -1)),
];

/// Kind of the bisector at corner `k`: the kind of the base edge at that
/// corner which does not bound the face.
const CORNER_BISECTOR: [EdgeKind; 6] = [
    EdgeKind::A,
    EdgeKind::C,
    EdgeKind::B,
    EdgeKind::A,
    EdgeKind::C,
    EdgeKind::B,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeClass {
    Bisector(EdgeKind),
    Internal,
}

/// The per-face gadget: internal vertices, edges and six terminals.
#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    /// Gadget vertex attached to corner `k`.
    pub terminals: [usize; 6],
    /// Polar placement inside the face, `(angle in degrees, radius)` with the
    /// face's corners at radius 1.
    pub positions: Vec<(f64, f64)>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Gadget {
    /// Four triangles chained by single edges. Vertices `0..6` are the
    /// terminals; `6..12` are the link vertices.
    pub fn triangle_chain() -> Gadget {
        let positions = vec![
            (0.0, 0.7),
            (60.0, 0.7),
            (120.0, 0.7),
            (180.0, 0.7),
            (240.0, 0.7),
            (300.0, 0.7),
            (30.0, 0.4),
            (100.0, 0.4),
            (140.0, 0.4),
            (160.0, 0.4),
            (200.0, 0.4),
            (220.0, 0.4),
        ];
        let pairs = [
            (0, 1),
            (1, 6),
            (0, 6),
            (7, 2),
            (2, 8),
            (7, 8),
            (9, 3),
            (3, 10),
            (9, 10),
            (11, 4),
            (4, 5),
            (11, 5),
            (6, 7),
            (8, 9),
            (10, 11),
        ];
        Gadget {
            terminals: [0, 1, 2, 3, 4, 5],
            positions,
            edges: pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    /// Perfect matchings of the gadget with the terminals in `removed`
    /// deleted, as lists of gadget edge indices.
    fn completions(&self, removed: u8) -> Vec<Vec<usize>> {
        let m = self.num_vertices();
        let mut used = vec![false; m];
        for (k, &t) in self.terminals.iter().enumerate() {
            if removed >> k & 1 == 1 {
                used[t] = true;
            }
        }
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        self.match_rec(&mut used, &mut chosen, &mut out);
        out
    }

    fn match_rec(&self, used: &mut [bool], chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(u) = used.iter().position(|&x| !x) else {
            out.push(chosen.clone());
            return;
        };
        for (i, &(a, b, _)) in self.edges.iter().enumerate() {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if used[v] {
                continue;
            }
            used[u] = true;
            used[v] = true;
            chosen.push(i);
            self.match_rec(used, chosen, out);
            chosen.pop();
            used[u] = false;
            used[v] = false;
        }
    }

    /// Completion table indexed by the set of occupied terminals. Fails
    /// unless every even set has exactly one completion and every odd set
    /// none.
    fn completion_table(&self) -> Result<Vec<Option<Vec<usize>>>> {
        (0u8..64)
            .map(|mask| {
                let c = self.completions(mask);
                let even = mask.count_ones() % 2 == 0;
                match (even, c.len()) {
                    (true, 1) => Ok(c.into_iter().next()),
                    (false, 0) => Ok(None),
                    (_, k) => Err(Error::Construction(format!(
                        "gadget has {k} completions for terminal set {mask:06b}"
                    ))),
                }
            })
            .collect()
    }
}

/// One edge of the periodic template, from local vertex `from` in cell
/// `(0, 0)` to local vertex `to` in cell `offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateEdge {
    pub from: usize,
    pub to: usize,
    pub offset: (i64, i64),
    pub class: EdgeClass,
    /// Weight of internal edges; bisectors take their weight from the
    /// model parameters.
    pub internal_weight: f64,
}

impl TemplateEdge {
    pub fn weight(&self, p: &ModelParams) -> f64 {
        match self.class {
            EdgeClass::Bisector(k) => p.weight(k),
            EdgeClass::Internal => self.internal_weight,
        }
    }
}

/// A dart of the template: edge index and direction (`true` = from -> to).
pub type Dart = (usize, bool);

/// Fundamental domain of `H_Delta` with a planar straight-line drawing.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub edges: Vec<TemplateEdge>,
    positions: Vec<(f64, f64)>,
    /// Template edge index of the bisector at corner `k` of the cell's face.
    pub corner_edges: [usize; 6],
    /// Template edge index of gadget edge `i`.
    pub gadget_edges: Vec<usize>,
}

impl Template {
    fn new(gadget: &Gadget) -> Template {
        let centre = (-1.0, 0.0);
        let mut positions = vec![(0.0, 0.0), (1.0, 0.0)];
        positions.extend(gadget.positions.iter().map(|&(deg, r)| {
            let t = deg * PI / 180.0;
            (centre.0 + r * t.cos(), centre.1 + r * t.sin())
        }));
        let mut edges = Vec::new();
        let mut corner_edges = [0; 6];
        for (k, &(colour, offset)) in CORNERS.iter().enumerate() {
            corner_edges[k] = edges.len();
            edges.push(TemplateEdge {
                from: GADGET_BASE + gadget.terminals[k],
                to: colour as usize,
                offset,
                class: EdgeClass::Bisector(CORNER_BISECTOR[k]),
                internal_weight: 1.0,
            });
        }
        let mut gadget_edges = Vec::new();
        for &(u, v, w) in &gadget.edges {
            gadget_edges.push(edges.len());
            edges.push(TemplateEdge {
                from: GADGET_BASE + u,
                to: GADGET_BASE + v,
                offset: (0, 0),
                class: EdgeClass::Internal,
                internal_weight: w,
            });
        }
        Template {
            edges,
            positions,
            corner_edges,
            gadget_edges,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    /// Tail, head and head-cell offset of a dart.
    pub fn dart_ends(&self, (e, forward): Dart) -> (usize, usize, (i64, i64)) {
        let t = &self.edges[e];
        if forward {
            (t.from, t.to, t.offset)
        } else {
            (t.to, t.from, (-t.offset.0, -t.offset.1))
        }
    }

    fn dart_angle(&self, d: Dart) -> f64 {
        let (tail, head, (d1, d2)) = self.dart_ends(d);
        let (hx, hy) = self.positions[head];
        let (tx, ty) = self.positions[tail];
        let x = hx + d1 as f64 * TAU1.0 + d2 as f64 * TAU2.0 - tx;
        let y = hy + d1 as f64 * TAU1.1 + d2 as f64 * TAU2.1 - ty;
        y.atan2(x)
    }

    /// Faces of the periodic drawing, each traversed counterclockwise.
    pub fn faces(&self) -> Vec<Vec<Dart>> {
        let nv = self.num_vertices();
        let mut rotation: Vec<Vec<Dart>> = vec![Vec::new(); nv];
        for e in 0..self.edges.len() {
            for forward in [true, false] {
                let (tail, _, _) = self.dart_ends((e, forward));
                rotation[tail].push((e, forward));
            }
        }
        for r in &mut rotation {
            r.sort_by(|&a, &b| self.dart_angle(a).total_cmp(&self.dart_angle(b)));
        }
        let index = |d: Dart| 2 * d.0 + usize::from(!d.1);
        let mut seen = vec![false; 2 * self.edges.len()];
        let mut faces = Vec::new();
        for start in 0..self.edges.len() {
            for forward in [true, false] {
                let mut d = (start, forward);
                if seen[index(d)] {
                    continue;
                }
                let mut face = Vec::new();
                while !seen[index(d)] {
                    seen[index(d)] = true;
                    face.push(d);
                    let (_, head, _) = self.dart_ends(d);
                    let rot = &rotation[head];
                    let back = (d.0, !d.1);
                    let pos = rot.iter().position(|&x| x == back).expect("reverse dart");
                    d = rot[(pos + rot.len() - 1) % rot.len()];
                }
                faces.push(face);
            }
        }
        faces
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoratedEdge {
    pub u: usize,
    pub v: usize,
    /// Index of the template edge this is a translate of.
    pub template: usize,
    /// Cell of the edge's `u` end.
    pub cell: usize,
    pub weight: f64,
    pub class: EdgeClass,
    pub crosses_gx: bool,
    pub crosses_gy: bool,
}

/// The `n x n` decorated torus `H_{n,Delta}`.
///
/// Decorated vertex `14 * cell + local`; base vertex `v` is decorated vertex
/// `14 * (v / 2) + v % 2`. Decorated edge `T * cell + t` is the translate of
/// template edge `t` to `cell`, where `T` is the template edge count.
#[derive(Debug, Clone)]
pub struct DecoratedGraph {
    lattice: TorusLattice,
    params: ModelParams,
    template: Template,
    completions: Vec<Option<Vec<usize>>>,
    edges: Vec<DecoratedEdge>,
    bisectors: Vec<[usize; 3]>,
}

/// Builds `H_{n,Delta}` with the triangle-chain gadget and validates it: the
/// gadget must complete uniquely for every even terminal set, and the
/// fundamental-domain determinant must reproduce the closed-form
/// characteristic polynomial.
pub fn build_decorated(lattice: &TorusLattice, params: &ModelParams) -> Result<DecoratedGraph> {
    let d = DecoratedGraph::with_gadget(lattice, params, &Gadget::triangle_chain())?;
    crate::spectral::verify_characteristic(&d, params)?;
    Ok(d)
}

impl DecoratedGraph {
    /// Builds the decoration for an arbitrary gadget, checking only the
    /// combinatorial completion property.
    pub fn with_gadget(
        lattice: &TorusLattice,
        params: &ModelParams,
        gadget: &Gadget,
    ) -> Result<DecoratedGraph> {
        let completions = gadget.completion_table()?;
        let template = Template::new(gadget);
        let n = lattice.n() as i64;
        let mut edges = Vec::with_capacity(template.edges.len() * lattice.num_faces());
        let mut bisectors = vec![[usize::MAX; 3]; lattice.num_vertices()];
        for cell in 0..lattice.num_faces() {
            let (x, y) = lattice.cell_of(cell);
            let (x, y) = (x as i64, y as i64);
            for (t, te) in template.edges.iter().enumerate() {
                let (tx, ty) = (x + te.offset.0, y + te.offset.1);
                let target = lattice.cell_index(tx, ty);
                let id = edges.len();
                edges.push(DecoratedEdge {
                    u: LOCAL_VERTICES * cell + te.from,
                    v: LOCAL_VERTICES * target + te.to,
                    template: t,
                    cell,
                    weight: te.weight(params),
                    class: te.class,
                    crosses_gx: !(0..n).contains(&tx),
                    crosses_gy: !(0..n).contains(&ty),
                });
                if let EdgeClass::Bisector(kind) = te.class {
                    let base = 2 * target + te.to;
                    let slot = &mut bisectors[base][kind.index()];
                    if *slot != usize::MAX {
                        return Err(Error::Construction(format!(
                            "base vertex {base} has two {} bisectors",
                            kind.letter()
                        )));
                    }
                    *slot = id;
                }
            }
        }
        if let Some(v) = bisectors.iter().position(|b| b.contains(&usize::MAX)) {
            return Err(Error::Construction(format!(
                "base vertex {v} lacks a bisector"
            )));
        }
        Ok(DecoratedGraph {
            lattice: lattice.clone(),
            params: *params,
            template,
            completions,
            edges,
            bisectors,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn num_vertices(&self) -> usize {
        LOCAL_VERTICES * self.lattice.num_faces()
    }

    pub fn edges(&self) -> &[DecoratedEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &DecoratedEdge {
        &self.edges[id]
    }

    pub fn base_vertex(&self, v: usize) -> usize {
        LOCAL_VERTICES * (v / 2) + v % 2
    }

    /// Bisector edge at base vertex `v` of the given kind.
    pub fn bisector(&self, v: usize, kind: EdgeKind) -> usize {
        self.bisectors[v][kind.index()]
    }

    /// Decorated edge id of a template edge translated to `cell`.
    pub fn edge_id(&self, cell: usize, template_edge: usize) -> usize {
        self.template.edges.len() * cell + template_edge
    }

    /// Gadget edges completing a face whose occupied terminals are `mask`.
    fn completion(&self, mask: u8) -> Option<&Vec<usize>> {
        self.completions[mask as usize].as_ref()
    }

    /// Recovers the pair `{sigma, -sigma}` from a dimer cover, returning the
    /// representative with edge 0 present. `None` if the cover is not the
    /// image of any configuration (for example, its bisector pattern is
    /// inconsistent around a homology cycle of the torus).
    pub fn dimer_to_config(&self, cover: &DimerCover) -> Option<OneTwoConfig> {
        let l = &self.lattice;
        let mut occupied = vec![false; self.edges.len()];
        for &e in &cover.edges {
            occupied[e] = true;
        }
        // present[v] = kind of the unique occupied bisector at v
        let mut present = Vec::with_capacity(l.num_vertices());
        for v in 0..l.num_vertices() {
            let kinds: Vec<_> = EdgeKind::ALL
                .into_iter()
                .filter(|&k| occupied[self.bisector(v, k)])
                .collect();
            if kinds.len() != 1 {
                return None;
            }
            present.push(kinds[0]);
        }
        let mut state: Vec<Option<bool>> = vec![None; l.num_edges()];
        state[0] = Some(true);
        let mut stack = vec![0usize];
        while let Some(e) = stack.pop() {
            let s = state[e].unwrap();
            let edge = l.edge(e);
            for v in [edge.white, edge.black] {
                let inc = l.incident(v);
                for k in EdgeKind::ALL {
                    let g = inc[k.index()];
                    if g == e {
                        continue;
                    }
                    // the bisector between e and g is the one of the third kind
                    let third = 3 - edge.kind.index() - k.index();
                    let equal = present[v].index() == third;
                    let want = if equal { s } else { !s };
                    match state[g] {
                        None => {
                            state[g] = Some(want);
                            stack.push(g);
                        }
                        Some(x) if x != want => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        let sigma = OneTwoConfig::from_present(state.into_iter().map(|s| s.unwrap()).collect());
        is_valid(l, &sigma).then_some(sigma)
    }

    /// All perfect matchings, by exhaustive search. Only for `n <= 3`.
    pub fn enumerate_dimer_covers(&self) -> Result<Vec<DimerCover>> {
        let n = self.lattice.n();
        if n > 3 {
            return Err(Error::Resource {
                what: "dimer cover enumeration",
                n,
                max: 3,
            });
        }
        let nv = self.num_vertices();
        let mut adjacency = vec![Vec::new(); nv];
        for (id, e) in self.edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        let mut used = vec![false; nv];
        let mut chosen = Vec::new();
        let mut out = Vec::new();
        fn rec(
            adjacency: &[Vec<(usize, usize)>],
            used: &mut [bool],
            chosen: &mut Vec<usize>,
            out: &mut Vec<DimerCover>,
            from: usize,
        ) {
            let Some(u) = (from..used.len()).find(|&u| !used[u]) else {
                let mut edges = chosen.clone();
                edges.sort_unstable();
                out.push(DimerCover { edges });
                return;
            };
            used[u] = true;
            for &(v, id) in &adjacency[u] {
                if !used[v] {
                    used[v] = true;
                    chosen.push(id);
                    rec(adjacency, used, chosen, out, u + 1);
                    chosen.pop();
                    used[v] = false;
                }
            }
            used[u] = false;
        }
        rec(&adjacency, &mut used, &mut chosen, &mut out, 0);
        Ok(out)
    }

    pub fn to_json_graph(&self) -> GraphJson {
        GraphJson {
            vertices: self.num_vertices(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeJson {
                    id,
                    u: e.u,
                    v: e.v,
                    kind: match e.class {
                        EdgeClass::Bisector(k) => k.letter().to_string(),
                        EdgeClass::Internal => "internal".to_string(),
                    },
                    weight: e.weight,
                    crosses_gx: e.crosses_gx,
                    crosses_gy: e.crosses_gy,
                })
                .collect(),
        }
    }
}

/// A perfect matching of `H_{n,Delta}`, as sorted decorated edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimerCover {
    pub edges: Vec<usize>,
}

impl DimerCover {
    pub fn weight(&self, d: &DecoratedGraph) -> f64 {
        self.edges.iter().map(|&e| d.edge(e).weight).product()
    }

    /// Parities of the numbers of cover edges crossing `gamma_x`, `gamma_y`.
    pub fn crossing_parity(&self, d: &DecoratedGraph) -> (bool, bool) {
        self.edges.iter().fold((false, false), |(x, y), &e| {
            let de = d.edge(e);
            (x ^ de.crosses_gx, y ^ de.crosses_gy)
        })
    }

    pub fn is_perfect_matching(&self, d: &DecoratedGraph) -> bool {
        let mut hit = vec![0u8; d.num_vertices()];
        for &e in &self.edges {
            let de = d.edge(e);
            hit[de.u] += 1;
            hit[de.v] += 1;
        }
        hit.iter().all(|&h| h == 1)
    }
}

/// The dimer cover induced by a 1-2 configuration: a bisector is occupied
/// iff the two sides of its angle have equal states; each gadget is then
/// completed uniquely.
pub fn config_to_dimer(d: &DecoratedGraph, sigma: &OneTwoConfig) -> Result<DimerCover> {
    let l = d.lattice();
    if let Some(vertex) = crate::model::first_violation(l, sigma) {
        return Err(Error::Constraint { vertex });
    }
    let mut occupied = vec![false; d.edges.len()];
    let mut cover = Vec::with_capacity(d.num_vertices() / 2);
    for v in 0..l.num_vertices() {
        let [ea, eb, ec] = l.incident(v).map(|e| sigma.is_present(e));
        let kind = if eb == ec {
            EdgeKind::A
        } else if ea == ec {
            EdgeKind::B
        } else {
            EdgeKind::C
        };
        let id = d.bisector(v, kind);
        occupied[id] = true;
        cover.push(id);
    }
    for cell in 0..l.num_faces() {
        let mut mask = 0u8;
        for (k, &t) in d.template.corner_edges.iter().enumerate() {
            if occupied[d.edge_id(cell, t)] {
                mask |= 1 << k;
            }
        }
        let completion = d.completion(mask).ok_or_else(|| {
            Error::Construction(format!("odd terminal set {mask:06b} at face {cell}"))
        })?;
        cover.extend(
            completion
                .iter()
                .map(|&g| d.edge_id(cell, d.template.gadget_edges[g])),
        );
    }
    cover.sort_unstable();
    Ok(DimerCover { edges: cover })
}
