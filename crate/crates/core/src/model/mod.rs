//! Configurations, vertex weights and the brute-force oracle.
//!
//! A configuration assigns `+1` (present) or `-1` (absent) to every edge so
//! that each vertex meets one or two present edges. The weight of a vertex is
//! read off its signature word `sigma'(C) sigma'(B) sigma'(A)`:
//!
//! ```text
//!   001, 110 -> a      010, 101 -> b      100, 011 -> c
//! ```

mod cluster;
mod enumerate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeKind, TorusLattice};

pub use cluster::{
    cluster_decompose, ClusterDecomposition, Component, ComponentShape, HomogeneousCluster,
};
pub use enumerate::{
    enumerate_partition, exact_correlation, exact_measure, valid_configs, MeasureTable,
};

/// Positive vertex weights `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ModelParams {
    a: f64,
    b: f64,
    c: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, x) in [("a", a), ("b", b), ("c", c)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Params(format!(
                    "{name} = {x}: weights must be finite and strictly positive"
                )));
            }
        }
        Ok(ModelParams { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn weight(&self, kind: EdgeKind) -> f64 {
        match kind {
            EdgeKind::A => self.a,
            EdgeKind::B => self.b,
            EdgeKind::C => self.c,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        ModelParams::new(lambda * self.a, lambda * self.b, lambda * self.c)
    }

    /// `(b, c, a)`.
    pub fn rotated(&self) -> Self {
        ModelParams {
            a: self.b,
            b: self.c,
            c: self.a,
        }
    }
}

impl TryFrom<[f64; 3]> for ModelParams {
    type Error = Error;

    fn try_from([a, b, c]: [f64; 3]) -> Result<Self> {
        ModelParams::new(a, b, c)
    }
}

impl From<ModelParams> for [f64; 3] {
    fn from(p: ModelParams) -> Self {
        p.as_array()
    }
}

/// Signature word at a vertex: bit 0 is the horizontal edge, bit 1 the NW/SE
/// edge, bit 2 the NE/SW edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature(pub u8);

impl Signature {
    /// The six words allowed by the degree constraint.
    pub const ALLOWED: [Signature; 6] = [
        Signature(0b001),
        Signature(0b010),
        Signature(0b011),
        Signature(0b100),
        Signature(0b101),
        Signature(0b110),
    ];

    pub fn complement(self) -> Signature {
        Signature(!self.0 & 0b111)
    }

    /// Weight letter of the word, `None` for `000` and `111`.
    pub fn weight_kind(self) -> Option<EdgeKind> {
        match self.0 {
            0b001 | 0b110 => Some(EdgeKind::A),
            0b010 | 0b101 => Some(EdgeKind::B),
            0b100 | 0b011 => Some(EdgeKind::C),
            _ => None,
        }
    }

    pub fn weight(self, p: &ModelParams) -> f64 {
        self.weight_kind().map_or(0.0, |k| p.weight(k))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

/// Edge states of `H_n`, stored as presence flags (`sigma'`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OneTwoConfig {
    present: Vec<bool>,
}

impl OneTwoConfig {
    pub fn from_present(present: Vec<bool>) -> Self {
        OneTwoConfig { present }
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        spins
            .iter()
            .map(|&s| match s {
                1 => Ok(true),
                -1 => Ok(false),
                _ => Err(Error::Params(format!("edge state {s} is not +1 or -1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_present)
    }

    /// Bit `e` of `code` is the presence of edge `e`.
    pub fn from_code(code: u64, edges: usize) -> Self {
        OneTwoConfig {
            present: (0..edges).map(|e| code >> e & 1 == 1).collect(),
        }
    }

    /// The configuration with every B and C edge present and every A edge
    /// absent: each vertex has signature `110`.
    pub fn reference(lattice: &TorusLattice) -> Self {
        OneTwoConfig {
            present: lattice
                .edges()
                .iter()
                .map(|e| e.kind != EdgeKind::A)
                .collect(),
        }
    }

    pub fn code(&self) -> Option<u64> {
        (self.present.len() <= 64).then(|| {
            self.present
                .iter()
                .enumerate()
                .fold(0, |acc, (e, &p)| acc | (u64::from(p) << e))
        })
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    pub fn is_present(&self, e: usize) -> bool {
        self.present[e]
    }

    pub fn spin(&self, e: usize) -> i8 {
        if self.present[e] {
            1
        } else {
            -1
        }
    }

    pub fn present(&self) -> &[bool] {
        &self.present
    }

    pub fn toggle(&mut self, e: usize) {
        self.present[e] = !self.present[e];
    }

    /// `-sigma`.
    pub fn flipped(&self) -> Self {
        OneTwoConfig {
            present: self.present.iter().map(|&p| !p).collect(),
        }
    }

    /// Little-endian bitmask, eight edges per byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.present.len().div_ceil(8)];
        for (e, &p) in self.present.iter().enumerate() {
            if p {
                out[e / 8] |= 1 << (e % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], edges: usize) -> Result<Self> {
        if bytes.len() != edges.div_ceil(8) {
            return Err(Error::Params(format!(
                "bitmask of {} bytes cannot hold {edges} edges",
                bytes.len()
            )));
        }
        Ok(OneTwoConfig {
            present: (0..edges)
                .map(|e| bytes[e / 8] >> (e % 8) & 1 == 1)
                .collect(),
        })
    }
}

pub fn vertex_signature(lattice: &TorusLattice, sigma: &OneTwoConfig, v: usize) -> Signature {
    let [ea, eb, ec] = lattice.incident(v);
    let bit = |e: usize| u8::from(sigma.is_present(e));
    Signature(bit(ea) | bit(eb) << 1 | bit(ec) << 2)
}

/// First vertex violating the degree constraint, if any.
pub fn first_violation(lattice: &TorusLattice, sigma: &OneTwoConfig) -> Option<usize> {
    if sigma.len() != lattice.num_edges() {
        return Some(0);
    }
    (0..lattice.num_vertices())
        .find(|&v| vertex_signature(lattice, sigma, v).weight_kind().is_none())
}

pub fn is_valid(lattice: &TorusLattice, sigma: &OneTwoConfig) -> bool {
    first_violation(lattice, sigma).is_none()
}

/// `w(sigma)`, the product of the vertex weights.
pub fn config_weight(lattice: &TorusLattice, sigma: &OneTwoConfig, p: &ModelParams) -> Result<f64> {
    if let Some(vertex) = first_violation(lattice, sigma) {
        return Err(Error::Constraint { vertex });
    }
    Ok((0..lattice.num_vertices())
        .map(|v| vertex_signature(lattice, sigma, v).weight(p))
        .product())
}

/// Golden fixture format for enumeration results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub n: usize,
    pub params: ModelParams,
    #[serde(rename = "Z")]
    pub z: f64,
    pub correlations: Vec<CorrelationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub e: usize,
    pub f: usize,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_torus;

    #[test]
    fn params_must_be_positive() {
        assert!(ModelParams::new(1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(serde_json::from_str::<ModelParams>("[1.0, -2.0, 1.0]").is_err());
        let p: ModelParams = serde_json::from_str("[1.5, 2.0, 1.0]").unwrap();
        assert_eq!(p.as_array(), [1.5, 2.0, 1.0]);
    }

    #[test]
    fn degree_zero_and_three_are_invalid() {
        let l = build_torus(2).unwrap();
        assert!(!is_valid(&l, &OneTwoConfig::from_present(vec![false; 12])));
        assert!(!is_valid(&l, &OneTwoConfig::from_present(vec![true; 12])));
        assert!(is_valid(&l, &OneTwoConfig::reference(&l)));
    }

    #[test]
    fn signature_of_lone_horizontal_edge() {
        let l = build_torus(2).unwrap();
        let sigma =
            OneTwoConfig::from_present(l.edges().iter().map(|e| e.kind == EdgeKind::A).collect());
        for v in 0..l.num_vertices() {
            let s = vertex_signature(&l, &sigma, v);
            assert_eq!(s.to_string(), "001");
            assert_eq!(vertex_signature(&l, &sigma.flipped(), v), s.complement());
        }
    }

    #[test]
    fn weight_map() {
        let p = ModelParams::new(2.0, 3.0, 5.0).unwrap();
        let w: Vec<f64> = Signature::ALLOWED.iter().map(|s| s.weight(&p)).collect();
        assert_eq!(w, [2.0, 3.0, 5.0, 5.0, 3.0, 2.0]);
        assert_eq!(Signature(0).weight(&p), 0.0);
        assert_eq!(Signature(7).weight(&p), 0.0);
    }

    #[test]
    fn reference_weight() {
        let l = build_torus(2).unwrap();
        let sigma = OneTwoConfig::reference(&l);
        let p = ModelParams::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(config_weight(&l, &sigma, &p).unwrap(), 256.0);
        let p = ModelParams::new(1.7, 0.3, 0.9).unwrap();
        let w = config_weight(&l, &sigma, &p).unwrap();
        assert!((w / 1.7f64.powi(8) - 1.0).abs() < 1e-15, "{w}");
        assert_eq!(
            config_weight(&l, &sigma.flipped(), &p).unwrap(),
            config_weight(&l, &sigma, &p).unwrap()
        );
    }

    #[test]
    fn invalid_weight_is_an_error() {
        let l = build_torus(2).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let sigma = OneTwoConfig::from_present(vec![true; 12]);
        assert!(matches!(
            config_weight(&l, &sigma, &p),
            Err(Error::Constraint { vertex: 0 })
        ));
    }

    #[test]
    fn code_and_bytes_round_trip() {
        let sigma = OneTwoConfig::from_code(0b1011_0110_1001, 12);
        assert_eq!(sigma.code(), Some(0b1011_0110_1001));
        let bytes = sigma.to_bytes();
        assert_eq!(OneTwoConfig::from_bytes(&bytes, 12).unwrap(), sigma);
        assert!(OneTwoConfig::from_bytes(&bytes, 30).is_err());
        assert_eq!(
            OneTwoConfig::from_spins(&[1, -1, 1]).unwrap().present(),
            &[true, false, true]
        );
        assert!(OneTwoConfig::from_spins(&[0]).is_err());
    }
}
