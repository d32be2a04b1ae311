//! Exhaustive scans over configuration codes.
//!
//! A code is a `3n^2`-bit integer whose bit `e` is the presence of edge `e`.
//! Scans run over fixed code ranges in parallel and combine the per-range
//! compensated sums in range order, so results do not depend on scheduling.

use rayon::prelude::*;

use super::{ModelParams, OneTwoConfig};
use crate::error::{Error, Result};
use crate::lattice::{build_torus, TorusLattice};
use crate::sum::Compensated;

const CHUNKS: u64 = 256;

/// Per-vertex incident edge indices, for fast weight evaluation on codes.
struct CodeWeights {
    incident: Vec<[u32; 3]>,
    /// Weight by signature word.
    table: [f64; 8],
}

impl CodeWeights {
    fn new(lattice: &TorusLattice, p: &ModelParams) -> Self {
        let mut table = [0.0; 8];
        for (w, slot) in table.iter_mut().enumerate() {
            *slot = super::Signature(w as u8).weight(p);
        }
        CodeWeights {
            incident: (0..lattice.num_vertices())
                .map(|v| lattice.incident(v).map(|e| e as u32))
                .collect(),
            table,
        }
    }

    /// `w(sigma)` for the configuration with this code, zero if invalid.
    #[inline]
    fn weight(&self, code: u64) -> f64 {
        let mut w = 1.0;
        for &[a, b, c] in &self.incident {
            let word = (code >> a & 1) | (code >> b & 1) << 1 | (code >> c & 1) << 2;
            let x = self.table[word as usize];
            if x == 0.0 {
                return 0.0;
            }
            w *= x;
        }
        w
    }
}

fn check_size(n: usize, max: usize, what: &'static str) -> Result<TorusLattice> {
    if n > max {
        return Err(Error::Resource { what, n, max });
    }
    build_torus(n)
}

/// Returns `(sum of w, sum of g * w)` over all valid codes.
fn scan(lattice: &TorusLattice, p: &ModelParams, g: impl Fn(u64) -> f64 + Sync) -> (f64, f64) {
    let weights = CodeWeights::new(lattice, p);
    let total = 1u64 << lattice.num_edges();
    let chunks = CHUNKS.min(total);
    let size = total / chunks;
    let parts: Vec<(Compensated, Compensated)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut z = Compensated::default();
            let mut num = Compensated::default();
            for code in i * size..(i + 1) * size {
                let w = weights.weight(code);
                if w != 0.0 {
                    z.add(w);
                    num.add(g(code) * w);
                }
            }
            (z, num)
        })
        .collect();
    let mut z = Compensated::default();
    let mut num = Compensated::default();
    for (a, b) in parts {
        z.merge(a);
        num.merge(b);
    }
    (z.value(), num.value())
}

/// `Z_n(a, b, c)` by exhaustive scan over all `2^{3n^2}` codes (`n <= 3`).
pub fn enumerate_partition(n: usize, p: &ModelParams) -> Result<f64> {
    let lattice = check_size(n, 3, "exhaustive enumeration")?;
    Ok(scan(&lattice, p, |_| 0.0).0)
}

/// `<sigma_e sigma_f>_n` by exhaustive scan (`n <= 3`).
pub fn exact_correlation(n: usize, p: &ModelParams, e: usize, f: usize) -> Result<f64> {
    let lattice = check_size(n, 3, "exhaustive enumeration")?;
    let m = lattice.num_edges();
    if e >= m || f >= m {
        return Err(Error::Params(format!(
            "edge pair ({e}, {f}) out of range for n = {n}"
        )));
    }
    let (z, num) = scan(&lattice, p, |code| {
        if (code >> e ^ code >> f) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    });
    Ok(num / z)
}

/// Every valid configuration in ascending code order.
///
/// # Panics
///
/// If the lattice has more than 27 edges (`n > 3`).
pub fn valid_configs(lattice: &TorusLattice) -> Vec<OneTwoConfig> {
    let m = lattice.num_edges();
    assert!(m <= 27, "valid_configs needs n <= 3");
    let unit = ModelParams::new(1.0, 1.0, 1.0).expect("unit weights");
    let weights = CodeWeights::new(lattice, &unit);
    (0..1u64 << m)
        .filter(|&code| weights.weight(code) != 0.0)
        .map(|code| OneTwoConfig::from_code(code, m))
        .collect()
}

/// The measure `mu_n` as a table over `Sigma_n` (`n <= 2`).
#[derive(Debug, Clone)]
pub struct MeasureTable {
    pub n: usize,
    /// Valid configuration codes, ascending.
    pub codes: Vec<u64>,
    pub probabilities: Vec<f64>,
    pub partition: f64,
}

impl MeasureTable {
    pub fn probability(&self, sigma: &OneTwoConfig) -> f64 {
        sigma
            .code()
            .and_then(|c| self.codes.binary_search(&c).ok())
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.codes.binary_search(&code).ok()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

pub fn exact_measure(n: usize, p: &ModelParams) -> Result<MeasureTable> {
    let lattice = check_size(n, 2, "exact measure table")?;
    let weights = CodeWeights::new(&lattice, p);
    let mut codes = Vec::new();
    let mut w = Vec::new();
    let mut z = Compensated::default();
    for code in 0..1u64 << lattice.num_edges() {
        let x = weights.weight(code);
        if x != 0.0 {
            codes.push(code);
            w.push(x);
            z.add(x);
        }
    }
    let partition = z.value();
    Ok(MeasureTable {
        n,
        codes,
        probabilities: w.into_iter().map(|x| x / partition).collect(),
        partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config_weight;

    #[test]
    fn code_weight_matches_config_weight() {
        let l = build_torus(2).unwrap();
        let p = ModelParams::new(1.3, 0.7, 1.1).unwrap();
        let weights = CodeWeights::new(&l, &p);
        for code in (0..4096u64).step_by(7) {
            let sigma = OneTwoConfig::from_code(code, 12);
            let expected = config_weight(&l, &sigma, &p).unwrap_or(0.0);
            assert_eq!(weights.weight(code), expected);
        }
    }

    #[test]
    fn n2_counts() {
        let l = build_torus(2).unwrap();
        assert_eq!(valid_configs(&l).len(), 450);
        let unit = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(enumerate_partition(2, &unit).unwrap(), 450.0);
    }

    #[test]
    fn size_cap() {
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            enumerate_partition(4, &p),
            Err(Error::Resource { n: 4, max: 3, .. })
        ));
        assert!(matches!(exact_measure(3, &p), Err(Error::Resource { .. })));
    }

    #[test]
    fn measure_is_normalised_and_flip_symmetric() {
        let p = ModelParams::new(2.0, 1.0, 0.5).unwrap();
        let table = exact_measure(2, &p).unwrap();
        let total: f64 = table.probabilities.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (&code, &prob) in table.codes.iter().zip(&table.probabilities) {
            let flipped = !code & 0xfff;
            let i = table.index_of(flipped).unwrap();
            assert!((table.probabilities[i] - prob).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_at_unit_weights() {
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let table = exact_measure(2, &p).unwrap();
        assert!(table
            .probabilities
            .iter()
            .all(|&q| (q - 1.0 / 450.0).abs() < 1e-15));
    }

    #[test]
    fn self_correlation_is_one() {
        let p = ModelParams::new(2.0, 1.0, 1.0).unwrap();
        for e in [0, 4, 11] {
            assert!((exact_correlation(2, &p, e, e).unwrap() - 1.0).abs() < 1e-14);
        }
    }
}
