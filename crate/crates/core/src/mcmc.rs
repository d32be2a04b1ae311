//! Metropolis sampling of the 1-2 measure.
//!
//! A move flips either one edge or the six edges of one hexagonal face,
//! both chosen uniformly. Proposals leaving the configuration space are
//! rejected; others are accepted with probability `min(1, w(new) / w(old))`.
//! Each move is an involution with a uniform proposal, so detailed balance
//! holds move by move. Ergodicity of the mix is checked empirically only.
//!
//! The generator is ChaCha8 (`rand_chacha`), seeded with a `u64` through
//! `SeedableRng::seed_from_u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{build_torus, EdgeKind, TorusLattice};
use crate::model::{
    cluster_decompose, vertex_signature, ComponentShape, ModelParams, OneTwoConfig, Signature,
};

/// Fewest post-burnin sweeps accepted by the estimators.
pub const MIN_SAMPLES: usize = 1000;
pub const BATCHES: usize = 32;

/// Probabilities of the two move types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoveMix {
    pub edge: f64,
    pub face: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        MoveMix {
            edge: 0.7,
            face: 0.3,
        }
    }
}

impl MoveMix {
    pub fn new(edge: f64, face: f64) -> Result<MoveMix> {
        if !(edge >= 0.0 && face >= 0.0 && (edge + face - 1.0).abs() < 1e-12) {
            return Err(Error::Params(format!(
                "move mix ({edge}, {face}) is not a distribution"
            )));
        }
        Ok(MoveMix { edge, face })
    }
}

#[derive(Debug, Clone)]
pub struct Chain {
    lattice: TorusLattice,
    params: ModelParams,
    config: OneTwoConfig,
    rng: ChaCha8Rng,
    mix: MoveMix,
    sweeps: u64,
    proposed: u64,
    valid: u64,
    accepted: u64,
}

/// A chain started from the configuration with every B and C edge present.
pub fn init_chain(n: usize, p: &ModelParams, seed: u64) -> Result<Chain> {
    Chain::new(n, p, seed, MoveMix::default())
}

impl Chain {
    pub fn new(n: usize, p: &ModelParams, seed: u64, mix: MoveMix) -> Result<Chain> {
        let lattice = build_torus(n)?;
        let config = OneTwoConfig::reference(&lattice);
        Ok(Chain {
            lattice,
            params: *p,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mix,
            sweeps: 0,
            proposed: 0,
            valid: 0,
            accepted: 0,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &OneTwoConfig {
        &self.config
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    /// Fraction of proposals that stayed in the configuration space and
    /// were accepted.
    pub fn acceptance(&self) -> f64 {
        if self.valid == 0 {
            return 0.0;
        }
        self.accepted as f64 / self.valid as f64
    }

    /// Fraction of proposals that stayed in the configuration space.
    pub fn validity(&self) -> f64 {
        if self.proposed == 0 {
            return 0.0;
        }
        self.valid as f64 / self.proposed as f64
    }

    fn vertex_weight(&self, v: usize) -> f64 {
        vertex_signature(&self.lattice, &self.config, v).weight(&self.params)
    }

    /// Toggles `edges`, then undoes the toggle unless the Metropolis test on
    /// the weights of `vertices` passes.
    fn propose(&mut self, edges: &[usize], vertices: &[usize]) {
        self.proposed += 1;
        let before: f64 = vertices.iter().map(|&v| self.vertex_weight(v)).product();
        for &e in edges {
            self.config.toggle(e);
        }
        let after: f64 = vertices.iter().map(|&v| self.vertex_weight(v)).product();
        let u: f64 = self.rng.random();
        if after == 0.0 {
            for &e in edges {
                self.config.toggle(e);
            }
            return;
        }
        self.valid += 1;
        if after >= before || u * before < after {
            self.accepted += 1;
        } else {
            for &e in edges {
                self.config.toggle(e);
            }
        }
    }

    /// One elementary move.
    pub fn step(&mut self) {
        let kind: f64 = self.rng.random();
        if kind < self.mix.edge {
            let e = self.rng.random_range(0..self.lattice.num_edges());
            let g = self.lattice.edge(e);
            self.propose(&[e], &[g.white, g.black]);
        } else {
            let face = self.rng.random_range(0..self.lattice.num_faces());
            let edges = self.lattice.face_edges_by_id(face);
            let corners = self.lattice.face_corners_by_id(face);
            self.propose(&edges, &corners);
        }
    }

    /// `3 n^2` elementary moves.
    pub fn sweep(&mut self) {
        for _ in 0..self.lattice.num_edges() {
            self.step();
        }
        self.sweeps += 1;
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    /// FNV-1a hash of the configuration and sweep counter, stable across
    /// platforms and toolchains.
    pub fn state_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self
            .config
            .to_bytes()
            .into_iter()
            .chain(self.sweeps.to_le_bytes())
        {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Sample mean and batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn batch_means(samples: &[f64]) -> Estimate {
    let size = samples.len() / BATCHES;
    let means: Vec<f64> = samples
        .chunks_exact(size)
        .take(BATCHES)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let bm = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    Estimate {
        mean,
        stderr: (var / BATCHES as f64).sqrt(),
        samples: samples.len(),
    }
}

/// `<sigma_e sigma_f>` from `sweeps - burnin` measurements, one per sweep
/// after `burnin` discarded sweeps.
pub fn estimate_correlation(
    chain: &mut Chain,
    e: usize,
    f: usize,
    sweeps: usize,
    burnin: usize,
) -> Result<Estimate> {
    let m = chain.lattice.num_edges();
    if e >= m || f >= m {
        return Err(Error::Params(format!("edge pair ({e}, {f}) out of range")));
    }
    if burnin >= sweeps {
        return Err(Error::Params(format!(
            "burnin {burnin} must be below sweeps {sweeps}"
        )));
    }
    let count = sweeps - burnin;
    if count < MIN_SAMPLES {
        return Err(Error::SampleSize {
            got: count,
            need: MIN_SAMPLES,
        });
    }
    if e == f {
        return Ok(Estimate {
            mean: 1.0,
            stderr: 0.0,
            samples: count,
        });
    }
    chain.run(burnin);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        chain.sweep();
        samples.push(f64::from(chain.config.spin(e) * chain.config.spin(f)));
    }
    Ok(batch_means(&samples))
}

/// Edge-presence frequency of `e` by the same scheme.
pub fn estimate_presence(
    chain: &mut Chain,
    e: usize,
    sweeps: usize,
    burnin: usize,
) -> Result<Estimate> {
    if e >= chain.lattice.num_edges() {
        return Err(Error::Params(format!("edge {e} out of range")));
    }
    if burnin >= sweeps {
        return Err(Error::Params(format!(
            "burnin {burnin} must be below sweeps {sweeps}"
        )));
    }
    let count = sweeps - burnin;
    if count < MIN_SAMPLES {
        return Err(Error::SampleSize {
            got: count,
            need: MIN_SAMPLES,
        });
    }
    chain.run(burnin);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        chain.sweep();
        samples.push(if chain.config.is_present(e) { 1.0 } else { 0.0 });
    }
    Ok(batch_means(&samples))
}

/// Independent chains with the given seeds, run in parallel and combined in
/// seed order: the mean of the means, with standard errors added in
/// quadrature.
pub fn estimate_correlation_chains(
    n: usize,
    p: &ModelParams,
    seeds: &[u64],
    e: usize,
    f: usize,
    sweeps: usize,
    burnin: usize,
) -> Result<Estimate> {
    if seeds.is_empty() {
        return Err(Error::Params("no seeds given".into()));
    }
    let parts = seeds
        .par_iter()
        .map(|&seed| estimate_correlation(&mut init_chain(n, p, seed)?, e, f, sweeps, burnin))
        .collect::<Result<Vec<_>>>()?;
    let k = parts.len() as f64;
    Ok(Estimate {
        mean: parts.iter().map(|x| x.mean).sum::<f64>() / k,
        stderr: parts
            .iter()
            .map(|x| x.stderr * x.stderr)
            .sum::<f64>()
            .sqrt()
            / k,
        samples: parts.iter().map(|x| x.samples).sum(),
    })
}

/// Statistics of one signature word over the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordStats {
    #[serde(serialize_with = "serialize_word")]
    pub word: Signature,
    pub mean_largest: f64,
    pub spanning_frequency: f64,
    pub mean_count: f64,
}

fn serialize_word<S: serde::Serializer>(
    w: &Signature,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStats {
    pub samples: usize,
    pub words: Vec<WordStats>,
    /// Per type `a, b, c`: frequency of a spanning cluster of either word.
    pub type_spanning_frequency: [f64; 3],
    /// Per type: mean size of the largest cluster of either word.
    pub type_mean_largest: [f64; 3],
    /// `path_lengths[l]` counts path components with `l` edges.
    pub path_lengths: Vec<usize>,
    pub mean_cycle_count: f64,
    /// Whether every sampled component was a simple path or cycle.
    pub paths_and_cycles_only: bool,
}

/// Decomposes `samples` configurations taken every `thinning` sweeps.
pub fn cluster_stats(chain: &mut Chain, samples: usize, thinning: usize) -> Result<ClusterStats> {
    cluster_stats_with(chain, samples, thinning, |_| {})
}

/// [`cluster_stats`], calling `visit` on the chain at each sample.
pub fn cluster_stats_with(
    chain: &mut Chain,
    samples: usize,
    thinning: usize,
    mut visit: impl FnMut(&Chain),
) -> Result<ClusterStats> {
    if samples == 0 || thinning == 0 {
        return Err(Error::Params(
            "samples and thinning must be positive".into(),
        ));
    }
    let words = Signature::ALLOWED;
    let mut largest = [0.0; 6];
    let mut spanning = [0usize; 6];
    let mut counts = [0usize; 6];
    let mut type_spanning = [0usize; 3];
    let mut type_largest = [0.0; 3];
    let mut path_lengths = vec![0usize; chain.lattice.num_edges() + 1];
    let mut cycles = 0usize;
    let mut simple = true;
    for _ in 0..samples {
        chain.run(thinning);
        visit(chain);
        let d = cluster_decompose(&chain.lattice, &chain.config)?;
        for (i, &w) in words.iter().enumerate() {
            largest[i] += d.largest(w) as f64;
            spanning[i] += usize::from(d.spanning(w));
            counts[i] += d.count(w);
        }
        for kind in EdgeKind::ALL {
            type_spanning[kind.index()] += usize::from(d.spanning_of_type(kind));
            type_largest[kind.index()] += d.largest_of_type(kind) as f64;
        }
        for c in &d.components {
            match c.shape {
                ComponentShape::Cycle => {
                    cycles += 1;
                    simple &= c.edges.len() == c.vertices.len();
                }
                ComponentShape::Path => {
                    path_lengths[c.edges.len()] += 1;
                    simple &= c.edges.len() + 1 == c.vertices.len();
                }
            }
            simple &= c.vertices.iter().all(|&v| {
                let deg = chain
                    .lattice
                    .incident(v)
                    .iter()
                    .filter(|&&e| chain.config.is_present(e))
                    .count();
                deg == 1 || deg == 2
            });
        }
    }
    let s = samples as f64;
    while path_lengths.len() > 1 && path_lengths.last() == Some(&0) {
        path_lengths.pop();
    }
    Ok(ClusterStats {
        samples,
        words: words
            .iter()
            .enumerate()
            .map(|(i, &word)| WordStats {
                word,
                mean_largest: largest[i] / s,
                spanning_frequency: spanning[i] as f64 / s,
                mean_count: counts[i] as f64 / s,
            })
            .collect(),
        type_spanning_frequency: type_spanning.map(|x| x as f64 / s),
        type_mean_largest: type_largest.map(|x| x / s),
        path_lengths,
        mean_cycle_count: cycles as f64 / s,
        paths_and_cycles_only: simple,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_measure, is_valid};

    fn params(a: f64, b: f64, c: f64) -> ModelParams {
        ModelParams::new(a, b, c).unwrap()
    }

    #[test]
    fn validity_is_preserved() {
        let mut ch = init_chain(4, &params(1.3, 0.7, 1.1), 1).unwrap();
        for _ in 0..200 {
            ch.sweep();
            assert!(is_valid(ch.lattice(), ch.config()));
        }
        assert_eq!(ch.sweeps(), 200);
    }

    #[test]
    fn uniform_weights_accept_every_valid_proposal() {
        let mut ch = init_chain(3, &params(1.0, 1.0, 1.0), 2).unwrap();
        ch.run(100);
        assert_eq!(ch.acceptance(), 1.0);
        assert!(ch.validity() > 0.0 && ch.validity() < 1.0);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let p = params(2.0, 1.0, 1.0);
        let run = |seed| {
            let mut ch = init_chain(4, &p, seed).unwrap();
            ch.run(100);
            ch.state_hash()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn detailed_balance_on_enumerated_pairs() {
        // with symmetric proposals, mu(s) min(1, w'/w) = mu(s') min(1, w/w')
        let p = params(2.0, 1.0, 0.5);
        let table = exact_measure(2, &p).unwrap();
        let l = build_torus(2).unwrap();
        for (i, &code) in table.codes.iter().enumerate() {
            for e in 0..12 {
                let j = table.index_of(code ^ 1 << e);
                if let Some(j) = j {
                    let (a, b) = (table.probabilities[i], table.probabilities[j]);
                    let forward = a * (b / a).min(1.0);
                    let backward = b * (a / b).min(1.0);
                    assert!((forward - backward).abs() < 1e-15);
                }
            }
            for face in 0..4 {
                let mask: u64 = l
                    .face_edges_by_id(face)
                    .iter()
                    .map(|&e| 1u64 << e)
                    .fold(0, |x, y| x ^ y);
                if let Some(j) = table.index_of(code ^ mask) {
                    let (a, b) = (table.probabilities[i], table.probabilities[j]);
                    assert!((a * (b / a).min(1.0) - b * (a / b).min(1.0)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn estimator_preconditions() {
        let mut ch = init_chain(2, &params(1.0, 1.0, 1.0), 3).unwrap();
        assert!(matches!(
            estimate_correlation(&mut ch, 1, 4, 500, 100),
            Err(Error::SampleSize {
                got: 400,
                need: 1000
            })
        ));
        let est = estimate_correlation(&mut ch, 4, 4, 2000, 100).unwrap();
        assert_eq!((est.mean, est.stderr), (1.0, 0.0));
    }

    #[test]
    fn reference_cluster_stats() {
        let mut ch = init_chain(4, &params(1.0, 1.0, 1.0), 4).unwrap();
        let s = cluster_stats(&mut ch, 20, 2).unwrap();
        assert!(s.paths_and_cycles_only);
        assert!(s
            .type_spanning_frequency
            .iter()
            .all(|f| (0.0..=1.0).contains(f)));
        assert!(s.words.iter().all(|w| w.mean_largest <= 32.0));
    }
}
