//! Clockwise-odd orientation of the decorated torus and the four-Pfaffian
//! partition function.
//!
//! Dimer covers of a toroidal graph split into four classes by the parities
//! of their crossings with `gamma_x` and `gamma_y`. The twisted matrices
//! `K^(theta, tau)` (weights on `gamma_x`-crossing edges negated when
//! `theta = 1`, likewise `gamma_y` and `tau`) satisfy
//!
//! ```text
//!   Z_(i, j) = +-1/4 sum_(theta, tau) (-1)^(theta i + tau j) Pf K^(theta, tau)
//! ```
//!
//! Only covers in one class lift to 1-2 configurations (the others have a
//! bisector pattern that is inconsistent around a homology cycle). That class
//! is read off the image of a fixed reference configuration, which
//! determines the sign vector of the combination without any fitting.

use num_complex::Complex64;

use super::SkewMatrix;
use crate::error::{Error, Result};
use crate::lattice::{build_decorated, build_torus, config_to_dimer, DecoratedGraph, Template};
use crate::model::{ModelParams, OneTwoConfig};

/// `(theta, tau)`: whether weights crossing `gamma_x` / `gamma_y` are negated.
pub type Twist = (bool, bool);

pub const TWISTS: [Twist; 4] = [(false, false), (false, true), (true, false), (true, true)];

/// Largest torus for dense Pfaffians (`14 n^2` rows).
const MAX_DENSE_N: usize = 12;

/// A Kasteleyn-oriented decorated torus.
#[derive(Debug, Clone)]
pub struct KasteleynSystem {
    graph: DecoratedGraph,
    /// `+1` if the template edge is oriented `from -> to`, else `-1`.
    signs: Vec<f64>,
    /// Crossing-parity class of the covers that lift to configurations.
    class: (bool, bool),
}

/// Solves for a clockwise-odd orientation of the template faces over GF(2),
/// then fixes the homology convention: of the four orientations obtained by
/// reversing the edges with odd `tau1` or `tau2` offset, the one whose
/// fundamental determinant vanishes at `(z, w) = (1, 1)` for the critical
/// weights `(4, 1, 1)` is kept, which makes the determinant equal the
/// closed-form characteristic polynomial.
pub fn kasteleyn_orient(graph: &DecoratedGraph) -> Result<KasteleynSystem> {
    let template = graph.template();
    let critical = ModelParams::new(4.0, 1.0, 1.0).expect("positive weights");
    let one = Complex64::new(1.0, 0.0);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for signs in homology_candidates(template)? {
        let det = fundamental(template, &signs, &critical, one, one)
            .determinant()
            .norm();
        if best.as_ref().map_or(true, |(d, _)| det < *d) {
            best = Some((det, signs));
        }
    }
    let (det, signs) = best.expect("four candidates");
    if det > 1e-8 {
        return Err(Error::Construction(format!(
            "no homology convention makes the critical determinant vanish (min {det:e})"
        )));
    }
    let reference = OneTwoConfig::reference(graph.lattice());
    let class = config_to_dimer(graph, &reference)?.crossing_parity(graph);
    Ok(KasteleynSystem {
        graph: graph.clone(),
        signs,
        class,
    })
}

/// The clockwise-odd orientation and its three homology variants, obtained
/// by reversing the edges with odd `tau1` and/or `tau2` offset.
pub(crate) fn homology_candidates(template: &Template) -> Result<Vec<Vec<f64>>> {
    let base = solve_orientation(template)?;
    Ok(TWISTS
        .iter()
        .map(|&(flip_x, flip_y)| {
            template
                .edges
                .iter()
                .zip(&base)
                .map(|(t, &s)| {
                    let odd = (flip_x && t.offset.0 % 2 != 0) ^ (flip_y && t.offset.1 % 2 != 0);
                    if odd {
                        -s
                    } else {
                        s
                    }
                })
                .collect()
        })
        .collect())
}

/// Orientation signs per template edge with every face clockwise-odd. A set
/// bit means the edge runs against the counterclockwise face traversal; free
/// variables are left along the listed direction.
fn solve_orientation(template: &Template) -> Result<Vec<f64>> {
    let ne = template.edges.len();
    let mut rows: Vec<(Vec<bool>, bool)> = template
        .faces()
        .iter()
        .map(|face| {
            let mut row = vec![false; ne];
            let mut constant = false;
            for &(e, forward) in face {
                row[e] ^= true;
                constant ^= !forward;
            }
            (row, !constant)
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ne {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0[c]) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0[c] {
                for (x, &y) in row.0.iter_mut().zip(&pivot.0) {
                    *x ^= y;
                }
                row.1 ^= pivot.1;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row.1) {
        return Err(Error::Construction(
            "no clockwise-odd orientation exists".into(),
        ));
    }
    let mut bits = vec![false; ne];
    for (i, &c) in pivots.iter().enumerate() {
        bits[c] = rows[i].1;
    }
    Ok(bits
        .into_iter()
        .map(|b| if b { -1.0 } else { 1.0 })
        .collect())
}

/// `K(z, w)`: the Bloch symbol of the oriented template, with
/// `K[from][to] += s w z^d1 w^d2` and the antisymmetric partner divided by
/// the same phase.
pub(crate) fn fundamental(
    template: &Template,
    signs: &[f64],
    p: &ModelParams,
    z: Complex64,
    w: Complex64,
) -> SkewMatrix<Complex64> {
    let mut k = SkewMatrix::zeros(template.num_vertices());
    for (t, &s) in template.edges.iter().zip(signs) {
        let phase = z.powi(t.offset.0 as i32) * w.powi(t.offset.1 as i32);
        let x = s * t.weight(p);
        k.set_raw(t.from, t.to, k.get(t.from, t.to) + phase * x);
        k.set_raw(t.to, t.from, k.get(t.to, t.from) - x / phase);
    }
    k
}

impl KasteleynSystem {
    pub fn graph(&self) -> &DecoratedGraph {
        &self.graph
    }

    pub fn params(&self) -> &ModelParams {
        self.graph.params()
    }

    /// Orientation sign of each template edge.
    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Crossing-parity class of the covers in the image of the 1-2 model.
    pub fn image_class(&self) -> (bool, bool) {
        self.class
    }

    /// Coefficients `(-1)^(theta i + tau j)` of the four Pfaffians, in
    /// [`TWISTS`] order.
    pub fn class_coefficients(&self) -> [f64; 4] {
        let (i, j) = self.class;
        TWISTS.map(|(theta, tau)| if (theta && i) ^ (tau && j) { -1.0 } else { 1.0 })
    }

    /// Number of clockwise-oriented edges around each template face.
    pub fn clockwise_counts(&self) -> Vec<usize> {
        self.graph
            .template()
            .faces()
            .iter()
            .map(|face| {
                face.iter()
                    .filter(|&&(e, forward)| (self.signs[e] > 0.0) != forward)
                    .count()
            })
            .collect()
    }

    /// The 14x14 symbol `K(z, w)` at the system's weights.
    pub fn fundamental(&self, z: Complex64, w: Complex64) -> SkewMatrix<Complex64> {
        fundamental(self.graph.template(), &self.signs, self.params(), z, w)
    }

    pub fn fundamental_with(
        &self,
        p: &ModelParams,
        z: Complex64,
        w: Complex64,
    ) -> SkewMatrix<Complex64> {
        fundamental(self.graph.template(), &self.signs, p, z, w)
    }

    /// The oriented endpoints `(u, v)` of a decorated edge, so that the
    /// untwisted matrix has `K[u][v] = +weight`.
    pub fn oriented(&self, edge: usize) -> (usize, usize) {
        let e = self.graph.edge(edge);
        if self.signs[e.template] > 0.0 {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        }
    }

    /// `K^(theta, tau)` with some edge weights multiplied by given factors.
    pub fn torus_matrix_scaled(&self, twist: Twist, factors: &[(usize, f64)]) -> SkewMatrix<f64> {
        let mut k = SkewMatrix::zeros(self.graph.num_vertices());
        for e in self.graph.edges() {
            let mut x = self.signs[e.template] * e.weight;
            if (twist.0 && e.crosses_gx) ^ (twist.1 && e.crosses_gy) {
                x = -x;
            }
            k.add_pair(e.u, e.v, x);
        }
        for &(id, f) in factors {
            let e = self.graph.edge(id);
            let x = k.get(e.u, e.v);
            k.set(e.u, e.v, x * f);
        }
        k
    }

    pub fn torus_matrix(&self, twist: Twist) -> SkewMatrix<f64> {
        self.torus_matrix_scaled(twist, &[])
    }

    fn check_dense(&self) -> Result<()> {
        let n = self.graph.lattice().n();
        if n > MAX_DENSE_N {
            return Err(Error::Resource {
                what: "dense torus Pfaffian",
                n,
                max: MAX_DENSE_N,
            });
        }
        Ok(())
    }

    /// `(ln |Pf|, sign)` of the four twisted matrices, in [`TWISTS`] order.
    pub fn log_pfaffians(&self, factors: &[(usize, f64)]) -> Result<[(Option<f64>, f64); 4]> {
        self.check_dense()?;
        let mut out = [(None, 0.0); 4];
        for (slot, twist) in out.iter_mut().zip(TWISTS) {
            *slot = self.torus_matrix_scaled(twist, factors).log_pfaffian()?;
        }
        Ok(out)
    }

    /// `ln` of the signed class combination `sum c Pf`, returned as
    /// `(ln |sum|, sign)` relative to the largest term.
    fn log_combination(&self, factors: &[(usize, f64)]) -> Result<(f64, f64)> {
        let pfs = self.log_pfaffians(factors)?;
        let coeff = self.class_coefficients();
        let lmax = pfs
            .iter()
            .filter_map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for ((log, sign), c) in pfs.iter().zip(coeff) {
            if let Some(l) = log {
                s += c * sign * (l - lmax).exp();
            }
        }
        if !lmax.is_finite() || s == 0.0 {
            return Err(Error::DegenerateSum(0.0));
        }
        Ok((lmax + s.abs().ln(), s.signum()))
    }

    /// `ln Z_n`.
    pub fn ln_partition(&self) -> Result<f64> {
        Ok(self.log_combination(&[])?.0 - std::f64::consts::LN_2)
    }

    /// `Z_n = 1/2 |sum c Pf K^(theta, tau)|`: twice the weight of the image
    /// class, which is `1/4 |sum c Pf|`.
    pub fn partition(&self) -> Result<f64> {
        Ok(self.ln_partition()?.exp())
    }

    /// `E[prod over edges of (-1)^[edge present]]` within the image class:
    /// the ratio of class sums with the given edge weights negated.
    pub fn sign_expectation(&self, edges: &[usize]) -> Result<f64> {
        let factors: Vec<(usize, f64)> = edges.iter().map(|&e| (e, -1.0)).collect();
        let (num, s_num) = self.log_combination(&factors)?;
        let (den, s_den) = self.log_combination(&[])?;
        Ok(s_num * s_den * (num - den).exp())
    }

    /// `ln |Pf K^(theta, tau)|` from the Bloch factorisation
    /// `det K^(theta, tau) = prod det K(z, w)` over `z^n = (-1)^theta`,
    /// `w^n = (-1)^tau`; available at any size.
    pub fn ln_abs_pfaffian_fourier(&self, twist: Twist) -> f64 {
        let n = self.graph.lattice().n();
        let angle = |m: usize, t: bool| {
            std::f64::consts::PI * (2.0 * m as f64 + f64::from(u8::from(t))) / n as f64
        };
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                let z = Complex64::from_polar(1.0, angle(a, twist.0));
                let w = Complex64::from_polar(1.0, angle(b, twist.1));
                total += self.fundamental(z, w).determinant().norm().ln();
            }
        }
        0.5 * total
    }

    /// The twist whose Pfaffian has the largest modulus.
    pub fn dominant_twist(&self) -> Twist {
        TWISTS
            .into_iter()
            .map(|t| (t, self.ln_abs_pfaffian_fourier(t)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four twists")
            .0
    }
}

fn dense_system(n: usize, p: &ModelParams) -> Result<KasteleynSystem> {
    if n > MAX_DENSE_N {
        return Err(Error::Resource {
            what: "dense torus Pfaffian",
            n,
            max: MAX_DENSE_N,
        });
    }
    let lattice = build_torus(n)?;
    kasteleyn_orient(&build_decorated(&lattice, p)?)
}

/// `Z_n(a, b, c)` from four Pfaffians (`2 <= n <= 12`).
pub fn partition_via_pfaffian(n: usize, p: &ModelParams) -> Result<f64> {
    dense_system(n, p)?.partition()
}

pub fn ln_partition_via_pfaffian(n: usize, p: &ModelParams) -> Result<f64> {
    dense_system(n, p)?.ln_partition()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DimerCover, Gadget};
    use crate::model::enumerate_partition;
    use std::collections::HashMap;

    fn system(n: usize, p: &ModelParams) -> KasteleynSystem {
        let l = build_torus(n).unwrap();
        kasteleyn_orient(&DecoratedGraph::with_gadget(&l, p, &Gadget::triangle_chain()).unwrap())
            .unwrap()
    }

    #[test]
    fn every_face_is_clockwise_odd() {
        let sys = system(2, &ModelParams::new(1.0, 1.0, 1.0).unwrap());
        let counts = sys.clockwise_counts();
        assert_eq!(counts.len(), 7);
        assert!(counts.iter().all(|c| c % 2 == 1), "{counts:?}");
    }

    #[test]
    fn twist_negates_exactly_the_crossing_entries() {
        let sys = system(3, &ModelParams::new(1.3, 0.7, 1.1).unwrap());
        let k0 = sys.torus_matrix((false, false));
        let kx = sys.torus_matrix((true, false));
        for e in sys.graph().edges() {
            let (a, b) = (k0.get(e.u, e.v), kx.get(e.u, e.v));
            if e.crosses_gx {
                assert_eq!(a, -b);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn class_sums_match_enumerated_covers() {
        let p = ModelParams::new(1.3, 0.7, 1.1).unwrap();
        let sys = system(2, &p);
        let covers = sys.graph().enumerate_dimer_covers().unwrap();
        assert_eq!(covers.len(), 825);
        let mut classes: HashMap<(bool, bool), f64> = HashMap::new();
        for c in &covers {
            *classes.entry(c.crossing_parity(sys.graph())).or_default() += c.weight(sys.graph());
        }
        let pfs: Vec<f64> = TWISTS
            .iter()
            .map(|&t| sys.torus_matrix(t).pfaffian().unwrap())
            .collect();
        for (&(i, j), &z) in &classes {
            let comb: f64 = TWISTS
                .iter()
                .zip(&pfs)
                .map(|(&(th, ta), pf)| if (th && i) ^ (ta && j) { -pf } else { *pf })
                .sum();
            assert!((comb.abs() / 4.0 - z).abs() < 1e-9 * z, "class ({i}, {j})");
        }
        // the image class holds exactly the covers that lift
        let lifting: Vec<&DimerCover> = covers
            .iter()
            .filter(|c| sys.graph().dimer_to_config(c).is_some())
            .collect();
        assert!(lifting
            .iter()
            .all(|c| c.crossing_parity(sys.graph()) == sys.image_class()));
        let w: f64 = lifting.iter().map(|c| c.weight(sys.graph())).sum();
        assert!((2.0 * w - sys.partition().unwrap()).abs() < 1e-9 * w);
    }

    #[test]
    fn matches_enumeration_at_n2_and_n3() {
        for (n, p) in [
            (2, (1.0, 1.0, 1.0)),
            (2, (2.0, 1.0, 1.0)),
            (2, (1.3, 0.7, 1.1)),
            (3, (1.3, 0.7, 1.1)),
        ] {
            let p = ModelParams::new(p.0, p.1, p.2).unwrap();
            {
                let zp = partition_via_pfaffian(n, &p).unwrap();
                let ze = enumerate_partition(n, &p).unwrap();
                assert!((zp - ze).abs() < 1e-9 * ze, "n = {n}: {zp} vs {ze}");
            }
        }
    }

    #[test]
    fn fourier_modulus_matches_dense() {
        let sys = system(3, &ModelParams::new(1.3, 0.7, 1.1).unwrap());
        for t in TWISTS {
            let dense = sys.torus_matrix(t).log_pfaffian().unwrap().0.unwrap();
            assert!((dense - sys.ln_abs_pfaffian_fourier(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_size_cap() {
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            partition_via_pfaffian(13, &p),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(partition_via_pfaffian(1, &p), Err(Error::Size(1))));
    }
}
