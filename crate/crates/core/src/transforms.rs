//! The Ising-type model on the half-edge graph and the polygon model.
//!
//! With `s = a + b + c`,
//!
//! ```text
//!   A = (a - b - c)/s,  B = (b - a - c)/s,  C = (c - a - b)/s,
//!   eps_a^2 = BC/A,     eps_b^2 = AC/B,     eps_c^2 = AB/C.
//! ```
//!
//! Summing the vertex spin out of the three half-edge factors at `v` gives
//! `2 (1 + eps_b eps_c s_b s_c + eps_a eps_c s_a s_c + eps_a eps_b s_a s_b)`,
//! which reproduces the 1-2 weights only if `eps_b eps_c = A`,
//! `eps_a eps_c = B` and `eps_a eps_b = C`. Taking the principal root for
//! `eps_a` and `eps_b = C / eps_a`, `eps_c = B / eps_a` satisfies all three;
//! independent principal roots do not when the triple is not acute.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{build_torus, EdgeKind, TorusLattice};
use crate::model::{exact_correlation, ModelParams};
use crate::sum::CompensatedComplex;

const DEGENERATE: f64 = 1e-10;
const IMAG_TOLERANCE: f64 = 1e-9;
/// Exhaustive sums here are capped at `n = 2`.
const MAX_N: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `eps_a, eps_b, eps_c` as `(re, im)`.
    #[serde(serialize_with = "serialize_eps")]
    pub eps: [Complex64; 3],
    pub acute: bool,
}

fn serialize_eps<S: serde::Serializer>(
    eps: &[Complex64; 3],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for z in eps {
        seq.serialize_element(&(z.re, z.im))?;
    }
    seq.end()
}

impl Couplings {
    /// Couplings for `p`; refuses `|A|`, `|B|` or `|C|` below `1e-10`.
    pub fn derive(p: &ModelParams) -> Result<Couplings> {
        let [a, b, c] = p.as_array();
        let s = a + b + c;
        let (ca, cb, cc) = ((a - b - c) / s, (b - a - c) / s, (c - a - b) / s);
        if ca.abs() < DEGENERATE || cb.abs() < DEGENERATE || cc.abs() < DEGENERATE {
            return Err(Error::DegenerateCoupling(ca, cb, cc));
        }
        let eps_a = Complex64::new(cb * cc / ca, 0.0).sqrt();
        let eps = [eps_a, cc / eps_a, cb / eps_a];
        let acute = a * a < b * b + c * c && b * b < a * a + c * c && c * c < a * a + b * b;
        Ok(Couplings {
            a: ca,
            b: cb,
            c: cc,
            eps,
            acute,
        })
    }

    pub fn eps(&self, kind: EdgeKind) -> Complex64 {
        self.eps[kind.index()]
    }

    pub fn eps_squared(&self, kind: EdgeKind) -> Complex64 {
        self.eps(kind) * self.eps(kind)
    }
}

/// Spins on midpoints (one per base edge) and on base vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinPair {
    pub edge: Vec<i8>,
    pub vertex: Vec<i8>,
}

impl SpinPair {
    pub fn new(lattice: &TorusLattice, edge: Vec<i8>, vertex: Vec<i8>) -> Result<SpinPair> {
        if edge.len() != lattice.num_edges() || vertex.len() != lattice.num_vertices() {
            return Err(Error::Shape(format!(
                "spin pair sizes ({}, {}) do not match ({}, {})",
                edge.len(),
                vertex.len(),
                lattice.num_edges(),
                lattice.num_vertices()
            )));
        }
        Ok(SpinPair { edge, vertex })
    }
}

/// `i`-th spin vector in `{-1, +1}^len`, bit `j` set meaning `+1`.
fn spins(code: u64, len: usize) -> Vec<i8> {
    (0..len)
        .map(|j| if code >> j & 1 == 1 { 1 } else { -1 })
        .collect()
}

fn check_n(lattice: &TorusLattice) -> Result<()> {
    if lattice.n() > MAX_N {
        return Err(Error::Resource {
            what: "exhaustive Ising/polygon sum",
            n: lattice.n(),
            max: MAX_N,
        });
    }
    Ok(())
}

/// `prod_v prod_s (1 + eps_s sigma_v sigma_(v, s))`.
pub fn ising_weight(lattice: &TorusLattice, sp: &SpinPair, cp: &Couplings) -> Complex64 {
    let mut w = Complex64::new(1.0, 0.0);
    for v in 0..lattice.num_vertices() {
        for (kind, e) in EdgeKind::ALL.into_iter().zip(lattice.incident(v)) {
            w *= 1.0 + cp.eps(kind) * f64::from(sp.vertex[v] * sp.edge[e]);
        }
    }
    w
}

/// `2^|E| prod_(g = <u, v>) (1 + eps_g^2 sigma_u sigma_v)`.
pub fn marginal_on_vertices(lattice: &TorusLattice, vertex: &[i8], cp: &Couplings) -> Complex64 {
    let mut w = Complex64::new(2f64.powi(lattice.num_edges() as i32), 0.0);
    for g in lattice.edges() {
        w *= 1.0 + cp.eps_squared(g.kind) * f64::from(vertex[g.white] * vertex[g.black]);
    }
    w
}

/// `prod_v (1 + A s_b s_c + B s_a s_c + C s_a s_b)`, proportional to the
/// 1-2 weight of the configuration read off the midpoint spins. The sum of
/// [`ising_weight`] over vertex spins is `2^|V|` times this.
pub fn marginal_on_midpoints(lattice: &TorusLattice, edge: &[i8], cp: &Couplings) -> f64 {
    (0..lattice.num_vertices())
        .map(|v| {
            let [ea, eb, ec] = lattice.incident(v);
            let (sa, sb, sc) = (
                f64::from(edge[ea]),
                f64::from(edge[eb]),
                f64::from(edge[ec]),
            );
            1.0 + cp.a * sb * sc + cp.b * sa * sc + cp.c * sa * sb
        })
        .product()
}

/// `sum over midpoint spins` of [`ising_weight`] for fixed vertex spins.
pub fn sum_over_midpoints(
    lattice: &TorusLattice,
    vertex: &[i8],
    cp: &Couplings,
) -> Result<Complex64> {
    check_n(lattice)?;
    let m = lattice.num_edges();
    let mut total = CompensatedComplex::default();
    for code in 0..1u64 << m {
        let sp = SpinPair::new(lattice, spins(code, m), vertex.to_vec())?;
        total.add(ising_weight(lattice, &sp, cp));
    }
    Ok(total.value())
}

/// `sum over vertex spins` of [`ising_weight`] for fixed midpoint spins.
pub fn sum_over_vertices(lattice: &TorusLattice, edge: &[i8], cp: &Couplings) -> Result<Complex64> {
    check_n(lattice)?;
    let m = lattice.num_vertices();
    let mut total = CompensatedComplex::default();
    for code in 0..1u64 << m {
        let sp = SpinPair::new(lattice, edge.to_vec(), spins(code, m))?;
        total.add(ising_weight(lattice, &sp, cp));
    }
    Ok(total.value())
}

fn real_ratio(num: Complex64, den: Complex64, den_scale: f64) -> Result<f64> {
    if den.norm() < 1e-12 * den_scale.max(1.0) {
        return Err(Error::DegenerateSum(den.norm()));
    }
    let r = num / den;
    if r.im.abs() > IMAG_TOLERANCE {
        return Err(Error::ImaginaryResidue(r.im.abs()));
    }
    Ok(r.re)
}

fn check_edges(lattice: &TorusLattice, e: usize, f: usize) -> Result<()> {
    for g in [e, f] {
        if g >= lattice.num_edges() {
            return Err(Error::Params(format!("edge {g} out of range")));
        }
    }
    Ok(())
}

/// `<sigma_e sigma_f>_n` as a ratio of sums over vertex spins of the
/// marginal `w(sigma^v)`, weighted by
/// `D = eps_e (s_u + s_v) eps_f (s_x + s_y) / ((1 + eps_e^2)(1 + eps_f^2))`.
/// `D` assumes `e != f`; the diagonal is 1.
pub fn correlation_ising(n: usize, p: &ModelParams, e: usize, f: usize) -> Result<f64> {
    let lattice = build_torus(n)?;
    check_n(&lattice)?;
    check_edges(&lattice, e, f)?;
    let cp = Couplings::derive(p)?;
    if e == f {
        return Ok(1.0);
    }
    let (ge, gf) = (lattice.edge(e), lattice.edge(f));
    let (eps_e, eps_f) = (cp.eps(ge.kind), cp.eps(gf.kind));
    let norm = (1.0 + eps_e * eps_e) * (1.0 + eps_f * eps_f);
    let m = lattice.num_vertices();
    let mut num = CompensatedComplex::default();
    let mut den = CompensatedComplex::default();
    let mut scale = 0.0;
    for code in 0..1u64 << m {
        let s = spins(code, m);
        let w = marginal_on_vertices(&lattice, &s, &cp);
        let d = eps_e
            * f64::from(s[ge.white] + s[ge.black])
            * eps_f
            * f64::from(s[gf.white] + s[gf.black])
            / norm;
        num.add(d * w);
        den.add(w);
        scale += w.norm();
    }
    real_ratio(num.value(), den.value(), scale)
}

/// Sum of `prod eps_s^2` over even subgraphs of `H_n`.
pub fn polygon_partition(n: usize, cp: &Couplings) -> Result<Complex64> {
    Ok(polygon_sums(n, cp, None)?.0)
}

/// `M_n(e, f) = Z_(e <-> f) / Z_poly`, over half-edge configurations that
/// are even everywhere except at the midpoints of `e` and `f`, which meet
/// exactly one open half-edge. `M_n(e, e) = 1`.
pub fn polygon_twopoint(n: usize, cp: &Couplings, e: usize, f: usize) -> Result<f64> {
    if e == f {
        let lattice = build_torus(n)?;
        check_n(&lattice)?;
        check_edges(&lattice, e, f)?;
        return Ok(1.0);
    }
    let (z, z_ef, scale) = polygon_sums(n, cp, Some((e, f)))?;
    real_ratio(z_ef, z, scale)
}

/// `(Z_poly, Z_(e <-> f), sum |w|)`. Unmarked edges are open or closed as a
/// whole; each marked edge has exactly one open half, on either side.
fn polygon_sums(
    n: usize,
    cp: &Couplings,
    marked: Option<(usize, usize)>,
) -> Result<(Complex64, Complex64, f64)> {
    let lattice = build_torus(n)?;
    check_n(&lattice)?;
    if let Some((e, f)) = marked {
        check_edges(&lattice, e, f)?;
    }
    let m = lattice.num_edges();
    let nv = lattice.num_vertices();
    let mut z = CompensatedComplex::default();
    let mut scale = 0.0;
    let mut degree = vec![0u8; nv];
    for code in 0..1u64 << m {
        degree.iter_mut().for_each(|d| *d = 0);
        let mut w = Complex64::new(1.0, 0.0);
        for (g, edge) in lattice.edges().iter().enumerate() {
            if code >> g & 1 == 1 {
                degree[edge.white] += 1;
                degree[edge.black] += 1;
                w *= cp.eps_squared(edge.kind);
            }
        }
        if degree.iter().all(|d| d % 2 == 0) {
            z.add(w);
            scale += w.norm();
        }
    }
    let mut z_ef = CompensatedComplex::default();
    if let Some((e, f)) = marked {
        let free: Vec<usize> = (0..m).filter(|&g| g != e && g != f).collect();
        for code in 0..1u64 << free.len() {
            for halves in 0..4u8 {
                degree.iter_mut().for_each(|d| *d = 0);
                let mut w = Complex64::new(1.0, 0.0);
                for (j, &g) in free.iter().enumerate() {
                    if code >> j & 1 == 1 {
                        let edge = lattice.edge(g);
                        degree[edge.white] += 1;
                        degree[edge.black] += 1;
                        w *= cp.eps_squared(edge.kind);
                    }
                }
                for (bit, g) in [e, f].into_iter().enumerate() {
                    let edge = lattice.edge(g);
                    let end = if halves >> bit & 1 == 0 {
                        edge.white
                    } else {
                        edge.black
                    };
                    degree[end] += 1;
                    w *= cp.eps(edge.kind);
                }
                if degree.iter().all(|d| d % 2 == 0) {
                    z_ef.add(w);
                }
            }
        }
    }
    Ok((z.value(), z_ef.value(), scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrosscheckPair {
    pub e: usize,
    pub f: usize,
    pub exact: f64,
    pub ising: f64,
    pub polygon: f64,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub params: ModelParams,
    pub pairs: Vec<CrosscheckPair>,
}

impl CrosscheckReport {
    pub fn max_deviation(&self) -> f64 {
        self.pairs.iter().fold(0.0, |m, p| m.max(p.max_abs_diff))
    }
}

/// Enumeration, Ising and polygon correlations for every pair of distinct
/// NW/SE edges at `n = 2`.
pub fn crosscheck(p: &ModelParams) -> Result<CrosscheckReport> {
    let cp = Couplings::derive(p)?;
    let lattice = build_torus(2)?;
    let b_edges: Vec<usize> = (0..lattice.num_edges())
        .filter(|&g| lattice.edge(g).kind == EdgeKind::B)
        .collect();
    let mut pairs = Vec::new();
    for (i, &e) in b_edges.iter().enumerate() {
        for &f in &b_edges[i + 1..] {
            let exact = exact_correlation(2, p, e, f)?;
            let ising = correlation_ising(2, p, e, f)?;
            let polygon = polygon_twopoint(2, &cp, e, f)?;
            pairs.push(CrosscheckPair {
                e,
                f,
                exact,
                ising,
                polygon,
                max_abs_diff: (exact - ising).abs().max((exact - polygon).abs()),
            });
        }
    }
    Ok(CrosscheckReport { params: *p, pairs })
}
