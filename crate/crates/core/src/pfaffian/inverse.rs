//! Entries of `K^-1` as Fourier coefficients of the inverse symbol.
//!
//! For vertex `i` of cell `x` and vertex `j` of cell `x + d`,
//!
//! ```text
//!   K^-1 = (1 / N^2) sum_(z, w) [K(z, w)^-1]_(i, j) z^-d1 w^-d2
//! ```
//!
//! over an `N x N` grid on the unit torus. With `N = n` and `z^n = (-1)^theta`,
//! `w^n = (-1)^tau` this is exactly the inverse of the twisted torus matrix
//! `K^(theta, tau)`; as `N` grows it is the trapezoidal rule for the
//! infinite-volume inverse. The symbol is inverted through the Schur
//! complement on the two base vertices, since the gadget block carries no
//! phases and is inverted once.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{KasteleynSystem, SkewMatrix, Twist};
use crate::error::{Error, Result};
use crate::lattice::{EdgeClass, LOCAL_VERTICES};

/// Number of base vertices per cell; they come first in the local order.
const NB: usize = 2;
const NG: usize = LOCAL_VERTICES - NB;

/// Default starting and largest grid for adaptive quadrature.
pub const GRID_START: usize = 32;
pub const GRID_MAX: usize = 1024;

/// A decorated vertex in the universal cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CoverVertex {
    pub local: usize,
    pub cell: (i64, i64),
}

/// Placement of the quadrature nodes: `theta_m = 2 pi m / N` or
/// `2 pi (m + 1/2) / N`. The periodic grid contains `(1, 1)`, where the
/// symbol is singular on the critical surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Grid {
    Periodic,
    HalfOffset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureReport {
    /// Grid size per axis (the torus size in finite mode).
    pub size: usize,
    /// Largest entry change in the final doubling (0 in finite mode).
    pub last_change: f64,
    pub converged: bool,
}

/// The pieces of `K(z, w)^-1` at one grid point.
struct SymbolInverse {
    /// `S^-1`, with `S = -K_bg G K_gb`.
    s_inv: [[Complex64; NB]; NB],
    /// `S^-1 K_bg G`.
    sa: [[Complex64; NG]; NB],
    /// `G K_gb S^-1`.
    bs: [[Complex64; NB]; NG],
    /// `K_bg G`.
    a: [[Complex64; NG]; NB],
}

/// Phase-carrying edges between gadget and base vertices, with the constant
/// inverse of the gadget block.
struct Symbol {
    /// `(gadget index, base index, offset, oriented weight)`: contributes
    /// `x z^d` at `K[g][b]` and `-x z^-d` at `K[b][g]`.
    links: Vec<(usize, usize, (i64, i64), f64)>,
    g: [[Complex64; NG]; NG],
    scale: f64,
}

impl Symbol {
    fn new(sys: &KasteleynSystem) -> Result<Symbol> {
        let template = sys.graph().template();
        let p = sys.params();
        let mut links = Vec::new();
        let mut kgg = DMatrix::<f64>::zeros(NG, NG);
        for (t, &s) in template.edges.iter().zip(sys.signs()) {
            let x = s * t.weight(p);
            match t.class {
                EdgeClass::Bisector(_) => {
                    if t.from < NB || t.to >= NB {
                        return Err(Error::Construction(
                            "bisector does not join gadget to base".into(),
                        ));
                    }
                    links.push((t.from - NB, t.to, t.offset, x));
                }
                EdgeClass::Internal => {
                    if t.offset != (0, 0) || t.from < NB || t.to < NB {
                        return Err(Error::Construction("gadget edge leaves its face".into()));
                    }
                    kgg[(t.from - NB, t.to - NB)] += x;
                    kgg[(t.to - NB, t.from - NB)] -= x;
                }
            }
        }
        let inv = kgg
            .try_inverse()
            .ok_or_else(|| Error::Construction("gadget block is singular".into()))?;
        let mut g = [[Complex64::new(0.0, 0.0); NG]; NG];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = Complex64::new(inv[(i, j)], 0.0);
            }
        }
        let sum: f64 = p.as_array().iter().sum();
        Ok(Symbol {
            links,
            g,
            scale: sum.powi(4),
        })
    }

    fn invert(&self, z: Complex64, w: Complex64) -> Option<SymbolInverse> {
        let zero = Complex64::new(0.0, 0.0);
        let mut kbg = [[zero; NG]; NB];
        let mut kgb = [[zero; NB]; NG];
        for &(g, b, (d1, d2), x) in &self.links {
            let phase = z.powi(d1 as i32) * w.powi(d2 as i32);
            kgb[g][b] += phase * x;
            kbg[b][g] -= x / phase;
        }
        let mut a = [[zero; NG]; NB];
        for b in 0..NB {
            for j in 0..NG {
                let mut s = zero;
                for k in 0..NG {
                    s += kbg[b][k] * self.g[k][j];
                }
                a[b][j] = s;
            }
        }
        let mut s = [[zero; NB]; NB];
        for i in 0..NB {
            for j in 0..NB {
                let mut acc = zero;
                for k in 0..NG {
                    acc -= a[i][k] * kgb[k][j];
                }
                s[i][j] = acc;
            }
        }
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        if det.norm() < 1e-13 * self.scale {
            return None;
        }
        let s_inv = [
            [s[1][1] / det, -s[0][1] / det],
            [-s[1][0] / det, s[0][0] / det],
        ];
        let mut gkgb = [[zero; NB]; NG];
        for i in 0..NG {
            for j in 0..NB {
                let mut acc = zero;
                for k in 0..NG {
                    acc += self.g[i][k] * kgb[k][j];
                }
                gkgb[i][j] = acc;
            }
        }
        let mut sa = [[zero; NG]; NB];
        for i in 0..NB {
            for j in 0..NG {
                sa[i][j] = s_inv[i][0] * a[0][j] + s_inv[i][1] * a[1][j];
            }
        }
        let mut bs = [[zero; NB]; NG];
        for i in 0..NG {
            for j in 0..NB {
                bs[i][j] = gkgb[i][0] * s_inv[0][j] + gkgb[i][1] * s_inv[1][j];
            }
        }
        Some(SymbolInverse { s_inv, sa, bs, a })
    }

    fn entry(&self, inv: &SymbolInverse, i: usize, j: usize) -> Complex64 {
        match (i < NB, j < NB) {
            (true, true) => inv.s_inv[i][j],
            (true, false) => -inv.sa[i][j - NB],
            (false, true) => -inv.bs[i - NB][j],
            (false, false) => {
                let (i, j) = (i - NB, j - NB);
                self.g[i][j] + inv.bs[i][0] * inv.a[0][j] + inv.bs[i][1] * inv.a[1][j]
            }
        }
    }
}

/// `K^-1` entries for `(i, j, d)` requests on an `N x N` grid whose nodes
/// are shifted by `shift` grid spacings. Rows of the grid are summed in
/// parallel and combined in order.
fn fourier_entries(
    symbol: &Symbol,
    size: usize,
    shift: (f64, f64),
    requests: &[(usize, usize, (i64, i64))],
) -> Result<Vec<Complex64>> {
    let tau = std::f64::consts::TAU;
    let alpha: Vec<f64> = (0..size)
        .map(|a| tau * (a as f64 + shift.0) / size as f64)
        .collect();
    let beta: Vec<f64> = (0..size)
        .map(|b| tau * (b as f64 + shift.1) / size as f64)
        .collect();
    // phase tables per distinct offset component
    let mut d1s: Vec<i64> = requests.iter().map(|r| r.2 .0).collect();
    let mut d2s: Vec<i64> = requests.iter().map(|r| r.2 .1).collect();
    d1s.sort_unstable();
    d1s.dedup();
    d2s.sort_unstable();
    d2s.dedup();
    let table = |ds: &[i64], angles: &[f64]| -> Vec<Vec<Complex64>> {
        ds.iter()
            .map(|&d| {
                angles
                    .iter()
                    .map(|&t| Complex64::from_polar(1.0, -t * d as f64))
                    .collect()
            })
            .collect()
    };
    let ph1 = table(&d1s, &alpha);
    let ph2 = table(&d2s, &beta);
    let index: Vec<(usize, usize)> = requests
        .iter()
        .map(|r| {
            (
                d1s.binary_search(&r.2 .0).expect("listed"),
                d2s.binary_search(&r.2 .1).expect("listed"),
            )
        })
        .collect();
    let w_nodes: Vec<Complex64> = beta
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let rows: Vec<Result<Vec<Complex64>>> = (0..size)
        .into_par_iter()
        .map(|a| {
            let z = Complex64::from_polar(1.0, alpha[a]);
            let mut acc = vec![Complex64::new(0.0, 0.0); requests.len()];
            for (b, &w) in w_nodes.iter().enumerate() {
                let inv = symbol
                    .invert(z, w)
                    .ok_or(Error::QuadratureSingularity(alpha[a], beta[b]))?;
                for ((slot, &(i, j, _)), &(k1, k2)) in acc.iter_mut().zip(requests).zip(&index) {
                    *slot += symbol.entry(&inv, i, j) * (ph1[k1][a] * ph2[k2][b]);
                }
            }
            Ok(acc)
        })
        .collect();
    let norm = 1.0 / (size * size) as f64;
    let mut total = vec![Complex64::new(0.0, 0.0); requests.len()];
    for row in rows {
        for (t, x) in total.iter_mut().zip(row?) {
            *t += x;
        }
    }
    Ok(total.into_iter().map(|x| x * norm).collect())
}

/// Which inverse to use: the twisted finite torus of the system's size, or
/// the infinite-volume limit by adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Volume {
    Finite(Twist),
    Infinite(Grid),
}

type Request = (usize, usize, (i64, i64));

/// Distinct `(i, j, d)` keys for all ordered vertex pairs, and the key index
/// of each pair. Translation invariance makes many pairs share a key.
fn requests_for(vertices: &[CoverVertex]) -> (Vec<Request>, Vec<usize>) {
    let mut keys: HashMap<Request, usize> = HashMap::new();
    let mut unique = Vec::new();
    let mut slots = Vec::with_capacity(vertices.len() * vertices.len());
    for u in vertices {
        for v in vertices {
            let key = (u.local, v.local, (v.cell.0 - u.cell.0, v.cell.1 - u.cell.1));
            let id = *keys.entry(key).or_insert_with(|| {
                unique.push(key);
                unique.len() - 1
            });
            slots.push(id);
        }
    }
    (unique, slots)
}

fn expand(values: &[Complex64], slots: &[usize]) -> Vec<Complex64> {
    slots.iter().map(|&i| values[i]).collect()
}

fn assemble(m: usize, values: &[Complex64]) -> Result<SkewMatrix<Complex64>> {
    let full = SkewMatrix::from_rows(
        &values
            .chunks(m.max(1))
            .map(<[_]>::to_vec)
            .collect::<Vec<_>>(),
    )?;
    let scale = values.iter().fold(1.0f64, |s, x| s.max(x.norm()));
    let defect = full.skew_defect();
    if defect > 1e-10 * scale {
        return Err(Error::Symmetry(defect));
    }
    Ok(SkewMatrix::from_upper(m, |i, j| {
        0.5 * (full.get(i, j) - full.get(j, i))
    }))
}

/// The submatrix of `K^-1` on the given cover vertices, in order.
pub fn inverse_submatrix(
    sys: &KasteleynSystem,
    vertices: &[CoverVertex],
    volume: Volume,
) -> Result<(SkewMatrix<Complex64>, QuadratureReport)> {
    let symbol = Symbol::new(sys)?;
    let (requests, slots) = requests_for(vertices);
    let m = vertices.len();
    if m == 0 {
        return Ok((
            SkewMatrix::zeros(0),
            QuadratureReport {
                size: 0,
                last_change: 0.0,
                converged: true,
            },
        ));
    }
    match volume {
        Volume::Finite((theta, tau)) => {
            let n = sys.graph().lattice().n();
            let shift = (
                0.5 * f64::from(u8::from(theta)),
                0.5 * f64::from(u8::from(tau)),
            );
            let values = fourier_entries(&symbol, n, shift, &requests)?;
            let report = QuadratureReport {
                size: n,
                last_change: 0.0,
                converged: true,
            };
            Ok((assemble(m, &expand(&values, &slots))?, report))
        }
        Volume::Infinite(grid) => {
            let shift = match grid {
                Grid::Periodic => (0.0, 0.0),
                Grid::HalfOffset => (0.5, 0.5),
            };
            let mut size = GRID_START;
            let mut prev = fourier_entries(&symbol, size, shift, &requests)?;
            loop {
                let next_size = 2 * size;
                let next = fourier_entries(&symbol, next_size, shift, &requests)?;
                let change = prev
                    .iter()
                    .zip(&next)
                    .fold(0.0f64, |s, (a, b)| s.max((a - b).norm()));
                size = next_size;
                prev = next;
                if change < 1e-9 || size >= GRID_MAX {
                    let report = QuadratureReport {
                        size,
                        last_change: change,
                        converged: change < 1e-9,
                    };
                    return Ok((assemble(m, &expand(&prev, &slots))?, report));
                }
            }
        }
    }
}

/// Infinite-volume entries at a fixed grid size, without adaptation.
pub fn inverse_submatrix_fixed(
    sys: &KasteleynSystem,
    vertices: &[CoverVertex],
    size: usize,
    grid: Grid,
) -> Result<SkewMatrix<Complex64>> {
    let symbol = Symbol::new(sys)?;
    let shift = match grid {
        Grid::Periodic => (0.0, 0.0),
        Grid::HalfOffset => (0.5, 0.5),
    };
    let (requests, slots) = requests_for(vertices);
    let values = fourier_entries(&symbol, size, shift, &requests)?;
    assemble(vertices.len(), &expand(&values, &slots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_decorated, build_torus};
    use crate::model::ModelParams;
    use crate::pfaffian::kasteleyn_orient;

    fn system(n: usize, p: (f64, f64, f64)) -> KasteleynSystem {
        let p = ModelParams::new(p.0, p.1, p.2).unwrap();
        let l = build_torus(n).unwrap();
        kasteleyn_orient(&build_decorated(&l, &p).unwrap()).unwrap()
    }

    #[test]
    fn symbol_inverse_matches_dense_inverse() {
        let sys = system(2, (1.3, 0.7, 1.1));
        let symbol = Symbol::new(&sys).unwrap();
        let (z, w) = (
            Complex64::from_polar(1.0, 0.7),
            Complex64::from_polar(1.0, -1.9),
        );
        let k = sys.fundamental(z, w);
        let dense = DMatrix::from_fn(14, 14, |i, j| k.get(i, j))
            .try_inverse()
            .unwrap();
        let inv = symbol.invert(z, w).unwrap();
        for i in 0..14 {
            for j in 0..14 {
                assert!((symbol.entry(&inv, i, j) - dense[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn finite_mode_is_the_torus_inverse() {
        let sys = system(3, (1.3, 0.7, 1.1));
        for twist in crate::pfaffian::TWISTS {
            let k = sys.torus_matrix(twist);
            let m = k.dim();
            let dense = DMatrix::from_fn(m, m, |i, j| k.get(i, j))
                .try_inverse()
                .unwrap();
            let vertices: Vec<CoverVertex> = [(0, (0, 0)), (5, (1, 2)), (1, (2, 1)), (13, (0, 2))]
                .iter()
                .map(|&(local, cell)| CoverVertex { local, cell })
                .collect();
            let (sub, _) = inverse_submatrix(&sys, &vertices, Volume::Finite(twist)).unwrap();
            for (r, u) in vertices.iter().enumerate() {
                for (s, v) in vertices.iter().enumerate() {
                    let iu = 14 * (u.cell.1 as usize * 3 + u.cell.0 as usize) + u.local;
                    let iv = 14 * (v.cell.1 as usize * 3 + v.cell.0 as usize) + v.local;
                    let got = sub.get(r, s);
                    assert!(
                        (got.re - dense[(iu, iv)]).abs() < 1e-10,
                        "{twist:?} {r} {s}"
                    );
                    assert!(got.im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn critical_periodic_grid_is_singular() {
        let sys = system(2, (4.0, 1.0, 1.0));
        let v = [
            CoverVertex {
                local: 0,
                cell: (0, 0),
            },
            CoverVertex {
                local: 1,
                cell: (0, 0),
            },
        ];
        assert!(matches!(
            inverse_submatrix(&sys, &v, Volume::Infinite(Grid::Periodic)),
            Err(Error::QuadratureSingularity(..))
        ));
        assert!(inverse_submatrix_fixed(&sys, &v, 64, Grid::HalfOffset).is_ok());
    }

    #[test]
    fn self_convergence_off_criticality() {
        let sys = system(2, (2.0, 1.0, 1.0));
        let v: Vec<CoverVertex> = (0..14)
            .map(|local| CoverVertex {
                local,
                cell: (0, 0),
            })
            .collect();
        let a = inverse_submatrix_fixed(&sys, &v, 64, Grid::Periodic).unwrap();
        let b = inverse_submatrix_fixed(&sys, &v, 128, Grid::Periodic).unwrap();
        for i in 0..14 {
            for j in 0..14 {
                assert!((a.get(i, j) - b.get(i, j)).norm() < 1e-10);
            }
        }
        let (_, report) = inverse_submatrix(&sys, &v, Volume::Infinite(Grid::Periodic)).unwrap();
        assert!(report.converged);
    }
}
