//! Two-edge correlations and path probabilities from `K^-1`.
//!
//! Along a diagonal path passing the bisectors `(u_j, v_j)`, each oriented
//! so that `K[u_j][v_j] = +c`,
//!
//! ```text
//!   <sigma_e sigma_f> = Pf[Y + 2c K^-1_pi]
//! ```
//!
//! where `K^-1_pi` is `K^-1` restricted to `u_1, v_1, u_2, v_2, ...`.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::Serialize;

use super::{
    inverse_submatrix, CoverVertex, Grid, KasteleynSystem, QuadratureReport, SkewMatrix, Volume,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_decorated, build_torus, diagonal_path, trace_path, EdgeKind, PassedVertex,
};
use crate::model::ModelParams;

/// Distance below which correlations are refused.
pub const NEAR_CRITICAL_REFUSE: f64 = 1e-6;
/// Distance below which a warning is attached.
pub const NEAR_CRITICAL_WARN: f64 = 1e-3;

const IMAG_TOLERANCE: f64 = 1e-9;
/// Slope of `ln |value|` per unit separation above which a tail counts as a
/// plateau.
const PLATEAU_SLOPE: f64 = -0.02;

/// `|sqrt(s1) - sqrt(s2) - sqrt(s3)|` with the weights sorted descending:
/// the smallest of the four discriminants in absolute value.
pub fn criticality_margin(p: &ModelParams) -> f64 {
    let mut s = p.as_array().map(f64::sqrt);
    s.sort_by(|x, y| y.total_cmp(x));
    (s[0] - s[1] - s[2]).abs()
}

/// Refuses parameters on the critical surface; returns a warning inside the
/// warning band.
fn critical_check(p: &ModelParams) -> Result<Option<String>> {
    let margin = criticality_margin(p);
    if margin < NEAR_CRITICAL_REFUSE {
        return Err(Error::NearCritical {
            a: p.a(),
            b: p.b(),
            c: p.c(),
            margin,
        });
    }
    Ok((margin < NEAR_CRITICAL_WARN).then(|| {
        format!(
            "parameters lie within {margin:.3e} of the critical surface sqrt(a) = sqrt(b) + sqrt(c); \
             quadrature accuracy is reduced"
        )
    }))
}

/// Endpoints of a passed bisector in the universal cover, ordered so that
/// the untwisted matrix has `K[first][second] = +weight`.
fn oriented_pair(sys: &KasteleynSystem, pv: &PassedVertex) -> (CoverVertex, CoverVertex) {
    let d = sys.graph();
    let edge = d.edge(pv.edge(d));
    let t = &d.template().edges[edge.template];
    let base = CoverVertex {
        local: t.to,
        cell: pv.cell,
    };
    let terminal = CoverVertex {
        local: t.from,
        cell: (pv.cell.0 - t.offset.0, pv.cell.1 - t.offset.1),
    };
    if sys.signs()[edge.template] > 0.0 {
        (terminal, base)
    } else {
        (base, terminal)
    }
}

fn pair_vertices(sys: &KasteleynSystem, passed: &[PassedVertex]) -> Vec<CoverVertex> {
    passed
        .iter()
        .flat_map(|pv| {
            let (u, v) = oriented_pair(sys, pv);
            [u, v]
        })
        .collect()
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOLERANCE {
        return Err(Error::ImaginaryResidue(z.im.abs()));
    }
    Ok(z.re)
}

/// `Pf[Y + 2c G]` on the leading `4k` rows and columns of `g`.
fn block_pfaffian(g: &SkewMatrix<Complex64>, k: usize, c: f64) -> Result<f64> {
    let m = 4 * k;
    let idx: Vec<usize> = (0..m).collect();
    let mut a = g.submatrix(&idx);
    for i in 0..m {
        for j in i + 1..m {
            let y = if j == i + 1 && i % 2 == 0 { 1.0 } else { 0.0 };
            a.set(i, j, Complex64::new(y, 0.0) + 2.0 * c * g.get(i, j));
        }
    }
    real_part(a.pfaffian()?)
}

/// `<sigma_e sigma_f>` for two NW/SE edges on a common diagonal.
///
/// In infinite volume this is the limit correlation and is refused near the
/// critical surface. In finite volume `K^-1` is the inverse of the given
/// twisted torus matrix, one of the four terms of the exact torus expansion.
pub fn correlation_pf(sys: &KasteleynSystem, e: usize, f: usize, volume: Volume) -> Result<f64> {
    if matches!(volume, Volume::Infinite(_)) {
        critical_check(sys.params())?;
    }
    let path = diagonal_path(sys.graph().lattice(), e, f)?;
    if path.k() == 0 {
        return Ok(1.0);
    }
    let vertices = pair_vertices(sys, &path.passed);
    let (g, _) = inverse_submatrix(sys, &vertices, volume)?;
    block_pfaffian(&g, path.k(), sys.params().c())
}

/// Shortest sequence of base edges from `e` to `f`, consecutive edges
/// sharing a vertex. Shortest paths never revisit a vertex.
fn edge_path(sys: &KasteleynSystem, e: usize, f: usize) -> Vec<usize> {
    let l = sys.graph().lattice();
    let mut prev = vec![usize::MAX; l.num_edges()];
    prev[e] = e;
    let mut queue = VecDeque::from([e]);
    while let Some(g) = queue.pop_front() {
        if g == f {
            break;
        }
        let edge = l.edge(g);
        for v in [edge.white, edge.black] {
            for h in l.incident(v) {
                if prev[h] == usize::MAX {
                    prev[h] = g;
                    queue.push_back(h);
                }
            }
        }
    }
    let mut path = vec![f];
    while *path.last().expect("nonempty") != e {
        path.push(prev[*path.last().expect("nonempty")]);
    }
    path.reverse();
    path
}

/// Exact `<sigma_e sigma_f>_n` on the finite torus for any two edges.
///
/// Along a path from `e` to `f`, `sigma_g sigma_h = 2 [bisector present] - 1`
/// at each interior vertex, so the correlation is `(-1)^l` times the
/// expectation of `(-1)^(present bisectors)`, a ratio of four-Pfaffian sums.
pub fn correlation_exact_torus(sys: &KasteleynSystem, e: usize, f: usize) -> Result<f64> {
    let l = sys.graph().lattice();
    for g in [e, f] {
        if g >= l.num_edges() {
            return Err(Error::Path(format!("edge {g} out of range")));
        }
    }
    if e == f {
        return Ok(1.0);
    }
    let passed = trace_path(l, &edge_path(sys, e, f))?;
    let bisectors: Vec<usize> = passed.iter().map(|pv| pv.edge(sys.graph())).collect();
    let sign = if passed.len() % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * sys.sign_expectation(&bisectors)?)
}

/// Infinite-volume probability that every edge of a self-avoiding path is
/// present: `1/2 (prod w) |Pf K^-1|` over the bisectors passed.
pub fn path_probability(
    sys: &KasteleynSystem,
    edges: &[usize],
    grid: Grid,
) -> Result<(f64, QuadratureReport)> {
    critical_check(sys.params())?;
    let passed = trace_path(sys.graph().lattice(), edges)?;
    let vertices = pair_vertices(sys, &passed);
    let (g, report) = inverse_submatrix(sys, &vertices, Volume::Infinite(grid))?;
    let weights: f64 = passed
        .iter()
        .map(|pv| sys.params().weight(pv.bisector))
        .product();
    Ok((0.5 * weights * g.pfaffian()?.norm(), report))
}

/// Tail shape of a correlation scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailClass {
    Plateau,
    Decay,
}

impl TailClass {
    pub fn name(self) -> &'static str {
        match self {
            TailClass::Plateau => "plateau",
            TailClass::Decay => "decay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationValue {
    pub separation: usize,
    pub value: f64,
    pub squared: f64,
}

/// Correlations at diagonal separations `1..=kmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationScan {
    pub params: ModelParams,
    pub values: Vec<CorrelationValue>,
    pub tail: TailClass,
    /// Least-squares slope of `ln |value|` against separation over the
    /// second half of the scan.
    pub slope: f64,
    pub quadrature: QuadratureReport,
    pub warning: Option<String>,
}

fn tail_slope(values: &[CorrelationValue]) -> f64 {
    let tail = &values[values.len() / 2..];
    if tail.len() < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|v| {
            (
                v.separation as f64,
                v.value.abs().max(f64::MIN_POSITIVE).ln(),
            )
        })
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Scans separations `1..=kmax` from edge `B(0, 0)`. Forward diagonal paths
/// are prefixes of one another, so one inverse submatrix serves every `k`.
fn scan(
    sys: &KasteleynSystem,
    kmax: usize,
    volume: Volume,
    warning: Option<String>,
) -> Result<CorrelationScan> {
    if kmax == 0 {
        return Err(Error::Params("kmax must be at least 1".into()));
    }
    let l = sys.graph().lattice();
    let e = l.edge_at(0, 0, EdgeKind::B);
    let path = diagonal_path(l, e, l.edge_at(kmax as i64, 0, EdgeKind::B))?;
    if path.k() != kmax {
        return Err(Error::Params(format!(
            "separation {kmax} does not fit forward on an n = {} torus",
            l.n()
        )));
    }
    let vertices = pair_vertices(sys, &path.passed);
    let (g, quadrature) = inverse_submatrix(sys, &vertices, volume)?;
    let c = sys.params().c();
    let values = (1..=kmax)
        .map(|k| {
            let value = block_pfaffian(&g, k, c)?;
            Ok(CorrelationValue {
                separation: k,
                value,
                squared: value * value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = tail_slope(&values);
    Ok(CorrelationScan {
        params: *sys.params(),
        values,
        tail: if slope > PLATEAU_SLOPE {
            TailClass::Plateau
        } else {
            TailClass::Decay
        },
        slope,
        quadrature,
        warning,
    })
}

/// Infinite-volume diagonal correlations at separations `1..=kmax`, with the
/// tail classified as plateau or decay.
pub fn correlation_limit(p: &ModelParams, kmax: usize, grid: Grid) -> Result<CorrelationScan> {
    let warning = critical_check(p)?;
    let n = (2 * kmax + 1).max(3);
    let lattice = build_torus(n)?;
    let sys = super::kasteleyn_orient(&build_decorated(&lattice, p)?)?;
    scan(&sys, kmax, Volume::Infinite(grid), warning)
}

/// Finite-torus diagonal correlations at separations `1..=kmax` using the
/// inverse of the dominant twisted matrix; needs `2 kmax <= n`.
pub fn correlation_finite_scan(sys: &KasteleynSystem, kmax: usize) -> Result<CorrelationScan> {
    let warning = critical_check(sys.params()).unwrap_or_else(|e| Some(e.to_string()));
    scan(sys, kmax, Volume::Finite(sys.dominant_twist()), warning)
}
