//! The characteristic polynomial, its intersection with the unit torus, and
//! phase classification.
//!
//! ```text
//!   P(z, w) = a^4 + b^4 + c^4 + 6a^2b^2 + 6a^2c^2 + 6b^2c^2
//!             - 2ab (z + 1/z)(a^2 + b^2 - c^2)
//!             - 2ac (w + 1/w)(a^2 + c^2 - b^2)
//!             - 2bc (z/w + w/z)(b^2 + c^2 - a^2)
//! ```
//!
//! The curve `P = 0` meets the unit torus only at `(1, 1)`, and only when
//! one of `sqrt(a) +- sqrt(b) +- sqrt(c)` vanishes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::DecoratedGraph;
use crate::model::ModelParams;
use crate::pfaffian::{homology_candidates, template_symbol};

/// Absolute tolerance on the discriminants for criticality.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;
/// Accepted relative deviation between the fundamental determinant and `P`.
pub const CHARACTERISTIC_TOLERANCE: f64 = 1e-9;

const SAMPLE_SEED: u64 = 0x5eed_c0de;

/// The printed closed form of `P(z, w)`.
///
/// The real coefficients are accumulated in double-double arithmetic: near
/// the critical surface `P(1, 1)` is a small difference of quartic terms.
pub fn eval_characteristic(p: &ModelParams, z: Complex64, w: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) || w == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("P(z, w) needs z and w nonzero".into()));
    }
    let [a, b, c] = p.as_array().map(Dd::from);
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let constant = a2 * a2 + b2 * b2 + c2 * c2 + (a2 * b2 + a2 * c2 + b2 * c2) * Dd::from(6.0);
    let two = Dd::from(2.0);
    let terms = [
        (two * a * b * (a2 + b2 - c2), z + 1.0 / z),
        (two * a * c * (a2 + c2 - b2), w + 1.0 / w),
        (two * b * c * (b2 + c2 - a2), z / w + w / z),
    ];
    let (mut re, mut im) = (constant, Dd::from(0.0));
    for (k, t) in terms {
        re = re - k * Dd::from(t.re);
        im = im - k * Dd::from(t.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Unevaluated sum `hi + lo` of two doubles.
#[derive(Debug, Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn from(x: f64) -> Dd {
        Dd(x, 0.0)
    }

    fn value(self) -> f64 {
        self.0 + self.1
    }

    fn normalised(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd(s, lo - (s - hi))
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let v = s - self.0;
        let e = (self.0 - (s - v)) + (o.0 - v);
        Dd::normalised(s, e + self.1 + o.1)
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + Dd(-o.0, -o.1)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        Dd::normalised(p, e + self.0 * o.1 + self.1 * o.0)
    }
}

/// Sum of the moduli of the terms of `P(z, w)`: the scale against which
/// deviations are measured, so that points near the curve are not
/// penalised.
fn term_scale(p: &ModelParams, z: Complex64, w: Complex64) -> f64 {
    let [a, b, c] = p.as_array();
    let (a2, b2, c2) = (a * a, b * b, c * c);
    a2 * a2
        + b2 * b2
        + c2 * c2
        + 6.0 * (a2 * b2 + a2 * c2 + b2 * c2)
        + 2.0 * a * b * (z + 1.0 / z).norm() * (a2 + b2 - c2).abs()
        + 2.0 * a * c * (w + 1.0 / w).norm() * (a2 + c2 - b2).abs()
        + 2.0 * b * c * (z / w + w / z).norm() * (b2 + c2 - a2).abs()
}

/// Outcome of comparing the fundamental determinant with `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicReport {
    pub points: usize,
    pub max_deviation: f64,
    /// `det K(z, w) = sign z^alpha w^beta P(z, w)`.
    pub monomial: (i32, i32),
    pub sign: f64,
}

fn sample_points() -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let angle = |rng: &mut ChaCha8Rng| rng.random_range(0.0..std::f64::consts::TAU);
    let mut out = Vec::with_capacity(100);
    for _ in 0..50 {
        let (s, t) = (angle(&mut rng), angle(&mut rng));
        out.push((Complex64::from_polar(1.0, s), Complex64::from_polar(1.0, t)));
    }
    for _ in 0..50 {
        let (s, t) = (angle(&mut rng), angle(&mut rng));
        let (r1, r2) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        out.push((Complex64::from_polar(r1, s), Complex64::from_polar(r2, t)));
    }
    out
}

/// Compares `det K(z, w)` of the fundamental domain with `P(z, w)` at 50
/// points of the unit torus and 50 with moduli in `[0.5, 2]`. A unit
/// monomial `+-z^alpha w^beta` is divided out first; it is fixed at a
/// generic point.
pub fn verify_characteristic(d: &DecoratedGraph, p: &ModelParams) -> Result<CharacteristicReport> {
    let template = d.template();
    let points = sample_points();
    let generic = (
        Complex64::from_polar(1.3, 0.7),
        Complex64::from_polar(0.8, -1.1),
    );
    let mut best: Option<CharacteristicReport> = None;
    for signs in homology_candidates(template)? {
        let det = |z, w| template_symbol(template, &signs, p, z, w).determinant();
        let (z0, w0) = generic;
        let d0 = det(z0, w0);
        let p0 = eval_characteristic(p, z0, w0)?;
        let mut gauge = ((0, 0), 1.0, f64::INFINITY);
        for alpha in -2..=2 {
            for beta in -2..=2 {
                for sign in [1.0, -1.0] {
                    let miss = (d0 - sign * z0.powi(alpha) * w0.powi(beta) * p0).norm();
                    if miss < gauge.2 {
                        gauge = ((alpha, beta), sign, miss);
                    }
                }
            }
        }
        let ((alpha, beta), sign, _) = gauge;
        let mut worst: f64 = 0.0;
        for &(z, w) in &points {
            let target = sign * z.powi(alpha) * w.powi(beta) * eval_characteristic(p, z, w)?;
            let scale = term_scale(p, z, w) * z.norm().powi(alpha) * w.norm().powi(beta);
            worst = worst.max((det(z, w) - target).norm() / scale);
        }
        let report = CharacteristicReport {
            points: points.len(),
            max_deviation: worst,
            monomial: (alpha, beta),
            sign,
        };
        if best.map_or(true, |b| worst < b.max_deviation) {
            best = Some(report);
        }
    }
    let report = best.expect("four candidates");
    if report.max_deviation > CHARACTERISTIC_TOLERANCE {
        return Err(Error::DecorationMismatch(report.max_deviation));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TorusIntersection {
    Empty,
    RealPointOne,
}

/// `sqrt(a) + sqrt(b) + sqrt(c)`, `sqrt(a) + sqrt(b) - sqrt(c)`,
/// `sqrt(a) - sqrt(b) + sqrt(c)`, `sqrt(a) - sqrt(b) - sqrt(c)`.
pub fn discriminants(p: &ModelParams) -> [f64; 4] {
    let [a, b, c] = p.as_array().map(f64::sqrt);
    [a + b + c, a + b - c, a - b + c, a - b - c]
}

pub fn torus_intersection(p: &ModelParams) -> TorusIntersection {
    if discriminants(p)
        .iter()
        .any(|d| d.abs() < CRITICAL_TOLERANCE)
    {
        TorusIntersection::RealPointOne
    } else {
        TorusIntersection::Empty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// One square root exceeds the sum of the other two: diagonal
    /// correlations have a nonzero limit.
    NonzeroLimit,
    /// Strict triangle inequality among the square roots: correlations decay.
    Decay,
    Critical,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::NonzeroLimit => "NonzeroLimit",
            Phase::Decay => "Decay",
            Phase::Critical => "Critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub params: ModelParams,
    pub discriminants: [f64; 4],
    pub classification: Phase,
    /// Smallest `|discriminant|`.
    pub margin: f64,
}

pub fn classify_phase(p: &ModelParams) -> PhasePoint {
    let discriminants = discriminants(p);
    let margin = discriminants
        .iter()
        .fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let mut s = p.as_array().map(f64::sqrt);
    s.sort_by(|x, y| y.total_cmp(x));
    let classification = if margin < CRITICAL_TOLERANCE {
        Phase::Critical
    } else if s[0] > s[1] + s[2] {
        Phase::NonzeroLimit
    } else {
        Phase::Decay
    };
    PhasePoint {
        params: *p,
        discriminants,
        classification,
        margin,
    }
}
