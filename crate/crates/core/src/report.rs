//! CSV, JSON, SVG and sample-dump writers.
//!
//! Numbers in CSV files carry 17 significant digits so that values survive
//! a round trip exactly.

use std::fmt::Write as _;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{EdgeKind, TorusLattice};
use crate::model::{cluster_decompose, ComponentShape, ModelParams, OneTwoConfig};
use crate::pfaffian::{CorrelationScan, TailClass};
use crate::spectral::{Phase, PhasePoint};

/// `x` with 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Separation-indexed correlation table.
pub fn correlation_csv(scan: &CorrelationScan, mode: &str, size: usize) -> String {
    let mut out = String::from("separation,value,value_squared,mode,n_or_N\n");
    for v in &scan.values {
        let _ = writeln!(
            out,
            "{},{},{},{mode},{size}",
            v.separation,
            sig17(v.value),
            sig17(v.squared)
        );
    }
    out
}

/// Correlation-tail summary of one phase-scan point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TailSummary {
    NotComputed,
    Scan {
        class: TailClass,
        slope: f64,
        last_squared: f64,
    },
    /// The scan failed at this point (typically a near-critical refusal);
    /// recorded, not fatal.
    Refused(String),
}

impl TailSummary {
    pub fn from_scan(scan: &CorrelationScan) -> TailSummary {
        TailSummary::Scan {
            class: scan.tail,
            slope: scan.slope,
            last_squared: scan.values.last().map_or(f64::NAN, |v| v.squared),
        }
    }
}

/// One row per point; `tails` is either empty or parallel to `points`.
pub fn phase_csv(points: &[PhasePoint], tails: &[TailSummary]) -> String {
    let mut out = String::from("a,b,c,disc_min,classification,tail,tail_slope,tail_last_squared\n");
    for (i, p) in points.iter().enumerate() {
        let [a, b, c] = p.params.as_array();
        let tail = match tails.get(i).unwrap_or(&TailSummary::NotComputed) {
            TailSummary::NotComputed => ",,".to_string(),
            TailSummary::Scan {
                class,
                slope,
                last_squared,
            } => {
                format!(
                    "{},{},{}",
                    class.name(),
                    sig17(*slope),
                    sig17(*last_squared)
                )
            }
            TailSummary::Refused(_) => "refused,,".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{tail}",
            sig17(a),
            sig17(b),
            sig17(c),
            sig17(p.margin),
            p.classification.name()
        );
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::Domain(format!("JSON serialisation: {e}")))
}

fn phase_colour(p: Phase) -> &'static str {
    match p {
        Phase::NonzeroLimit => "#d95f02",
        Phase::Decay => "#1b9e77",
        Phase::Critical => "#000000",
    }
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" style=\"fill:#ffffff\"/>\n"
    )
}

/// Classification along a line `a -> (a, b, c)` with `b, c` fixed, the
/// critical value `a = (sqrt(b) + sqrt(c))^2` marked.
pub fn phase_strip_svg(points: &[PhasePoint], b: f64, c: f64) -> String {
    let (w, h, pad) = (640.0, 120.0, 40.0);
    let a_of = |p: &PhasePoint| p.params.a();
    let lo = points.iter().map(a_of).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(a_of).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |a: f64| pad + (a - lo) / span * (w - 2.0 * pad);
    let cell = (w - 2.0 * pad) / points.len().max(1) as f64;
    let mut out = svg_open(w, h);
    for p in points {
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"30\" width=\"{:.2}\" height=\"50\" style=\"fill:{}\"/>",
            x(a_of(p)) - cell / 2.0,
            cell,
            phase_colour(p.classification)
        );
    }
    let critical = (b.sqrt() + c.sqrt()).powi(2);
    if (lo..=hi).contains(&critical) {
        let _ = writeln!(
            out,
            "<line x1=\"{0:.2}\" y1=\"20\" x2=\"{0:.2}\" y2=\"90\" style=\"stroke:#000000;stroke-width:2\"/>",
            x(critical)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{pad}\" y=\"110\" style=\"font:12px sans-serif\">a from {lo} to {hi}, b = {b}, c = {c}; \
         line: sqrt(a) = sqrt(b) + sqrt(c)</text>"
    );
    out.push_str("</svg>\n");
    out
}

/// Classification over the simplex `a + b + c = 1`, drawn as a triangle
/// with the three critical curves overlaid.
pub fn phase_ternary_svg(points: &[PhasePoint], resolution: usize) -> String {
    let (w, h, pad) = (600.0, 560.0, 40.0);
    let side = w - 2.0 * pad;
    // corners: a = 1 at the top, b = 1 bottom left, c = 1 bottom right
    let top = (w / 2.0, pad);
    let left = (pad, pad + side * 0.866_025_403_784_438_6);
    let right = (w - pad, left.1);
    let map = |a: f64, b: f64, c: f64| {
        let s = a + b + c;
        let (a, b, c) = (a / s, b / s, c / s);
        (
            a * top.0 + b * left.0 + c * right.0,
            a * top.1 + b * left.1 + c * right.1,
        )
    };
    let r = 0.5 * side / resolution.max(1) as f64;
    let mut out = svg_open(w, h);
    for p in points {
        let [a, b, c] = p.params.as_array();
        let (x, y) = map(a, b, c);
        let _ = writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" style=\"fill:{}\"/>",
            phase_colour(p.classification)
        );
    }
    // sqrt(s0) = sqrt(s1) + sqrt(s2) with s1 = t^2, s2 = (1 - t)^2 scaled
    for which in 0..3 {
        let mut path = String::new();
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let (s1, s2) = (t * t, (1.0 - t) * (1.0 - t));
            let s0 = 1.0;
            let (a, b, c) = match which {
                0 => (s0, s1, s2),
                1 => (s2, s0, s1),
                _ => (s1, s2, s0),
            };
            let (x, y) = map(a, b, c);
            let _ = write!(path, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" style=\"fill:none;stroke:#000000;stroke-width:1.5\"/>",
            path.trim_end()
        );
    }
    let _ = writeln!(
        out,
        "<polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" style=\"fill:none;stroke:#555555\"/>",
        top.0, top.1, left.0, left.1, right.0, right.1
    );
    out.push_str("</svg>\n");
    out
}

/// A configuration drawn on the rhombic fundamental domain. Path
/// components are blue, cycles red; edges across the seam appear as two
/// half-edges at opposite sides.
pub fn config_svg(lattice: &TorusLattice, sigma: &OneTwoConfig) -> Result<String> {
    let d = cluster_decompose(lattice, sigma)?;
    let mut colour = vec![""; lattice.num_edges()];
    for c in &d.components {
        let col = match c.shape {
            ComponentShape::Path => "#2c7fb8",
            ComponentShape::Cycle => "#d7301f",
        };
        for &e in &c.edges {
            colour[e] = col;
        }
    }
    let pts: Vec<(f64, f64)> = (0..lattice.num_vertices())
        .map(|v| lattice.position(v, (0, 0)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let scale = 20.0;
    let pad = 20.0;
    let tx = |x: f64| pad + (x - x0 + 1.0) * scale;
    let ty = |y: f64| pad + (y1 - y + 1.0) * scale;
    let mut out = svg_open(
        (x1 - x0 + 2.0) * scale + 2.0 * pad,
        (y1 - y0 + 2.0) * scale + 2.0 * pad,
    );
    for v in 0..lattice.num_vertices() {
        let (vx, vy) = pts[v];
        let (vcx, vcy) = lattice.vertex_cell(v);
        for kind in EdgeKind::ALL {
            let e = lattice.incident(v)[kind.index()];
            let (u, (dx, dy)) = lattice.step(v, kind);
            let (ucx, ucy) = lattice.vertex_cell(u);
            let shift = (vcx as i64 + dx - ucx as i64, vcy as i64 + dy - ucy as i64);
            let (ux, uy) = lattice.position(u, shift);
            let (mx, my) = (0.5 * (vx + ux), 0.5 * (vy + uy));
            let style = if sigma.is_present(e) {
                format!("stroke:{};stroke-width:3", colour[e])
            } else {
                "stroke:#dddddd;stroke-width:1".to_string()
            };
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" style=\"{style}\"/>",
                tx(vx),
                ty(vy),
                tx(mx),
                ty(my)
            );
        }
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" style=\"fill:#333333\"/>",
            tx(vx),
            ty(vy)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One sample-dump line: sweep index and base-64 presence bitmask.
pub fn sample_line(sweep: u64, sigma: &OneTwoConfig) -> String {
    format!("{sweep} {}", STANDARD.encode(sigma.to_bytes()))
}

/// Inverse of [`sample_line`].
pub fn parse_sample_line(line: &str, edges: usize) -> Result<(u64, OneTwoConfig)> {
    let (sweep, data) = line
        .trim()
        .split_once(' ')
        .ok_or_else(|| Error::Domain(format!("malformed sample line {line:?}")))?;
    let sweep = sweep
        .parse()
        .map_err(|_| Error::Domain(format!("bad sweep index {sweep:?}")))?;
    let bytes = STANDARD
        .decode(data)
        .map_err(|e| Error::Domain(format!("bad base-64 data: {e}")))?;
    Ok((sweep, OneTwoConfig::from_bytes(&bytes, edges)?))
}

/// Parameters as written in reports.
pub fn params_label(p: &ModelParams) -> String {
    format!("a = {}, b = {}, c = {}", p.a(), p.b(), p.c())
}
