use std::fs;
use std::thread;

use onetwo_core::lattice::{build_decorated, build_torus};
use onetwo_core::mcmc::{cluster_stats_with, init_chain};
use onetwo_core::model::enumerate_partition;
use onetwo_core::pfaffian::{
    correlation_finite_scan, correlation_limit, kasteleyn_orient, CorrelationScan, Grid,
};
use onetwo_core::report::{
    config_svg, correlation_csv, phase_csv, phase_strip_svg, phase_ternary_svg, sample_line, sig17,
    to_json, TailSummary,
};
use onetwo_core::spectral::{classify_phase, PhasePoint};
use onetwo_core::transforms::crosscheck;
use onetwo_core::{ClusterStats, KasteleynSystem, ModelParams};
use serde::Serialize;

use crate::spec::{Command, Mode, RunSpec, ScanGrid};
use crate::CliError;

/// Largest deviation `crosscheck` accepts before reporting a numerical
/// failure.
const CROSSCHECK_TOLERANCE: f64 = 1e-9;

pub fn run(spec: &RunSpec) -> Result<(), CliError> {
    spec.validate()?;
    match spec.command {
        Command::Partition => partition(spec),
        Command::Correlate => correlate(spec),
        Command::PhaseScan => phase_scan(spec),
        Command::Sample => sample(spec),
        Command::Crosscheck => cross_check(spec),
    }
}

/// Writes `name` under the output directory, if one was given.
fn write_out(spec: &RunSpec, name: &str, contents: &str) -> Result<bool, CliError> {
    let Some(dir) = &spec.out else {
        return Ok(false);
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(true)
}

fn system(n: usize, p: &ModelParams) -> Result<KasteleynSystem, CliError> {
    Ok(kasteleyn_orient(&build_decorated(&build_torus(n)?, p)?)?)
}

#[derive(Serialize)]
struct PartitionReport {
    n: usize,
    params: ModelParams,
    ln_z_pfaffian: f64,
    z_pfaffian: f64,
    z_enumeration: Option<f64>,
    relative_difference: Option<f64>,
}

fn partition(spec: &RunSpec) -> Result<(), CliError> {
    let n = spec.require_n()?;
    let p = spec.params()?;
    let ln_z = system(n, &p)?.ln_partition()?;
    let z = ln_z.exp();
    let z_enum = if n <= 2 {
        Some(enumerate_partition(n, &p)?)
    } else {
        None
    };
    let report = PartitionReport {
        n,
        params: p,
        ln_z_pfaffian: ln_z,
        z_pfaffian: z,
        z_enumeration: z_enum,
        relative_difference: z_enum.map(|e| (z - e).abs() / e),
    };
    println!("n = {n}");
    println!("params = {}, {}, {}", p.a(), p.b(), p.c());
    println!("Z_pfaffian = {}", sig17(z));
    println!("ln_Z_pfaffian = {}", sig17(ln_z));
    if let (Some(e), Some(d)) = (report.z_enumeration, report.relative_difference) {
        println!("Z_enumeration = {}", sig17(e));
        println!("relative_difference = {}", sig17(d));
    }
    write_out(spec, "partition.json", &to_json(&report)?)?;
    Ok(())
}

fn filtered(spec: &RunSpec, mut scan: CorrelationScan) -> CorrelationScan {
    scan.values.retain(|v| spec.wants(v.separation));
    scan
}

fn correlate(spec: &RunSpec) -> Result<(), CliError> {
    let p = spec.params()?;
    let kmax = spec.kmax();
    let mut scans = Vec::new();
    if matches!(spec.mode, Mode::Finite | Mode::Both) {
        let n = spec.require_n()?;
        let scan = correlation_finite_scan(&system(n, &p)?, kmax)?;
        scans.push(("finite", n, scan));
    }
    if matches!(spec.mode, Mode::Infinite | Mode::Both) {
        let scan = correlation_limit(&p, kmax, Grid::HalfOffset)?;
        let size = scan.quadrature.size;
        scans.push(("infinite", size, scan));
    }
    let mut csv = String::new();
    for (i, (mode, size, scan)) in scans.iter().enumerate() {
        if let Some(w) = &scan.warning {
            eprintln!("warning: {w}");
        }
        eprintln!(
            "{mode} tail: {} (slope {:.4})",
            scan.tail.name(),
            scan.slope
        );
        let table = correlation_csv(&filtered(spec, scan.clone()), mode, *size);
        // one header for the combined table
        csv.push_str(if i == 0 {
            &table
        } else {
            table.split_once('\n').map_or("", |t| t.1)
        });
    }
    if !write_out(spec, "correlation.csv", &csv)? {
        print!("{csv}");
    }
    let scans: Vec<_> = scans
        .into_iter()
        .map(|(_, _, s)| filtered(spec, s))
        .collect();
    write_out(spec, "correlation.json", &to_json(&scans)?)?;
    Ok(())
}

fn scan_points(spec: &RunSpec) -> Result<Vec<ModelParams>, CliError> {
    let mut points = Vec::new();
    match spec.grid() {
        ScanGrid::Line { from, to, step } => {
            let count = ((to - from) / step + 1e-9).floor() as usize;
            for i in 0..=count {
                points.push(ModelParams::new(from + i as f64 * step, spec.b, spec.c)?);
            }
        }
        ScanGrid::Ternary { resolution: r } => {
            for i in 1..r {
                for j in 1..r - i {
                    let k = r - i - j;
                    let s = r as f64;
                    points.push(ModelParams::new(i as f64 / s, j as f64 / s, k as f64 / s)?);
                }
            }
        }
    }
    Ok(points)
}

fn phase_scan(spec: &RunSpec) -> Result<(), CliError> {
    let params = scan_points(spec)?;
    let points: Vec<PhasePoint> = params.iter().map(classify_phase).collect();
    let (tails, svg) = match spec.grid() {
        ScanGrid::Line { .. } => {
            let tails: Vec<TailSummary> = params
                .iter()
                .map(
                    |p| match correlation_limit(p, spec.kmax(), Grid::HalfOffset) {
                        Ok(scan) => TailSummary::from_scan(&scan),
                        Err(e) => TailSummary::Refused(e.to_string()),
                    },
                )
                .collect();
            (tails, phase_strip_svg(&points, spec.b, spec.c))
        }
        ScanGrid::Ternary { resolution } => (Vec::new(), phase_ternary_svg(&points, resolution)),
    };
    for (p, t) in params.iter().zip(&tails) {
        if let TailSummary::Refused(msg) = t {
            eprintln!("note: a = {}: {msg}", p.a());
        }
    }
    let csv = phase_csv(&points, &tails);
    if !write_out(spec, "phase.csv", &csv)? {
        print!("{csv}");
    }
    write_out(spec, "phase.svg", &svg)?;
    Ok(())
}

#[derive(Serialize)]
struct SampleReport {
    n: usize,
    params: ModelParams,
    seed: u64,
    burnin: usize,
    thin: usize,
    samples: usize,
    acceptance: f64,
    validity: f64,
    state_hash: String,
    stats: ClusterStats,
}

struct SampleRun {
    report: SampleReport,
    lines: String,
    svg: String,
}

fn sample_one(spec: &RunSpec, n: usize, p: &ModelParams, seed: u64) -> Result<SampleRun, CliError> {
    let sweeps = spec.sweeps.unwrap_or(10_000);
    let burnin = spec.burnin.unwrap_or(10 * n * n);
    let thin = spec.thin.unwrap_or(n);
    let samples = sweeps / thin;
    if samples == 0 {
        return Err(CliError::Input(format!(
            "{sweeps} sweeps give no samples at thinning {thin}"
        )));
    }
    let mut chain = init_chain(n, p, seed)?;
    chain.run(burnin);
    let mut lines = String::new();
    let stats = cluster_stats_with(&mut chain, samples, thin, |ch| {
        lines.push_str(&sample_line(ch.sweeps(), ch.config()));
        lines.push('\n');
    })?;
    Ok(SampleRun {
        svg: config_svg(chain.lattice(), chain.config())?,
        lines,
        report: SampleReport {
            n,
            params: *p,
            seed,
            burnin,
            thin,
            samples,
            acceptance: chain.acceptance(),
            validity: chain.validity(),
            state_hash: format!("{:016x}", chain.state_hash()),
            stats,
        },
    })
}

fn sample(spec: &RunSpec) -> Result<(), CliError> {
    let n = spec.n.unwrap_or(10);
    let p = spec.params()?;
    // one independent chain per seed
    let runs: Vec<Result<SampleRun, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = spec
            .seeds
            .iter()
            .map(|&seed| s.spawn(move || sample_one(spec, n, &p, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    for run in &runs {
        let seed = run.report.seed;
        write_out(spec, &format!("sample-{seed}.svg"), &run.svg)?;
        write_out(spec, &format!("samples-{seed}.txt"), &run.lines)?;
    }
    let reports: Vec<&SampleReport> = runs.iter().map(|r| &r.report).collect();
    let json = to_json(&reports)?;
    write_out(spec, "stats.json", &json)?;
    println!("{json}");
    Ok(())
}

fn cross_check(spec: &RunSpec) -> Result<(), CliError> {
    let report = crosscheck(&spec.params()?)?;
    println!("e,f,exact,ising,polygon,max_abs_diff");
    for q in &report.pairs {
        println!(
            "{},{},{},{},{},{}",
            q.e,
            q.f,
            sig17(q.exact),
            sig17(q.ising),
            sig17(q.polygon),
            sig17(q.max_abs_diff)
        );
    }
    let dev = report.max_deviation();
    println!("max_deviation = {}", sig17(dev));
    write_out(spec, "crosscheck.json", &to_json(&report)?)?;
    if dev < CROSSCHECK_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "three-way correlations disagree by {dev:e} (tolerance {CROSSCHECK_TOLERANCE:e})"
        )))
    }
}
