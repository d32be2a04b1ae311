//! The run specification every command is reduced to, whether it came from
//! flags or from a `--json-spec` document.

use std::path::PathBuf;

use clap::ValueEnum;
use onetwo_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Partition,
    Correlate,
    PhaseScan,
    Sample,
    Crosscheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Finite,
    #[default]
    Infinite,
    Both,
}

/// Parameter grid of a phase scan: `a` along a line with `b, c` fixed, or
/// the interior points `(i, j, k) / r`, `i + j + k = r`, of the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScanGrid {
    Line { from: f64, to: f64, step: f64 },
    Ternary { resolution: usize },
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid::Line {
            from: 1.0,
            to: 9.0,
            step: 0.25,
        }
    }
}

pub const MAX_TERNARY: usize = 400;
pub const MAX_LINE_POINTS: usize = 100_000;

fn one() -> f64 {
    1.0
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_kmax() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Command,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweeps: Option<usize>,
    #[serde(default)]
    pub burnin: Option<usize>,
    #[serde(default)]
    pub thin: Option<usize>,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    /// Separations to report; all of `1..=kmax` when absent.
    #[serde(default)]
    pub separations: Option<Vec<usize>>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub grid: Option<ScanGrid>,
    /// Directory for the output files; stdout only when absent.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(command: Command) -> RunSpec {
        RunSpec {
            command,
            n: None,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            seeds: default_seeds(),
            sweeps: None,
            burnin: None,
            thin: None,
            kmax: default_kmax(),
            separations: None,
            mode: Mode::default(),
            grid: None,
            out: None,
        }
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.a, self.b, self.c)?)
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n
            .ok_or_else(|| CliError::Input(format!("{:?} needs -n", self.command)))
    }

    /// Largest separation to compute.
    pub fn kmax(&self) -> usize {
        match &self.separations {
            Some(s) => s.iter().copied().max().unwrap_or(0),
            None => self.kmax,
        }
    }

    pub fn wants(&self, separation: usize) -> bool {
        self.separations
            .as_ref()
            .map_or(true, |s| s.contains(&separation))
    }

    pub fn grid(&self) -> ScanGrid {
        self.grid.unwrap_or_default()
    }

    /// Checks everything the target command needs before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Input(msg));
        if self.command != Command::PhaseScan {
            self.params()?;
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(onetwo_core::Error::Size(n).into());
            }
        }
        if self.kmax == 0 {
            return bad("--kmax must be at least 1".into());
        }
        if let Some(s) = &self.separations {
            if s.is_empty() || s.contains(&0) {
                return bad("separations must be a nonempty list of positive integers".into());
            }
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        for (name, v) in [("--sweeps", self.sweeps), ("--thin", self.thin)] {
            if v == Some(0) {
                return bad(format!("{name} must be positive"));
            }
        }
        match self.command {
            Command::Partition => {
                self.require_n()?;
            }
            Command::Correlate => {
                if self.mode != Mode::Infinite {
                    self.require_n()?;
                }
            }
            Command::Crosscheck => {
                if self.n.is_some_and(|n| n != 2) {
                    return bad("crosscheck runs at n = 2 only".into());
                }
            }
            Command::PhaseScan => match self.grid() {
                ScanGrid::Line { from, to, step } => {
                    ModelParams::new(from, self.b, self.c)?;
                    if !(to.is_finite() && to >= from && step.is_finite() && step > 0.0) {
                        return bad(format!("bad line grid {from}:{to}:{step}"));
                    }
                    if (to - from) / step > MAX_LINE_POINTS as f64 {
                        return bad(format!("line grid has more than {MAX_LINE_POINTS} points"));
                    }
                }
                ScanGrid::Ternary { resolution } => {
                    if !(3..=MAX_TERNARY).contains(&resolution) {
                        return bad(format!("ternary resolution must lie in 3..={MAX_TERNARY}"));
                    }
                }
            },
            Command::Sample => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults() {
        let s: RunSpec = serde_json::from_str(r#"{"command": "phase-scan"}"#).unwrap();
        assert_eq!(s.command, Command::PhaseScan);
        assert_eq!((s.a, s.b, s.c, s.kmax), (1.0, 1.0, 1.0, 12));
        assert_eq!(s.grid(), ScanGrid::default());
        assert_eq!(s, RunSpec::new(Command::PhaseScan));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunSpec>(r#"{"command": "partition", "m": 3}"#).is_err());
    }

    #[test]
    fn tagged_grids() {
        let s: RunSpec = serde_json::from_str(
            r#"{"command": "phase-scan", "grid": {"kind": "ternary", "resolution": 20}}"#,
        )
        .unwrap();
        assert_eq!(s.grid(), ScanGrid::Ternary { resolution: 20 });
    }

    #[test]
    fn validation() {
        let mut s = RunSpec::new(Command::Partition);
        assert!(s.validate().is_err());
        s.n = Some(1);
        assert!(s.validate().is_err());
        s.n = Some(2);
        assert!(s.validate().is_ok());
        s.a = 0.0;
        assert!(s.validate().is_err());
        let mut s = RunSpec::new(Command::Correlate);
        s.separations = Some(vec![2, 5]);
        assert!(s.validate().is_ok());
        assert_eq!(s.kmax(), 5);
        assert!(s.wants(5) && !s.wants(3));
        s.mode = Mode::Finite;
        assert!(s.validate().is_err());
    }
}
