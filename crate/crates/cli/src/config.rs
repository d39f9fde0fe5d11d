//! Analysis configuration files.
//!
//! ```json
//! {
//!   "netlist": "flicker_netlist.json",
//!   "source": {
//!     "lines": [{"amplitude_peak": 1.0, "omega": 3.0, "phase": 0.0}],
//!     "am": {"carrier": {"amplitude_peak": 14.142135623730951, "omega": 1.0},
//!            "depth": 0.1, "mod_omega": 0.2}
//!   },
//!   "t_grid": {"start": 0.0, "stop": 31.4, "count": 256},
//!   "s_grid": [0.0, 0.1, 1.0],
//!   "output_dir": "out",
//!   "format": "both",
//!   "tolerance": 1e-9
//! }
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Units are fixed SI: V, A, ohm, H, F, rad/s, s.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tspower_core::{LineSpectrum, Netlist, NetlistSpec, Unit};

use crate::error::CliError;

/// Default relative tolerance of `verify`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSpec {
    pub amplitude_peak: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

/// `carrier * (1 + depth cos(mod_omega t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmSpec {
    pub carrier: ToneSpec,
    pub depth: f64,
    pub mod_omega: f64,
}

impl AmSpec {
    /// Carrier plus two sidebands of relative amplitude `depth / 2`.
    pub fn expand(&self) -> [ToneSpec; 3] {
        let c = self.carrier;
        let side = 0.5 * self.depth * c.amplitude_peak;
        [
            ToneSpec {
                amplitude_peak: side,
                omega: c.omega - self.mod_omega,
                phase: c.phase,
            },
            c,
            ToneSpec {
                amplitude_peak: side,
                omega: c.omega + self.mod_omega,
                phase: c.phase,
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default)]
    pub lines: Vec<ToneSpec>,
    #[serde(default)]
    pub am: Option<AmSpec>,
}

impl SourceSpec {
    pub fn tones(&self) -> Vec<ToneSpec> {
        let mut out = self.lines.clone();
        if let Some(am) = &self.am {
            out.extend(am.expand());
        }
        out
    }

    pub fn spectrum(&self) -> Result<LineSpectrum, CliError> {
        let tones: Vec<(f64, f64, f64)> = self
            .tones()
            .iter()
            .map(|t| (t.amplitude_peak, t.omega, t.phase))
            .collect();
        LineSpectrum::from_tones(Unit::Volt, &tones).map_err(CliError::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    /// `count` points from `start`, `stop` excluded.
    Range {
        start: f64,
        stop: f64,
        count: usize,
    },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, count } => (0..*count)
                .map(|k| start + (stop - start) * k as f64 / *count as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// Config file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub netlist: PathBuf,
    pub source: SourceSpec,
    #[serde(default)]
    pub t_grid: Option<GridSpec>,
    #[serde(default)]
    pub s_grid: Option<GridSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

/// Fully resolved analysis settings.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub netlist_path: PathBuf,
    pub netlist: Netlist,
    pub source: LineSpectrum,
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub tolerance: f64,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub tolerance: Option<f64>,
}

/// Parses JSON and reports failures with the offending JSON path and
/// line/column.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Parse(format!(
            "{}: at `{}` (line {}, column {}): {}",
            origin.display(),
            path,
            inner.line(),
            inner.column(),
            inner
        ))
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    let spec: NetlistSpec = parse_json(&read(path)?, path)?;
    Netlist::try_from(spec).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

impl AnalysisConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let file: ConfigFile = parse_json(&read(path)?, path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::resolve(file, dir, overrides)
    }

    pub fn resolve(file: ConfigFile, dir: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let netlist_path = dir.join(&file.netlist);
        let netlist = load_netlist(&netlist_path)?;
        let source = file.source.spectrum()?;
        let t_grid = match &file.t_grid {
            Some(g) => g.values(),
            None => {
                tspower_core::power::default_t_grid(&source, tspower_core::power::DEFAULT_T_POINTS)
            }
        };
        let s_grid = match &file.s_grid {
            Some(g) => g.values(),
            None => {
                tspower_core::power::default_s_grid(&source, tspower_core::power::DEFAULT_S_POINTS)
            }
        };
        if t_grid.is_empty() || s_grid.is_empty() {
            return Err(CliError::Validation(
                "t_grid and s_grid must be nonempty".into(),
            ));
        }
        if let Some(s) = s_grid.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(CliError::Validation(format!(
                "s_grid value {s} must be finite and >= 0"
            )));
        }
        if let Some(t) = t_grid.iter().find(|t| !t.is_finite()) {
            return Err(CliError::Validation(format!(
                "t_grid value {t} is not finite"
            )));
        }
        let output_dir = overrides
            .output_dir
            .clone()
            .or_else(|| file.output_dir.as_ref().map(|d| dir.join(d)))
            .unwrap_or_else(|| PathBuf::from("out"));
        let tolerance = overrides
            .tolerance
            .or(file.tolerance)
            .unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance >= 0.0) {
            return Err(CliError::Validation(format!(
                "tolerance must be >= 0, got {tolerance}"
            )));
        }
        Ok(Self {
            netlist_path,
            netlist,
            source,
            t_grid,
            s_grid,
            output_dir,
            format: overrides.format.or(file.format).unwrap_or_default(),
            tolerance,
        })
    }
}
