//! Run configuration: the TOML/JSON file schema and its resolved form.
//!
//! ```toml
//! [levels]
//! energies = [0.0, 1.0, 2.5]
//!
//! [drive]
//! g = 0.1
//! mode = "rwa"             # "rwa" or "full"
//! adjacent = "resonant"    # or an explicit list [1.0, 1.5]
//! epsilon = 0.5            # optional, n = 3 only: ω₀₂ = ω₁ + ω₂ + ε
//!
//! [[drive.pairs]]          # optional overrides for pairs with j − i ≥ 2
//! i = 0
//! j = 2
//! omega = 2.6              # or `detuning = 0.1`
//!
//! [run]
//! solver = "exact"         # exact | dyson1 | dyson2 | numeric-rwa | numeric-full
//! t_max = 20.0
//! samples = 201
//! initial = 0              # level index, or [[re, im], ...]
//! format = "csv"           # csv | json
//! output = "out.csv"       # optional; stdout when absent
//! step = 0.01              # integrator initial step
//! tol = 1e-10              # integrator tolerance per unit time
//! quadrature_step = 1e-3   # Dyson Simpson step
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use multirabi::model::{DriveSpec, LevelSpec, StateVector};
use multirabi::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exact,
    Dyson1,
    Dyson2,
    NumericRwa,
    NumericFull,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Solver::Exact => "exact",
            Solver::Dyson1 => "dyson1",
            Solver::Dyson2 => "dyson2",
            Solver::NumericRwa => "numeric-rwa",
            Solver::NumericFull => "numeric-full",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Rwa,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Adjacent {
    Keyword(String),
    Frequencies(Vec<f64>),
}

impl Default for Adjacent {
    fn default() -> Self {
        Adjacent::Keyword("resonant".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairOverride {
    pub i: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Initial {
    Index(usize),
    Amplitudes(Vec<[f64; 2]>),
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Index(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsSection {
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub g: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub adjacent: Adjacent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairOverride>,
}

fn default_samples() -> usize {
    201
}
fn default_step() -> f64 {
    1e-2
}
fn default_tol() -> f64 {
    1e-10
}
fn default_quadrature_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub solver: Solver,
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_quadrature_step")]
    pub quadrature_step: f64,
}

/// On-disk schema, shared by TOML input and the JSON echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub levels: LevelsSection,
    pub drive: DriveSection,
    pub run: RunSection,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Coupling g (cosine amplitude when the drive mode is "full").
    #[arg(long)]
    pub g: Option<f64>,
    /// Set every adjacent frequency to its level gap.
    #[arg(long)]
    pub resonant: bool,
    /// Three-level detuning: ω₀₂ = ω₁ + ω₂ + ε.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Initial level index.
    #[arg(long)]
    pub initial: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub quadrature_step: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut file: ConfigFile) -> ConfigFile {
        if let Some(g) = self.g {
            file.drive.g = g;
        }
        if self.resonant {
            file.drive.adjacent = Adjacent::default();
        }
        if let Some(e) = self.epsilon {
            file.drive.epsilon = Some(e);
        }
        let run = &mut file.run;
        if let Some(s) = self.solver {
            run.solver = s;
        }
        if let Some(t) = self.t_max {
            run.t_max = t;
        }
        if let Some(n) = self.samples {
            run.samples = n;
        }
        if let Some(k) = self.initial {
            run.initial = Initial::Index(k);
        }
        if let Some(f) = self.format {
            run.format = f;
        }
        if let Some(o) = &self.output {
            run.output = Some(o.clone());
        }
        if let Some(s) = self.step {
            run.step = s;
        }
        if let Some(t) = self.tol {
            run.tol = t;
        }
        if let Some(q) = self.quadrature_step {
            run.quadrature_step = q;
        }
        file
    }
}

/// Validated configuration with the physical model built.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub levels: LevelSpec<f64>,
    pub drive: DriveSpec<f64>,
    pub solver: Solver,
    pub t_max: f64,
    pub samples: usize,
    pub initial: StateVector<f64>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub step: f64,
    pub tol: f64,
    pub quadrature_step: f64,
}

impl RunConfig {
    pub fn resolve(file: &ConfigFile) -> Result<Self, CliError> {
        let levels = LevelSpec::new(file.levels.energies.clone())?;
        let n = levels.n();
        let d = &file.drive;
        let adjacent = match &d.adjacent {
            Adjacent::Keyword(k) if k == "resonant" => levels.energies().windows(2).map(|w| w[1] - w[0]).collect(),
            Adjacent::Keyword(k) => {
                return Err(CliError::Config(format!("drive.adjacent must be \"resonant\" or a list, got \"{k}\"")))
            }
            Adjacent::Frequencies(v) => v.clone(),
        };
        if adjacent.len() + 1 != n {
            return Err(CliError::Config(format!(
                "drive.adjacent has {} frequencies, expected {} for n = {n}",
                adjacent.len(),
                n - 1
            )));
        }
        let mut drive = DriveSpec::from_adjacent(&adjacent, d.g, d.mode == Mode::Rwa)?;
        if let Some(eps) = d.epsilon {
            drive = drive.with_epsilon(eps)?;
        }
        for p in &d.pairs {
            if p.j < p.i + 2 {
                return Err(CliError::Config(format!(
                    "pair override ({},{}) must have j - i >= 2; adjacent frequencies go in drive.adjacent",
                    p.i, p.j
                )));
            }
            drive = match (p.omega, p.detuning) {
                (Some(w), None) => drive.with_omega(p.i, p.j, w)?,
                (None, Some(e)) => drive.with_detuning(p.i, p.j, e)?,
                _ => {
                    return Err(CliError::Config(format!(
                        "pair override ({},{}) needs exactly one of omega or detuning",
                        p.i, p.j
                    )))
                }
            };
        }

        let r = &file.run;
        if !(r.t_max.is_finite() && r.t_max > 0.0) {
            return Err(CliError::Config(format!("run.t_max must be positive, got {}", r.t_max)));
        }
        if r.samples < 2 {
            return Err(CliError::Config(format!("run.samples must be at least 2, got {}", r.samples)));
        }
        for (name, v) in [("run.step", r.step), ("run.tol", r.tol), ("run.quadrature_step", r.quadrature_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let initial = match &r.initial {
            Initial::Index(k) if *k < n => StateVector::basis(n, *k),
            Initial::Index(k) => return Err(CliError::Config(format!("run.initial = {k} is not a level of n = {n}"))),
            Initial::Amplitudes(a) => {
                if a.len() != n {
                    return Err(CliError::Config(format!("run.initial has {} amplitudes, expected {n}", a.len())));
                }
                StateVector::normalized(a.iter().map(|&[x, y]| C64::new(x, y)).collect())?
            }
        };
        Ok(Self {
            levels,
            drive,
            solver: r.solver,
            t_max: r.t_max,
            samples: r.samples,
            initial,
            format: r.format,
            output: r.output.clone(),
            step: r.step,
            tol: r.tol,
            quadrature_step: r.quadrature_step,
        })
    }

    /// Canonical file form: every frequency explicit, so re-resolving it
    /// reproduces this configuration exactly.
    pub fn to_file(&self) -> ConfigFile {
        let n = self.levels.n();
        let adjacent = (1..n).map(|k| self.drive.adjacent(k)).collect();
        let pairs = self
            .drive
            .pairs()
            .filter(|((i, j), _)| j - i >= 2)
            .map(|((i, j), w)| PairOverride { i, j, omega: Some(w), detuning: None })
            .collect();
        let initial = if let Some(k) = self.basis_index() {
            Initial::Index(k)
        } else {
            Initial::Amplitudes(self.initial.amplitudes().iter().map(|z| [z.re, z.im]).collect())
        };
        ConfigFile {
            levels: LevelsSection { energies: self.levels.energies().to_vec() },
            drive: DriveSection {
                g: self.drive.g(),
                mode: if self.drive.is_rwa() { Mode::Rwa } else { Mode::Full },
                adjacent: Adjacent::Frequencies(adjacent),
                epsilon: None,
                pairs,
            },
            run: RunSection {
                solver: self.solver,
                t_max: self.t_max,
                samples: self.samples,
                initial,
                format: self.format,
                output: self.output.clone(),
                step: self.step,
                tol: self.tol,
                quadrature_step: self.quadrature_step,
            },
        }
    }

    /// `Some(k)` when the initial state is exactly `|k⟩`.
    pub fn basis_index(&self) -> Option<usize> {
        let n = self.levels.n();
        (0..n).find(|&k| self.initial == StateVector::basis(n, k))
    }

    pub fn times(&self) -> Vec<f64> {
        multirabi::propagate::uniform_grid(self.t_max, self.samples)
    }
}
