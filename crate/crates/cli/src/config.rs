//! Strict JSON run configuration.

use std::path::{Path, PathBuf};

use kzqsl_core::models::{EnergyConvention, ModelKind, ModelParams};
use kzqsl_core::qsl::{MinimumSearch, SpeedMode};
use kzqsl_core::ramps::RampKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Trace,
    Minimum,
    /// Sweep over the quench-time grid followed by a power-law fit.
    Sweep,
    LzEvolve,
    LzCrossover,
}

impl Task {
    fn needs_tau(self) -> bool {
        matches!(self, Task::Trace | Task::Minimum | Task::LzEvolve)
    }

    fn needs_grid(self) -> bool {
        matches!(self, Task::Sweep | Task::LzCrossover)
    }

    fn is_lz(self) -> bool {
        matches!(self, Task::LzEvolve | Task::LzCrossover)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    #[default]
    ImpulseDuration,
    NuMin,
}

/// Log-spaced quench-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    /// 20 points per decade, endpoints included.
    pub fn per_decade(min: f64, max: f64) -> Self {
        let decades = (max / min).log10();
        Self {
            min,
            max,
            points: (20.0 * decades).round() as usize + 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        kzqsl_core::scaling::log_grid(self.min, self.max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "Numerics::default_trace_points")]
    pub trace_points: usize,
    #[serde(default)]
    pub search: MinimumSearch,
    #[serde(default = "Numerics::default_lz_samples")]
    pub lz_samples: usize,
    #[serde(default = "Numerics::default_lz_tol")]
    pub lz_tol: f64,
}

impl Numerics {
    fn default_trace_points() -> usize {
        2001
    }
    fn default_lz_samples() -> usize {
        4096
    }
    fn default_lz_tol() -> f64 {
        1e-10
    }
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            trace_points: Self::default_trace_points(),
            search: MinimumSearch::default(),
            lz_samples: Self::default_lz_samples(),
            lz_tol: Self::default_lz_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "OutputSpec::default_dir")]
    pub dir: PathBuf,
    #[serde(default = "OutputSpec::default_prefix")]
    pub prefix: String,
}

impl OutputSpec {
    fn default_dir() -> PathBuf {
        PathBuf::from("out")
    }
    fn default_prefix() -> String {
        "run".to_string()
    }

    pub fn csv_path(&self) -> PathBuf {
        self.dir.join(format!("{}.csv", self.prefix))
    }

    pub fn json_path(&self) -> PathBuf {
        self.dir.join(format!("{}.json", self.prefix))
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: Self::default_dir(),
            prefix: Self::default_prefix(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub model: ModelParams,
    #[serde(default)]
    pub convention: EnergyConvention,
    #[serde(default)]
    pub speed_mode: SpeedMode,
    pub ramp: RampKind,
    #[serde(default)]
    pub tau_q: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub observable: Observable,
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default)]
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
    /// Worker count for sweeps; `None` uses every available core.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub tau_q: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub fit_window: Option<(f64, f64)>,
    pub thresholds: Vec<f64>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
    pub threads: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(task) = o.task {
            self.task = task;
        }
        if let Some(t) = o.tau_q {
            self.tau_q = Some(t);
        }
        if o.grid_min.is_some() || o.grid_max.is_some() || o.grid_points.is_some() {
            let base = self.grid;
            let (Some(min), Some(max)) = (
                o.grid_min.or(base.map(|g| g.min)),
                o.grid_max.or(base.map(|g| g.max)),
            ) else {
                return Err(invalid(
                    "grid override needs both --grid-min and --grid-max",
                ));
            };
            let points = o
                .grid_points
                .or(base.map(|g| g.points))
                .unwrap_or_else(|| GridSpec::per_decade(min, max).points);
            self.grid = Some(GridSpec { min, max, points });
        }
        if o.fit_window.is_some() {
            self.fit_window = o.fit_window;
        }
        if !o.thresholds.is_empty() {
            self.thresholds = o.thresholds.clone();
        }
        if let Some(dir) = &o.out_dir {
            self.output.dir = dir.clone();
        }
        if let Some(p) = &o.prefix {
            self.output.prefix = p.clone();
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
        Ok(())
    }

    /// Fill in values that default from other fields.
    pub fn resolve(&mut self) {
        if self.task.needs_grid() && self.fit_window.is_none() {
            if let Some(g) = self.grid {
                self.fit_window = Some((g.min, g.max));
            }
        }
    }

    /// Check every knob before any computation or filesystem access.
    pub fn validate(&self) -> Result<(), CliError> {
        let core = |e: kzqsl_core::Error| invalid(e.to_string());
        self.model.validate().map_err(core)?;
        self.ramp.validate().map_err(core)?;
        self.numerics.search.validate().map_err(core)?;
        if self.numerics.trace_points < 2 {
            return Err(invalid("numerics.trace_points must be at least 2"));
        }
        if self.numerics.lz_samples < 2 {
            return Err(invalid("numerics.lz_samples must be at least 2"));
        }
        if !(1e-13..=1e-6).contains(&self.numerics.lz_tol) {
            return Err(invalid(format!(
                "numerics.lz_tol must lie in [1e-13, 1e-6], got {}",
                self.numerics.lz_tol
            )));
        }

        if self.task.needs_tau() {
            let tau = self
                .tau_q
                .ok_or_else(|| invalid("tau_q is required for this task"))?;
            check_positive("tau_q", tau)?;
        }
        if self.task.needs_grid() {
            let g = self
                .grid
                .ok_or_else(|| invalid("grid is required for this task"))?;
            check_positive("grid.min", g.min)?;
            check_positive("grid.max", g.max)?;
            if g.max <= g.min {
                return Err(invalid("grid.max must exceed grid.min"));
            }
            if g.points < 2 {
                return Err(invalid("grid.points must be at least 2"));
            }
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo >= 0.0 && hi > lo) {
                return Err(invalid(format!(
                    "fit_window must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        for &k in &self.thresholds {
            if !(k > 0.0 && k < 1.0) {
                return Err(invalid(format!("thresholds must lie in (0, 1), got {k}")));
            }
        }
        if self.task == Task::LzCrossover && self.thresholds.is_empty() {
            return Err(invalid("lz_crossover needs at least one threshold"));
        }
        if self.task.is_lz() && !matches!(self.model.model, ModelKind::LandauZener { .. }) {
            return Err(invalid("lz tasks require a landau_zener model"));
        }
        if let Some(0) = self.threads {
            return Err(invalid("threads must be at least 1"));
        }
        let p = &self.output.prefix;
        if p.is_empty() || p.contains(['/', '\\']) || p == "." || p == ".." {
            return Err(invalid(format!(
                "output.prefix must be a plain file stem, got {p:?}"
            )));
        }
        Ok(())
    }

    pub fn lz_delta(&self) -> Option<f64> {
        match self.model.model {
            ModelKind::LandauZener { delta } => Some(delta),
            _ => None,
        }
    }
}

/// Parse `KZQSL_THREADS`. It overrides the config value; a flag overrides both.
pub fn env_threads(env: Option<&str>) -> Result<Option<usize>, CliError> {
    match env {
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(invalid(format!(
                "KZQSL_THREADS must be a positive integer, got {s:?}"
            ))),
        },
        None => Ok(None),
    }
}
