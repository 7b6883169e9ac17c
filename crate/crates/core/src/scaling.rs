//! Quench-time sweeps and power-law fits `value ≈ a τ_q^β`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{crossover_time, evolve_lz, CrossoverResult};
use crate::models::{EnergyConvention, ModelParams};
use crate::qsl::{MinimumSearch, SpeedMode, SpeedProfile};
use crate::ramps::RampKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub tau_q: f64,
    pub value: f64,
    pub valid: bool,
}

impl ScalingPoint {
    fn invalid(tau_q: f64) -> Self {
        Self {
            tau_q,
            value: f64::NAN,
            valid: false,
        }
    }

    fn from_value(tau_q: f64, value: Option<f64>) -> Self {
        match value {
            Some(v) if v.is_finite() => Self {
                tau_q,
                value: v,
                valid: true,
            },
            _ => Self::invalid(tau_q),
        }
    }
}

/// Everything needed to locate the speed minimum for one quench time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QslSetup {
    pub model: ModelParams,
    pub convention: EnergyConvention,
    pub mode: SpeedMode,
    pub ramp: RampKind,
    pub search: MinimumSearch,
}

impl QslSetup {
    pub fn new(model: ModelParams, convention: EnergyConvention, ramp: RampKind) -> Self {
        Self {
            model,
            convention,
            mode: SpeedMode::Full,
            ramp,
            search: MinimumSearch::default(),
        }
    }

    pub fn profile(&self, tau_q: f64) -> Result<SpeedProfile> {
        Ok(
            SpeedProfile::new(self.model, self.convention, self.ramp.with_tau(tau_q)?)
                .with_mode(self.mode),
        )
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.ramp.validate()?;
        self.search.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzSetup {
    pub delta: f64,
    pub ramp: RampKind,
    pub sample_count: usize,
    pub tol: f64,
}

impl Default for LzSetup {
    fn default() -> Self {
        Self {
            delta: 0.1,
            ramp: RampKind::LinearTo { g0: -5.0, g1: 0.0 },
            sample_count: 4096,
            tol: 1e-10,
        }
    }
}

impl LzSetup {
    fn validate(&self) -> Result<()> {
        ModelParams::landau_zener(self.delta)?;
        self.ramp.validate()?;
        if self.sample_count < 2 {
            return Err(Error::domain("sample_count must be at least 2"));
        }
        if !(1e-13..=1e-6).contains(&self.tol) {
            return Err(Error::domain(format!(
                "tol must lie in [1e-13, 1e-6], got {}",
                self.tol
            )));
        }
        Ok(())
    }

    /// Crossover results for each threshold at one quench time.
    pub fn crossovers(&self, tau_q: f64, thresholds: &[f64]) -> Result<Vec<CrossoverResult>> {
        let ramp = self.ramp.with_tau(tau_q)?;
        let trace = evolve_lz(self.delta, &ramp, self.sample_count, self.tol)?;
        thresholds
            .iter()
            .map(|&k| crossover_time(&trace, k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum SweepTask {
    /// Impulse duration `|t_c − t_m|`.
    QslMinimum(QslSetup),
    /// Minimum speed `ν_min`.
    NuMin(QslSetup),
    /// `t* = τ_q − t̂` from the bare Landau-Zener infidelity.
    LzInfidelity { setup: LzSetup, threshold: f64 },
}

impl SweepTask {
    pub fn validate(&self) -> Result<()> {
        match self {
            SweepTask::QslMinimum(s) | SweepTask::NuMin(s) => s.validate(),
            SweepTask::LzInfidelity { setup, threshold } => {
                setup.validate()?;
                if !(*threshold > 0.0 && *threshold < 1.0) {
                    return Err(Error::domain(format!(
                        "threshold must lie in (0, 1), got {threshold}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Observable for a single quench time; `Ok(None)` marks an invalid point.
    pub fn observe(&self, tau_q: f64) -> Result<Option<f64>> {
        match self {
            SweepTask::QslMinimum(s) | SweepTask::NuMin(s) => {
                let found = match s.profile(tau_q)?.find_minimum(&s.search) {
                    Ok(m) => m,
                    Err(Error::NoMinimum { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                Ok(match self {
                    SweepTask::QslMinimum(_) => found.impulse_duration,
                    _ => Some(found.nu_min),
                })
            }
            SweepTask::LzInfidelity { setup, threshold } => {
                let c = setup.crossovers(tau_q, &[*threshold])?;
                Ok(c[0].t_star)
            }
        }
    }
}

fn check_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() {
        return Err(Error::domain("empty quench-time grid"));
    }
    if tau_grid.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::domain("quench times must be positive"));
    }
    if tau_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain(
            "quench-time grid must be strictly increasing",
        ));
    }
    Ok(())
}

/// Run `task` for every quench time. Points run in parallel on the current
/// rayon pool; results keep grid order. Failures at a single point produce an
/// invalid point rather than aborting the sweep.
pub fn sweep(task: &SweepTask, tau_grid: &[f64]) -> Result<Vec<ScalingPoint>> {
    task.validate()?;
    check_grid(tau_grid)?;
    let points: Vec<ScalingPoint> = tau_grid
        .par_iter()
        .map(|&tau| match task.observe(tau) {
            Ok(v) => ScalingPoint::from_value(tau, v),
            Err(_) => ScalingPoint::invalid(tau),
        })
        .collect();
    if points.iter().all(|p| !p.valid) {
        return Err(Error::EmptySweep);
    }
    Ok(points)
}

/// One Landau-Zener evolution per quench time, evaluated at several thresholds.
pub fn lz_crossover_sweep(
    setup: &LzSetup,
    thresholds: &[f64],
    tau_grid: &[f64],
) -> Result<Vec<(f64, Vec<CrossoverResult>)>> {
    setup.validate()?;
    check_grid(tau_grid)?;
    for &k in thresholds {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::domain(format!(
                "threshold must lie in (0, 1), got {k}"
            )));
        }
    }
    tau_grid
        .par_iter()
        .map(|&tau| setup.crossovers(tau, thresholds).map(|c| (tau, c)))
        .collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub amplitude: f64,
    pub beta: f64,
    pub stderr_beta: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    /// Root-mean-square residual of `ln value`.
    pub residual_rms: f64,
}

/// Ordinary least squares of `ln value` on `ln τ_q` over valid points with
/// `τ_q` in the closed `window`.
pub fn fit_power_law(points: &[ScalingPoint], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    let selected: Vec<&ScalingPoint> = points
        .iter()
        .filter(|p| p.valid && p.tau_q >= lo && p.tau_q <= hi)
        .collect();
    if let Some(bad) = selected
        .iter()
        .find(|p| !(p.value > 0.0) || !(p.tau_q > 0.0))
    {
        return Err(Error::domain(format!(
            "power-law fit needs positive data, got value {} at tau_q {}",
            bad.value, bad.tau_q
        )));
    }
    if selected.len() < 3 {
        return Err(Error::InsufficientData {
            found: selected.len(),
            needed: 3,
        });
    }

    let n = selected.len() as f64;
    let xs: Vec<f64> = selected.iter().map(|p| p.tau_q.ln()).collect();
    let ys: Vec<f64> = selected.iter().map(|p| p.value.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("all fitted points share one quench time"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let beta = sxy / sxx;
    let intercept = y_mean - beta * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - beta * x).powi(2))
        .sum();

    Ok(FitResult {
        amplitude: intercept.exp(),
        beta,
        stderr_beta: (ssr / (n - 2.0) / sxx).sqrt(),
        window,
        n_points: selected.len(),
        residual_rms: (ssr / n).sqrt(),
    })
}

/// Fit over the full span of the valid points.
pub fn fit_all(points: &[ScalingPoint]) -> Result<FitResult> {
    let valid = points.iter().filter(|p| p.valid).map(|p| p.tau_q);
    let lo = valid.clone().fold(f64::INFINITY, f64::min);
    let hi = valid.fold(f64::NEG_INFINITY, f64::max);
    fit_power_law(points, (lo, hi))
}
