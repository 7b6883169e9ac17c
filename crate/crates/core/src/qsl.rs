//! Speed of the counterdiabatically controlled evolution,
//!
//! ```text
//! ν(t) = sqrt(ε(t)² + (∂ₜC)²) / (cos L_t · sin L_t),
//! ```
//!
//! with `L_t` the Bures angle between the reference ground state at `g_ref` and
//! the instantaneous ground state. The minimum of `ν` over the ramp marks the
//! crossover from the adiabatic to the impulse regime.

use serde::{Deserialize, Serialize};

use crate::error::Monotone;
use crate::models::{EnergyConvention, ModelKind, ModelParams};
use crate::ramps::RampProtocol;
use crate::{Error, Result};

/// How the denominator of the speed is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedMode {
    /// Full expression including `cos L sin L`.
    #[default]
    Full,
    /// Numerator only (denominator frozen at one). Matches the closed-form
    /// Landau-Zener analysis, where the denominator is treated as constant.
    NumeratorOnly,
}

/// The speed and its ingredients at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    pub t: f64,
    pub g: f64,
    pub energy: f64,
    pub cost_rate: f64,
    pub bures: f64,
    pub nu_qsl: f64,
}

impl SpeedSample {
    pub fn is_infinite(&self) -> bool {
        !self.nu_qsl.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimumResult {
    pub t_m: f64,
    pub nu_min: f64,
    /// `|t_c − t_m|`; `None` when the ramp never reaches the critical point.
    pub impulse_duration: Option<f64>,
    /// Coarse bracket handed to the golden-section refinement.
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimumSearch {
    /// Search window; defaults to `(window_floor·τ_q, τ_q)`.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default = "MinimumSearch::default_coarse_points")]
    pub coarse_points: usize,
    #[serde(default = "MinimumSearch::default_tol_rel")]
    pub tol_rel: f64,
    #[serde(default = "MinimumSearch::default_window_floor")]
    pub window_floor: f64,
    #[serde(default = "MinimumSearch::default_max_iterations")]
    pub max_iterations: usize,
}

impl MinimumSearch {
    fn default_coarse_points() -> usize {
        512
    }
    fn default_tol_rel() -> f64 {
        1e-10
    }
    fn default_window_floor() -> f64 {
        1e-6
    }
    fn default_max_iterations() -> usize {
        500
    }

    pub fn with_window(mut self, t_lo: f64, t_hi: f64) -> Self {
        self.window = Some((t_lo, t_hi));
        self
    }

    pub fn with_coarse_points(mut self, n: usize) -> Self {
        self.coarse_points = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.coarse_points < 16 {
            return Err(Error::domain(format!(
                "coarse_points must be >= 16, got {}",
                self.coarse_points
            )));
        }
        if !(self.tol_rel >= 1e-14 && self.tol_rel < 1.0) {
            return Err(Error::domain(format!(
                "tol_rel must lie in [1e-14, 1), got {}",
                self.tol_rel
            )));
        }
        if !(self.window_floor > 0.0 && self.window_floor < 1.0) {
            return Err(Error::domain(format!(
                "window_floor must lie in (0, 1), got {}",
                self.window_floor
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be positive"));
        }
        Ok(())
    }
}

impl Default for MinimumSearch {
    fn default() -> Self {
        Self {
            window: None,
            coarse_points: Self::default_coarse_points(),
            tol_rel: Self::default_tol_rel(),
            window_floor: Self::default_window_floor(),
            max_iterations: Self::default_max_iterations(),
        }
    }
}

/// A model driven along a ramp, with the reference state for the Bures angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub model: ModelParams,
    pub convention: EnergyConvention,
    pub mode: SpeedMode,
    pub ramp: RampProtocol,
    pub g_ref: f64,
}

impl SpeedProfile {
    /// Reference state is the ground state at the start of the ramp.
    pub fn new(model: ModelParams, convention: EnergyConvention, ramp: RampProtocol) -> Self {
        Self {
            model,
            convention,
            mode: SpeedMode::Full,
            ramp,
            g_ref: ramp.initial_value(),
        }
    }

    pub fn with_mode(mut self, mode: SpeedMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_reference(mut self, g_ref: f64) -> Self {
        self.g_ref = g_ref;
        self
    }

    /// Time `t_c` at which the ramp crosses the model's critical point.
    pub fn critical_time(&self) -> Result<f64> {
        self.ramp.critical_time(self.model.critical_point())
    }

    pub fn speed_at(&self, t: f64) -> Result<SpeedSample> {
        let g = self.ramp.g_of_t(t)?;
        let energy = self
            .model
            .ground_energy(self.convention, g)
            .unwrap_or(f64::NAN);
        let cost_rate = match self.ramp.dgdt(t) {
            Ok(gdot) => match self.model.cd_cost_rate(g, gdot) {
                Ok(c) => c,
                Err(Error::InfiniteRate(_)) => f64::INFINITY,
                Err(_) => f64::NAN,
            },
            Err(Error::InfiniteRate(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let bures = match self.model.model {
            ModelKind::Synthetic { .. } => f64::NAN,
            _ => self.model.bures_angle(self.g_ref, g).unwrap_or(f64::NAN),
        };

        let numerator = energy.hypot(cost_rate);
        let denominator = match (self.mode, self.model.model) {
            (SpeedMode::NumeratorOnly, _) | (_, ModelKind::Synthetic { .. }) => 1.0,
            (SpeedMode::Full, _) => {
                if bures > 0.0 && bures < std::f64::consts::FRAC_PI_2 {
                    bures.cos() * bures.sin()
                } else {
                    0.0
                }
            }
        };
        let nu_qsl = if numerator.is_finite() && denominator > 0.0 {
            numerator / denominator
        } else {
            f64::INFINITY
        };

        Ok(SpeedSample {
            t,
            g,
            energy,
            cost_rate,
            bures,
            nu_qsl,
        })
    }

    pub fn trace(&self, grid: &[f64]) -> Result<Vec<SpeedSample>> {
        if grid.is_empty() {
            return Err(Error::domain("empty time grid"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("time grid must be strictly ascending"));
        }
        grid.iter().map(|&t| self.speed_at(t)).collect()
    }

    /// `n` uniformly spaced times covering `[0, τ_q]`.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        uniform_grid(0.0, self.ramp.tau_q, n)
    }

    pub fn default_window(&self, search: &MinimumSearch) -> (f64, f64) {
        let tau = self.ramp.tau_q;
        (search.window_floor * tau, tau)
    }

    /// Speed as a plain function of time; non-finite values map to `+∞`.
    fn nu(&self, t: f64) -> f64 {
        match self.speed_at(t) {
            Ok(s) if s.nu_qsl.is_finite() => s.nu_qsl,
            _ => f64::INFINITY,
        }
    }

    /// First interior minimum of `ν` in the search window: a uniform coarse
    /// scan finds a bracketing triple, golden-section search refines it.
    pub fn find_minimum(&self, search: &MinimumSearch) -> Result<MinimumResult> {
        search.validate()?;
        let (t_lo, t_hi) = search.window.unwrap_or_else(|| self.default_window(search));
        if !(t_lo > 0.0 && t_lo < t_hi && t_hi <= self.ramp.tau_q) {
            return Err(Error::domain(format!(
                "minimum window ({t_lo}, {t_hi}) must satisfy 0 < t_lo < t_hi <= tau_q = {}",
                self.ramp.tau_q
            )));
        }

        let grid = uniform_grid(t_lo, t_hi, search.coarse_points);
        let values: Vec<f64> = grid.iter().map(|&t| self.nu(t)).collect();
        let (i_lo, i_hi) = coarse_bracket(&values).ok_or_else(|| Error::NoMinimum {
            t_lo,
            t_hi,
            direction: monotone_direction(&values),
        })?;
        let bracket = (grid[i_lo], grid[i_hi]);

        let golden = golden_section(
            |t| self.nu(t),
            bracket,
            search.tol_rel,
            search.max_iterations,
        );
        let t_c = self.critical_time().ok();
        // With the default window a crossing ramp reports its minimum on the
        // approach side only; a first minimum past t_c means none before it.
        if let (None, Some(t_c)) = (search.window, t_c) {
            if t_c > t_lo && t_c < t_hi && golden.x > t_c {
                return Err(Error::NoMinimum {
                    t_lo,
                    t_hi: t_c,
                    direction: Monotone::Decreasing,
                });
            }
        }
        let impulse_duration = t_c.map(|t_c| (t_c - golden.x).abs());

        Ok(MinimumResult {
            t_m: golden.x,
            nu_min: golden.fx,
            impulse_duration,
            bracket,
            iterations: golden.iterations,
            converged: golden.converged,
        })
    }
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Indices `(i − 1, j)` around the first interior local minimum, where the
/// middle value is strictly below its left neighbour and strictly below the
/// first differing value to its right. Plateaus resolve to their earliest point.
fn coarse_bracket(values: &[f64]) -> Option<(usize, usize)> {
    let n = values.len();
    for i in 1..n.saturating_sub(1) {
        let v = values[i];
        if !(v.is_finite() && v < values[i - 1]) {
            continue;
        }
        let mut j = i + 1;
        while j < n && values[j] == v {
            j += 1;
        }
        if j < n && values[j] > v {
            return Some((i - 1, j));
        }
    }
    None
}

fn monotone_direction(values: &[f64]) -> Monotone {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return Monotone::Flat;
    }
    if finite.windows(2).all(|w| w[1] <= w[0]) && finite.first() != finite.last() {
        Monotone::Decreasing
    } else if finite.windows(2).all(|w| w[1] >= w[0]) && finite.first() != finite.last() {
        Monotone::Increasing
    } else {
        Monotone::Flat
    }
}

struct GoldenOutcome {
    x: f64,
    fx: f64,
    iterations: usize,
    converged: bool,
}

/// Golden-section search on `[a, b]` until the bracket width drops below
/// `tol_rel · |x|`. Ties keep the left (earlier) sub-interval.
fn golden_section(
    f: impl Fn(f64) -> f64,
    (mut a, mut b): (f64, f64),
    tol_rel: f64,
    max_iterations: usize,
) -> GoldenOutcome {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        let best = if f1 <= f2 { x1 } else { x2 };
        if b - a <= tol_rel * best.abs() {
            converged = true;
            break;
        }
        iterations += 1;
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }

    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    GoldenOutcome {
        x,
        fx,
        iterations,
        converged,
    }
}

/// Kibble-Zurek crossover exponent `zν/(1 + zν)`.
pub fn kz_exponent(z_nu: f64) -> f64 {
    z_nu / (1.0 + z_nu)
}

/// Exact minimiser of `sqrt((t/τ_q)^{2zν} + (zν/t)²)`:
/// `t_m = (zν)^{1/(2(zν+1))} τ_q^{zν/(1+zν)}`.
pub fn synthetic_tm_closed_form(z_nu: f64, tau_q: f64) -> f64 {
    z_nu.powf(1.0 / (2.0 * (z_nu + 1.0))) * tau_q.powf(kz_exponent(z_nu))
}

/// Largest quench time `τ_q* = √2 g1/Δ²` for which the Landau-Zener numerator
/// has an interior minimum on the linear ramp `g = g1 t/τ_q`.
pub fn lz_tau_star(delta: f64, g1: f64) -> f64 {
    std::f64::consts::SQRT_2 * g1 / (delta * delta)
}

/// Closed-form minimiser of the Landau-Zener speed numerator,
/// `t_m = sqrt(2^{1/3} Δ^{2/3} τ_q^{4/3} / g1^{4/3} − Δ² τ_q² / g1²)`.
pub fn lz_tm_closed_form(delta: f64, g1: f64, tau_q: f64) -> Result<f64> {
    if !(delta > 0.0 && g1 > 0.0 && tau_q > 0.0) {
        return Err(Error::domain("delta, g1 and tau_q must be positive"));
    }
    let tau_star = lz_tau_star(delta, g1);
    if tau_q > tau_star {
        return Err(Error::ValidityExceeded { tau_q, tau_star });
    }
    let lead = 2f64.cbrt() * (delta * delta).cbrt() * (tau_q / g1).powf(4.0 / 3.0);
    let correction = (delta * tau_q / g1).powi(2);
    Ok((lead - correction).max(0.0).sqrt())
}
