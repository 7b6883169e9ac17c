//! Geometric quantum speed limits for counterdiabatically driven ramps through
//! quantum critical points.
//!
//! The crate evaluates the controlled-dynamics speed
//! `ν(t) = sqrt(ε(t)² + (∂ₜC)²) / (cos L sin L)` for a handful of exactly
//! solvable critical models, locates its interior minimum `t_m` (the
//! adiabatic-impulse crossover), integrates the bare Landau-Zener dynamics as an
//! independent crossover estimator, and fits power laws to quench-time sweeps.
//!
//! Module map:
//! - [`ramps`]: driving schedules `g(t)` and their exact derivatives.
//! - [`models`]: ground energies, counterdiabatic cost rates and Bures angles.
//! - [`qsl`]: speed samples, traces, minimum search and closed-form crossovers.
//! - [`dynamics`]: Landau-Zener Schrödinger integration and infidelity thresholds.
//! - [`scaling`]: quench-time sweeps and log-log power-law fits.

pub mod dynamics;
pub mod error;
pub mod models;
pub mod qsl;
pub mod ramps;
pub mod scaling;

pub use error::{Error, Result};
