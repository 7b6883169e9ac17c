//! Bare Landau-Zener dynamics `i dψ/dt = (Δσ_x + g(t)σ_z) ψ` and the
//! infidelity-threshold estimate of the adiabatic-impulse crossover.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::models::{lz_ground_state, TwoLevelState};
use crate::qsl::uniform_grid;
use crate::ramps::RampProtocol;
use crate::{Error, Result};

type State = [Complex64; 2];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest embedded error estimate among accepted steps (absolute, in
    /// amplitude units).
    pub max_local_error: f64,
    /// Largest `| |ψ| − 1 |` seen at an output point before renormalisation.
    pub max_norm_drift: f64,
}

impl IntegratorStats {
    fn absorb(&mut self, other: IntegratorStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.max_local_error = self.max_local_error.max(other.max_local_error);
        self.max_norm_drift = self.max_norm_drift.max(other.max_norm_drift);
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Fifth- minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand-Prince 5(4) integrator with PI step-size control.
/// Absolute and relative tolerances are both `tol`.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub tol: f64,
    pub max_steps: usize,
}

impl Integrator {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_steps: 50_000_000,
        }
    }

    fn combine(y: &State, h: f64, ks: &[State], coeffs: &[f64]) -> State {
        let mut out = *y;
        for (k, &a) in ks.iter().zip(coeffs) {
            if a != 0.0 {
                out[0] += k[0] * (h * a);
                out[1] += k[1] * (h * a);
            }
        }
        out
    }

    fn error_norm(&self, err: &State, y: &State, y_new: &State) -> f64 {
        let mut sum = 0.0;
        for i in 0..2 {
            let scale = self.tol + self.tol * y[i].norm().max(y_new[i].norm());
            sum += (err[i].norm() / scale).powi(2);
        }
        (sum / 2.0).sqrt()
    }

    fn initial_step(
        &self,
        f: &impl Fn(f64, &State) -> State,
        t: f64,
        y: &State,
        f0: &State,
        dir: f64,
    ) -> f64 {
        let scale = |v: &State, s: &State| {
            let mut acc = 0.0;
            for i in 0..2 {
                acc += (v[i].norm() / (self.tol + self.tol * s[i].norm())).powi(2);
            }
            (acc / 2.0).sqrt()
        };
        let d0 = scale(y, y);
        let d1 = scale(f0, y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = Self::combine(y, dir * h0, &[*f0], &[1.0]);
        let f1 = f(t + dir * h0, &y1);
        let diff = [f1[0] - f0[0], f1[1] - f0[1]];
        let d2 = scale(&diff, y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1)
    }

    /// Integrate from `t0` through every time in `outputs` (monotone in the
    /// direction of integration, possibly backwards). At each output the
    /// callback receives the state and returns the state to continue from.
    pub fn integrate(
        &self,
        f: impl Fn(f64, &State) -> State,
        t0: f64,
        y0: State,
        outputs: &[f64],
        mut on_output: impl FnMut(usize, State) -> State,
    ) -> Result<IntegratorStats> {
        let mut stats = IntegratorStats::default();
        let Some(&t_last) = outputs.last() else {
            return Ok(stats);
        };
        let dir = if t_last >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&f, t, &y, &k1, dir);
        let mut err_prev: f64 = 1e-4;
        let mut steps = 0usize;

        for (idx, &target) in outputs.iter().enumerate() {
            if (target - t) * dir < 0.0 {
                return Err(Error::domain(
                    "output times must be monotone along the integration",
                ));
            }
            while (target - t) * dir > 0.0 {
                if steps >= self.max_steps {
                    return Err(Error::IntegrationFailure {
                        t,
                        step: h,
                        reason: format!("exceeded {} steps", self.max_steps),
                    });
                }
                let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
                if h < min_step {
                    return Err(Error::IntegrationFailure {
                        t,
                        step: h,
                        reason: "step size underflow".into(),
                    });
                }
                let remaining = (target - t).abs();
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                let hs = dir * step;

                let k2 = f(t + C[1] * hs, &Self::combine(&y, hs, &[k1], &A2));
                let k3 = f(t + C[2] * hs, &Self::combine(&y, hs, &[k1, k2], &A3));
                let k4 = f(t + C[3] * hs, &Self::combine(&y, hs, &[k1, k2, k3], &A4));
                let k5 = f(
                    t + C[4] * hs,
                    &Self::combine(&y, hs, &[k1, k2, k3, k4], &A5),
                );
                let k6 = f(
                    t + C[5] * hs,
                    &Self::combine(&y, hs, &[k1, k2, k3, k4, k5], &A6),
                );
                let y_new = Self::combine(&y, hs, &[k1, k2, k3, k4, k5, k6], &B);
                let t_new = if last { target } else { t + hs };
                let k7 = f(t_new, &y_new);
                let err_vec = Self::combine(
                    &[Complex64::new(0.0, 0.0); 2],
                    hs,
                    &[k1, k2, k3, k4, k5, k6, k7],
                    &E,
                );
                let err = self.error_norm(&err_vec, &y, &y_new);
                steps += 1;

                if err <= 1.0 {
                    stats.accepted += 1;
                    stats.max_local_error = stats
                        .max_local_error
                        .max(err_vec[0].norm().max(err_vec[1].norm()));
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    let err_c = err.max(1e-10);
                    let fac = 0.9 * err_c.powf(-0.17) * err_prev.powf(0.04);
                    let proposal = step * fac.clamp(0.2, 10.0);
                    // A step shortened to land on an output point says nothing
                    // about the sustainable step size.
                    h = if last { h.max(proposal) } else { proposal };
                    err_prev = err_c;
                } else {
                    stats.rejected += 1;
                    h = step * (0.9 * err.powf(-0.2)).max(0.2);
                }
            }
            let returned = on_output(idx, y);
            if returned != y {
                y = returned;
                k1 = f(t, &y);
            }
        }
        Ok(stats)
    }
}

/// `dψ/dt = −i (Δσ_x + g σ_z) ψ`.
fn lz_rhs(delta: f64, g: f64, psi: &State) -> State {
    let minus_i = Complex64::new(0.0, -1.0);
    [
        minus_i * (psi[0] * g + psi[1] * delta),
        minus_i * (psi[0] * delta - psi[1] * g),
    ]
}

fn field(ramp: &RampProtocol, t: f64) -> f64 {
    ramp.g_of_t(t.clamp(0.0, ramp.tau_q))
        .expect("clamped time lies in the ramp window")
}

fn check_lz_inputs(delta: f64, tol: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::domain(format!(
            "tol must lie in [1e-13, 1e-6], got {tol}"
        )));
    }
    Ok(())
}

/// Propagate `state` from `t0` to `t1` (either direction) under the
/// Landau-Zener Hamiltonian driven by `ramp`.
pub fn propagate_lz(
    delta: f64,
    ramp: &RampProtocol,
    state: TwoLevelState,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<(TwoLevelState, IntegratorStats)> {
    check_lz_inputs(delta, tol)?;
    let mut out = state.as_array();
    let stats = Integrator::new(tol).integrate(
        |t, psi| lz_rhs(delta, field(ramp, t), psi),
        t0,
        state.as_array(),
        &[t1],
        |_, y| {
            out = y;
            y
        },
    )?;
    Ok((TwoLevelState::from_array(out), stats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub fields: Vec<f64>,
    pub states: Vec<TwoLevelState>,
    pub infidelity: Vec<f64>,
    pub integrator_stats: IntegratorStats,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `I = 1 − |⟨φ_0(g)|ψ⟩|²` against the instantaneous ground state.
pub fn infidelity(state: &TwoLevelState, delta: f64, g: f64) -> f64 {
    (1.0 - lz_ground_state(delta, g).fidelity(state)).clamp(0.0, 1.0)
}

/// Evolve the instantaneous ground state at `g(0)` along `ramp`, recording
/// state and infidelity at `sample_count` uniform times spanning `[0, τ_q]`.
pub fn evolve_lz(
    delta: f64,
    ramp: &RampProtocol,
    sample_count: usize,
    tol: f64,
) -> Result<EvolutionTrace> {
    check_lz_inputs(delta, tol)?;
    if sample_count < 2 {
        return Err(Error::domain("sample_count must be at least 2"));
    }
    let times = uniform_grid(0.0, ramp.tau_q, sample_count);
    let psi0 = lz_ground_state(delta, ramp.initial_value());

    let mut fields = Vec::with_capacity(sample_count);
    let mut states = Vec::with_capacity(sample_count);
    let mut infid = Vec::with_capacity(sample_count);
    let mut drift: f64 = 0.0;

    let mut stats = Integrator::new(tol).integrate(
        |t, psi| lz_rhs(delta, field(ramp, t), psi),
        0.0,
        psi0.as_array(),
        &times,
        |i, y| {
            let raw = TwoLevelState::from_array(y);
            drift = drift.max((raw.norm() - 1.0).abs());
            let psi = raw.normalized();
            let g = field(ramp, times[i]);
            fields.push(g);
            infid.push(infidelity(&psi, delta, g));
            states.push(psi);
            psi.as_array()
        },
    )?;
    stats.absorb(IntegratorStats {
        max_norm_drift: drift,
        ..Default::default()
    });

    Ok(EvolutionTrace {
        times,
        fields,
        states,
        infidelity: infid,
        integrator_stats: stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    LastUpwardCrossing,
    NeverCrossed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverResult {
    pub threshold: f64,
    pub t_hat: Option<f64>,
    /// `τ_q − t̂`.
    pub t_star: Option<f64>,
    pub crossing_kind: CrossingKind,
}

/// Earliest time `t̂` after which the sampled infidelity stays at or above `k`:
/// the last upward crossing of `k`, linearly interpolated between samples.
pub fn crossover_time(trace: &EvolutionTrace, k: f64) -> Result<CrossoverResult> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::domain(format!(
            "threshold must lie in (0, 1), got {k}"
        )));
    }
    let (Some(&last), Some(&tau_q)) = (trace.infidelity.last(), trace.times.last()) else {
        return Err(Error::domain("empty evolution trace"));
    };
    if last < k {
        return Ok(CrossoverResult {
            threshold: k,
            t_hat: None,
            t_star: None,
            crossing_kind: CrossingKind::NeverCrossed,
        });
    }

    let infid = &trace.infidelity;
    let times = &trace.times;
    let mut j = infid.len() - 1;
    while j > 0 && infid[j - 1] >= k {
        j -= 1;
    }
    let t_hat = if j == 0 {
        times[0]
    } else {
        let (i0, i1) = (infid[j - 1], infid[j]);
        let w = (k - i0) / (i1 - i0);
        times[j - 1] + w * (times[j] - times[j - 1])
    };

    Ok(CrossoverResult {
        threshold: k,
        t_hat: Some(t_hat),
        t_star: Some(tau_q - t_hat),
        crossing_kind: CrossingKind::LastUpwardCrossing,
    })
}
