//! Driving schedules `g(t)` on the closed window `[0, τ_q]`.
//!
//! Schedules are kept analytic (kind + parameters) so that `ġ` is exact.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of a ramp, independent of its duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RampKind {
    /// `g(t) = g0 + (g1 − g0) t/τ_q`.
    LinearTo { g0: f64, g1: f64 },
    /// `g(t) = 1 − (1 − t/τ_q)^r`, reaching `g = 1` exactly at `t = τ_q`.
    PowerApproach { r: f64 },
    /// `g(t) = g1 (t/τ_q)^r`.
    PowerFromZero { r: f64, g1: f64 },
}

impl RampKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RampKind::LinearTo { g0, g1 } => {
                if !g0.is_finite() || !g1.is_finite() {
                    return Err(Error::domain("linear ramp endpoints must be finite"));
                }
            }
            RampKind::PowerApproach { r } => check_exponent(r)?,
            RampKind::PowerFromZero { r, g1 } => {
                check_exponent(r)?;
                if !g1.is_finite() {
                    return Err(Error::domain("power ramp amplitude must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Instantiate the shape with a concrete quench time.
    pub fn with_tau(self, tau_q: f64) -> Result<RampProtocol> {
        RampProtocol::new(self, tau_q)
    }
}

fn check_exponent(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "ramp exponent must be positive, got {r}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampProtocol {
    pub kind: RampKind,
    pub tau_q: f64,
}

impl RampProtocol {
    pub fn new(kind: RampKind, tau_q: f64) -> Result<Self> {
        kind.validate()?;
        if !(tau_q.is_finite() && tau_q > 0.0) {
            return Err(Error::domain(format!(
                "tau_q must be positive, got {tau_q}"
            )));
        }
        Ok(Self { kind, tau_q })
    }

    pub fn linear(g0: f64, g1: f64, tau_q: f64) -> Result<Self> {
        Self::new(RampKind::LinearTo { g0, g1 }, tau_q)
    }

    fn scaled_time(&self, t: f64) -> Result<f64> {
        // Grids like τ·i/n can overshoot τ by an ulp or two.
        let slack = 4.0 * f64::EPSILON * self.tau_q;
        if !(t >= -slack && t <= self.tau_q + slack) {
            return Err(Error::domain(format!(
                "t = {t} outside ramp window [0, {}]",
                self.tau_q
            )));
        }
        Ok((t / self.tau_q).clamp(0.0, 1.0))
    }

    pub fn g_of_t(&self, t: f64) -> Result<f64> {
        let s = self.scaled_time(t)?;
        Ok(match self.kind {
            RampKind::LinearTo { g0, g1 } => {
                // Exact endpoints regardless of rounding in g0 + (g1 - g0) s.
                if s == 1.0 {
                    g1
                } else {
                    g0 + (g1 - g0) * s
                }
            }
            RampKind::PowerApproach { r } => 1.0 - (1.0 - s).powf(r),
            RampKind::PowerFromZero { r, g1 } => g1 * s.powf(r),
        })
    }

    /// Exact time derivative `ġ(t)`.
    pub fn dgdt(&self, t: f64) -> Result<f64> {
        let s = self.scaled_time(t)?;
        let tau = self.tau_q;
        match self.kind {
            RampKind::LinearTo { g0, g1 } => Ok((g1 - g0) / tau),
            RampKind::PowerApproach { r } => {
                if r < 1.0 && s == 1.0 {
                    return Err(Error::InfiniteRate(format!(
                        "power-approach ramp with r = {r} < 1 at t = tau_q"
                    )));
                }
                if r == 1.0 {
                    return Ok(1.0 / tau);
                }
                Ok(r * (1.0 - s).powf(r - 1.0) / tau)
            }
            RampKind::PowerFromZero { r, g1 } => {
                if r < 1.0 && s == 0.0 {
                    return Err(Error::InfiniteRate(format!(
                        "power-from-zero ramp with r = {r} < 1 at t = 0"
                    )));
                }
                if r == 1.0 {
                    return Ok(g1 / tau);
                }
                Ok(g1 * r * s.powf(r - 1.0) / tau)
            }
        }
    }

    pub fn initial_value(&self) -> f64 {
        match self.kind {
            RampKind::LinearTo { g0, .. } => g0,
            RampKind::PowerApproach { .. } | RampKind::PowerFromZero { .. } => 0.0,
        }
    }

    pub fn final_value(&self) -> f64 {
        match self.kind {
            RampKind::LinearTo { g1, .. } | RampKind::PowerFromZero { g1, .. } => g1,
            RampKind::PowerApproach { .. } => 1.0,
        }
    }

    /// The unique `t_c` with `g(t_c) = g_c`.
    pub fn critical_time(&self, g_c: f64) -> Result<f64> {
        let (a, b) = (self.initial_value(), self.final_value());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if !(lo..=hi).contains(&g_c) {
            return Err(Error::domain(format!(
                "g_c = {g_c} outside ramp range [{lo}, {hi}]"
            )));
        }
        if a == b {
            return Err(Error::domain("constant ramp has no unique critical time"));
        }
        let s = match self.kind {
            RampKind::LinearTo { g0, g1 } => (g_c - g0) / (g1 - g0),
            RampKind::PowerApproach { r } => 1.0 - (1.0 - g_c).powf(1.0 / r),
            RampKind::PowerFromZero { r, g1 } => (g_c / g1).powf(1.0 / r),
        };
        Ok((s * self.tau_q).clamp(0.0, self.tau_q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn linear_midpoint_and_slope() {
        let ramp = RampProtocol::linear(0.0, 2.0, 10.0).unwrap();
        assert_eq!(ramp.g_of_t(5.0).unwrap(), 1.0);
        for t in [0.0, 3.3, 10.0] {
            assert_relative_eq!(ramp.dgdt(t).unwrap(), 0.2, max_relative = 1e-15);
        }
    }

    #[test]
    fn power_approach_endpoints_and_rates() {
        let ramp = RampKind::PowerApproach { r: 1.25 }.with_tau(1.0).unwrap();
        assert_eq!(ramp.g_of_t(1.0).unwrap(), 1.0);
        assert_eq!(ramp.g_of_t(0.0).unwrap(), 0.0);
        assert_eq!(ramp.dgdt(1.0).unwrap(), 0.0);

        let lin = RampKind::PowerApproach { r: 1.0 }.with_tau(4.0).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert_relative_eq!(lin.dgdt(t).unwrap(), 0.25, max_relative = 1e-15);
        }
    }

    #[test]
    fn critical_times() {
        let ramp = RampProtocol::linear(0.0, 2.0, 10.0).unwrap();
        assert_eq!(ramp.critical_time(1.0).unwrap(), 5.0);
        for r in [0.5, 1.0, 1.25, 3.0] {
            let ramp = RampKind::PowerApproach { r }.with_tau(7.0).unwrap();
            assert_eq!(ramp.critical_time(1.0).unwrap(), 7.0);
        }
        let ramp = RampProtocol::linear(0.0, 1.0, 3.0).unwrap();
        assert_eq!(ramp.critical_time(1.0).unwrap(), 3.0);
        assert!(matches!(ramp.critical_time(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn out_of_window_and_singular_rates() {
        let ramp = RampProtocol::linear(0.0, 1.0, 2.0).unwrap();
        assert!(matches!(ramp.g_of_t(-1e-9), Err(Error::Domain(_))));
        assert_eq!(ramp.g_of_t(2.0 * (1.0 + f64::EPSILON)).unwrap(), 1.0);
        assert!(matches!(ramp.g_of_t(2.0 + 1e-9), Err(Error::Domain(_))));

        let ramp = RampKind::PowerFromZero { r: 0.5, g1: 1.0 }
            .with_tau(1.0)
            .unwrap();
        assert!(matches!(ramp.dgdt(0.0), Err(Error::InfiniteRate(_))));
        assert!(ramp.dgdt(0.5).unwrap().is_finite());

        assert!(RampProtocol::linear(0.0, 1.0, -1.0).is_err());
        assert!(RampKind::PowerApproach { r: 0.0 }.with_tau(1.0).is_err());
    }

    fn any_ramp() -> impl Strategy<Value = RampProtocol> {
        let tau = 0.1f64..1e3;
        prop_oneof![
            (-3.0f64..0.0, 0.5f64..3.0, tau.clone()).prop_map(|(g0, d, tau)| RampProtocol::linear(
                g0,
                g0 + d,
                tau
            )
            .unwrap()),
            (0.3f64..3.0, tau.clone())
                .prop_map(|(r, tau)| RampKind::PowerApproach { r }.with_tau(tau).unwrap()),
            (0.3f64..3.0, 0.5f64..3.0, tau).prop_map(|(r, g1, tau)| {
                RampKind::PowerFromZero { r, g1 }.with_tau(tau).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn monotone_on_grid(ramp in any_ramp()) {
            let mut prev = ramp.g_of_t(0.0).unwrap();
            for i in 1..=200 {
                let g = ramp.g_of_t(ramp.tau_q * i as f64 / 200.0).unwrap();
                prop_assert!(g > prev);
                prev = g;
            }
        }

        #[test]
        fn derivative_matches_central_difference(ramp in any_ramp(), s in 0.05f64..0.9) {
            let t = s * ramp.tau_q;
            let h = ramp.tau_q * 1e-6;
            let fd = (ramp.g_of_t(t + h).unwrap() - ramp.g_of_t(t - h).unwrap()) / (2.0 * h);
            let exact = ramp.dgdt(t).unwrap();
            prop_assert!(((fd - exact) / exact).abs() < 1e-8, "fd {} exact {}", fd, exact);
        }

        #[test]
        fn inversion_round_trip(ramp in any_ramp(), s in 0.01f64..0.99) {
            let (a, b) = (ramp.initial_value(), ramp.final_value());
            let g_c = a + s * (b - a);
            let t_c = ramp.critical_time(g_c).unwrap();
            let back = ramp.g_of_t(t_c).unwrap();
            prop_assert!((back - g_c).abs() <= 1e-12 * g_c.abs().max(1.0), "{} vs {}", back, g_c);
        }
    }
}
