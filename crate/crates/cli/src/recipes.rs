//! Preset configurations for each figure's data.

use kzqsl_core::models::{EnergyConvention, ModelKind, ModelParams};
use kzqsl_core::qsl::SpeedMode;
use kzqsl_core::ramps::RampKind;

use crate::config::{GridSpec, Numerics, Observable, OutputSpec, RunConfig, Task};

pub const RECIPE_NAMES: [&str; 7] = [
    "fig1a", "fig1b", "fig2a", "fig2b", "figS1b", "figS2a", "figS2b",
];

const SPINS: usize = 1000;
/// Mode indices giving `k = π/(N b)` and `k = 199π/(N b)`.
const TFIM_MODES: [usize; 2] = [1, 100];
const TRACE_TAUS: [f64; 3] = [1.0, 10.0, 100.0];
const NONLINEAR_R: f64 = 1.25;

fn tfim(mode: usize) -> ModelParams {
    ModelParams {
        omega: 1.0,
        model: ModelKind::TfimMode {
            spins: SPINS,
            mode,
            spacing: 1.0,
            include_shift: true,
        },
    }
}

fn base(task: Task, model: ModelParams, ramp: RampKind, prefix: String) -> RunConfig {
    RunConfig {
        task,
        model,
        convention: EnergyConvention::GroundState,
        speed_mode: SpeedMode::Full,
        ramp,
        tau_q: None,
        grid: None,
        observable: Observable::ImpulseDuration,
        fit_window: None,
        thresholds: Vec::new(),
        numerics: Numerics::default(),
        output: OutputSpec {
            prefix,
            ..OutputSpec::default()
        },
        threads: None,
    }
}

fn traces(name: &str, model: ModelParams, ramp: RampKind, tag: &str) -> Vec<RunConfig> {
    TRACE_TAUS
        .iter()
        .map(|&tau| RunConfig {
            tau_q: Some(tau),
            ..base(Task::Trace, model, ramp, format!("{name}_{tag}tau{tau}"))
        })
        .collect()
}

fn sweep(prefix: String, model: ModelParams, ramp: RampKind, lo: f64, hi: f64) -> RunConfig {
    RunConfig {
        grid: Some(GridSpec::per_decade(lo, hi)),
        fit_window: Some((lo, hi)),
        ..base(Task::Sweep, model, ramp, prefix)
    }
}

/// Configurations for `name`, or `None` if unknown.
pub fn recipe(name: &str) -> Option<Vec<RunConfig>> {
    let tfim_ramp = RampKind::LinearTo { g0: 0.0, g1: 2.0 };
    let lmg_ramp = RampKind::LinearTo { g0: 0.0, g1: 1.0 };
    let nonlinear = RampKind::PowerApproach { r: NONLINEAR_R };
    Some(match name {
        "fig1a" => TFIM_MODES
            .iter()
            .flat_map(|&n| traces(name, tfim(n), tfim_ramp, &format!("n{n}_")))
            .collect(),
        "fig1b" => TFIM_MODES
            .iter()
            .map(|&n| sweep(format!("{name}_n{n}"), tfim(n), tfim_ramp, 1.0, 1e3))
            .collect(),
        "fig2a" => traces(name, ModelParams::lmg(), lmg_ramp, ""),
        "fig2b" => vec![sweep(
            name.to_string(),
            ModelParams::lmg(),
            lmg_ramp,
            1e3,
            1e5,
        )],
        "figS1b" => vec![RunConfig {
            grid: Some(GridSpec::per_decade(10.0, 1e3)),
            fit_window: Some((10.0, 1e3)),
            thresholds: vec![1e-2, 1e-3, 1e-4],
            ..base(
                Task::LzCrossover,
                ModelParams {
                    omega: 1.0,
                    model: ModelKind::LandauZener { delta: 0.1 },
                },
                RampKind::LinearTo { g0: -5.0, g1: 0.0 },
                name.to_string(),
            )
        }],
        "figS2a" => vec![sweep(name.to_string(), tfim(1), nonlinear, 0.1, 10.0)],
        "figS2b" => vec![sweep(
            name.to_string(),
            ModelParams::lmg(),
            nonlinear,
            1e4,
            1e6,
        )],
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn every_recipe_validates() {
        for name in RECIPE_NAMES {
            let configs = recipe(name).unwrap();
            assert!(!configs.is_empty());
            for c in configs {
                c.validate().unwrap();
            }
        }
        assert!(recipe("fig9").is_none());
    }

    #[test]
    fn fig1a_modes() {
        let configs = recipe("fig1a").unwrap();
        assert_eq!(configs.len(), 6);
        let mut ks: Vec<f64> = configs
            .iter()
            .map(|c| c.model.wavenumber().unwrap())
            .collect();
        ks.dedup();
        assert_eq!(ks.len(), 2);
        assert!((ks[0] - PI / 1000.0).abs() < 1e-15);
        assert!((ks[1] - 199.0 * PI / 1000.0).abs() < 1e-15);
        for c in &configs {
            assert!(matches!(
                c.model.model,
                ModelKind::TfimMode { spins: 1000, .. }
            ));
            assert!(TRACE_TAUS.contains(&c.tau_q.unwrap()));
        }
    }

    #[test]
    fn fit_windows() {
        let c = &recipe("fig2b").unwrap()[0];
        assert_eq!(c.fit_window, Some((1e3, 1e5)));
        assert!(c.grid.unwrap().points >= 20);
        let c = &recipe("figS2a").unwrap()[0];
        assert_eq!(c.fit_window, Some((0.1, 10.0)));
        assert_eq!(c.ramp, RampKind::PowerApproach { r: 1.25 });
        let c = &recipe("figS1b").unwrap()[0];
        assert_eq!(c.thresholds, vec![1e-2, 1e-3, 1e-4]);
    }

    #[test]
    fn prefixes_are_distinct() {
        let mut all: Vec<String> = RECIPE_NAMES
            .iter()
            .flat_map(|n| recipe(n).unwrap())
            .map(|c| c.output.prefix)
            .collect();
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
    }
}
