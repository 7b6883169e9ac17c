//! Task execution. Computation is pure; files are written only once every
//! result is in hand.

use std::path::{Path, PathBuf};

use kzqsl_core::dynamics::{crossover_time, evolve_lz, CrossoverResult, IntegratorStats};
use kzqsl_core::models::{EnergyConvention, ModelKind};
use kzqsl_core::qsl::{
    lz_tau_star, lz_tm_closed_form, synthetic_tm_closed_form, MinimumResult, SpeedMode,
    SpeedProfile,
};
use kzqsl_core::ramps::RampKind;
use kzqsl_core::scaling::{
    fit_power_law, lz_crossover_sweep, sweep, FitResult, LzSetup, QslSetup, ScalingPoint, SweepTask,
};
use serde::Serialize;

use crate::config::{env_threads, Observable, RunConfig, Task};
use crate::error::CliError;
use crate::output::{num, opt_num, write_all_atomic, Csv};

pub const ARTIFACT_VERSION: &str = concat!("kzqsl-", env!("CARGO_PKG_VERSION"), "/1");

pub const TRACE_HEADER: [&str; 6] = ["t", "g", "energy", "cost_rate", "bures", "nu_qsl"];
pub const SWEEP_HEADER: [&str; 3] = ["tau_q", "value", "valid"];
pub const EVOLVE_HEADER: [&str; 7] = ["t", "g", "re_c0", "im_c0", "re_c1", "im_c1", "infidelity"];
pub const CROSSOVER_HEADER: [&str; 5] = ["tau_q", "K", "t_hat", "t_star", "crossing_kind"];

/// In-memory outputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: Option<String>,
    pub summary: String,
}

#[derive(Serialize)]
struct Summary<'a, R: Serialize> {
    artifact_version: &'static str,
    config: &'a RunConfig,
    results: R,
}

fn summarize<R: Serialize>(config: &RunConfig, results: R) -> String {
    let mut s = serde_json::to_string_pretty(&Summary {
        artifact_version: ARTIFACT_VERSION,
        config,
        results,
    })
    .expect("summary serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct TraceResults {
    tau_q: f64,
    critical_time: Option<f64>,
    points: usize,
    infinite_points: usize,
    minimum: Option<MinimumResult>,
    minimum_error: Option<String>,
}

#[derive(Serialize)]
struct MinimumResults {
    tau_q: f64,
    critical_time: Option<f64>,
    #[serde(flatten)]
    minimum: MinimumResult,
    /// Analytic `t_m` when the configuration admits one.
    closed_form_t_m: Option<f64>,
}

#[derive(Serialize)]
struct SweepResults {
    observable: Observable,
    points: usize,
    valid_points: usize,
    fit: Option<FitResult>,
    fit_error: Option<String>,
}

#[derive(Serialize)]
struct EvolveResults {
    tau_q: f64,
    delta: f64,
    samples: usize,
    final_infidelity: f64,
    integrator: IntegratorStats,
    crossovers: Vec<CrossoverResult>,
}

#[derive(Serialize)]
struct ThresholdFit {
    threshold: f64,
    crossed: usize,
    fit: Option<FitResult>,
    fit_error: Option<String>,
}

#[derive(Serialize)]
struct CrossoverResults {
    delta: f64,
    points: usize,
    fits: Vec<ThresholdFit>,
}

#[derive(Serialize)]
pub struct FitSummary {
    pub artifact_version: &'static str,
    pub input: PathBuf,
    pub valid_points: usize,
    pub fit: FitResult,
}

fn profile(config: &RunConfig, tau_q: f64) -> Result<SpeedProfile, CliError> {
    let ramp = config.ramp.with_tau(tau_q)?;
    Ok(SpeedProfile::new(config.model, config.convention, ramp).with_mode(config.speed_mode))
}

fn qsl_setup(config: &RunConfig) -> QslSetup {
    QslSetup {
        model: config.model,
        convention: config.convention,
        mode: config.speed_mode,
        ramp: config.ramp,
        search: config.numerics.search,
    }
}

fn lz_setup(config: &RunConfig) -> Result<LzSetup, CliError> {
    let delta = config
        .lz_delta()
        .ok_or_else(|| CliError::Config("lz tasks require a landau_zener model".into()))?;
    Ok(LzSetup {
        delta,
        ramp: config.ramp,
        sample_count: config.numerics.lz_samples,
        tol: config.numerics.lz_tol,
    })
}

fn fit_or_error(
    points: &[ScalingPoint],
    window: (f64, f64),
) -> (Option<FitResult>, Option<String>) {
    match fit_power_law(points, window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn closed_form(config: &RunConfig, tau_q: f64) -> Option<f64> {
    match (
        config.model.model,
        config.ramp,
        config.speed_mode,
        config.convention,
    ) {
        (ModelKind::Synthetic { z_nu }, RampKind::LinearTo { g0, g1 }, SpeedMode::Full, _)
            if g0 == 0.0 && g1 == 1.0 && config.model.omega == 1.0 =>
        {
            Some(synthetic_tm_closed_form(z_nu, tau_q))
        }
        (
            ModelKind::LandauZener { delta },
            RampKind::LinearTo { g0, g1 },
            SpeedMode::NumeratorOnly,
            EnergyConvention::GroundState,
        ) if g0 == 0.0 && g1 > 0.0 && tau_q <= lz_tau_star(delta, g1) => {
            lz_tm_closed_form(delta, g1, tau_q).ok()
        }
        _ => None,
    }
}

fn run_trace(config: &RunConfig) -> Result<Artifacts, CliError> {
    let tau = config.tau_q.expect("validated");
    let p = profile(config, tau)?;
    let samples = p.trace(&p.uniform_grid(config.numerics.trace_points))?;
    let mut csv = Csv::new(&TRACE_HEADER);
    for s in &samples {
        csv.row(&[
            num(s.t),
            num(s.g),
            num(s.energy),
            num(s.cost_rate),
            num(s.bures),
            num(s.nu_qsl),
        ]);
    }
    let (minimum, minimum_error) = match p.find_minimum(&config.numerics.search) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let results = TraceResults {
        tau_q: tau,
        critical_time: p.critical_time().ok(),
        points: samples.len(),
        infinite_points: samples.iter().filter(|s| s.is_infinite()).count(),
        minimum,
        minimum_error,
    };
    Ok(Artifacts {
        csv: Some(csv.finish()),
        summary: summarize(config, results),
    })
}

fn run_minimum(config: &RunConfig) -> Result<Artifacts, CliError> {
    let tau = config.tau_q.expect("validated");
    let p = profile(config, tau)?;
    let minimum = p.find_minimum(&config.numerics.search)?;
    let results = MinimumResults {
        tau_q: tau,
        critical_time: p.critical_time().ok(),
        minimum,
        closed_form_t_m: closed_form(config, tau),
    };
    Ok(Artifacts {
        csv: None,
        summary: summarize(config, results),
    })
}

fn sweep_csv(points: &[ScalingPoint]) -> String {
    let mut csv = Csv::new(&SWEEP_HEADER);
    for p in points {
        csv.row(&[num(p.tau_q), num(p.value), p.valid.to_string()]);
    }
    csv.finish()
}

fn run_sweep(config: &RunConfig) -> Result<Artifacts, CliError> {
    let grid = config.grid.expect("validated").values();
    let setup = qsl_setup(config);
    let task = match config.observable {
        Observable::ImpulseDuration => SweepTask::QslMinimum(setup),
        Observable::NuMin => SweepTask::NuMin(setup),
    };
    let points = sweep(&task, &grid)?;
    let (fit, fit_error) = fit_or_error(&points, config.fit_window.expect("resolved"));
    let results = SweepResults {
        observable: config.observable,
        points: points.len(),
        valid_points: points.iter().filter(|p| p.valid).count(),
        fit,
        fit_error,
    };
    Ok(Artifacts {
        csv: Some(sweep_csv(&points)),
        summary: summarize(config, results),
    })
}

fn run_lz_evolve(config: &RunConfig) -> Result<Artifacts, CliError> {
    let tau = config.tau_q.expect("validated");
    let setup = lz_setup(config)?;
    let ramp = config.ramp.with_tau(tau)?;
    let trace = evolve_lz(setup.delta, &ramp, setup.sample_count, setup.tol)?;
    let mut csv = Csv::new(&EVOLVE_HEADER);
    for i in 0..trace.len() {
        let s = &trace.states[i];
        csv.row(&[
            num(trace.times[i]),
            num(trace.fields[i]),
            num(s.c0.re),
            num(s.c0.im),
            num(s.c1.re),
            num(s.c1.im),
            num(trace.infidelity[i]),
        ]);
    }
    let crossovers = config
        .thresholds
        .iter()
        .map(|&k| crossover_time(&trace, k))
        .collect::<Result<Vec<_>, _>>()?;
    let results = EvolveResults {
        tau_q: tau,
        delta: setup.delta,
        samples: trace.len(),
        final_infidelity: *trace.infidelity.last().expect("non-empty trace"),
        integrator: trace.integrator_stats,
        crossovers,
    };
    Ok(Artifacts {
        csv: Some(csv.finish()),
        summary: summarize(config, results),
    })
}

fn run_lz_crossover(config: &RunConfig) -> Result<Artifacts, CliError> {
    let grid = config.grid.expect("validated").values();
    let setup = lz_setup(config)?;
    let rows = lz_crossover_sweep(&setup, &config.thresholds, &grid)?;
    let mut csv = Csv::new(&CROSSOVER_HEADER);
    for (tau, results) in &rows {
        for r in results {
            let kind = serde_json::to_value(r.crossing_kind).expect("enum serializes");
            csv.row(&[
                num(*tau),
                num(r.threshold),
                opt_num(r.t_hat),
                opt_num(r.t_star),
                kind.as_str().expect("string variant").to_string(),
            ]);
        }
    }
    let window = config.fit_window.expect("resolved");
    let fits = config
        .thresholds
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let points: Vec<ScalingPoint> = rows
                .iter()
                .map(|(tau, r)| ScalingPoint {
                    tau_q: *tau,
                    value: r[j].t_star.unwrap_or(f64::NAN),
                    valid: r[j].t_star.is_some_and(|t| t > 0.0),
                })
                .collect();
            let (fit, fit_error) = fit_or_error(&points, window);
            ThresholdFit {
                threshold: k,
                crossed: points.iter().filter(|p| p.valid).count(),
                fit,
                fit_error,
            }
        })
        .collect();
    let results = CrossoverResults {
        delta: setup.delta,
        points: rows.len(),
        fits,
    };
    Ok(Artifacts {
        csv: Some(csv.finish()),
        summary: summarize(config, results),
    })
}

/// Compute a validated, resolved config without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<Artifacts, CliError> {
    match config.task {
        Task::Trace => run_trace(config),
        Task::Minimum => run_minimum(config),
        Task::Sweep => run_sweep(config),
        Task::LzEvolve => run_lz_evolve(config),
        Task::LzCrossover => run_lz_crossover(config),
    }
}

/// Validate, compute on a pool of `config.threads` workers, then write.
/// Returns the paths written.
pub fn run(mut config: RunConfig) -> Result<Vec<PathBuf>, CliError> {
    if config.threads.is_none() {
        config.threads = env_threads(std::env::var("KZQSL_THREADS").ok().as_deref())?;
    }
    config.resolve();
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    let artifacts = pool.install(|| execute(&config))?;

    let mut files = Vec::new();
    if let Some(csv) = artifacts.csv {
        files.push((config.output.csv_path(), csv));
    }
    files.push((config.output.json_path(), artifacts.summary));
    write_all_atomic(&files)?;
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[derive(serde::Deserialize)]
struct SweepRow {
    tau_q: f64,
    value: f64,
    valid: bool,
}

/// Parse a sweep CSV written by this tool.
pub fn read_sweep_csv(text: &str) -> Result<Vec<ScalingPoint>, CliError> {
    let bad = |msg: String| CliError::Config(format!("sweep csv: {msg}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(SWEEP_HEADER) {
        return Err(bad("expected header tau_q,value,valid".into()));
    }
    reader
        .deserialize::<SweepRow>()
        .map(|row| {
            row.map(|r| ScalingPoint {
                tau_q: r.tau_q,
                value: r.value,
                valid: r.valid,
            })
            .map_err(|e| bad(e.to_string()))
        })
        .collect()
}

/// Fit a sweep CSV and write `<dir>/<prefix>.json`.
pub fn run_fit(
    input: &Path,
    window: Option<(f64, f64)>,
    out: &crate::config::OutputSpec,
) -> Result<PathBuf, CliError> {
    if let Some((lo, hi)) = window {
        if !(lo >= 0.0 && hi > lo) {
            return Err(CliError::Config(format!(
                "fit window must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let points = read_sweep_csv(&text)?;
    let fit = match window {
        Some(w) => fit_power_law(&points, w)?,
        None => kzqsl_core::scaling::fit_all(&points)?,
    };
    let mut summary = serde_json::to_string_pretty(&FitSummary {
        artifact_version: ARTIFACT_VERSION,
        input: input.to_path_buf(),
        valid_points: points.iter().filter(|p| p.valid).count(),
        fit,
    })
    .expect("summary serializes");
    summary.push('\n');
    let path = out.json_path();
    write_all_atomic(&[(path.clone(), summary)])?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_minimum() -> RunConfig {
        RunConfig::from_json(
            r#"{"task": "minimum",
                "model": {"model": {"kind": "synthetic", "z_nu": 1.0}},
                "ramp": {"kind": "linear_to", "g0": 0.0, "g1": 1.0},
                "tau_q": 100.0}"#,
        )
        .unwrap()
    }

    #[test]
    fn minimum_summary_has_closed_form() {
        let a = execute(&synthetic_minimum()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&a.summary).unwrap();
        let t_m = v["results"]["t_m"].as_f64().unwrap();
        assert!((t_m - 10.0).abs() < 1e-6);
        assert_eq!(v["results"]["closed_form_t_m"].as_f64().unwrap(), 10.0);
        assert_eq!(v["artifact_version"], ARTIFACT_VERSION);
        assert_eq!(v["config"]["numerics"]["lz_samples"], 4096);
    }

    #[test]
    fn trace_csv_shape() {
        let mut c = synthetic_minimum();
        c.task = Task::Trace;
        c.numerics.trace_points = 11;
        let a = execute(&c).unwrap();
        let csv = a.csv.unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,g,energy,cost_rate,bures,nu_qsl");
        assert_eq!(lines.len(), 12);
        assert!(lines[1].ends_with(",inf"));
    }

    #[test]
    fn sweep_csv_round_trip() {
        let pts = vec![
            ScalingPoint {
                tau_q: 1.0,
                value: 0.5,
                valid: true,
            },
            ScalingPoint {
                tau_q: 10.0,
                value: f64::NAN,
                valid: false,
            },
        ];
        let back = read_sweep_csv(&sweep_csv(&pts)).unwrap();
        assert_eq!(back[0], pts[0]);
        assert!(!back[1].valid && back[1].value.is_nan());
        assert!(read_sweep_csv("a,b\n").is_err());
        assert!(read_sweep_csv("tau_q,value,valid\n1,2\n").is_err());
    }

    #[test]
    fn crossover_rows() {
        let c = RunConfig::from_json(
            r#"{"task": "lz_crossover",
                "model": {"model": {"kind": "landau_zener", "delta": 0.1}},
                "ramp": {"kind": "linear_to", "g0": -5.0, "g1": 0.0},
                "grid": {"min": 10.0, "max": 100.0, "points": 4},
                "thresholds": [0.001, 0.9],
                "numerics": {"lz_samples": 512}}"#,
        )
        .unwrap();
        let mut c = c;
        c.resolve();
        c.validate().unwrap();
        let a = execute(&c).unwrap();
        let csv = a.csv.unwrap();
        assert_eq!(csv.lines().count(), 1 + 4 * 2);
        assert!(csv.contains(",last_upward_crossing"));
        assert!(csv.contains(",nan,nan,never_crossed"));
        let v: serde_json::Value = serde_json::from_str(&a.summary).unwrap();
        assert!(v["results"]["fits"][0]["fit"]["beta"].is_f64());
        assert!(v["results"]["fits"][1]["fit"].is_null());
    }
}
