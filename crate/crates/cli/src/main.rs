use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kzqsl::config::{env_threads, OutputSpec};
use kzqsl::recipes::{recipe, RECIPE_NAMES};
use kzqsl::{run, CliError, Overrides, RunConfig, Task};

#[derive(Parser)]
#[command(
    name = "kzqsl",
    version,
    about = "Quantum speed limit sweeps across quantum phase transitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct RunFlags {
    /// JSON run configuration.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    tau_q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Fit window as two values: LO HI.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    fit_window: Option<Vec<f64>>,
    /// Infidelity threshold; repeat for several.
    #[arg(long = "threshold")]
    thresholds: Vec<f64>,
    #[command(flatten)]
    out: OutFlags,
}

#[derive(Args, Clone, Default)]
struct OutFlags {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    prefix: Option<String>,
    /// Worker threads; overrides KZQSL_THREADS and the config.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Speed profile on a uniform time grid.
    Trace(RunFlags),
    /// Location and value of the speed minimum.
    Minimum(RunFlags),
    /// Quench-time sweep followed by a power-law fit.
    Sweep(RunFlags),
    /// Power-law fit of an existing sweep CSV.
    Fit {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value = "fit")]
        prefix: String,
    },
    /// Landau-Zener evolution with infidelity.
    LzEvolve(RunFlags),
    /// Landau-Zener infidelity crossover times over a quench-time grid.
    LzCrossover(RunFlags),
    /// Print (or run) the preset configurations for a figure.
    Recipe {
        /// One of fig1a, fig1b, fig2a, fig2b, figS1b, figS2a, figS2b. Omit to list.
        name: Option<String>,
        #[arg(long)]
        run: bool,
        #[command(flatten)]
        out: OutFlags,
    },
}

fn pair(v: Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.map(|v| (v[0], v[1]))
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match flag {
        Some(n) => Ok(Some(n)),
        None => env_threads(std::env::var("KZQSL_THREADS").ok().as_deref()),
    }
}

fn run_task(task: Task, flags: RunFlags) -> Result<Vec<PathBuf>, CliError> {
    let mut config = RunConfig::load(&flags.config)?;
    config.apply(&Overrides {
        task: Some(task),
        tau_q: flags.tau_q,
        grid_min: flags.grid_min,
        grid_max: flags.grid_max,
        grid_points: flags.grid_points,
        fit_window: pair(flags.fit_window),
        thresholds: flags.thresholds,
        out_dir: flags.out.out_dir,
        prefix: flags.out.prefix,
        threads: threads(flags.out.threads)?,
    })?;
    run(config)
}

fn dispatch(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Trace(f) => run_task(Task::Trace, f),
        Command::Minimum(f) => run_task(Task::Minimum, f),
        Command::Sweep(f) => run_task(Task::Sweep, f),
        Command::LzEvolve(f) => run_task(Task::LzEvolve, f),
        Command::LzCrossover(f) => run_task(Task::LzCrossover, f),
        Command::Fit {
            input,
            window,
            out_dir,
            prefix,
        } => {
            let out = OutputSpec {
                dir: out_dir.unwrap_or_else(|| OutputSpec::default().dir),
                prefix,
            };
            kzqsl::run::run_fit(&input, pair(window), &out).map(|p| vec![p])
        }
        Command::Recipe { name: None, .. } => {
            for n in RECIPE_NAMES {
                println!("{n}");
            }
            Ok(Vec::new())
        }
        Command::Recipe {
            name: Some(name),
            run: go,
            out,
        } => {
            let configs = recipe(&name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown recipe {name:?}; known: {}",
                    RECIPE_NAMES.join(", ")
                ))
            })?;
            let overrides = Overrides {
                out_dir: out.out_dir,
                prefix: None,
                threads: threads(out.threads)?,
                ..Overrides::default()
            };
            let mut resolved = Vec::with_capacity(configs.len());
            for mut c in configs {
                c.apply(&overrides)?;
                c.resolve();
                c.validate()?;
                resolved.push(c);
            }
            if !go {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&resolved).expect("configs serialize")
                );
                return Ok(Vec::new());
            }
            let mut written = Vec::new();
            for c in resolved {
                written.extend(run(c)?);
            }
            Ok(written)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string(&e.record()).expect("record serializes")
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
