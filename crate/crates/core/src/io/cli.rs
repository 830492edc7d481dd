//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config_file::{config_to_toml, load_config, ConfigFileError};
use super::output::run_to_directory;
use crate::mesh::{build_channel_tissue_mesh, mesh_quality, write_mesh};
use crate::simulation::{preset, Checkpoint, ScenarioConfig, SimulationError};
use crate::sparse::set_matvec_threads;
use crate::verify::run_verification;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Environment variable overriding `--threads`.
pub const THREADS_ENV: &str = "RFA_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rfa-sim", version, about = "Radiofrequency ablation simulator: blood flow, potential and bio-heat")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Time step.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Final time.
    #[arg(long, global = true)]
    tfinal: Option<f64>,
    /// Target mesh size.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Threads for matrix-vector products.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reject unknown config keys and conflicting boundary data.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the simulation described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `output.directory` or `out`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Build and write the mesh of a config file.
    Mesh {
        config: PathBuf,
        #[arg(short, long, default_value = "mesh.txt")]
        output: PathBuf,
    },
    /// Run convergence studies and invariant checks.
    Verify,
    /// Run a built-in scenario.
    Scenario {
        #[arg(value_parser = ["test1", "test2", "test3"])]
        name: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

impl Overrides {
    fn apply(&self, c: &mut ScenarioConfig) -> Result<(), SimulationError> {
        if let Some(t) = self.tau {
            c.time.tau = t;
        }
        if let Some(t) = self.tfinal {
            c.time.t_final = t;
        }
        if let Some(h) = self.h {
            c.geometry.mesh_size = h;
        }
        c.validate()?;
        Ok(())
    }

    fn threads(&self) -> Result<usize, String> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got \"{v}\"")),
            Err(_) => Ok(self.threads.unwrap_or(1)),
        }
    }
}

fn simulation_exit(e: &SimulationError) -> i32 {
    match e {
        SimulationError::Config(_) | SimulationError::ProbeOutside(_) => EXIT_CONFIG,
        SimulationError::Mesh(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn load(path: &PathBuf, strict: bool) -> Result<ScenarioConfig, (i32, String)> {
    let parsed = load_config(path, strict).map_err(|e| {
        let msg = match &e {
            ConfigFileError::Read { .. } => e.to_string(),
            _ => format!("{}: {e}", path.display()),
        };
        (EXIT_CONFIG, msg)
    })?;
    Ok(parsed.config)
}

fn execute(cli: Cli) -> Result<(), (i32, String)> {
    let threads = cli.overrides.threads().map_err(|m| (EXIT_USAGE, m))?;
    set_matvec_threads(threads);
    let strict = cli.overrides.strict;
    let fail = |e: SimulationError| (simulation_exit(&e), e.to_string());
    match cli.command {
        Command::Run { config, output, resume } => {
            let mut c = load(&config, strict)?;
            cli.overrides.apply(&mut c).map_err(fail)?;
            let dir = output
                .or_else(|| c.output.directory.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let resume = resume
                .map(|p| Checkpoint::read(&p).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", p.display()))))
                .transpose()?;
            let summary = run_to_directory(c, &dir, strict, resume).map_err(fail)?;
            report(&summary);
        }
        Command::Mesh { config, output } => {
            let mut c = load(&config, strict)?;
            cli.overrides.apply(&mut c).map_err(fail)?;
            let mesh = build_channel_tissue_mesh(&c.geometry).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            write_mesh(&mesh, &output).map_err(|e| (EXIT_SOLVER, e.to_string()))?;
            let q = mesh_quality(&mesh);
            println!(
                "{} vertices, {} triangles, h in [{:.4}, {:.4}], angles in [{:.2}, {:.2}] deg -> {}",
                mesh.num_vertices(),
                mesh.num_triangles(),
                q.h_min,
                q.h_max,
                q.min_angle,
                q.max_angle,
                output.display()
            );
        }
        Command::Verify => {
            let checks = run_verification();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err((EXIT_VERIFY, "verification failed".into()));
            }
        }
        Command::Scenario { name, output } => {
            let mut c = preset(&name).expect("clap restricts the names");
            cli.overrides.apply(&mut c).map_err(fail)?;
            log::debug!("effective config:\n{}", config_to_toml(&c));
            let summary = run_to_directory(c, &output, strict, None).map_err(fail)?;
            report(&summary);
        }
    }
    Ok(())
}

fn report(summary: &super::output::RunSummary) {
    if let Some(last) = summary.series.last() {
        println!(
            "{} steps to t = {:.4}: max theta {:.4} at ({:.4}, {:.4}); {} snapshots in {}",
            summary.steps,
            last.t,
            last.max_theta,
            last.argmax[0],
            last.argmax[1],
            summary.snapshots.len(),
            summary.directory.display()
        );
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
