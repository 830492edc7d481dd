//! Runs a scenario into an output directory.

use std::path::{Path, PathBuf};

use super::config_file::config_to_toml;
use super::series::write_series_csv;
use super::vtk::write_vtk;
use crate::mesh::write_mesh;
use crate::simulation::{Checkpoint, Output, ScenarioConfig, SeriesRow, Simulation, SimulationError};

pub const MESH_FILE: &str = "mesh.txt";
pub const CONFIG_FILE: &str = "config.toml";
pub const SERIES_FILE: &str = "series.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

pub fn snapshot_file(step: usize) -> String {
    format!("snapshot_{step:06}.vtk")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub steps: usize,
    pub snapshots: Vec<PathBuf>,
    pub series: Vec<SeriesRow>,
}

fn io_err(e: impl std::fmt::Display) -> SimulationError {
    SimulationError::Output(e.to_string())
}

/// Writes the effective configuration, the mesh, VTK snapshots at the output
/// cadence, `series.csv` and a final checkpoint. When a step fails the series
/// so far and a checkpoint of the last good state are still written.
pub fn run_to_directory(
    config: ScenarioConfig,
    dir: &Path,
    strict: bool,
    resume: Option<Checkpoint>,
) -> Result<RunSummary, SimulationError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(format!("{}: {e}", dir.display())))?;
    std::fs::write(dir.join(CONFIG_FILE), config_to_toml(&config)).map_err(io_err)?;
    let mut sim = Simulation::with_strictness(config, strict)?;
    if let Some(c) = resume {
        sim.restore(c)?;
    }
    write_mesh(sim.mesh(), dir.join(MESH_FILE))?;

    let mesh = sim.mesh().clone();
    let probes = sim.config().output.probes.len();
    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let outcome = sim.run_with(&mut |out| {
        match out {
            Output::Row(r) => series.push(r.clone()),
            Output::Snapshot(s) => {
                let path = dir.join(snapshot_file(s.state.step));
                write_vtk(&mesh, s, &path).map_err(io_err)?;
                snapshots.push(path);
            }
        }
        Ok(())
    });
    write_series_csv(&series, probes, dir.join(SERIES_FILE)).map_err(io_err)?;
    sim.checkpoint().write(dir.join(CHECKPOINT_FILE))?;
    let reports = outcome?;
    Ok(RunSummary {
        directory: dir.to_path_buf(),
        steps: reports.len(),
        snapshots,
        series,
    })
}
