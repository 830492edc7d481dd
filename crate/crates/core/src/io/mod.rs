//! Scenario files, field and series output, and the command line.

pub mod cli;
mod config_file;
mod output;
mod series;
mod vtk;

pub use cli::cli_main;
pub use config_file::{config_to_toml, load_config, parse_config, ConfigFileError, ParsedConfig};
pub use output::{
    run_to_directory, snapshot_file, RunSummary, CHECKPOINT_FILE, CONFIG_FILE, MESH_FILE, SERIES_FILE,
};
pub use series::{series_header, write_series, write_series_csv, SERIES_COLUMNS};
pub use vtk::{read_vtk_scalars, vtk_to_string, write_vtk};
