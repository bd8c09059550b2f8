//! Experiment runner: uniform and adaptive refinement loops producing a CSV
//! table and optional SVG plots.

mod config;
mod run;
pub mod svg;
mod table;

pub use config::{
    preset_names, preset_text, ExperimentConfig, MeshSource, Refinement, DEFAULT_LIN_TOL,
};
pub use run::{
    run_experiment, run_experiment_with, run_steps, RunArtifacts, RunOutcome, StepContext,
};
pub use table::{observed_order, parse_csv, read_csv, summarize, write_csv, Row, CSV_COLUMNS};
