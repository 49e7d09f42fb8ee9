//! Experiment harness: JSON configuration, the report-producing commands
//! behind the `pathlab` binary, and atomic CSV output.
//!
//! Every command computes all of its files in memory first. Nothing touches
//! the output directory until [`OutputSet::commit`] is called, so a failing
//! command leaves no partial output behind.

mod commands;
mod config;
mod output;

pub use commands::{
    cmd_classical_path, cmd_evolve, cmd_kernel, cmd_theorem_check, cmd_transition, cmd_variational_check,
    evolve_report, kernel_convergence, run, theorem_report, Command, CommandOutcome, ConvergenceRow, EvolveRow,
    TheoremReport, TheoremRow, TheoremRun,
};
pub use config::{
    Endpoints, ExperimentConfig, PotentialSpec, ProbeSpec, Setup, SolveModeSpec, SolverSpec, SpaceSpec, TimeSpec,
    Tolerances,
};
pub use output::{CsvTable, Header, OutputSet, TOOL_VERSION};
