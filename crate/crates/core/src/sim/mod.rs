//! Seeded Monte Carlo sweeps and result emission.

mod output;
pub mod presets;
mod run;
mod scenario;

pub use output::{emit_plot_script, emit_results, plot_script, render, to_csv, to_json, OutputFormat, CSV_HEADER};
pub use presets::{preset, Preset, PRESETS};
pub use run::{aggregate, run_scenario, run_trial, wilson_interval, CurvePoint, TrialOutcome, Z95};
pub use scenario::{PointSetup, Scenario, Scheme, SweepAxis};
