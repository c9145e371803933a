//! Experiment harness: greedy policy evaluation, γ×β×seed sweeps across
//! representations, and CSV/SVG reporting.

mod config;
mod eval;
mod report;
mod sweep;

pub use config::{
    load_config, ExperimentConfig, FourierSpec, ImprovementSpec, OperatorKind, Representation,
};
pub use eval::{evaluate_controller, evaluate_policy};
pub use report::{read_csv, render_chart, write_csv};
pub use sweep::{aggregate, run_sweep, AggregatePoint, SweepCell};
