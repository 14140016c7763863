//! Random structural models with known ground truth, the evidence they
//! imply, and the comparative bound experiments built on them.

mod baseline;
mod evidence;
mod scm;
mod stats;
mod trials;
mod truth;

pub use baseline::{mlp_baseline_bounds, tp_bounds, MlpBounds};
pub use evidence::{scm_to_evidence, Availability};
pub use scm::{response_value, sample_scm, units, Cardinalities, GraphFamily, ScmSpec, Unit};
pub use stats::{sorted_plot_series, summarize, PlotRow, PlotSeries, SummaryStats, IMPROVEMENT_TOL};
pub use trials::{run_trial, run_trials, trial_seed, TrialConfig, TrialRecord, TrialRun};
pub use truth::{ground_truth_joint, true_poc};

use causebound::{BuildError, EvidenceError, SolveError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{query} is undefined: its conditioning event has probability zero")]
    UndefinedConditional { query: String },
    #[error("{method} program infeasible on generated evidence{}", trial.map(|t| format!(" (trial {t})")).unwrap_or_default())]
    Infeasible { trial: Option<usize>, method: &'static str },
}
