use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use causebound::{BnbOptions, QuerySpec};
use causebound_lab::{
    run_trials, sorted_plot_series, summarize, trial_seed, Availability, GraphFamily, LabError, PlotRow, SummaryStats,
    TrialConfig, TrialRecord, TrialRun,
};

use crate::failure::Failure;

/// Default number of trials drawn into each plot series.
pub const PLOT_SAMPLE: usize = 100;

#[derive(Debug, Clone)]
pub struct SimulateRequest {
    pub family: GraphFamily,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub availability: Availability,
    pub query: QuerySpec,
    pub bnb: BnbOptions,
    pub jobs: Option<usize>,
    pub out_dir: PathBuf,
    pub plot_sample: Option<usize>,
    /// Fill the `runtime_ms` column. Off by default so that outputs are
    /// byte-identical across runs.
    pub timing: bool,
}

pub struct SimulateOutcome {
    pub run: TrialRun,
    pub summary: SummaryStats,
}

pub fn simulate(req: &SimulateRequest) -> anyhow::Result<SimulateOutcome> {
    if req.trials == 0 {
        return Err(Failure::Schema("--trials must be at least 1".into()).into());
    }
    if req.family == GraphFamily::Mediator && req.m == 0 {
        return Err(Failure::Schema("the mediator family needs --m of at least 1".into()).into());
    }
    let mut config = TrialConfig::new(req.family, req.m, req.trials, req.seed);
    config.availability = req.availability;
    config.query = req.query.clone();
    config.bnb = req.bnb.clone();
    config.jobs = req.jobs;
    let run = run_trials(&config).map_err(lab_failure)?;
    if run.records.is_empty() {
        return Err(Failure::Undefined(format!(
            "{} is undefined in every one of the {} trials",
            req.query.name(),
            req.trials
        ))
        .into());
    }
    let summary = summarize(&run.records).map_err(lab_failure)?;
    // the plot sample draws from a stream no trial uses
    let sample = req.plot_sample.unwrap_or(PLOT_SAMPLE).min(run.records.len());
    let plots = sorted_plot_series(&run.records, sample, trial_seed(req.seed, usize::MAX)).map_err(lab_failure)?;

    fs::create_dir_all(&req.out_dir).with_context(|| format!("creating {}", req.out_dir.display()))?;
    write_trials(&req.out_dir.join("trials.csv"), &run.records, req.timing)?;
    write_summary(&req.out_dir.join("summary.csv"), &summary)?;
    write_plot(&req.out_dir.join("plot_lb.csv"), &plots.lower)?;
    write_plot(&req.out_dir.join("plot_ub.csv"), &plots.upper)?;
    Ok(SimulateOutcome { run, summary })
}

pub fn lab_failure(e: LabError) -> anyhow::Error {
    match e {
        LabError::Infeasible { .. } => Failure::Infeasible(e.to_string()).into(),
        LabError::InvalidArgument(msg) => Failure::Schema(msg).into(),
        LabError::UndefinedConditional { .. } => Failure::Undefined(e.to_string()).into(),
        other => other.into(),
    }
}

fn writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_trials(path: &Path, records: &[TrialRecord], timing: bool) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "trial",
        "tp_lb",
        "tp_ub",
        "mlp_lb",
        "mlp_ub",
        "prop_lb",
        "prop_ub",
        "truth",
        "nodes",
        "runtime_ms",
    ])?;
    for r in records {
        let runtime = if timing {
            format!("{:.3}", r.runtime_ms)
        } else {
            String::new()
        };
        w.write_record([
            r.trial.to_string(),
            r.tp.lb.to_string(),
            r.tp.ub.to_string(),
            r.mlp.lb.to_string(),
            r.mlp.ub.to_string(),
            r.proposed.lb.to_string(),
            r.proposed.ub.to_string(),
            r.truth.to_string(),
            r.nodes.to_string(),
            runtime,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &SummaryStats) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["statistic", "value"])?;
    for (name, value) in summary.rows() {
        w.write_record([name.to_string(), value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_plot(path: &Path, rows: &[PlotRow]) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["rank", "trial", "tp", "mlp", "proposed"])?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.trial.to_string(),
            r.tp.to_string(),
            r.mlp.to_string(),
            r.proposed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
