use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use causebound::{BnbOptions, EPS_EVIDENCE};

mod args;
mod bounds;
mod document;
mod failure;
mod oracle;
mod simulate;

use args::{AvailabilityArg, FamilyArg, QueryArg};
use document::ProblemDocument;
use failure::Failure;
use simulate::SimulateRequest;

/// Bounds on probabilities of causation from experimental and
/// observational evidence.
///
/// Exit codes: 0 success, 2 malformed input or flags, 3 inconsistent
/// evidence, 4 infeasible program, 5 undefined conditional query.
#[derive(Parser)]
#[command(name = "causebound", version, about)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trial sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tolerance for evidence normalization and cross-family agreement.
    #[arg(long, global = true, default_value_t = EPS_EVIDENCE)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound the query of a problem document.
    Bounds {
        problem: PathBuf,
        /// Write the result document (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare bounding methods on random models.
    Simulate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = AvailabilityArg::CovariateSpecific)]
        availability: AvailabilityArg,
        #[arg(long, value_enum, default_value_t = QueryArg::Pns)]
        query: QueryArg,
        #[arg(long)]
        out_dir: PathBuf,
        /// Branch-and-bound node budget per bound.
        #[arg(long, default_value_t = BnbOptions::default().budget)]
        budget: usize,
        #[arg(long, default_value_t = BnbOptions::default().gap_tol)]
        gap_tol: f64,
        /// Trials per plot series (default: 100, or all if fewer).
        #[arg(long)]
        plot_sample: Option<usize>,
        /// Record per-trial wall time (makes trials.csv vary across runs).
        #[arg(long)]
        timing: bool,
    },
    /// Sample one model and print the true value of the query.
    Oracle {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_enum, default_value_t = AvailabilityArg::Joint)]
        availability: AvailabilityArg,
        #[arg(long, value_enum, default_value_t = QueryArg::Pns)]
        query: QueryArg,
        /// Write the model's evidence as a problem document.
        #[arg(long)]
        emit_evidence: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Bounds { problem, out } => {
            let text = fs::read_to_string(&problem)
                .map_err(|e| Failure::Schema(format!("reading {}: {e}", problem.display())))?;
            let doc = ProblemDocument::parse(&text)?;
            let result = bounds::compute(&doc, cli.tol)?;
            print!("{}", bounds::render(&result));
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&result)?;
                fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Simulate {
            family,
            m,
            trials,
            availability,
            query,
            out_dir,
            budget,
            gap_tol,
            plot_sample,
            timing,
        } => {
            let req = SimulateRequest {
                family: family.into(),
                m,
                trials,
                seed: cli.seed,
                availability: availability.into(),
                query: query.into(),
                bnb: BnbOptions {
                    budget,
                    gap_tol,
                    ..Default::default()
                },
                jobs: cli.jobs,
                out_dir,
                plot_sample,
                timing,
            };
            let outcome = simulate::simulate(&req)?;
            println!(
                "{} trials written to {}",
                outcome.run.records.len(),
                req.out_dir.display()
            );
            if !outcome.run.skipped.is_empty() {
                println!(
                    "skipped {} trial(s) where {} is undefined",
                    outcome.run.skipped.len(),
                    req.query.name()
                );
            }
            for (name, value) in outcome.summary.rows() {
                println!("{name:>18}  {value:.4}");
            }
        }
        Command::Oracle {
            family,
            m,
            availability,
            query,
            emit_evidence,
        } => {
            let query = query.into();
            let (truth, doc) = oracle::oracle(family.into(), m, cli.seed, availability.into(), query)?;
            println!("true {} = {truth}", doc.query.name());
            if let Some(path) = emit_evidence {
                fs::write(&path, doc.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<Failure>().map_or(1, Failure::code))
        }
    }
}
