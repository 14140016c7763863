//! Exact LP optimization, certified outer bounds for bilinear programs and
//! heuristic inner bounds.

mod bnb;
mod fixing;
mod local;
mod polish;
pub mod simplex;

pub use bnb::{bb_solve, BnbOptions};
pub use local::{local_search_inner, LocalSearchOptions};
pub use polish::polish;

use std::time::Instant;

use serde::Serialize;

use crate::error::SolveError;
use crate::model::BoundsInterval;
use crate::program::{ConstraintProgram, LinearConstraint, Relation};
use simplex::{minimize, minimize_from, LpStatus};

/// Phase-one optimum above which a program counts as infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    pub fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeBudgetExhausted,
    ToleranceReached,
}

/// LP multipliers certifying an optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub multipliers: Vec<f64>,
    /// `b·y`, normalized and in the program's sense.
    pub value: f64,
    /// Largest violation of dual feasibility (reduced cost or sign).
    pub infeasibility: f64,
}

/// Outcome of optimizing one program in one direction. `value` is the
/// certified optimum (or outer bound) after dividing by the normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub sense: Sense,
    pub status: SolveStatus,
    pub value: f64,
    /// Best feasible point found by a heuristic, if any.
    pub inner_value: Option<f64>,
    pub point: Option<Vec<f64>>,
    pub nodes_explored: usize,
    pub lp_solves: usize,
    pub runtime_ms: f64,
    pub max_residual: f64,
    pub certificate: Option<DualCertificate>,
    /// Origins of rows carrying weight in an infeasibility ray.
    pub infeasible_families: Vec<String>,
}

impl SolveReport {
    pub(crate) fn infeasible(sense: Sense, families: Vec<String>) -> Self {
        Self {
            sense,
            status: SolveStatus::Infeasible,
            value: f64::NAN,
            inner_value: None,
            point: None,
            nodes_explored: 0,
            lp_solves: 0,
            runtime_ms: 0.0,
            max_residual: f64::NAN,
            certificate: None,
            infeasible_families: families,
        }
    }
}

/// Lower and upper solves of one program combined into an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bounds: BoundsInterval,
    pub inner_bounds: Option<BoundsInterval>,
    pub lower: SolveReport,
    pub upper: SolveReport,
}

impl BoundReport {
    pub fn status(&self) -> SolveStatus {
        use SolveStatus::*;
        match (self.lower.status, self.upper.status) {
            (Infeasible, _) | (_, Infeasible) => Infeasible,
            (NodeBudgetExhausted, _) | (_, NodeBudgetExhausted) => NodeBudgetExhausted,
            (ToleranceReached, _) | (_, ToleranceReached) => ToleranceReached,
            _ => Optimal,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.lower.max_residual.max(self.upper.max_residual)
    }

    pub fn nodes_explored(&self) -> usize {
        self.lower.nodes_explored + self.upper.nodes_explored
    }

    pub fn runtime_ms(&self) -> f64 {
        self.lower.runtime_ms + self.upper.runtime_ms
    }
}

pub(crate) struct RawLp {
    pub optimal: bool,
    pub x: Vec<f64>,
    /// `sense.sign() · c·x`, unnormalized.
    pub signed_objective: f64,
    pub duals: Vec<f64>,
    pub basis: Vec<usize>,
}

/// Minimizes `sign · objective` over the rows of `program`, optionally
/// restarting from the basis of an earlier solve with the same row layout.
pub(crate) fn raw_lp(program: &ConstraintProgram, sense: Sense, warm: Option<&[usize]>) -> Result<RawLp, SolveError> {
    let cost: Vec<(usize, f64)> = program.objective.iter().map(|&(j, c)| (j, sense.sign() * c)).collect();
    let out = match warm {
        Some(basis) => minimize_from(program.num_vars, &cost, &program.linear, FEASIBILITY_TOL, basis)?,
        None => minimize(program.num_vars, &cost, &program.linear, FEASIBILITY_TOL)?,
    };
    Ok(RawLp {
        optimal: out.status == LpStatus::Optimal,
        x: out.x,
        signed_objective: out.objective,
        duals: out.duals,
        basis: out.basis,
    })
}

pub(crate) fn ray_origins(rows: &[LinearConstraint], ray: &[f64]) -> Vec<String> {
    let mut out: Vec<String> = rows
        .iter()
        .zip(ray)
        .filter(|(_, y)| y.abs() > 1e-9)
        .map(|(r, _)| r.origin.clone())
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Checks `y` against the dual of `min sign·c·x, Ax (rel) b, x >= 0`.
fn certificate(program: &ConstraintProgram, sense: Sense, y: &[f64]) -> DualCertificate {
    let mut reduced = vec![0.0; program.num_vars];
    for &(j, c) in &program.objective {
        reduced[j] += sense.sign() * c;
    }
    let mut infeasibility: f64 = 0.0;
    let mut value = 0.0;
    for (row, &yi) in program.linear.iter().zip(y) {
        for &(j, a) in &row.coefficients {
            reduced[j] -= a * yi;
        }
        value += row.rhs * yi;
        let sign_violation = match row.relation {
            Relation::Eq => 0.0,
            Relation::Le => yi.max(0.0),
            Relation::Ge => (-yi).max(0.0),
        };
        infeasibility = infeasibility.max(sign_violation);
    }
    for r in reduced {
        infeasibility = infeasibility.max((-r).max(0.0));
    }
    DualCertificate {
        multipliers: y.to_vec(),
        value: sense.sign() * value / program.normalizer,
        infeasibility,
    }
}

/// Exact optimum of a linear program, divided by its normalizer.
pub fn solve_lp(program: &ConstraintProgram, sense: Sense) -> Result<SolveReport, SolveError> {
    if !program.is_linear() {
        return Err(SolveError::NotLinear);
    }
    let start = Instant::now();
    let lp = raw_lp(program, sense, None)?;
    if !lp.optimal {
        let mut report = SolveReport::infeasible(sense, ray_origins(&program.linear, &lp.duals));
        report.nodes_explored = 1;
        report.lp_solves = 1;
        report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok(report);
    }
    let certificate = certificate(program, sense, &lp.duals);
    Ok(SolveReport {
        sense,
        status: SolveStatus::Optimal,
        value: sense.sign() * lp.signed_objective / program.normalizer,
        inner_value: None,
        max_residual: program.max_residual(&lp.x),
        point: Some(lp.x),
        nodes_explored: 1,
        lp_solves: 1,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        certificate: Some(certificate),
        infeasible_families: Vec::new(),
    })
}

/// Minimum and maximum of the objective: exact for linear programs,
/// certified outer bounds from branch-and-bound otherwise. Values are
/// clipped to `[0, 1]`.
pub fn bound_interval(program: &ConstraintProgram, options: &BnbOptions) -> Result<BoundReport, SolveError> {
    let (lower, upper) = if program.is_linear() {
        (solve_lp(program, Sense::Min)?, solve_lp(program, Sense::Max)?)
    } else {
        (
            bb_solve(program, Sense::Min, options)?,
            bb_solve(program, Sense::Max, options)?,
        )
    };
    let clip = |v: f64| v.clamp(0.0, 1.0);
    let bounds = BoundsInterval::new(clip(lower.value), clip(upper.value), true);
    let inner_bounds = match (lower.inner_value, upper.inner_value) {
        (Some(l), Some(u)) => Some(BoundsInterval::new(clip(l), clip(u), false)),
        _ => None,
    };
    Ok(BoundReport {
        bounds,
        inner_bounds,
        lower,
        upper,
    })
}
