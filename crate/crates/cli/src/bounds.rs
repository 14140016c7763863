use std::fmt::Write as _;

use serde::Serialize;

use causebound::{
    bound_interval, build_cor2_program, build_thm1_program, build_thm3_program, validate_evidence, BoundReport,
    BoundsInterval, ConstraintProgram, EvidenceSet, QuerySpec, Schema, SolveStatus,
};
use causebound_lab::tp_bounds;

use crate::document::ProblemDocument;
use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "balke-lp")]
    Balke,
    #[serde(rename = "covariate-specific-lp")]
    CovariateSpecific,
    #[serde(rename = "joint-covariate-lp")]
    JointCovariate,
    #[serde(rename = "mediator-bnb")]
    Mediator,
}

impl Method {
    /// A declared mediator wins; otherwise the widest family decides.
    pub fn select(schema: &Schema, evidence: &EvidenceSet) -> Self {
        let widest = evidence
            .families()
            .iter()
            .map(|f| f.covariates().len())
            .max()
            .unwrap_or(0);
        match (schema.mediator().is_some(), widest) {
            (true, _) => Method::Mediator,
            (false, 0) => Method::Balke,
            (false, 1) => Method::CovariateSpecific,
            (false, _) => Method::JointCovariate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Balke => "balke-lp",
            Method::CovariateSpecific => "covariate-specific-lp",
            Method::JointCovariate => "joint-covariate-lp",
            Method::Mediator => "mediator-bnb",
        }
    }
}

/// Machine-readable output of `bounds`.
#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub method: Method,
    pub query: QuerySpec,
    pub status: SolveStatus,
    pub bounds: BoundsInterval,
    /// Values of feasible points found along the way; diagnostics only.
    pub inner_bounds: Option<BoundsInterval>,
    /// Largest constraint residual among the reported points.
    pub max_residual: f64,
    pub evidence_residual: f64,
    pub nodes_explored: usize,
    pub lp_solves: usize,
    pub runtime_ms: f64,
    /// Closed-form bounds from the covariate-free families, when binary.
    pub closed_form: Option<BoundsInterval>,
    pub truth: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn build_program(
    method: Method,
    schema: &Schema,
    evidence: &EvidenceSet,
    doc: &ProblemDocument,
) -> Result<ConstraintProgram, Failure> {
    let query = &doc.query;
    let program = match method {
        Method::Mediator => build_thm3_program(schema, evidence, query, &doc.options.mediator())?,
        Method::CovariateSpecific => build_cor2_program(schema, evidence, query)?,
        Method::Balke | Method::JointCovariate => build_thm1_program(schema, evidence, query)?,
    };
    Ok(program)
}

/// Validates, selects the program family and bounds the query.
pub fn compute(doc: &ProblemDocument, tol: f64) -> anyhow::Result<ResultDocument> {
    let (schema, evidence) = doc.resolve()?;
    let validation = validate_evidence(&evidence, tol).map_err(|e| Failure::Evidence(e.to_string()))?;
    let method = Method::select(&schema, &evidence);
    let program = build_program(method, &schema, &evidence, doc)?;
    let report: BoundReport = bound_interval(&program, &doc.options.bnb())?;
    if report.status() == SolveStatus::Infeasible {
        let mut families = report.lower.infeasible_families.clone();
        families.extend(report.upper.infeasible_families.iter().cloned());
        families.sort();
        families.dedup();
        return Err(Failure::Infeasible(format!(
            "no joint distribution matches the evidence; conflicting rows come from: {}",
            if families.is_empty() {
                "(unknown)".to_string()
            } else {
                families.join(", ")
            }
        ))
        .into());
    }
    let closed_form = if schema.is_binary() {
        tp_bounds(&schema, &evidence, &doc.query).ok()
    } else {
        None
    };
    Ok(ResultDocument {
        method,
        query: doc.query.clone(),
        status: report.status(),
        bounds: report.bounds,
        inner_bounds: report.inner_bounds,
        max_residual: report.max_residual(),
        evidence_residual: validation.max_residual(),
        nodes_explored: report.nodes_explored(),
        lp_solves: report.lower.lp_solves + report.upper.lp_solves,
        runtime_ms: report.runtime_ms(),
        closed_form,
        truth: doc.truth,
        warnings: validation.warnings,
    })
}

pub fn render(result: &ResultDocument) -> String {
    let mut out = String::new();
    let name = result.query.name();
    let b = result.bounds;
    let _ = writeln!(out, "method: {}", result.method.name());
    let _ = writeln!(out, "{name} in [{:.6}, {:.6}]  ({:?})", b.lb, b.ub, result.status);
    if let Some(inner) = result.inner_bounds {
        let _ = writeln!(out, "feasible values found: [{:.6}, {:.6}]", inner.lb, inner.ub);
    }
    if let Some(cf) = result.closed_form {
        let _ = writeln!(out, "closed form without covariates: [{:.6}, {:.6}]", cf.lb, cf.ub);
    }
    if let Some(t) = result.truth {
        let inside = if b.contains(t, 1e-7) { "inside" } else { "OUTSIDE" };
        let _ = writeln!(out, "true value {t:.6} ({inside} the bounds)");
    }
    let _ = writeln!(
        out,
        "nodes {}, LP solves {}, max residual {:.1e}",
        result.nodes_explored, result.lp_solves, result.max_residual
    );
    for w in &result.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
