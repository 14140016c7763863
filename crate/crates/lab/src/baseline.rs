use causebound::{
    bound_interval, build_thm1_program, tp_pn_bounds, tp_pns_bounds, tp_ps_bounds, BinaryEvidence, BnbOptions,
    BoundsInterval, EvidenceKind, EvidenceSet, QuerySpec, Schema, SolveStatus,
};

use crate::LabError;

/// Closed-form bounds for binary problems, otherwise the LP over the
/// covariate-free families (which the closed form solves exactly).
pub fn tp_bounds(schema: &Schema, evidence: &EvidenceSet, query: &QuerySpec) -> Result<BoundsInterval, LabError> {
    let marginal = evidence.filtered(|f| f.covariates().is_empty() && !f.with_mediator());
    if schema.is_binary() && *query == QuerySpec::pns() {
        return Ok(tp_pns_bounds(&BinaryEvidence::from_evidence(&marginal)?)?);
    }
    if schema.is_binary() && *query == QuerySpec::pn() {
        return Ok(tp_pn_bounds(&BinaryEvidence::from_evidence(&marginal)?)?);
    }
    if schema.is_binary() && *query == QuerySpec::ps() {
        return Ok(tp_ps_bounds(&BinaryEvidence::from_evidence(&marginal)?)?);
    }
    lp_bounds(schema, &marginal, query, "marginal LP")
}

fn lp_bounds(
    schema: &Schema,
    evidence: &EvidenceSet,
    query: &QuerySpec,
    method: &'static str,
) -> Result<BoundsInterval, LabError> {
    let program = build_thm1_program(schema, evidence, query)?;
    let report = bound_interval(&program, &BnbOptions::default())?;
    if report.status() == SolveStatus::Infeasible {
        return Err(LabError::Infeasible { trial: None, method });
    }
    Ok(report.bounds)
}

/// Result of the best-single-covariate baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpBounds {
    pub bounds: BoundsInterval,
    /// `(covariate, interval)` for each covariate with evidence.
    pub per_covariate: Vec<(usize, BoundsInterval)>,
    /// No covariate evidence was found and the marginal bounds were used.
    pub fell_back: bool,
}

/// For each covariate, the single-covariate LP on that covariate's families
/// (summed down from larger families where needed); returns the largest
/// lower and smallest upper bound among them. Mediator columns are ignored.
pub fn mlp_baseline_bounds(schema: &Schema, evidence: &EvidenceSet, query: &QuerySpec) -> Result<MlpBounds, LabError> {
    let plain = evidence.filtered(|f| !f.with_mediator());
    let mut per_covariate = Vec::new();
    for i in plain.referenced_covariates() {
        let mut slice = plain.filtered(|f| f.covariates().is_empty() || f.covariates() == [i]);
        for kind in [EvidenceKind::Experimental, EvidenceKind::Observational] {
            let has = slice
                .families()
                .iter()
                .any(|f| f.kind() == kind && f.covariates() == [i]);
            if has {
                continue;
            }
            let source = plain
                .families()
                .iter()
                .filter(|f| f.kind() == kind && f.covariates().contains(&i))
                .min_by_key(|f| f.table().len());
            if let Some(f) = source {
                slice.push(f.marginal(format!("{} summed to covariate #{i}", f.name()), &[i], false)?);
            }
        }
        per_covariate.push((i, lp_bounds(schema, &slice, query, "single-covariate LP")?));
    }
    if per_covariate.is_empty() {
        return Ok(MlpBounds {
            bounds: tp_bounds(schema, evidence, query)?,
            per_covariate,
            fell_back: true,
        });
    }
    let lb = per_covariate
        .iter()
        .map(|(_, b)| b.lb)
        .fold(f64::NEG_INFINITY, f64::max);
    let ub = per_covariate.iter().map(|(_, b)| b.ub).fold(f64::INFINITY, f64::min);
    Ok(MlpBounds {
        bounds: BoundsInterval::new(lb, ub, true),
        per_covariate,
        fell_back: false,
    })
}
