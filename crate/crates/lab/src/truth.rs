use causebound::{AxisKind, CounterfactualSpace, QuerySpec};

use crate::scm::{units, ScmSpec};
use crate::LabError;

/// The probability of causation `query` under `scm`, summed over response
/// functions.
pub fn true_poc(scm: &ScmSpec, query: &QuerySpec) -> Result<f64, LabError> {
    query
        .validate(scm.nx, scm.ny)
        .map_err(|e| LabError::InvalidArgument(e.to_string()))?;
    let events = query.potential_events();
    let cond = query.conditioning_cell();
    let mut num = 0.0;
    let mut den = 0.0;
    for u in units(scm) {
        if let Some((x, y)) = cond {
            if u.x != x {
                continue;
            }
            if u.y() == y {
                den += u.p;
            }
        }
        if events.iter().all(|&(arm, out)| u.y_pot[arm] == out) {
            num += u.p;
        }
    }
    match cond {
        None => Ok(num),
        Some(_) if den <= 0.0 => Err(LabError::UndefinedConditional {
            query: query.to_string(),
        }),
        Some(_) => Ok(num / den),
    }
}

/// The joint distribution of all axes of `space` under `scm`: a point
/// every program built from the model's evidence must admit.
pub fn ground_truth_joint(scm: &ScmSpec, space: &CounterfactualSpace) -> Result<Vec<f64>, LabError> {
    let mut p = vec![0.0; space.total_size()];
    for u in units(scm) {
        let assignment = space
            .axes()
            .iter()
            .map(|axis| match axis.kind {
                AxisKind::PotentialOutcome(t) => Ok(u.y_pot[t]),
                AxisKind::PotentialMediator(t) => u
                    .w_pot
                    .as_ref()
                    .map(|w| w[t])
                    .ok_or_else(|| LabError::InvalidArgument("model has no mediator".into())),
                AxisKind::Covariate(i) => Ok(u.z[i]),
                AxisKind::Mediator => u
                    .w()
                    .ok_or_else(|| LabError::InvalidArgument("model has no mediator".into())),
                AxisKind::Treatment => Ok(u.x),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let offset = space
            .index_flatten(&assignment)
            .map_err(|e| LabError::InvalidArgument(e.to_string()))?;
        p[offset] += u.p;
    }
    Ok(p)
}
