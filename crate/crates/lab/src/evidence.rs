use causebound::{EvidenceFamily, EvidenceKind, EvidenceSet};

use crate::scm::{units, GraphFamily, ScmSpec};

/// Which conditioning patterns the analyst gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Availability {
    /// Families over all covariates jointly.
    Joint,
    /// One family per covariate, never two covariates together.
    CovariateSpecific,
    /// Only `P(X, Y)` and `P(Y_x)`.
    MarginalOnly,
}

fn covariate_label(covs: &[usize], with_mediator: bool) -> String {
    let mut s: String = covs.iter().map(|c| format!(",Z{}", c + 1)).collect();
    if with_mediator {
        s.push_str(",W");
    }
    s
}

/// Exact evidence of `scm`. Marginal families `P(X, Y)` and `P(Y_x)` are
/// always present; the mediator family adds `P(X, Y, Z_S, W)` for every
/// observational pattern with at least one covariate (or `P(X, Y, W)` when
/// the model has none).
pub fn scm_to_evidence(scm: &ScmSpec, availability: Availability) -> EvidenceSet {
    let schema = scm.schema();
    let m = scm.m();
    let mediator = scm.family == GraphFamily::Mediator;
    let zc = scm.z_cells();
    let nw = if mediator { scm.nw } else { 1 };

    // full tables over [X, Y, Z_1..Z_m(, W)] and [X, Y, Z_1..Z_m]
    let mut obs = vec![0.0; scm.nx * scm.ny * zc * nw];
    let mut exp = vec![0.0; scm.nx * scm.ny * zc];
    for u in units(scm) {
        let zi = u.z.iter().zip(&scm.z_cards).fold(0, |acc, (&v, &c)| acc * c + v);
        let w = u.w().unwrap_or(0);
        obs[((u.x * scm.ny + u.y()) * zc + zi) * nw + w] += u.p;
        for (t, &y) in u.y_pot.iter().enumerate() {
            exp[(t * scm.ny + y) * zc + zi] += u.p;
        }
    }
    let all: Vec<usize> = (0..m).collect();
    let full_obs = EvidenceFamily::dense(&schema, "full", EvidenceKind::Observational, &all, mediator, obs)
        .expect("shape matches schema");
    let full_exp = EvidenceFamily::dense(&schema, "full", EvidenceKind::Experimental, &all, false, exp)
        .expect("shape matches schema");

    let mut patterns: Vec<Vec<usize>> = vec![Vec::new()];
    match availability {
        Availability::Joint if m > 0 => patterns.push(all.clone()),
        Availability::CovariateSpecific => patterns.extend((0..m).map(|i| vec![i])),
        _ => {}
    }
    let mut out = EvidenceSet::default();
    for covs in &patterns {
        let label = covariate_label(covs, false);
        out.push(full_obs.marginal(format!("P(X,Y{label})"), covs, false).unwrap());
        out.push(full_exp.marginal(format!("P(Y_x{label})"), covs, false).unwrap());
        if mediator && !covs.is_empty() {
            let label = covariate_label(covs, true);
            out.push(full_obs.marginal(format!("P(X,Y{label})"), covs, true).unwrap());
        }
    }
    // without its covariates the mediator column would hide the back-door path
    if mediator && m == 0 {
        out.push(full_obs.marginal("P(X,Y,W)", &[], true).unwrap());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{sample_scm, Cardinalities};
    use causebound::validate_evidence;

    fn names(ev: &EvidenceSet) -> Vec<&str> {
        ev.families().iter().map(|f| f.name()).collect()
    }

    #[test]
    fn availability_patterns() {
        let scm = sample_scm(GraphFamily::Nondescendant, Cardinalities::BINARY, 2, 4);
        let cs = scm_to_evidence(&scm, Availability::CovariateSpecific);
        assert_eq!(
            names(&cs),
            ["P(X,Y)", "P(Y_x)", "P(X,Y,Z1)", "P(Y_x,Z1)", "P(X,Y,Z2)", "P(Y_x,Z2)"]
        );
        assert!(cs.families().iter().all(|f| f.covariates().len() <= 1));
        let joint = scm_to_evidence(&scm, Availability::Joint);
        assert_eq!(names(&joint), ["P(X,Y)", "P(Y_x)", "P(X,Y,Z1,Z2)", "P(Y_x,Z1,Z2)"]);
        let marg = scm_to_evidence(&scm, Availability::MarginalOnly);
        assert_eq!(names(&marg), ["P(X,Y)", "P(Y_x)"]);
    }

    #[test]
    fn mediator_adds_mediator_columns() {
        let scm = sample_scm(GraphFamily::Mediator, Cardinalities::BINARY, 1, 4);
        let ev = scm_to_evidence(&scm, Availability::Joint);
        assert_eq!(
            names(&ev),
            ["P(X,Y)", "P(Y_x)", "P(X,Y,Z1)", "P(Y_x,Z1)", "P(X,Y,Z1,W)"]
        );
        assert!(ev.has_mediator_column());
    }

    #[test]
    fn generated_evidence_validates() {
        for (family, m) in [(GraphFamily::Nondescendant, 3), (GraphFamily::Mediator, 2)] {
            for avail in [
                Availability::Joint,
                Availability::CovariateSpecific,
                Availability::MarginalOnly,
            ] {
                let scm = sample_scm(family, Cardinalities::BINARY, m, 9);
                let report = validate_evidence(&scm_to_evidence(&scm, avail), 1e-12).unwrap();
                assert!(report.max_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn experimental_marginal_follows_adjustment() {
        // P(z) = (0.5, 0.5); P(Y_x0 = 0 | z) = 0.8 and 0.4
        // response index r has Y_x0 = r % 2, Y_x1 = r / 2
        let scm = ScmSpec {
            family: GraphFamily::Nondescendant,
            nx: 2,
            ny: 2,
            nw: 2,
            z_cards: vec![2],
            covariate_priors: vec![vec![0.5, 0.5]],
            treatment_cpt: vec![vec![0.3, 0.7], vec![0.6, 0.4]],
            outcome_response: vec![vec![0.5, 0.1, 0.3, 0.1], vec![0.2, 0.3, 0.2, 0.3]],
            mediator_response: Vec::new(),
            outcome_given_mediator: Vec::new(),
        };
        scm.validate().unwrap();
        let ev = scm_to_evidence(&scm, Availability::MarginalOnly);
        let exp = ev.experimental_marginal().unwrap();
        let direct = 0.5 * 0.8 + 0.5 * 0.4;
        assert!((exp[0] - direct).abs() < 1e-15);
    }

    #[test]
    fn deterministic_models_give_degenerate_evidence() {
        let scm = ScmSpec {
            family: GraphFamily::Mediator,
            nx: 2,
            ny: 2,
            nw: 2,
            z_cards: vec![2],
            covariate_priors: vec![vec![1.0, 0.0]],
            treatment_cpt: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            outcome_response: Vec::new(),
            mediator_response: vec![vec![0.0, 0.0, 1.0, 0.0]; 2],
            outcome_given_mediator: vec![vec![0.0, 0.0, 1.0, 0.0]; 2],
        };
        scm.validate().unwrap();
        for f in scm_to_evidence(&scm, Availability::Joint).families() {
            assert!(f.table().iter().all(|&p| p == 0.0 || p == 1.0), "{}", f.name());
        }
    }
}
