//! Linear programs built from evidence generated by an explicit joint
//! distribution over potential outcomes, covariates and treatment.

use causebound::{
    bound_interval, build_cor2_program, build_thm1_program, tp_pn_bounds, tp_pns_bounds, BinaryEvidence, BnbOptions,
    BoundsInterval, EvidenceFamily, EvidenceKind, EvidenceSet, QuerySpec, Role, Schema,
};
use proptest::prelude::*;

/// A binary unit: `(Y_{x0}, Y_{x1}, Z_1..Z_m, X)`.
#[derive(Debug)]
struct Joint {
    m: usize,
    /// Indexed by the unit's bits, `Y_{x0}` most significant.
    p: Vec<f64>,
}

impl Joint {
    fn new(m: usize, weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        Joint {
            m,
            p: weights.iter().map(|w| w / total).collect(),
        }
    }

    fn units(&self) -> impl Iterator<Item = (usize, usize, Vec<usize>, usize, f64)> + '_ {
        let bits = self.m + 3;
        self.p.iter().enumerate().map(move |(i, &p)| {
            let bit = |k: usize| (i >> (bits - 1 - k)) & 1;
            let z = (0..self.m).map(|j| bit(2 + j)).collect();
            (bit(0), bit(1), z, bit(bits - 1), p)
        })
    }

    /// `P(X, Y, Z_S)` with `Y = Y_X`.
    fn observational(&self, covs: &[usize]) -> Vec<f64> {
        let mut t = vec![0.0; 4 << covs.len()];
        for (y0, y1, z, x, p) in self.units() {
            let y = if x == 0 { y0 } else { y1 };
            let idx = covs.iter().fold(x * 2 + y, |acc, &c| acc * 2 + z[c]);
            t[idx] += p;
        }
        t
    }

    /// `P(Y_x, Z_S)` for both arms.
    fn experimental(&self, covs: &[usize]) -> Vec<f64> {
        let mut t = vec![0.0; 4 << covs.len()];
        for (y0, y1, z, _, p) in self.units() {
            for (arm, y) in [(0, y0), (1, y1)] {
                let idx = covs.iter().fold(arm * 2 + y, |acc, &c| acc * 2 + z[c]);
                t[idx] += p;
            }
        }
        t
    }

    fn pns(&self) -> f64 {
        self.units().filter(|u| u.0 == 0 && u.1 == 1).map(|u| u.4).sum()
    }

    fn evidence(&self, schema: &Schema, patterns: &[Vec<usize>]) -> EvidenceSet {
        let mut set = EvidenceSet::default();
        for covs in patterns {
            let obs = self.observational(covs);
            let exp = self.experimental(covs);
            set.push(
                EvidenceFamily::dense(
                    schema,
                    format!("obs{covs:?}"),
                    EvidenceKind::Observational,
                    covs,
                    false,
                    obs,
                )
                .unwrap(),
            );
            set.push(
                EvidenceFamily::dense(
                    schema,
                    format!("exp{covs:?}"),
                    EvidenceKind::Experimental,
                    covs,
                    false,
                    exp,
                )
                .unwrap(),
            );
        }
        set
    }
}

fn bounds(program: &causebound::ConstraintProgram) -> BoundsInterval {
    bound_interval(program, &BnbOptions::default()).unwrap().bounds
}

fn joint(m: usize) -> impl Strategy<Value = Joint> {
    prop::collection::vec(0.0f64..1.0, 8 << m).prop_filter_map("all-zero weights", move |w| {
        (w.iter().sum::<f64>() > 1e-3).then(|| Joint::new(m, &w))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginal_program_matches_closed_forms(j in joint(0)) {
        let schema = Schema::binary(0, Role::NondescendantCovariate, false);
        let evidence = j.evidence(&schema, &[vec![]]);
        let obs = j.observational(&[]);
        let exp = j.experimental(&[]);
        let ev = BinaryEvidence::new(exp[0], exp[2], [obs[0], obs[1], obs[2], obs[3]], obs[0] + obs[2]).unwrap();

        let lp = bounds(&build_thm1_program(&schema, &evidence, &QuerySpec::pns()).unwrap());
        let cf = tp_pns_bounds(&ev).unwrap();
        prop_assert!((lp.lb - cf.lb).abs() < 1e-8 && (lp.ub - cf.ub).abs() < 1e-8, "{lp:?} vs {cf:?}");
        prop_assert!(lp.contains(j.pns(), 1e-9));

        if obs[0] > 1e-3 {
            let lp = bounds(&build_thm1_program(&schema, &evidence, &QuerySpec::pn()).unwrap());
            let cf = tp_pn_bounds(&ev).unwrap();
            prop_assert!((lp.lb - cf.lb).abs() < 1e-8 && (lp.ub - cf.ub).abs() < 1e-8, "{lp:?} vs {cf:?}");
        }
    }

    #[test]
    fn covariates_nest_and_contain_truth(j in joint(2)) {
        let schema = Schema::binary(2, Role::NondescendantCovariate, false);
        let truth = j.pns();
        let q = QuerySpec::pns();
        let tp = bounds(&build_thm1_program(&schema, &j.evidence(&schema, &[vec![]]), &q).unwrap());
        let single = j.evidence(&schema, &[vec![], vec![0], vec![1]]);
        let per_covariate = bounds(&build_cor2_program(&schema, &single, &q).unwrap());
        let full = j.evidence(&schema, &[vec![], vec![0, 1]]);
        let combined = bounds(&build_thm1_program(&schema, &full, &q).unwrap());
        for b in [tp, per_covariate, combined] {
            prop_assert!(b.contains(truth, 1e-9), "{truth} outside {b:?}");
        }
        prop_assert!(per_covariate.within(&tp, 1e-7));
        prop_assert!(combined.within(&per_covariate, 1e-7));
    }
}

#[test]
fn covariate_reveals_the_causal_type() {
    // Z splits units into pure "Y = X" and pure "Y = 1 - X" types with
    // X independent of the type: the marginal data cannot tell them apart
    let mut w = vec![0.0; 16];
    let idx = |y0: usize, y1: usize, z: usize, x: usize| (((y0 * 2 + y1) * 2 + z) * 2) + x;
    for x in 0..2 {
        w[idx(0, 1, 0, x)] = 0.25;
        w[idx(1, 0, 1, x)] = 0.25;
    }
    let j = Joint::new(1, &w);
    let schema = Schema::binary(1, Role::NondescendantCovariate, false);
    let q = QuerySpec::pns();
    let tp = bounds(&build_thm1_program(&schema, &j.evidence(&schema, &[vec![]]), &q).unwrap());
    let cov = bounds(&build_cor2_program(&schema, &j.evidence(&schema, &[vec![], vec![0]]), &q).unwrap());
    assert!((tp.lb - 0.0).abs() < 1e-9 && (tp.ub - 0.5).abs() < 1e-9, "{tp:?}");
    assert!((cov.lb - 0.5).abs() < 1e-9 && (cov.ub - 0.5).abs() < 1e-9, "{cov:?}");
}
