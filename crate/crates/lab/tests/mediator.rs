//! Mediator programs checked against the structural models that generate
//! their evidence.

use causebound::program::{mccormick_relax, Interval};
use causebound::{
    bound_interval, build_thm1_program, build_thm3_program, BnbOptions, CounterfactualSpace, MediatorOptions, QuerySpec,
};
use causebound_lab::{
    ground_truth_joint, sample_scm, scm_to_evidence, true_poc, Availability, Cardinalities, GraphFamily, ScmSpec,
};

fn model(seed: u64) -> ScmSpec {
    sample_scm(GraphFamily::Mediator, Cardinalities::BINARY, 1, seed)
}

#[test]
fn truth_satisfies_every_row() {
    for seed in 0..100 {
        let scm = model(seed);
        let schema = scm.schema();
        for availability in [Availability::Joint, Availability::MarginalOnly] {
            let evidence = scm_to_evidence(&scm, availability);
            let program =
                build_thm3_program(&schema, &evidence, &QuerySpec::pns(), &MediatorOptions::default()).unwrap();
            let truth = ground_truth_joint(&scm, &program.space).unwrap();
            assert!(program.max_linear_violation(&truth) < 1e-10, "seed {seed}");
            assert!(
                program.max_bilinear_residual(&truth) < 1e-10,
                "seed {seed} {availability:?} {}",
                program.max_bilinear_residual(&truth)
            );
            let objective = program.objective_value(&truth);
            assert!((objective - true_poc(&scm, &QuerySpec::pns()).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn truth_lifts_into_the_relaxation() {
    for seed in 0..20 {
        let scm = model(seed);
        let evidence = scm_to_evidence(&scm, Availability::Joint);
        let program =
            build_thm3_program(&scm.schema(), &evidence, &QuerySpec::pns(), &MediatorOptions::default()).unwrap();
        let truth = ground_truth_joint(&scm, &program.space).unwrap();
        let relaxation = mccormick_relax(&program, &vec![Interval::UNIT; program.aggregates.len()]).unwrap();
        let mut lifted = truth.clone();
        for p in &relaxation.products {
            lifted.push(program.aggregates[p.i].value(&truth) * program.aggregates[p.j].value(&truth));
        }
        assert!(relaxation.program.max_residual(&lifted) < 1e-10, "seed {seed}");
    }
}

#[test]
fn hint_is_feasible_for_generated_evidence() {
    for seed in 0..50 {
        let scm = model(seed);
        let evidence = scm_to_evidence(&scm, Availability::CovariateSpecific);
        let program =
            build_thm3_program(&scm.schema(), &evidence, &QuerySpec::pns(), &MediatorOptions::default()).unwrap();
        let hint = program.hint.as_ref().expect("observational mediator family present");
        assert!(program.max_residual(hint) < 1e-10, "seed {seed}");
    }
}

#[test]
fn truth_is_a_point_of_the_space() {
    let scm = model(3);
    let space = CounterfactualSpace::mediated(&scm.schema(), &[0]).unwrap();
    let p = ground_truth_joint(&scm, &space).unwrap();
    assert_eq!(p.len(), 128);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn certified_bounds_are_sound_and_monotone() {
    for seed in 0..12 {
        let scm = model(seed);
        let schema = scm.schema();
        let evidence = scm_to_evidence(&scm, Availability::CovariateSpecific);
        let q = QuerySpec::pns();
        let program = build_thm3_program(&schema, &evidence, &q, &MediatorOptions::default()).unwrap();
        let truth = true_poc(&scm, &q).unwrap();
        let coarse = bound_interval(
            &program,
            &BnbOptions {
                budget: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let fine = bound_interval(
            &program,
            &BnbOptions {
                budget: 150,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(fine.bounds.within(&coarse.bounds, 1e-12), "seed {seed}");
        assert!(fine.bounds.contains(truth, 1e-9), "seed {seed}");
        if let Some(inner) = fine.inner_bounds {
            assert!(inner.within(&fine.bounds, 1e-8), "seed {seed}");
            assert!(inner.within(&coarse.bounds, 1e-8), "seed {seed}");
        }

        // the same evidence without its mediator columns
        let plain = evidence.filtered(|f| !f.with_mediator());
        let backdoor = build_thm1_program(&schema, &plain, &q).unwrap();
        let outer = bound_interval(&backdoor, &BnbOptions::default()).unwrap().bounds;
        assert!(fine.bounds.within(&outer, 1e-7), "seed {seed}");
    }
}

#[test]
fn pn_and_ps_are_bounded_too() {
    for seed in 0..4 {
        let scm = model(seed);
        let evidence = scm_to_evidence(&scm, Availability::Joint);
        for q in [QuerySpec::pn(), QuerySpec::ps()] {
            let program = build_thm3_program(&scm.schema(), &evidence, &q, &MediatorOptions::default()).unwrap();
            let b = bound_interval(
                &program,
                &BnbOptions {
                    budget: 50,
                    ..Default::default()
                },
            )
            .unwrap()
            .bounds;
            let truth = true_poc(&scm, &q).unwrap();
            assert!(b.contains(truth, 1e-8), "seed {seed} {q:?}: {truth} outside {b:?}");
        }
    }
}
