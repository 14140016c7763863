//! Bounds on probabilities of causation (PNS, PN, PS) from experimental and
//! observational evidence, optionally refined by covariates or a mediator.
//!
//! Evidence goes into a linear or bilinear program over the joint
//! distribution of potential outcomes; the optimizer returns its range.

pub mod closed_form;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod program;

pub use closed_form::{tp_pn_bounds, tp_pns_bounds, tp_ps_bounds, BinaryEvidence};
pub use error::{BuildError, EvidenceError, IndexError, ModelError, SolveError};
pub use model::{
    validate_evidence, Axis, AxisKind, BoundsInterval, CounterfactualSpace, EvidenceEntry, EvidenceFamily,
    EvidenceKind, EvidenceSet, QuerySpec, Role, Schema, ValidationReport, VariableSpec, EPS_EVIDENCE, EPS_NUM,
};
pub use optimizer::{
    bb_solve, bound_interval, local_search_inner, solve_lp, BnbOptions, BoundReport, LocalSearchOptions, Sense,
    SolveReport, SolveStatus,
};
pub use program::{
    build_cor2_program, build_thm1_program, build_thm3_program, BilinearOrientation, ConstraintProgram, MediatorOptions,
};
