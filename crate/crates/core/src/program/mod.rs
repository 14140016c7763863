//! Optimization programs over the counterfactual joint distribution.
//!
//! Program variables are the cells `p` of a [`CounterfactualSpace`]; every
//! variable is implicitly nonnegative and each program carries an explicit
//! `Σ p = 1` row. Relaxations append auxiliary variables after the cells.

mod build;
mod mccormick;

pub use build::{
    build_cor2_program, build_thm1_program, build_thm3_program, objective_for_query, BilinearOrientation,
    MediatorOptions,
};
pub use mccormick::{envelope_rows, mccormick_relax, mccormick_relax_with, Interval, Product, Relaxation};

use std::collections::HashSet;

use crate::model::{Axis, AxisKind, CounterfactualSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    /// Evidence family or construct that produced the row.
    pub origin: String,
}

impl LinearConstraint {
    pub fn indicator(cells: Vec<usize>, rhs: f64, origin: impl Into<String>) -> Self {
        Self {
            coefficients: cells.into_iter().map(|c| (c, 1.0)).collect(),
            relation: Relation::Eq,
            rhs,
            origin: origin.into(),
        }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let diff = self.lhs(x) - self.rhs;
        match self.relation {
            Relation::Eq => diff.abs(),
            Relation::Le => diff.max(0.0),
            Relation::Ge => (-diff).max(0.0),
        }
    }
}

/// A sum of distinct program cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub cells: Vec<usize>,
    pub label: String,
}

impl Aggregate {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.cells.iter().map(|&c| x[c]).sum()
    }
}

/// `(A·p)(D·p) = (B·p)(C·p)` over aggregate ids.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearConstraint {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub label: String,
    /// Follows algebraically from the other instances of its family plus
    /// the linear identities among the aggregates.
    pub implied: bool,
}

impl BilinearConstraint {
    pub fn residual(&self, aggregates: &[Aggregate], x: &[f64]) -> f64 {
        let v = |k: usize| aggregates[k].value(x);
        v(self.a) * v(self.d) - v(self.b) * v(self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintProgram {
    pub space: CounterfactualSpace,
    /// Cells plus any auxiliary variables.
    pub num_vars: usize,
    pub objective: Vec<(usize, f64)>,
    pub linear: Vec<LinearConstraint>,
    pub aggregates: Vec<Aggregate>,
    pub bilinear: Vec<BilinearConstraint>,
    /// The optimum is divided by this (a conditioning probability for PN/PS).
    pub normalizer: f64,
    /// A point expected to satisfy every row, used only to seed heuristics.
    pub hint: Option<Vec<f64>>,
}

impl ConstraintProgram {
    /// A program over `num_vars` anonymous variables with no simplex row
    /// added; for hand-built instances.
    pub fn raw(num_vars: usize, objective: Vec<(usize, f64)>, linear: Vec<LinearConstraint>) -> Self {
        let space = CounterfactualSpace::new(vec![Axis {
            label: "v".into(),
            kind: AxisKind::Covariate(0),
            cardinality: num_vars,
        }])
        .expect("positive size");
        Self {
            space,
            num_vars,
            objective,
            linear,
            aggregates: Vec::new(),
            bilinear: Vec::new(),
            normalizer: 1.0,
            hint: None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.bilinear.is_empty()
    }

    /// Normalized objective at `x`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum::<f64>() / self.normalizer
    }

    pub fn max_linear_violation(&self, x: &[f64]) -> f64 {
        self.linear.iter().map(|r| r.violation(x)).fold(0.0, f64::max)
    }

    pub fn max_bilinear_residual(&self, x: &[f64]) -> f64 {
        self.bilinear
            .iter()
            .map(|b| b.residual(&self.aggregates, x).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation over linear rows, bilinear rows and nonnegativity.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let negativity = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        self.max_linear_violation(x)
            .max(self.max_bilinear_residual(x))
            .max(negativity)
    }
}

/// Accumulates rows, dropping exact duplicates.
#[derive(Default)]
pub(crate) struct RowSet {
    rows: Vec<LinearConstraint>,
    seen: HashSet<(Vec<usize>, u64, u8)>,
}

impl RowSet {
    pub(crate) fn push_indicator(&mut self, mut cells: Vec<usize>, rhs: f64, origin: &str) {
        cells.sort_unstable();
        let key = (cells.clone(), rhs.to_bits(), 0);
        if self.seen.insert(key) {
            self.rows.push(LinearConstraint::indicator(cells, rhs, origin));
        }
    }

    pub(crate) fn into_rows(self) -> Vec<LinearConstraint> {
        self.rows
    }
}
