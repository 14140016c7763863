//! Variables, the counterfactual index space, queries, and the evidence
//! container shared by every program builder.
//!
//! All indices are 0-based. For binary variables index 0 is the "active"
//! value (`x`, `y`) and index 1 its complement (`x'`, `y'`).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EvidenceError, IndexError, ModelError};

/// Default tolerance for evidence normalization and cross-family agreement.
pub const EPS_EVIDENCE: f64 = 1e-6;
/// Default numerical feasibility tolerance for solver output.
pub const EPS_NUM: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Treatment,
    Outcome,
    NondescendantCovariate,
    BackdoorCovariate,
    Mediator,
}

impl Role {
    pub fn is_covariate(self) -> bool {
        matches!(self, Role::NondescendantCovariate | Role::BackdoorCovariate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub cardinality: usize,
    pub role: Role,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, cardinality: usize, role: Role) -> Self {
        Self {
            name: name.into(),
            cardinality,
            role,
        }
    }
}

/// The declared variables of one problem, split by structural role.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    treatment: VariableSpec,
    outcome: VariableSpec,
    covariates: Vec<VariableSpec>,
    mediator: Option<VariableSpec>,
}

impl Schema {
    /// Exactly one treatment and one outcome, at most one mediator, every
    /// cardinality at least 2 and unique names.
    pub fn new(variables: impl IntoIterator<Item = VariableSpec>) -> Result<Self, ModelError> {
        let mut treatment = None;
        let mut outcome = None;
        let mut mediator = None;
        let mut covariates = Vec::new();
        let mut seen = HashMap::new();
        for var in variables {
            if var.cardinality < 2 {
                return Err(ModelError::Cardinality {
                    name: var.name,
                    cardinality: var.cardinality,
                });
            }
            if seen.insert(var.name.clone(), ()).is_some() {
                return Err(ModelError::DuplicateVariable(var.name));
            }
            let slot = match var.role {
                Role::Treatment => &mut treatment,
                Role::Outcome => &mut outcome,
                Role::Mediator => &mut mediator,
                Role::NondescendantCovariate | Role::BackdoorCovariate => {
                    covariates.push(var);
                    continue;
                }
            };
            if slot.is_some() {
                return Err(ModelError::RoleCount(var.role));
            }
            *slot = Some(var);
        }
        Ok(Self {
            treatment: treatment.ok_or(ModelError::MissingRole(Role::Treatment))?,
            outcome: outcome.ok_or(ModelError::MissingRole(Role::Outcome))?,
            covariates,
            mediator,
        })
    }

    /// Binary treatment and outcome with `m` binary covariates of the given
    /// role and an optional binary mediator. Names are `X`, `Y`, `Z1..Zm`, `W`.
    pub fn binary(m: usize, covariate_role: Role, with_mediator: bool) -> Self {
        let mut vars = vec![
            VariableSpec::new("X", 2, Role::Treatment),
            VariableSpec::new("Y", 2, Role::Outcome),
        ];
        vars.extend((1..=m).map(|i| VariableSpec::new(format!("Z{i}"), 2, covariate_role)));
        if with_mediator {
            vars.push(VariableSpec::new("W", 2, Role::Mediator));
        }
        Self::new(vars).expect("binary schema is well formed")
    }

    pub fn treatment(&self) -> &VariableSpec {
        &self.treatment
    }

    pub fn outcome(&self) -> &VariableSpec {
        &self.outcome
    }

    pub fn covariates(&self) -> &[VariableSpec] {
        &self.covariates
    }

    pub fn mediator(&self) -> Option<&VariableSpec> {
        self.mediator.as_ref()
    }

    pub fn nx(&self) -> usize {
        self.treatment.cardinality
    }

    pub fn ny(&self) -> usize {
        self.outcome.cardinality
    }

    pub fn nw(&self) -> Option<usize> {
        self.mediator.as_ref().map(|w| w.cardinality)
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariates.iter().position(|v| v.name == name)
    }

    pub fn is_binary(&self) -> bool {
        self.nx() == 2 && self.ny() == 2
    }

    /// All declared variables in treatment, outcome, covariates, mediator order.
    pub fn variables(&self) -> Vec<VariableSpec> {
        let mut out = vec![self.treatment.clone(), self.outcome.clone()];
        out.extend(self.covariates.iter().cloned());
        out.extend(self.mediator.iter().cloned());
        out
    }
}

/// What an axis of the counterfactual space stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisKind {
    /// Potential outcome `Y_{x_arm}`.
    PotentialOutcome(usize),
    /// Potential mediator `W_{x_arm}`.
    PotentialMediator(usize),
    /// Covariate, by index into [`Schema::covariates`].
    Covariate(usize),
    /// Factual mediator `W`.
    Mediator,
    /// Factual treatment `X`.
    Treatment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub kind: AxisKind,
    pub cardinality: usize,
}

/// Row-major index space over the joint counterfactual distribution; the
/// first axis is the most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualSpace {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    total: usize,
}

impl CounterfactualSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self, ModelError> {
        if let Some(bad) = axes.iter().find(|a| a.cardinality == 0) {
            return Err(ModelError::Cardinality {
                name: bad.label.clone(),
                cardinality: 0,
            });
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].cardinality;
        }
        let total = axes.iter().map(|a| a.cardinality).product();
        Ok(Self { axes, strides, total })
    }

    /// Layout `[Y_{x_1..x_n}, Z.., X]` over the given covariates.
    pub fn nondescendant(schema: &Schema, covariates: &[usize]) -> Self {
        let mut axes = potential_axes("Y", schema.nx(), schema.ny(), AxisKind::PotentialOutcome);
        axes.extend(covariate_axes(schema, covariates));
        axes.push(treatment_axis(schema));
        Self::new(axes).expect("schema cardinalities are positive")
    }

    /// Layout `[Y_{x_1..x_n}, W_{x_1..x_n}, Z.., W, X]` over the given covariates.
    pub fn mediated(schema: &Schema, covariates: &[usize]) -> Result<Self, ModelError> {
        let mediator = schema.mediator().ok_or(ModelError::MissingRole(Role::Mediator))?;
        let mut axes = potential_axes("Y", schema.nx(), schema.ny(), AxisKind::PotentialOutcome);
        axes.extend(potential_axes(
            "W",
            schema.nx(),
            mediator.cardinality,
            AxisKind::PotentialMediator,
        ));
        axes.extend(covariate_axes(schema, covariates));
        axes.push(Axis {
            label: mediator.name.clone(),
            kind: AxisKind::Mediator,
            cardinality: mediator.cardinality,
        });
        axes.push(treatment_axis(schema));
        Self::new(axes)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn axis_of(&self, kind: AxisKind) -> Option<usize> {
        self.axes.iter().position(|a| a.kind == kind)
    }

    /// Covariate indices present as axes, in axis order.
    pub fn covariates(&self) -> Vec<usize> {
        self.axes
            .iter()
            .filter_map(|a| match a.kind {
                AxisKind::Covariate(i) => Some(i),
                _ => None,
            })
            .collect()
    }

    pub fn index_flatten(&self, assignment: &[usize]) -> Result<usize, IndexError> {
        if assignment.len() != self.axes.len() {
            return Err(IndexError::Arity {
                expected: self.axes.len(),
                got: assignment.len(),
            });
        }
        let mut offset = 0;
        for (axis, (&value, stride)) in assignment.iter().zip(&self.strides).enumerate() {
            let card = self.axes[axis].cardinality;
            if value >= card {
                return Err(IndexError::AxisRange {
                    axis,
                    value,
                    cardinality: card,
                });
            }
            offset += value * stride;
        }
        Ok(offset)
    }

    pub fn index_unflatten(&self, offset: usize) -> Result<Vec<usize>, IndexError> {
        if offset >= self.total {
            return Err(IndexError::Offset {
                offset,
                total: self.total,
            });
        }
        Ok(self
            .axes
            .iter()
            .zip(&self.strides)
            .map(|(axis, stride)| (offset / stride) % axis.cardinality)
            .collect())
    }

    /// Flat offsets of every cell whose listed axes take the listed values,
    /// in increasing order.
    pub fn cells_matching(&self, fixed: &[(usize, usize)]) -> Vec<usize> {
        let mut pinned: Vec<Option<usize>> = vec![None; self.axes.len()];
        for &(axis, value) in fixed {
            match pinned[axis] {
                Some(prev) if prev != value => return Vec::new(),
                _ => pinned[axis] = Some(value),
            }
        }
        let free: Vec<usize> = (0..self.axes.len()).filter(|&a| pinned[a].is_none()).collect();
        let base: usize = pinned.iter().zip(&self.strides).map(|(v, s)| v.unwrap_or(0) * s).sum();
        let count: usize = free.iter().map(|&a| self.axes[a].cardinality).product();
        let mut out = Vec::with_capacity(count);
        let mut digits = vec![0usize; free.len()];
        for _ in 0..count {
            let offset = base
                + free
                    .iter()
                    .zip(&digits)
                    .map(|(&a, &d)| d * self.strides[a])
                    .sum::<usize>();
            out.push(offset);
            for k in (0..free.len()).rev() {
                digits[k] += 1;
                if digits[k] < self.axes[free[k]].cardinality {
                    break;
                }
                digits[k] = 0;
            }
        }
        out
    }
}

fn potential_axes(prefix: &str, arms: usize, card: usize, kind: fn(usize) -> AxisKind) -> Vec<Axis> {
    (0..arms)
        .map(|t| Axis {
            label: format!("{prefix}_x{t}"),
            kind: kind(t),
            cardinality: card,
        })
        .collect()
}

fn covariate_axes<'a>(schema: &'a Schema, covariates: &'a [usize]) -> impl Iterator<Item = Axis> + 'a {
    covariates.iter().map(move |&i| Axis {
        label: schema.covariates()[i].name.clone(),
        kind: AxisKind::Covariate(i),
        cardinality: schema.covariates()[i].cardinality,
    })
}

fn treatment_axis(schema: &Schema) -> Axis {
    Axis {
        label: schema.treatment().name.clone(),
        kind: AxisKind::Treatment,
        cardinality: schema.nx(),
    }
}

/// A probability of causation to bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuerySpec {
    /// `P(Y_{arm_1} = y_1, ..., Y_{arm_k} = y_k)`; events are `(arm, outcome)`.
    Pns { events: Vec<(usize, usize)> },
    /// `P(Y_{x_alt} = y_alt | X = x, Y = y)`.
    Pn {
        x: usize,
        y: usize,
        x_alt: usize,
        y_alt: usize,
    },
    /// `P(Y_x = y | X = x_alt, Y = y_alt)`.
    Ps {
        x: usize,
        y: usize,
        x_alt: usize,
        y_alt: usize,
    },
}

impl QuerySpec {
    /// Binary PNS, `P(y_x, y'_{x'})`.
    pub fn pns() -> Self {
        Self::pns_k(2)
    }

    /// `PNS(k)`: outcome `y_t` under arm `x_t` for `t < k`.
    pub fn pns_k(k: usize) -> Self {
        QuerySpec::Pns {
            events: (0..k).map(|t| (t, t)).collect(),
        }
    }

    pub fn pn() -> Self {
        QuerySpec::Pn {
            x: 0,
            y: 0,
            x_alt: 1,
            y_alt: 1,
        }
    }

    pub fn ps() -> Self {
        QuerySpec::Ps {
            x: 0,
            y: 0,
            x_alt: 1,
            y_alt: 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QuerySpec::Pns { .. } => "PNS",
            QuerySpec::Pn { .. } => "PN",
            QuerySpec::Ps { .. } => "PS",
        }
    }

    /// The `(arm, outcome)` events the numerator fixes on potential outcomes.
    pub fn potential_events(&self) -> Vec<(usize, usize)> {
        match self {
            QuerySpec::Pns { events } => events.clone(),
            QuerySpec::Pn { x, y, x_alt, y_alt } | QuerySpec::Ps { x, y, x_alt, y_alt } => {
                vec![(*x, *y), (*x_alt, *y_alt)]
            }
        }
    }

    /// The factual `(x, y)` cell the query conditions on, if any.
    pub fn conditioning_cell(&self) -> Option<(usize, usize)> {
        match self {
            QuerySpec::Pns { .. } => None,
            QuerySpec::Pn { x, y, .. } => Some((*x, *y)),
            QuerySpec::Ps { x_alt, y_alt, .. } => Some((*x_alt, *y_alt)),
        }
    }

    pub fn validate(&self, nx: usize, ny: usize) -> Result<(), ModelError> {
        let events = self.potential_events();
        if events.is_empty() {
            return Err(ModelError::Query("query fixes no potential outcome".into()));
        }
        if let QuerySpec::Pns { events } = self {
            if events.len() > nx.min(ny) {
                return Err(ModelError::Query(format!(
                    "PNS({}) exceeds min(|X|, |Y|) = {}",
                    events.len(),
                    nx.min(ny)
                )));
            }
        }
        for (i, &(arm, out)) in events.iter().enumerate() {
            if arm >= nx || out >= ny {
                return Err(ModelError::Query(format!("event ({arm}, {out}) out of range")));
            }
            if events[..i].iter().any(|&(a, _)| a == arm) {
                return Err(ModelError::Query(format!("arm {arm} appears twice")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for QuerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuerySpec::Pns { events } => write!(f, "PNS({})", events.len()),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsInterval {
    pub lb: f64,
    pub ub: f64,
    pub certified: bool,
}

impl BoundsInterval {
    pub fn new(lb: f64, ub: f64, certified: bool) -> Self {
        Self { lb, ub, certified }
    }

    pub fn width(&self) -> f64 {
        self.ub - self.lb
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lb - slack && value <= self.ub + slack
    }

    /// `self ⊆ other` up to `slack`.
    pub fn within(&self, other: &BoundsInterval, slack: f64) -> bool {
        self.lb >= other.lb - slack && self.ub <= other.ub + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    Experimental,
    Observational,
}

/// One cell of an evidence family.
///
/// For experimental entries `x` is the intervention arm; for observational
/// entries it is the observed treatment. `z` pairs covariate index with value.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceEntry {
    pub kind: EvidenceKind,
    pub x: usize,
    pub y: usize,
    pub z: Vec<(usize, usize)>,
    pub w: Option<usize>,
    pub p: f64,
}

/// A complete dense table `P(x, y, z_S[, w])` (observational) or
/// `P(y_x, z_S)` for every arm `x` (experimental).
///
/// Table axes are `[X, Y, Z_S.., W?]`, row-major, with the covariates of `S`
/// in increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceFamily {
    name: String,
    kind: EvidenceKind,
    covariates: Vec<usize>,
    with_mediator: bool,
    shape: Vec<usize>,
    table: Vec<f64>,
}

impl EvidenceFamily {
    pub fn dense(
        schema: &Schema,
        name: impl Into<String>,
        kind: EvidenceKind,
        covariates: &[usize],
        with_mediator: bool,
        table: Vec<f64>,
    ) -> Result<Self, EvidenceError> {
        let name = name.into();
        let (covariates, shape) = family_shape(schema, &name, kind, covariates, with_mediator)?;
        let expected: usize = shape.iter().product();
        if table.len() != expected {
            return Err(EvidenceError::TableSize {
                family: name,
                expected,
                got: table.len(),
            });
        }
        Ok(Self {
            name,
            kind,
            covariates,
            with_mediator,
            shape,
            table,
        })
    }

    /// Builds a family from individual cells. Every cell must be present
    /// exactly once; missing cells are never filled in.
    pub fn from_entries(
        schema: &Schema,
        name: impl Into<String>,
        kind: EvidenceKind,
        covariates: &[usize],
        with_mediator: bool,
        entries: &[EvidenceEntry],
    ) -> Result<Self, EvidenceError> {
        let name = name.into();
        let (covariates, shape) = family_shape(schema, &name, kind, covariates, with_mediator)?;
        let size: usize = shape.iter().product();
        let mut table = vec![f64::NAN; size];
        for entry in entries {
            let index = entry_index(&name, kind, &covariates, with_mediator, &shape, entry)?;
            if !table[index].is_nan() {
                return Err(EvidenceError::DuplicateCell {
                    family: name,
                    cell: unravel(&shape, index),
                });
            }
            table[index] = entry.p;
        }
        let missing = table.iter().filter(|p| p.is_nan()).count();
        if missing > 0 {
            return Err(EvidenceError::Incomplete { family: name, missing });
        }
        Ok(Self {
            name,
            kind,
            covariates,
            with_mediator,
            shape,
            table,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> EvidenceKind {
        self.kind
    }

    pub fn covariates(&self) -> &[usize] {
        &self.covariates
    }

    pub fn with_mediator(&self) -> bool {
        self.with_mediator
    }

    /// Axis cardinalities `[X, Y, Z_S.., W?]`.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Probability at a full table index `[x, y, z_S.., w?]`.
    pub fn at(&self, index: &[usize]) -> f64 {
        self.table[ravel(&self.shape, index)]
    }

    /// Iterates `(table index, probability)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.table
            .iter()
            .enumerate()
            .map(|(i, &p)| (unravel(&self.shape, i), p))
    }

    pub fn entries(&self) -> Vec<EvidenceEntry> {
        self.cells()
            .map(|(idx, p)| EvidenceEntry {
                kind: self.kind,
                x: idx[0],
                y: idx[1],
                z: self.covariates.iter().zip(&idx[2..]).map(|(&c, &v)| (c, v)).collect(),
                w: self.with_mediator.then(|| idx[idx.len() - 1]),
                p,
            })
            .collect()
    }

    /// The table with `[X, Y]` kept and all other axes summed out.
    pub fn xy_marginal(&self) -> Vec<f64> {
        marginalize(&self.shape, &self.table, &[0, 1]).1
    }

    /// The same evidence summed down to a subset of its covariates,
    /// optionally dropping the mediator column.
    pub fn marginal(
        &self,
        name: impl Into<String>,
        covariates: &[usize],
        with_mediator: bool,
    ) -> Result<Self, EvidenceError> {
        let name = name.into();
        if with_mediator && !self.with_mediator {
            return Err(EvidenceError::Schema(format!(
                "family {} has no mediator column",
                self.name
            )));
        }
        let mut covariates = covariates.to_vec();
        covariates.sort_unstable();
        covariates.dedup();
        let mut keep = vec![0, 1];
        for c in &covariates {
            let pos = self.covariates.iter().position(|fc| fc == c).ok_or_else(|| {
                EvidenceError::Schema(format!("family {} does not condition on covariate #{c}", self.name))
            })?;
            keep.push(2 + pos);
        }
        if with_mediator {
            keep.push(self.shape.len() - 1);
        }
        let (shape, table) = marginalize(&self.shape, &self.table, &keep);
        Ok(Self {
            name,
            kind: self.kind,
            covariates,
            with_mediator,
            shape,
            table,
        })
    }

    /// Variables this family's table ranges over, by table axis.
    fn axis_vars(&self) -> Vec<FamilyVar> {
        let mut vars = vec![FamilyVar::X, FamilyVar::Y];
        vars.extend(self.covariates.iter().map(|&c| FamilyVar::Z(c)));
        if self.with_mediator {
            vars.push(FamilyVar::W);
        }
        vars
    }

    fn pattern(&self) -> (EvidenceKind, Vec<usize>, bool) {
        (self.kind, self.covariates.clone(), self.with_mediator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FamilyVar {
    X,
    Y,
    Z(usize),
    W,
}

fn family_shape(
    schema: &Schema,
    name: &str,
    kind: EvidenceKind,
    covariates: &[usize],
    with_mediator: bool,
) -> Result<(Vec<usize>, Vec<usize>), EvidenceError> {
    let mut sorted = covariates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != covariates.len() {
        return Err(EvidenceError::Schema(format!("family {name} lists a covariate twice")));
    }
    let mut shape = vec![schema.nx(), schema.ny()];
    for &c in &sorted {
        let var = schema
            .covariates()
            .get(c)
            .ok_or_else(|| EvidenceError::Schema(format!("family {name} references undeclared covariate #{c}")))?;
        shape.push(var.cardinality);
    }
    if with_mediator {
        if kind == EvidenceKind::Experimental {
            return Err(EvidenceError::Schema(format!(
                "family {name}: mediator columns are observational only"
            )));
        }
        let nw = schema.nw().ok_or_else(|| {
            EvidenceError::Schema(format!("family {name} has a mediator column but none is declared"))
        })?;
        shape.push(nw);
    }
    Ok((sorted, shape))
}

fn entry_index(
    family: &str,
    kind: EvidenceKind,
    covariates: &[usize],
    with_mediator: bool,
    shape: &[usize],
    entry: &EvidenceEntry,
) -> Result<usize, EvidenceError> {
    let bad = |why: String| EvidenceError::Schema(format!("family {family}: {why}"));
    if entry.kind != kind {
        return Err(bad("entry kind differs from family kind".into()));
    }
    if entry.z.len() != covariates.len() {
        return Err(bad(format!(
            "entry conditions on {} covariates, family on {}",
            entry.z.len(),
            covariates.len()
        )));
    }
    let mut index = vec![entry.x, entry.y];
    for &c in covariates {
        let value = entry
            .z
            .iter()
            .find(|(zc, _)| *zc == c)
            .map(|&(_, v)| v)
            .ok_or_else(|| bad(format!("entry is missing covariate #{c}")))?;
        index.push(value);
    }
    match (with_mediator, entry.w) {
        (true, Some(w)) => index.push(w),
        (false, None) => {}
        _ => return Err(bad("mediator column mismatch".into())),
    }
    if index.iter().zip(shape).any(|(v, c)| v >= c) {
        return Err(bad(format!("cell {index:?} out of range")));
    }
    Ok(ravel(shape, &index))
}

pub(crate) fn ravel(shape: &[usize], index: &[usize]) -> usize {
    index.iter().zip(shape).fold(0, |acc, (&i, &c)| acc * c + i)
}

pub(crate) fn unravel(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for (slot, &card) in out.iter_mut().zip(shape).rev() {
        *slot = flat % card;
        flat /= card;
    }
    out
}

/// Sums a row-major table onto the listed axes (kept in the given order).
pub(crate) fn marginalize(shape: &[usize], table: &[f64], keep: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let out_shape: Vec<usize> = keep.iter().map(|&a| shape[a]).collect();
    let mut out = vec![0.0; out_shape.iter().product()];
    for (flat, &p) in table.iter().enumerate() {
        let idx = unravel(shape, flat);
        let kept: Vec<usize> = keep.iter().map(|&a| idx[a]).collect();
        out[ravel(&out_shape, &kept)] += p;
    }
    (out_shape, out)
}

/// The available evidence: a list of complete families.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvidenceSet {
    families: Vec<EvidenceFamily>,
}

impl EvidenceSet {
    pub fn new(families: Vec<EvidenceFamily>) -> Self {
        Self { families }
    }

    pub fn push(&mut self, family: EvidenceFamily) {
        self.families.push(family);
    }

    pub fn families(&self) -> &[EvidenceFamily] {
        &self.families
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// Covariates referenced by any family, ascending.
    pub fn referenced_covariates(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .families
            .iter()
            .flat_map(|f| f.covariates.iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn has_mediator_column(&self) -> bool {
        self.families.iter().any(|f| f.with_mediator)
    }

    /// Keeps only the families for which `keep` returns true.
    pub fn filtered(&self, keep: impl Fn(&EvidenceFamily) -> bool) -> Self {
        Self {
            families: self.families.iter().filter(|f| keep(f)).cloned().collect(),
        }
    }

    /// `P(X, Y)` from the smallest observational family, as an `nx × ny` table.
    pub fn observational_xy(&self) -> Option<Vec<f64>> {
        self.families
            .iter()
            .filter(|f| f.kind == EvidenceKind::Observational)
            .min_by_key(|f| f.table.len())
            .map(EvidenceFamily::xy_marginal)
    }

    /// `P(Y_x)` from the smallest experimental family, as an `nx × ny` table.
    pub fn experimental_marginal(&self) -> Option<Vec<f64>> {
        self.families
            .iter()
            .filter(|f| f.kind == EvidenceKind::Experimental)
            .min_by_key(|f| f.table.len())
            .map(EvidenceFamily::xy_marginal)
    }

    /// `P(Z_S)` for the given covariates from an observational family that
    /// covers them all, if one exists.
    pub fn covariate_marginal(&self, covariates: &[usize]) -> Option<Vec<f64>> {
        let family = self
            .families
            .iter()
            .filter(|f| f.kind == EvidenceKind::Observational)
            .filter(|f| covariates.iter().all(|c| f.covariates.contains(c)))
            .min_by_key(|f| f.table.len())?;
        let keep: Vec<usize> = covariates
            .iter()
            .map(|c| 2 + family.covariates.iter().position(|fc| fc == c).unwrap())
            .collect();
        Some(marginalize(&family.shape, &family.table, &keep).1)
    }
}

/// Normalization residual of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCheck {
    pub family: String,
    pub residual: f64,
}

/// Largest disagreement between two families on their shared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub families: (String, String),
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub families: Vec<FamilyCheck>,
    pub cross: Vec<CrossCheck>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.families
            .iter()
            .map(|f| f.residual)
            .chain(self.cross.iter().map(|c| c.residual))
            .fold(0.0, f64::max)
    }
}

/// Checks ranges, per-family normalization and cross-family marginal
/// agreement. Residuals above `eps` are hard errors; smaller nonzero
/// cross-family residuals are reported as warnings.
pub fn validate_evidence(evidence: &EvidenceSet, eps: f64) -> Result<ValidationReport, EvidenceError> {
    let mut report = ValidationReport::default();
    let families = evidence.families();
    for (i, fam) in families.iter().enumerate() {
        if let Some(prev) = families[..i].iter().find(|f| f.pattern() == fam.pattern()) {
            return Err(EvidenceError::DuplicateFamily(prev.name.clone(), fam.name.clone()));
        }
        if let Some(&p) = fam.table.iter().find(|p| !(-eps..=1.0 + eps).contains(*p)) {
            return Err(EvidenceError::OutOfRange {
                family: fam.name.clone(),
                value: p,
            });
        }
        let residual = normalization_residual(fam);
        if residual > eps {
            return Err(EvidenceError::Normalization {
                family: fam.name.clone(),
                residual,
            });
        }
        report.families.push(FamilyCheck {
            family: fam.name.clone(),
            residual,
        });
        if fam.kind == EvidenceKind::Experimental && !fam.covariates.is_empty() {
            // P(z) implied by each arm must agree
            let residual = arm_covariate_disagreement(fam);
            if residual > eps {
                return Err(EvidenceError::CrossFamily {
                    first: fam.name.clone(),
                    second: fam.name.clone(),
                    residual,
                });
            }
        }
    }
    for (i, a) in families.iter().enumerate() {
        for b in &families[i + 1..] {
            let Some(residual) = cross_residual(a, b) else {
                continue;
            };
            if residual > eps {
                return Err(EvidenceError::CrossFamily {
                    first: a.name.clone(),
                    second: b.name.clone(),
                    residual,
                });
            }
            if residual > 1e-12 {
                report.warnings.push(format!(
                    "families {} and {} disagree on shared marginals by {residual:.3e}",
                    a.name, b.name
                ));
            }
            report.cross.push(CrossCheck {
                families: (a.name.clone(), b.name.clone()),
                residual,
            });
        }
    }
    Ok(report)
}

fn normalization_residual(fam: &EvidenceFamily) -> f64 {
    match fam.kind {
        EvidenceKind::Observational => (fam.table.iter().sum::<f64>() - 1.0).abs(),
        EvidenceKind::Experimental => {
            let per_arm = fam.table.len() / fam.shape[0];
            fam.table
                .chunks(per_arm)
                .map(|arm| (arm.iter().sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max)
        }
    }
}

fn arm_covariate_disagreement(fam: &EvidenceFamily) -> f64 {
    let keep: Vec<usize> = std::iter::once(0).chain(2..fam.shape.len()).collect();
    let (shape, table) = marginalize(&fam.shape, &fam.table, &keep);
    let per_arm = table.len() / shape[0];
    let first = &table[..per_arm];
    table
        .chunks(per_arm)
        .flat_map(|arm| arm.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Compares two families on the variables they share. Same-kind families
/// share `(X, Y)`; experimental and observational families only share the
/// covariate distribution. Returns `None` when nothing comparable is shared.
fn cross_residual(a: &EvidenceFamily, b: &EvidenceFamily) -> Option<f64> {
    let va = a.axis_vars();
    let vb = b.axis_vars();
    let mut shared: Vec<FamilyVar> = va.iter().copied().filter(|v| vb.contains(v)).collect();
    if a.kind != b.kind {
        shared.retain(|v| matches!(v, FamilyVar::Z(_)));
        if shared.is_empty() {
            return None;
        }
    }
    let keep_a: Vec<usize> = shared.iter().map(|v| va.iter().position(|x| x == v).unwrap()).collect();
    let keep_b: Vec<usize> = shared.iter().map(|v| vb.iter().position(|x| x == v).unwrap()).collect();
    let ma = comparable_marginal(a, &keep_a);
    let mb = comparable_marginal(b, &keep_b);
    Some(ma.iter().zip(&mb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Marginal over `keep`; experimental tables with the arm axis dropped are
/// averaged over arms so they are on the probability scale.
fn comparable_marginal(fam: &EvidenceFamily, keep: &[usize]) -> Vec<f64> {
    let (_, mut table) = marginalize(&fam.shape, &fam.table, keep);
    if fam.kind == EvidenceKind::Experimental && !keep.contains(&0) {
        let arms = fam.shape[0] as f64;
        table.iter_mut().for_each(|p| *p /= arms);
    }
    table
}
