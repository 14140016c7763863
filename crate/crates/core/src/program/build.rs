use std::collections::HashMap;

use crate::error::BuildError;
use crate::model::{AxisKind, CounterfactualSpace, EvidenceKind, EvidenceSet, QuerySpec, Role, Schema};

use super::{Aggregate, BilinearConstraint, ConstraintProgram, RowSet};

/// Which way the independence products are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BilinearOrientation {
    /// `a·d = b·c` and `f·g = e·h`: the conditional independencies
    /// `Y_x ⟂ X | W_x, Z` and `Y_x ⟂ W_{x'} | W_x, Z`.
    #[default]
    Independence,
    /// `a·c = b·d` and `e·g = f·h` exactly as printed. Kept for auditing;
    /// it is not implied by the independencies.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MediatorOptions {
    /// Adds `P(W = w, X = x_t, W_{x_t} ≠ w) = 0` for every `t, w`.
    pub mediator_consistency: bool,
    pub orientation: BilinearOrientation,
}

impl Default for MediatorOptions {
    fn default() -> Self {
        Self {
            mediator_consistency: true,
            orientation: BilinearOrientation::Independence,
        }
    }
}

/// Program over `[Y_{x_1..x_n}, Z.., X]` with one equality per evidence
/// cell, for any mix of joint and covariate-specific families. Only
/// covariates referenced by some family get an axis.
pub fn build_thm1_program(
    schema: &Schema,
    evidence: &EvidenceSet,
    query: &QuerySpec,
) -> Result<ConstraintProgram, BuildError> {
    query.validate(schema.nx(), schema.ny())?;
    if let Some(f) = evidence.families().iter().find(|f| f.with_mediator()) {
        return Err(BuildError::Schema(format!(
            "family {} carries a mediator column; use the mediator program",
            f.name()
        )));
    }
    let space = CounterfactualSpace::nondescendant(schema, &evidence.referenced_covariates());
    assemble(space, evidence, query, |_, _| Ok(()))
}

/// The covariate-specific case: every family conditions on at most one
/// covariate, and all of them constrain one shared program.
pub fn build_cor2_program(
    schema: &Schema,
    evidence: &EvidenceSet,
    query: &QuerySpec,
) -> Result<ConstraintProgram, BuildError> {
    if let Some(f) = evidence.families().iter().find(|f| f.covariates().len() > 1) {
        return Err(BuildError::JointFamily(f.name().to_string()));
    }
    build_thm1_program(schema, evidence, query)
}

/// Program over `[Y_{x_1..x_n}, W_{x_1..x_n}, Z.., W, X]` for a back-door
/// set `Z` (every declared covariate) and a single mediator `W`, with bilinear rows encoding
/// `Y_x ⟂ X | W_x, Z` and `Y_x ⟂ W_{x'} | W_x, Z`.
pub fn build_thm3_program(
    schema: &Schema,
    evidence: &EvidenceSet,
    query: &QuerySpec,
    options: &MediatorOptions,
) -> Result<ConstraintProgram, BuildError> {
    query.validate(schema.nx(), schema.ny())?;
    let nw = schema
        .nw()
        .ok_or_else(|| BuildError::Schema("mediator program needs a declared mediator".into()))?;
    if let Some(c) = schema.covariates().iter().find(|c| c.role != Role::BackdoorCovariate) {
        return Err(BuildError::Schema(format!(
            "covariate {} must be declared as a back-door covariate",
            c.name
        )));
    }
    // the independencies hold only given the whole back-door set, observed
    // or not
    let covariates: Vec<usize> = (0..schema.covariates().len()).collect();
    let space = CounterfactualSpace::mediated(schema, &covariates)?;
    let (nx, ny) = (schema.nx(), schema.ny());
    let x_axis = space.axis_of(AxisKind::Treatment).unwrap();
    let w_axis = space.axis_of(AxisKind::Mediator).unwrap();
    let y_axis = |t| space.axis_of(AxisKind::PotentialOutcome(t)).unwrap();
    let wx_axis = |t| space.axis_of(AxisKind::PotentialMediator(t)).unwrap();

    let mut program = assemble(space.clone(), evidence, query, |space, rows| {
        if options.mediator_consistency {
            for t in 0..nx {
                for u in 0..nw {
                    let cells = space
                        .cells_matching(&[(x_axis, t), (w_axis, u)])
                        .into_iter()
                        .filter(|&c| space.index_unflatten(c).unwrap()[wx_axis(t)] != u)
                        .collect();
                    rows.push_indicator(cells, 0.0, "mediator consistency");
                }
            }
        }
        Ok(())
    })?;

    let z_axes: Vec<usize> = covariates
        .iter()
        .map(|&c| space.axis_of(AxisKind::Covariate(c)).unwrap())
        .collect();
    let z_cards: Vec<usize> = z_axes.iter().map(|&a| space.axes()[a].cardinality).collect();
    let z_cells = z_assignments(&z_cards);
    // at P(z) = 0 the independence is vacuous
    let z_mass = evidence.covariate_marginal(&covariates);
    let z_cells: Vec<&Vec<usize>> = z_cells
        .iter()
        .enumerate()
        .filter(|(i, _)| z_mass.as_ref().is_none_or(|m| m[*i] > 0.0))
        .map(|(_, z)| z)
        .collect();

    let mut pool = AggregatePool::default();
    let mut bilinear = Vec::new();
    let literal = options.orientation == BilinearOrientation::Literal;
    for s in 0..ny {
        for t in 0..nx {
            for v in 0..nx {
                for u in 0..nw {
                    for z in &z_cells {
                        let zfix: Vec<(usize, usize)> = z_axes.iter().copied().zip(z.iter().copied()).collect();
                        let with = |extra: &[(usize, usize)]| {
                            let mut f = extra.to_vec();
                            f.extend_from_slice(&zfix);
                            f
                        };
                        let tag = format!("s={s},t={t},v={v},u={u},z={z:?}");
                        let a = pool.get(&space, &with(&[(y_axis(t), s), (wx_axis(t), u)]), &format!("a[{tag}]"));
                        let b = pool.get(
                            &space,
                            &with(&[(y_axis(t), s), (wx_axis(t), u), (x_axis, v)]),
                            &format!("b[{tag}]"),
                        );
                        let c = pool.get(&space, &with(&[(wx_axis(t), u)]), &format!("c[{tag}]"));
                        let d = pool.get(&space, &with(&[(wx_axis(t), u), (x_axis, v)]), &format!("d[{tag}]"));
                        let (lhs, rhs) = if literal { ((a, c), (b, d)) } else { ((a, d), (b, c)) };
                        bilinear.push(BilinearConstraint {
                            a: lhs.0,
                            d: lhs.1,
                            b: rhs.0,
                            c: rhs.1,
                            label: format!("Y_x ⟂ X | W_x,Z [{tag}]"),
                            implied: !literal && (s == ny - 1 || v == nx - 1),
                        });
                    }
                }
            }
        }
    }
    for s in 0..ny {
        for t in 0..nx {
            for t2 in t + 1..nx {
                for u in 0..nw {
                    for v in 0..nw {
                        for z in &z_cells {
                            let zfix: Vec<(usize, usize)> = z_axes.iter().copied().zip(z.iter().copied()).collect();
                            let with = |extra: &[(usize, usize)]| {
                                let mut f = extra.to_vec();
                                f.extend_from_slice(&zfix);
                                f
                            };
                            let tag = format!("s={s},t={t},t'={t2},u={u},v={v},z={z:?}");
                            let e = pool.get(&space, &with(&[(y_axis(t), s), (wx_axis(t), u)]), &format!("e[{tag}]"));
                            let f = pool.get(
                                &space,
                                &with(&[(y_axis(t), s), (wx_axis(t), u), (wx_axis(t2), v)]),
                                &format!("f[{tag}]"),
                            );
                            let g = pool.get(&space, &with(&[(wx_axis(t), u)]), &format!("g[{tag}]"));
                            let h = pool.get(
                                &space,
                                &with(&[(wx_axis(t), u), (wx_axis(t2), v)]),
                                &format!("h[{tag}]"),
                            );
                            let (lhs, rhs) = if literal { ((e, g), (f, h)) } else { ((f, g), (e, h)) };
                            bilinear.push(BilinearConstraint {
                                a: lhs.0,
                                d: lhs.1,
                                b: rhs.0,
                                c: rhs.1,
                                label: format!("Y_x ⟂ W_x' | W_x,Z [{tag}]"),
                                implied: !literal && (s == ny - 1 || v == nw - 1),
                            });
                        }
                    }
                }
            }
        }
    }
    program.aggregates = pool.aggregates;
    program.bilinear = bilinear;
    program.hint = coupled_point(&space, evidence, &covariates, nw);
    Ok(program)
}

/// The joint in which, given `Z`, treatment, the potential mediators and
/// the outcome's response to each `(x, w)` are mutually independent, with
/// every conditional read from the observational family over `X, Y, Z, W`:
///
/// ```text
/// P(z) P(x | z) [w = w_x] Π_t P(w_t | x_t, z) Π_t P(y_t | x_t, w_t, z)
/// ```
///
/// It satisfies both independencies and the observational rows, and the
/// experimental rows whenever the evidence is compatible with the graph.
/// Conditionals on zero-probability cells are taken uniform.
fn coupled_point(
    space: &CounterfactualSpace,
    evidence: &EvidenceSet,
    covariates: &[usize],
    nw: usize,
) -> Option<Vec<f64>> {
    let fam = evidence
        .families()
        .iter()
        .find(|f| f.kind() == EvidenceKind::Observational && f.with_mediator() && f.covariates() == covariates)?;
    let shape = fam.shape();
    let (nx, ny) = (shape[0], shape[1]);
    let x_axis = space.axis_of(AxisKind::Treatment)?;
    let w_axis = space.axis_of(AxisKind::Mediator)?;
    let z_axes: Vec<usize> = covariates
        .iter()
        .map(|&c| space.axis_of(AxisKind::Covariate(c)))
        .collect::<Option<_>>()?;
    let y_axes: Vec<usize> = (0..nx)
        .map(|t| space.axis_of(AxisKind::PotentialOutcome(t)))
        .collect::<Option<_>>()?;
    let w_axes: Vec<usize> = (0..nx)
        .map(|t| space.axis_of(AxisKind::PotentialMediator(t)))
        .collect::<Option<_>>()?;
    let p = |x: usize, y: usize, z: &[usize], w: usize| {
        let mut idx = vec![x, y];
        idx.extend_from_slice(z);
        idx.push(w);
        fam.at(&idx)
    };
    let ratio = |num: f64, den: f64, levels: usize| if den > 0.0 { num / den } else { 1.0 / levels as f64 };
    let mut out = vec![0.0; space.total_size()];
    for (cell, value) in out.iter_mut().enumerate() {
        let a = space.index_unflatten(cell).ok()?;
        let (x, w) = (a[x_axis], a[w_axis]);
        if a[w_axes[x]] != w {
            continue;
        }
        let z: Vec<usize> = z_axes.iter().map(|&k| a[k]).collect();
        let pxw = |t: usize, u: usize| (0..ny).map(|y| p(t, y, &z, u)).sum::<f64>();
        let px = |t: usize| (0..nw).map(|u| pxw(t, u)).sum::<f64>();
        let pz: f64 = (0..nx).map(px).sum();
        if pz <= 0.0 {
            continue;
        }
        let mut v = px(x);
        for t in 0..nx {
            let u = a[w_axes[t]];
            v *= ratio(pxw(t, u), px(t), nw) * ratio(p(t, a[y_axes[t]], &z, u), pxw(t, u), ny);
        }
        *value = v;
    }
    Some(out)
}

#[derive(Default)]
struct AggregatePool {
    aggregates: Vec<Aggregate>,
    index: HashMap<Vec<usize>, usize>,
}

impl AggregatePool {
    fn get(&mut self, space: &CounterfactualSpace, fixed: &[(usize, usize)], label: &str) -> usize {
        let cells = space.cells_matching(fixed);
        if let Some(&k) = self.index.get(&cells) {
            return k;
        }
        let k = self.aggregates.len();
        self.index.insert(cells.clone(), k);
        self.aggregates.push(Aggregate {
            cells,
            label: label.to_string(),
        });
        k
    }
}

fn z_assignments(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..c).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Normalization row, one indicator row per evidence cell, any extra rows,
/// then the objective.
fn assemble(
    space: CounterfactualSpace,
    evidence: &EvidenceSet,
    query: &QuerySpec,
    extra: impl FnOnce(&CounterfactualSpace, &mut RowSet) -> Result<(), BuildError>,
) -> Result<ConstraintProgram, BuildError> {
    let mut rows = RowSet::default();
    rows.push_indicator((0..space.total_size()).collect(), 1.0, "normalization");
    let x_axis = space.axis_of(AxisKind::Treatment).unwrap();
    for fam in evidence.families() {
        let z_axes = fam
            .covariates()
            .iter()
            .map(|&c| {
                space.axis_of(AxisKind::Covariate(c)).ok_or_else(|| {
                    BuildError::Schema(format!(
                        "family {} references covariate #{c} outside the program",
                        fam.name()
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let w_axis = if fam.with_mediator() {
            Some(
                space
                    .axis_of(AxisKind::Mediator)
                    .ok_or_else(|| BuildError::Schema(format!("family {} has a mediator column", fam.name())))?,
            )
        } else {
            None
        };
        for (idx, p) in fam.cells() {
            let (t, s) = (idx[0], idx[1]);
            let mut fixed = vec![(space.axis_of(AxisKind::PotentialOutcome(t)).unwrap(), s)];
            fixed.extend(z_axes.iter().copied().zip(idx[2..2 + z_axes.len()].iter().copied()));
            if fam.kind() == EvidenceKind::Observational {
                // consistency: X = x_t makes Y = Y_{x_t}
                fixed.push((x_axis, t));
            }
            if let Some(w) = w_axis {
                fixed.push((w, idx[idx.len() - 1]));
            }
            rows.push_indicator(space.cells_matching(&fixed), p, fam.name());
        }
    }
    extra(&space, &mut rows)?;
    let (objective, normalizer) = objective_for_query(&space, query, evidence)?;
    Ok(ConstraintProgram {
        num_vars: space.total_size(),
        space,
        objective,
        linear: rows.into_rows(),
        aggregates: Vec::new(),
        bilinear: Vec::new(),
        normalizer,
        hint: None,
    })
}

/// Indicator objective row for `query` and the divisor applied to its
/// optimum. PN and PS divide by their conditioning cell `P(x, y)` taken
/// from the evidence.
pub fn objective_for_query(
    space: &CounterfactualSpace,
    query: &QuerySpec,
    evidence: &EvidenceSet,
) -> Result<(Vec<(usize, f64)>, f64), BuildError> {
    let axis = |kind| {
        space
            .axis_of(kind)
            .ok_or_else(|| BuildError::Schema(format!("space has no {kind:?} axis")))
    };
    let mut fixed = Vec::new();
    for (arm, outcome) in query.potential_events() {
        fixed.push((axis(AxisKind::PotentialOutcome(arm))?, outcome));
    }
    let normalizer = match query.conditioning_cell() {
        None => 1.0,
        Some((x, y)) => {
            fixed.push((axis(AxisKind::Treatment)?, x));
            let xy = evidence
                .observational_xy()
                .ok_or_else(|| BuildError::MissingNormalizer {
                    query: query.to_string(),
                })?;
            let ny = xy.len() / space.axes()[axis(AxisKind::Treatment)?].cardinality;
            let p = xy[x * ny + y];
            if p <= 0.0 {
                return Err(BuildError::UndefinedConditional {
                    query: query.to_string(),
                });
            }
            p
        }
    };
    let row = space.cells_matching(&fixed).into_iter().map(|c| (c, 1.0)).collect();
    Ok((row, normalizer))
}
