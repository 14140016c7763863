//! Spatial branch-and-bound over aggregate boxes with McCormick
//! relaxations at every node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::fixing::fix_and_solve;
use super::{local_search_inner, polish, raw_lp, ray_origins, LocalSearchOptions, Sense, SolveReport, SolveStatus};
use crate::error::SolveError;
use crate::program::{mccormick_relax_with, ConstraintProgram, Interval};

/// Bilinear residual below which a relaxation optimum counts as exact.
const EXACT_TOL: f64 = 1e-9;
/// Outward slack on boxes from bound tightening.
const BOX_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOptions {
    /// Maximum number of relaxations solved, root included.
    pub budget: usize,
    /// Stop once the incumbent is within this of the certified bound.
    pub gap_tol: f64,
    /// Also relax bilinear rows implied by the others.
    pub include_implied: bool,
    /// Tighten root boxes by optimizing each aggregate over the linear rows.
    pub bound_tightening: bool,
    /// Root heuristic for an early incumbent.
    pub local_search: Option<LocalSearchOptions>,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            budget: 2000,
            gap_tol: 1e-3,
            include_implied: false,
            bound_tightening: true,
            local_search: Some(LocalSearchOptions {
                restarts: 2,
                max_iters: 1000,
                eps_inner: EXACT_TOL,
                ..Default::default()
            }),
        }
    }
}

struct Node {
    id: usize,
    /// Lower bound on the signed, normalized objective inside `boxes`.
    bound: f64,
    boxes: Vec<Interval>,
    x: Vec<f64>,
    /// Optimal basis of the node's relaxation, to warm-start its children.
    basis: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

/// LPs spent improving the root incumbent, and at a node whose polished
/// point beats the incumbent.
const ROOT_FIXING_LPS: usize = 12;
const NODE_FIXING_LPS: usize = 4;

struct Search<'a> {
    program: &'a ConstraintProgram,
    sense: Sense,
    options: &'a BnbOptions,
    lp_solves: usize,
    incumbent: Option<(f64, Vec<f64>)>,
}

enum Relaxed {
    Infeasible(Vec<String>),
    /// Relaxation optimum also satisfies every bilinear row.
    Exact(f64),
    Open(f64, Vec<f64>, Vec<usize>),
}

impl Search<'_> {
    fn signed(&self, x: &[f64]) -> f64 {
        self.sense.sign() * self.program.objective_value(x)
    }

    fn accept(&mut self, x: Vec<f64>) -> bool {
        let v = self.signed(&x);
        if self.incumbent.as_ref().is_none_or(|(best, _)| v < *best) {
            self.incumbent = Some((v, x));
            return true;
        }
        false
    }

    /// Polishes `x` onto the bilinear rows and, if that beats the
    /// incumbent, climbs from it with [`fix_and_solve`].
    fn offer(&mut self, x: &[f64], fixing_lps: usize) {
        let Some(p) = polish(self.program, x, EXACT_TOL, 20) else {
            return;
        };
        if self.accept(p.clone()) && fixing_lps > 0 {
            self.climb(&p, fixing_lps);
        }
    }

    /// Runs [`fix_and_solve`] from `x`. Its linearized rows can be badly
    /// conditioned; a failed solve just means no better incumbent.
    fn climb(&mut self, x: &[f64], max_lps: usize) {
        if let Ok((q, lps)) = fix_and_solve(self.program, self.sense, x, EXACT_TOL, max_lps) {
            self.lp_solves += lps;
            if let Some(q) = q {
                self.accept(q);
            }
        }
    }

    fn relax(&mut self, boxes: &[Interval], warm: Option<&[usize]>) -> Result<Relaxed, SolveError> {
        let relaxation = mccormick_relax_with(self.program, boxes, self.options.include_implied, true)?;
        self.lp_solves += 1;
        let lp = raw_lp(&relaxation.program, self.sense, warm)?;
        if !lp.optimal {
            return Ok(Relaxed::Infeasible(ray_origins(&relaxation.program.linear, &lp.duals)));
        }
        let value = lp.signed_objective / self.program.normalizer;
        let cells = &lp.x[..self.program.num_vars];
        if self.program.max_bilinear_residual(cells) <= EXACT_TOL {
            self.accept(cells.to_vec());
            return Ok(Relaxed::Exact(value));
        }
        self.offer(cells, if warm.is_some() { NODE_FIXING_LPS } else { 0 });
        Ok(Relaxed::Open(value, lp.x, lp.basis))
    }

    /// Shrinks each multiplied aggregate to its range over the linear rows.
    /// Returns the average of the extreme points met, a point in the
    /// relative interior of the linear rows, or the families of an
    /// infeasibility proof.
    fn tighten(&mut self, boxes: &mut [Interval]) -> Result<Result<Vec<f64>, Vec<String>>, SolveError> {
        let mut used = vec![false; boxes.len()];
        for b in &self.program.bilinear {
            if self.options.include_implied || !b.implied {
                for k in [b.a, b.b, b.c, b.d] {
                    used[k] = true;
                }
            }
        }
        let mut base = self.program.clone();
        base.bilinear.clear();
        base.normalizer = 1.0;
        let mut center = vec![0.0; self.program.num_vars];
        let mut points = 0;
        for (k, agg) in self.program.aggregates.iter().enumerate() {
            if !used[k] {
                continue;
            }
            base.objective = agg.cells.iter().map(|&c| (c, 1.0)).collect();
            let mut ends = [0.0; 2];
            for (e, sense) in [Sense::Min, Sense::Max].into_iter().enumerate() {
                self.lp_solves += 1;
                let lp = raw_lp(&base, sense, None)?;
                if !lp.optimal {
                    return Ok(Err(ray_origins(&base.linear, &lp.duals)));
                }
                ends[e] = sense.sign() * lp.signed_objective;
                center.iter_mut().zip(&lp.x).for_each(|(c, v)| *c += v);
                points += 1;
            }
            boxes[k] = Interval::new((ends[0] - BOX_SLACK).max(0.0), (ends[1] + BOX_SLACK).min(1.0));
        }
        center.iter_mut().for_each(|c| *c /= points.max(1) as f64);
        Ok(Ok(center))
    }

    /// Root incumbent from the program's hint, the relaxation optimum, the
    /// interior point and the local search, each polished where possible
    /// and climbed.
    fn seed(&mut self, root_x: &[f64], center: Option<Vec<f64>>) {
        let mut starts: Vec<Vec<f64>> = self.program.hint.iter().cloned().collect();
        starts.push(root_x[..self.program.num_vars].to_vec());
        starts.extend(center);
        if let Some(ls) = &self.options.local_search {
            if let Some(p) = local_search_inner(self.program, self.sense, ls).point {
                starts.push(p);
            }
        }
        for s in starts {
            let s = polish(self.program, &s, EXACT_TOL, 30).unwrap_or(s);
            self.climb(&s, ROOT_FIXING_LPS);
        }
    }
}

/// Certified outer bound on the optimum of a bilinear program: for `Min`
/// a value at or below the global minimum, for `Max` at or above the global
/// maximum.
///
/// Nodes are explored best-bound first. Each branch splits, at its
/// midpoint, the wider box of the product whose relaxation gap is largest.
/// The certified value is the weakest bound over all unexplored and pruned
/// leaves, so more budget can only tighten it.
pub fn bb_solve(program: &ConstraintProgram, sense: Sense, options: &BnbOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let mut search = Search {
        program,
        sense,
        options,
        lp_solves: 0,
        incumbent: None,
    };
    let mut boxes = vec![Interval::UNIT; program.aggregates.len()];
    let mut center = None;
    if options.bound_tightening {
        match search.tighten(&mut boxes)? {
            Ok(c) => center = Some(c),
            Err(families) => {
                let mut r = SolveReport::infeasible(sense, families);
                r.lp_solves = search.lp_solves;
                r.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                return Ok(r);
            }
        }
    }

    // products and row layout do not depend on the boxes
    let layout = mccormick_relax_with(program, &boxes, options.include_implied, true)?;
    let mut heap = BinaryHeap::new();
    let mut closed = f64::INFINITY;
    let mut nodes = 1;
    let mut next_id = 1;
    match search.relax(&boxes, None)? {
        Relaxed::Infeasible(families) => {
            let mut r = SolveReport::infeasible(sense, families);
            r.nodes_explored = 1;
            r.lp_solves = search.lp_solves;
            r.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(r);
        }
        Relaxed::Exact(v) => closed = v,
        Relaxed::Open(v, x, basis) => {
            search.seed(&x, center);
            heap.push(Node {
                id: 0,
                bound: v,
                boxes,
                x,
                basis,
            });
        }
    }

    let frontier = |heap: &BinaryHeap<Node>, closed: f64| heap.peek().map_or(closed, |n| n.bound.min(closed));
    let status = loop {
        let certified = frontier(&heap, closed);
        if heap.is_empty() {
            break SolveStatus::Optimal;
        }
        if let Some((inc, _)) = &search.incumbent {
            if inc - certified <= options.gap_tol {
                break SolveStatus::ToleranceReached;
            }
        }
        let node = heap.pop().unwrap();
        if search.incumbent.as_ref().is_some_and(|(inc, _)| node.bound >= *inc) {
            closed = closed.min(node.bound);
            continue;
        }
        if nodes + 2 > options.budget {
            heap.push(node);
            break SolveStatus::NodeBudgetExhausted;
        }
        let Some((k, _)) = layout.worst_product(program, &node.x) else {
            closed = closed.min(node.bound);
            continue;
        };
        let prod = layout.products[k];
        let (bi, bj) = (node.boxes[prod.i], node.boxes[prod.j]);
        let axis = if bj.width() > bi.width() { prod.j } else { prod.i };
        let b = node.boxes[axis];
        if b.width() <= 1e-9 {
            closed = closed.min(node.bound);
            continue;
        }
        let mid = b.mid();
        for half in [Interval::new(b.lo, mid), Interval::new(mid, b.hi)] {
            let mut boxes = node.boxes.clone();
            boxes[axis] = half;
            nodes += 1;
            // a relaxation the LP solver cannot handle keeps its parent's bound
            let Ok(relaxed) = search.relax(&boxes, Some(&node.basis)) else {
                closed = closed.min(node.bound);
                continue;
            };
            match relaxed {
                Relaxed::Infeasible(_) => {}
                Relaxed::Exact(v) => closed = closed.min(v.max(node.bound)),
                Relaxed::Open(v, x, basis) => {
                    heap.push(Node {
                        id: next_id,
                        bound: v.max(node.bound),
                        boxes,
                        x,
                        basis,
                    });
                    next_id += 1;
                }
            }
        }
    };

    let certified = frontier(&heap, closed);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    if !certified.is_finite() {
        let mut r = SolveReport::infeasible(sense, Vec::new());
        r.nodes_explored = nodes;
        r.lp_solves = search.lp_solves;
        r.runtime_ms = runtime_ms;
        return Ok(r);
    }
    let (inner_value, point, max_residual) = match search.incumbent {
        Some((v, p)) => {
            let res = program.max_residual(&p);
            (Some(sense.sign() * v), Some(p), res)
        }
        None => (None, None, f64::NAN),
    };
    Ok(SolveReport {
        sense,
        status,
        value: sense.sign() * certified,
        inner_value,
        point,
        nodes_explored: nodes,
        lp_solves: search.lp_solves,
        runtime_ms,
        max_residual,
        certificate: None,
        infeasible_families: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::solve_lp;
    use crate::program::{mccormick_relax, Aggregate, BilinearConstraint, LinearConstraint};

    fn curve(objective: usize) -> ConstraintProgram {
        let mut p = ConstraintProgram::raw(
            3,
            vec![(objective, 1.0)],
            vec![LinearConstraint::indicator(vec![0, 1, 2], 1.0, "normalization")],
        );
        p.aggregates = (0..3)
            .map(|c| Aggregate {
                cells: vec![c],
                label: format!("{c}"),
            })
            .collect();
        p.bilinear = vec![BilinearConstraint {
            a: 0,
            d: 2,
            b: 1,
            c: 1,
            label: "curve".into(),
            implied: false,
        }];
        p
    }

    #[test]
    fn converges_on_a_curve() {
        // max x1 on x0·x2 = x1², Σx = 1 is 1/3
        let p = curve(1);
        let r = bb_solve(&p, Sense::Max, &BnbOptions::default()).unwrap();
        assert!(r.value >= 1.0 / 3.0 - 1e-12);
        assert!(r.value <= 1.0 / 3.0 + 1e-3, "{r:?}");
        assert!(r.inner_value.unwrap() <= r.value + 1e-12);
    }

    #[test]
    fn exact_root_takes_one_node() {
        // min x1: relaxation optimum x = (1, 0, 0) already satisfies x0·x2 = x1²
        let p = curve(1);
        let opts = BnbOptions {
            bound_tightening: false,
            ..Default::default()
        };
        let r = bb_solve(&p, Sense::Min, &opts).unwrap();
        assert_eq!(r.nodes_explored, 1);
        assert_eq!(r.status, SolveStatus::Optimal);
        let relaxed = mccormick_relax(&p, &[Interval::UNIT; 3]).unwrap();
        let lp = solve_lp(&relaxed.program, Sense::Min).unwrap();
        assert_eq!(r.value, lp.value);
    }

    #[test]
    fn more_budget_never_loosens() {
        let p = curve(1);
        let mut prev = f64::INFINITY;
        for budget in [1, 3, 9, 33, 200] {
            let opts = BnbOptions {
                budget,
                gap_tol: 0.0,
                ..Default::default()
            };
            let r = bb_solve(&p, Sense::Max, &opts).unwrap();
            assert!(r.value <= prev + 1e-15, "budget {budget}: {} > {prev}", r.value);
            assert!(r.nodes_explored <= budget.max(1));
            prev = r.value;
        }
    }

    #[test]
    fn infeasible_root() {
        let mut p = curve(1);
        p.linear.push(LinearConstraint::indicator(vec![0], 0.6, "a"));
        p.linear.push(LinearConstraint::indicator(vec![0], 0.4, "b"));
        let r = bb_solve(&p, Sense::Max, &BnbOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(!r.infeasible_families.is_empty());
    }
}
