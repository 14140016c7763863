use std::collections::HashMap;

use crate::error::BuildError;

use super::{ConstraintProgram, LinearConstraint, Relation};

/// Box `[lo, hi]` on one aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Auxiliary variable `var` standing for `agg[i] · agg[j]`, `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Product {
    pub i: usize,
    pub j: usize,
    pub var: usize,
}

/// Linear relaxation of a bilinear program. Variables are the cells of the
/// source program followed by one variable per distinct product; aggregates
/// appear through their cell sums.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub program: ConstraintProgram,
    pub products: Vec<Product>,
    /// Source bilinear rows that were relaxed.
    pub relaxed: Vec<usize>,
}

impl Relaxation {
    /// Largest `|w - u·v|` gap at `x`, with the product that attains it.
    pub fn worst_product(&self, source: &ConstraintProgram, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, p) in self.products.iter().enumerate() {
            let u = source.aggregates[p.i].value(x);
            let v = source.aggregates[p.j].value(x);
            let gap = (x[p.var] - u * v).abs();
            if best.is_none_or(|(_, g)| gap > g) {
                best = Some((k, gap));
            }
        }
        best
    }
}

/// The four envelope rows for `w = u·v` with `u ∈ bu`, `v ∈ bv`, where `u`
/// and `v` are sums over the given cells:
///
/// ```text
/// w >= Lv·u + Lu·v - Lu·Lv      w <= Uv·u + Lu·v - Lu·Uv
/// w >= Uv·u + Uu·v - Uu·Uv      w <= Lv·u + Uu·v - Uu·Lv
/// ```
pub fn envelope_rows(
    w: usize,
    u_cells: &[usize],
    v_cells: &[usize],
    bu: Interval,
    bv: Interval,
    origin: &str,
) -> [LinearConstraint; 4] {
    // w - cu·u - cv·v  (rel)  -cu_l·cv_l
    let row = |cu: f64, cv: f64, rhs: f64, relation: Relation| {
        let mut coef: HashMap<usize, f64> = HashMap::new();
        for &c in u_cells {
            *coef.entry(c).or_default() -= cu;
        }
        for &c in v_cells {
            *coef.entry(c).or_default() -= cv;
        }
        let mut coefficients: Vec<(usize, f64)> = coef.into_iter().filter(|&(_, a)| a != 0.0).collect();
        coefficients.sort_unstable_by_key(|&(j, _)| j);
        coefficients.push((w, 1.0));
        LinearConstraint {
            coefficients,
            relation,
            rhs,
            origin: origin.to_string(),
        }
    };
    [
        row(bv.lo, bu.lo, -bu.lo * bv.lo, Relation::Ge),
        row(bv.hi, bu.hi, -bu.hi * bv.hi, Relation::Ge),
        row(bv.hi, bu.lo, -bu.lo * bv.hi, Relation::Le),
        row(bv.lo, bu.hi, -bu.hi * bv.lo, Relation::Le),
    ]
}

/// Relaxes every bilinear row not marked implied.
pub fn mccormick_relax(program: &ConstraintProgram, boxes: &[Interval]) -> Result<Relaxation, BuildError> {
    mccormick_relax_with(program, boxes, false, false)
}

/// `boxes` holds one interval per aggregate. Box bounds tighter than `[0, 1]`
/// become rows on the aggregate's cell sum; with `all_box_rows` every
/// multiplied aggregate gets both rows, so the row layout does not depend
/// on the boxes.
pub fn mccormick_relax_with(
    program: &ConstraintProgram,
    boxes: &[Interval],
    include_implied: bool,
    all_box_rows: bool,
) -> Result<Relaxation, BuildError> {
    if boxes.len() != program.aggregates.len() {
        return Err(BuildError::Schema(format!(
            "{} boxes for {} aggregates",
            boxes.len(),
            program.aggregates.len()
        )));
    }
    for (index, b) in boxes.iter().enumerate() {
        if !(b.lo <= b.hi) {
            return Err(BuildError::Interval {
                index,
                lo: b.lo,
                hi: b.hi,
            });
        }
    }
    let relaxed: Vec<usize> = program
        .bilinear
        .iter()
        .enumerate()
        .filter(|(_, b)| include_implied || !b.implied)
        .map(|(k, _)| k)
        .collect();

    let mut products: Vec<Product> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut product_var = |a: usize, b: usize, products: &mut Vec<Product>| {
        let key = (a.min(b), a.max(b));
        *index.entry(key).or_insert_with(|| {
            let var = program.num_vars + products.len();
            products.push(Product {
                i: key.0,
                j: key.1,
                var,
            });
            var
        })
    };
    let mut equalities = Vec::new();
    for &k in &relaxed {
        let b = &program.bilinear[k];
        let left = product_var(b.a, b.d, &mut products);
        let right = product_var(b.b, b.c, &mut products);
        if left != right {
            equalities.push(LinearConstraint {
                coefficients: vec![(left, 1.0), (right, -1.0)],
                relation: Relation::Eq,
                rhs: 0.0,
                origin: b.label.clone(),
            });
        }
    }

    let mut linear = program.linear.clone();
    let mut used = vec![false; program.aggregates.len()];
    for p in &products {
        used[p.i] = true;
        used[p.j] = true;
    }
    for (k, agg) in program.aggregates.iter().enumerate() {
        if !used[k] {
            continue;
        }
        let b = boxes[k];
        if all_box_rows || b.lo > 0.0 {
            linear.push(LinearConstraint {
                coefficients: agg.cells.iter().map(|&c| (c, 1.0)).collect(),
                relation: Relation::Ge,
                rhs: b.lo,
                origin: format!("box {}", agg.label),
            });
        }
        if all_box_rows || b.hi < 1.0 {
            linear.push(LinearConstraint {
                coefficients: agg.cells.iter().map(|&c| (c, 1.0)).collect(),
                relation: Relation::Le,
                rhs: b.hi,
                origin: format!("box {}", agg.label),
            });
        }
    }
    for p in &products {
        let origin = format!(
            "envelope {}·{}",
            program.aggregates[p.i].label, program.aggregates[p.j].label
        );
        linear.extend(envelope_rows(
            p.var,
            &program.aggregates[p.i].cells,
            &program.aggregates[p.j].cells,
            boxes[p.i],
            boxes[p.j],
            &origin,
        ));
    }
    linear.extend(equalities);

    let relaxed_program = ConstraintProgram {
        space: program.space.clone(),
        num_vars: program.num_vars + products.len(),
        objective: program.objective.clone(),
        linear,
        aggregates: program.aggregates.clone(),
        bilinear: Vec::new(),
        normalizer: program.normalizer,
        hint: None,
    };
    Ok(Relaxation {
        program: relaxed_program,
        products,
        relaxed,
    })
}
