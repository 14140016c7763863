use super::{raw_lp, Sense};
use crate::error::SolveError;
use crate::program::{ConstraintProgram, LinearConstraint, Relation};

/// Which factor of each product is frozen: `(a or d, b or c)`.
const SCHEMES: [(bool, bool); 4] = [(false, false), (true, true), (false, true), (true, false)];

/// Searches for a good feasible point by freezing one factor of every
/// product at its value at the current point, which makes each bilinear row
/// linear, and optimizing the resulting LP. Cycles through the four choices
/// of frozen factors until a full cycle brings no gain or `max_lps` LPs
/// are spent. `start` need not be feasible: its aggregate values only seed
/// the first LP. Returns a point with residual at most `tol` (or `None`)
/// and the number of LPs solved.
pub(crate) fn fix_and_solve(
    program: &ConstraintProgram,
    sense: Sense,
    start: &[f64],
    tol: f64,
    max_lps: usize,
) -> Result<(Option<Vec<f64>>, usize), SolveError> {
    let signed = |x: &[f64]| sense.sign() * program.objective_value(x);
    let mut x = start.to_vec();
    let mut best = if program.max_residual(&x) <= tol {
        signed(&x)
    } else {
        f64::INFINITY
    };
    let mut lps = 0;
    let mut idle = 0;
    let mut scheme = 0;
    while lps < max_lps && idle < SCHEMES.len() {
        let (fix_a, fix_b) = SCHEMES[scheme % SCHEMES.len()];
        scheme += 1;
        let lp = raw_lp(&frozen(program, &x, fix_a, fix_b), sense, None)?;
        lps += 1;
        idle += 1;
        if !lp.optimal || program.max_residual(&lp.x) > tol {
            continue;
        }
        let v = signed(&lp.x);
        if v < best - 1e-12 {
            best = v;
            x = lp.x;
            idle = 0;
        }
    }
    Ok((best.is_finite().then_some(x), lps))
}

fn frozen(program: &ConstraintProgram, x: &[f64], fix_a: bool, fix_b: bool) -> ConstraintProgram {
    let value: Vec<f64> = program.aggregates.iter().map(|a| a.value(x)).collect();
    let mut fixed = vec![false; program.aggregates.len()];
    let mut rows = program.linear.clone();
    for bil in &program.bilinear {
        // left·right_frozen_value on each side
        let (free_l, held_l) = if fix_a { (bil.d, bil.a) } else { (bil.a, bil.d) };
        let (free_r, held_r) = if fix_b { (bil.c, bil.b) } else { (bil.b, bil.c) };
        fixed[held_l] = true;
        fixed[held_r] = true;
        let mut coefficients: Vec<(usize, f64)> = Vec::new();
        coefficients.extend(program.aggregates[free_l].cells.iter().map(|&c| (c, value[held_l])));
        coefficients.extend(program.aggregates[free_r].cells.iter().map(|&c| (c, -value[held_r])));
        rows.push(LinearConstraint {
            coefficients,
            relation: Relation::Eq,
            rhs: 0.0,
            origin: bil.label.clone(),
        });
    }
    for (k, agg) in program.aggregates.iter().enumerate() {
        if fixed[k] {
            rows.push(LinearConstraint::indicator(agg.cells.clone(), value[k], &agg.label));
        }
    }
    let mut out = program.clone();
    out.bilinear.clear();
    out.linear = rows;
    out
}
