use nalgebra::{DMatrix, DVector};

use crate::program::{ConstraintProgram, Relation};

const SUPPORT_TOL: f64 = 1e-12;

/// Gauss–Newton projection of `x` onto the equality rows and bilinear
/// constraints of `program`, moving only coordinates that are positive.
/// Steps are minimum-norm, so the point moves as little as the
/// linearization allows. Returns the point if its max residual ends at or
/// below `tol`.
pub fn polish(program: &ConstraintProgram, x: &[f64], tol: f64, max_steps: usize) -> Option<Vec<f64>> {
    let n = program.num_vars;
    let mut x: Vec<f64> = x[..n].iter().map(|v| v.max(0.0)).collect();
    let mut last = f64::INFINITY;
    let mut slow = 0;
    for _ in 0..max_steps {
        let residual = program.max_residual(&x);
        if residual <= 1e-13 {
            break;
        }
        // Gauss–Newton converges fast or not at all
        slow = if residual > 0.5 * last { slow + 1 } else { 0 };
        if slow >= 3 {
            break;
        }
        last = residual;
        let support: Vec<usize> = (0..n).filter(|&j| x[j] > SUPPORT_TOL).collect();
        if support.is_empty() {
            return None;
        }
        let mut col = vec![usize::MAX; n];
        for (k, &j) in support.iter().enumerate() {
            col[j] = k;
        }
        let mut jac: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut res = Vec::new();
        for row in &program.linear {
            let r = row.lhs(&x) - row.rhs;
            let active = match row.relation {
                Relation::Eq => true,
                Relation::Le => r > 0.0,
                Relation::Ge => r < 0.0,
            };
            if active {
                jac.push(row.coefficients.clone());
                res.push(r);
            }
        }
        let agg: Vec<f64> = program.aggregates.iter().map(|a| a.value(&x)).collect();
        for b in &program.bilinear {
            res.push(agg[b.a] * agg[b.d] - agg[b.b] * agg[b.c]);
            let mut g = Vec::new();
            for (k, w) in [(b.a, agg[b.d]), (b.d, agg[b.a]), (b.b, -agg[b.c]), (b.c, -agg[b.b])] {
                g.extend(program.aggregates[k].cells.iter().map(|&c| (c, w)));
            }
            jac.push(g);
        }
        let mut m = DMatrix::zeros(res.len(), support.len());
        for (i, row) in jac.iter().enumerate() {
            for &(j, v) in row {
                if col[j] != usize::MAX {
                    m[(i, col[j])] += v;
                }
            }
        }
        let rhs = DVector::from_iterator(res.len(), res.iter().map(|r| -r));
        let step = m.svd(true, true).solve(&rhs, 1e-12).ok()?;
        for (k, &j) in support.iter().enumerate() {
            x[j] = (x[j] + step[k]).max(0.0);
        }
    }
    (program.max_residual(&x) <= tol).then_some(x)
}
