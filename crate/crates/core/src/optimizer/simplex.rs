//! Two-phase revised simplex for `min c·x` over `x >= 0`, with an explicit
//! basis inverse that is refactored periodically, and a dual simplex for
//! restarting from a previous basis after rows change.

use crate::error::SolveError;
use crate::program::{LinearConstraint, Relation};

const PIVOT_TOL: f64 = 1e-7;
const COST_TOL: f64 = 1e-10;
/// Primal slack allowed by the two-pass ratio test.
const HARRIS_TOL: f64 = 1e-10;
/// Primal infeasibility the dual simplex leaves alone.
const PRIMAL_TOL: f64 = 1e-10;
/// Degenerate pivots in a row before switching to Bland's rule.
const STALL_LIMIT: usize = 30;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Primal point (all zeros when infeasible).
    pub x: Vec<f64>,
    /// `c·x` at the returned point.
    pub objective: f64,
    /// One multiplier per row. At an optimum `c - Aᵀy >= 0` and `b·y` equals
    /// the objective; when infeasible, a Farkas ray: `yᵀA <= 0` on every
    /// column and `b·y > 0`.
    pub duals: Vec<f64>,
    /// Final basis, one column per row. Columns are numbered structural
    /// first, then one slack per inequality row, then one artificial per
    /// row, so a basis carries over to any program with the same row
    /// relations.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

struct Revised {
    m: usize,
    /// Sparse columns of `[A | slack | artificial]`.
    columns: Vec<Vec<(usize, f64)>>,
    first_art: usize,
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Row-major `B⁻¹`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    /// Dependent columns swapped out by [`Revised::repair`].
    repairs: usize,
    max_iter: usize,
}

impl Revised {
    fn new(num_vars: usize, rows: &[LinearConstraint]) -> Result<Self, SolveError> {
        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let first_art = num_vars + slack_count;
        let n = first_art + m;
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut s = num_vars;
        for (i, row) in rows.iter().enumerate() {
            for &(j, c) in &row.coefficients {
                if j >= num_vars {
                    return Err(SolveError::Internal(format!("row {i} references variable {j}")));
                }
                match columns[j].last_mut() {
                    Some((r, v)) if *r == i => *v += c,
                    _ => columns[j].push((i, c)),
                }
            }
            match row.relation {
                Relation::Le => columns[s].push((i, 1.0)),
                Relation::Ge => columns[s].push((i, -1.0)),
                Relation::Eq => {}
            }
            if row.relation != Relation::Eq {
                s += 1;
            }
            columns[first_art + i].push((i, if row.rhs < 0.0 { -1.0 } else { 1.0 }));
        }
        Ok(Self {
            m,
            columns,
            first_art,
            b: rows.iter().map(|r| r.rhs).collect(),
            basis: Vec::new(),
            in_basis: vec![false; n],
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            iterations: 0,
            since_refactor: 0,
            repairs: 0,
            max_iter: 50 * (m + n) + 1000,
        })
    }

    fn set_basis(&mut self, basis: &[usize]) -> Result<(), SolveError> {
        self.in_basis.iter_mut().for_each(|v| *v = false);
        for &j in basis {
            self.in_basis[j] = true;
        }
        self.basis = basis.to_vec();
        self.refactor()
    }

    /// Gauss–Jordan inverse of the basis, skipping zero multipliers (bases
    /// are mostly unit columns).
    fn refactor(&mut self) -> Result<(), SolveError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(r, v) in &self.columns[j] {
                a[r * m + k] = v;
            }
        }
        let inv = &mut self.binv;
        inv.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))
                .unwrap_or(c);
            if a[p * m + c].abs() < 1e-11 {
                self.repair(c)?;
                return self.refactor();
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = 1.0 / a[c * m + c];
            for k in 0..m {
                a[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for r in 0..m {
                let f = a[r * m + c];
                if r == c || f == 0.0 {
                    continue;
                }
                for k in c..m {
                    a[r * m + k] -= f * a[c * m + k];
                }
                for k in 0..m {
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.b).map(|(a, b)| a * b).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Swaps the dependent basis column `c` for an artificial whose column,
    /// transformed by the eliminations so far, has the largest entry below
    /// row `c`. The row it belongs to becomes infeasible if its value ends
    /// up positive, which callers check.
    fn repair(&mut self, c: usize) -> Result<(), SolveError> {
        let m = self.m;
        if self.repairs >= m {
            return Err(SolveError::Internal("singular basis".into()));
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            let art = self.first_art + j;
            if self.in_basis[art] {
                continue;
            }
            let size = (c..m).map(|p| self.binv[p * m + j].abs()).fold(0.0, f64::max);
            if best.is_none_or(|(_, b)| size > b) {
                best = Some((j, size));
            }
        }
        let Some((j, _)) = best.filter(|&(_, size)| size >= 1e-11) else {
            return Err(SolveError::Internal("singular basis".into()));
        };
        let art = self.first_art + j;
        self.in_basis[self.basis[c]] = false;
        self.in_basis[art] = true;
        self.basis[c] = art;
        self.repairs += 1;
        Ok(())
    }

    /// `c_Bᵀ B⁻¹`.
    fn prices(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for (yk, &bik) in y.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                *yk += cb * bik;
            }
        }
        y
    }

    fn dot(&self, y: &[f64], j: usize) -> f64 {
        self.columns[j].iter().map(|&(r, v)| y[r] * v).sum()
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(r, v) in &self.columns[j] {
            for (i, a) in alpha.iter_mut().enumerate() {
                *a += self.binv[i * m + r] * v;
            }
        }
        alpha
    }

    /// Basic values are nonnegative and artificials vanish.
    fn consistent(&self) -> bool {
        (0..self.m).all(|i| self.xb[i] >= -1e-7 && (!self.is_artificial(self.basis[i]) || self.xb[i] <= 1e-7))
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_art
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) -> Result<(), SolveError> {
        let m = self.m;
        let theta = self.xb[r] / alpha[r];
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[r] = theta;
        let inv = 1.0 / alpha[r];
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v * inv).collect();
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for (dst, &p) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *dst -= f * p;
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        if self.iterations > self.max_iter {
            return Err(SolveError::Internal(format!(
                "simplex exceeded {} iterations",
                self.max_iter
            )));
        }
        Ok(())
    }

    /// Primal simplex on `cost`. Artificials never enter; with
    /// `pin_artificials`, basic ones are held at zero.
    fn primal(&mut self, cost: &[f64], pin_artificials: bool) -> Result<(), SolveError> {
        let mut stall = 0;
        loop {
            let y = self.prices(cost);
            let bland = stall >= STALL_LIMIT;
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..self.first_art {
                if self.in_basis[j] {
                    continue;
                }
                let d = cost[j] - self.dot(&y, j);
                if bland {
                    if d < -COST_TOL {
                        entering = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else { return Ok(()) };
            let alpha = self.ftran(q);

            // (value, rate) of each blocking row; pinned artificials block
            // in both directions
            let blocking = |i: usize| -> Option<(f64, f64)> {
                let pinned = pin_artificials && self.is_artificial(self.basis[i]);
                if alpha[i] > PIVOT_TOL {
                    Some((self.xb[i].max(0.0), alpha[i]))
                } else if pinned && alpha[i] < -PIVOT_TOL {
                    Some((0.0, -alpha[i]))
                } else {
                    None
                }
            };
            // two-pass ratio test: bound the step with a little slack, then
            // take the largest pivot among rows within it
            let mut limit = f64::INFINITY;
            for i in 0..self.m {
                if let Some((v, a)) = blocking(i) {
                    limit = limit.min((v + HARRIS_TOL) / a);
                }
            }
            if !limit.is_finite() {
                return Err(SolveError::Internal("unbounded direction in a bounded program".into()));
            }
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let Some((v, a)) = blocking(i) else { continue };
                let ratio = v / a;
                if ratio > limit {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((r, rr, _)) if bland => {
                        ratio < rr - 1e-15 || (ratio <= rr + 1e-15 && self.basis[i] < self.basis[r])
                    }
                    Some((_, _, ra)) => a > ra,
                };
                if better {
                    leave = Some((i, ratio, a));
                }
            }
            let (r, ratio, _) = leave.expect("a row attains the ratio limit");
            stall = if ratio <= 1e-12 { stall + 1 } else { 0 };
            // Bland's rule cannot cycle in exact arithmetic, so a stall this
            // long means the factorization is too inaccurate to continue
            if stall > 20 * self.m + 500 {
                return Err(SolveError::Internal("simplex stalled at a degenerate vertex".into()));
            }
            if (pin_artificials && self.is_artificial(self.basis[r])) || self.xb[r] < 0.0 {
                self.xb[r] = 0.0;
            }
            self.pivot(r, q, &alpha)?;
        }
    }

    /// Dual simplex from a dual-feasible basis for `cost`. Returns the row
    /// proving infeasibility, if any.
    fn dual(&mut self, cost: &[f64]) -> Result<Option<Vec<f64>>, SolveError> {
        let m = self.m;
        loop {
            // most violated basic: negative, or a positive artificial
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let v = self.xb[i];
                let violation = if v < -PRIMAL_TOL {
                    -v
                } else if self.is_artificial(self.basis[i]) && v > PRIMAL_TOL {
                    v
                } else {
                    continue;
                };
                if leave.is_none_or(|(_, w)| violation > w) {
                    leave = Some((i, violation));
                }
            }
            let Some((r, _)) = leave else { return Ok(None) };
            let up = self.xb[r] > 0.0;
            let row = self.binv[r * m..(r + 1) * m].to_vec();
            let y = self.prices(cost);
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..self.first_art {
                if self.in_basis[j] {
                    continue;
                }
                let rho = self.dot(&row, j);
                let rate = if up { rho } else { -rho };
                if rate <= PIVOT_TOL {
                    continue;
                }
                let ratio = (cost[j] - self.dot(&y, j)).max(0.0) / rate;
                let better = match best {
                    None => true,
                    Some((_, br, ba)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && rate > ba),
                };
                if better {
                    best = Some((j, ratio, rate));
                }
            }
            let Some((q, _, _)) = best else {
                let ray = if up { row } else { row.iter().map(|v| -v).collect() };
                return Ok(Some(ray));
            };
            let alpha = self.ftran(q);
            self.pivot(r, q, &alpha)?;
        }
    }

    fn finish(&self, num_vars: usize, cost: &[f64]) -> LpOutcome {
        let mut x = vec![0.0; num_vars];
        for i in 0..self.m {
            if self.basis[i] < num_vars {
                x[self.basis[i]] = self.xb[i].max(0.0);
            }
        }
        LpOutcome {
            status: LpStatus::Optimal,
            objective: cost[..num_vars].iter().zip(&x).map(|(c, v)| c * v).sum(),
            x,
            duals: self.prices(cost),
            basis: self.basis.clone(),
            iterations: self.iterations,
        }
    }

    fn infeasible(&self, num_vars: usize, ray: Vec<f64>) -> LpOutcome {
        LpOutcome {
            status: LpStatus::Infeasible,
            x: vec![0.0; num_vars],
            objective: f64::NAN,
            duals: ray,
            basis: self.basis.clone(),
            iterations: self.iterations,
        }
    }
}

fn dense_cost(n: usize, num_vars: usize, objective: &[(usize, f64)]) -> Result<Vec<f64>, SolveError> {
    let mut cost = vec![0.0; n];
    for &(j, c) in objective {
        if j >= num_vars {
            return Err(SolveError::Internal(format!("objective references variable {j}")));
        }
        cost[j] += c;
    }
    Ok(cost)
}

/// Minimizes `objective · x` subject to `rows` and `x >= 0`.
/// `feas_tol` is the phase-one optimum above which the rows are declared
/// inconsistent.
pub fn minimize(
    num_vars: usize,
    objective: &[(usize, f64)],
    rows: &[LinearConstraint],
    feas_tol: f64,
) -> Result<LpOutcome, SolveError> {
    // the all-artificial start is perfectly conditioned; it is the retry
    // when the cheaper slack start runs into numerical trouble
    cold(num_vars, objective, rows, feas_tol, true).or_else(|_| cold(num_vars, objective, rows, feas_tol, false))
}

fn cold(
    num_vars: usize,
    objective: &[(usize, f64)],
    rows: &[LinearConstraint],
    feas_tol: f64,
    slack_start: bool,
) -> Result<LpOutcome, SolveError> {
    let mut lp = Revised::new(num_vars, rows)?;
    let m = lp.m;
    let n = lp.columns.len();
    let first_art = lp.first_art;

    // slacks start basic where their sign allows, artificials elsewhere
    let mut basis = Vec::with_capacity(m);
    let mut s = num_vars;
    for (i, row) in rows.iter().enumerate() {
        let start = match row.relation {
            Relation::Le if slack_start && row.rhs >= 0.0 => Some(s),
            Relation::Ge if slack_start && row.rhs <= 0.0 => Some(s),
            _ => None,
        };
        if row.relation != Relation::Eq {
            s += 1;
        }
        basis.push(start.unwrap_or(first_art + i));
    }
    lp.set_basis(&basis)?;

    let mut phase1 = vec![0.0; n];
    phase1[first_art..].iter_mut().for_each(|c| *c = 1.0);
    lp.primal(&phase1, false)?;
    lp.refactor()?;
    let infeasibility: f64 = (0..m)
        .filter(|&i| lp.is_artificial(lp.basis[i]))
        .map(|i| lp.xb[i])
        .sum();
    if infeasibility > feas_tol {
        let ray = lp.prices(&phase1);
        return Ok(lp.infeasible(num_vars, ray));
    }
    // drive zero-level artificials out where a real column allows
    for r in 0..m {
        if !lp.is_artificial(lp.basis[r]) {
            continue;
        }
        let row = lp.binv[r * m..(r + 1) * m].to_vec();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..first_art {
            if lp.in_basis[j] {
                continue;
            }
            let v = lp.dot(&row, j);
            if v.abs() > 1e-7 && best.is_none_or(|(_, bv)| v.abs() > bv.abs()) {
                best = Some((j, v));
            }
        }
        if let Some((q, _)) = best {
            let alpha = lp.ftran(q);
            lp.xb[r] = 0.0;
            lp.pivot(r, q, &alpha)?;
        }
    }

    let cost = dense_cost(n, num_vars, objective)?;
    lp.primal(&cost, true)?;
    lp.refactor()?;
    if !lp.consistent() {
        return Err(SolveError::Internal("basis repair lost feasibility".into()));
    }
    Ok(lp.finish(num_vars, &cost))
}

/// Like [`minimize`], restarting from `basis` (from an earlier solve over
/// rows with the same relations). Reduced costs made negative by changed
/// rows are shifted away for a dual simplex pass, then a primal pass
/// restores the true costs. Falls back to a cold solve when the basis is
/// unusable.
pub fn minimize_from(
    num_vars: usize,
    objective: &[(usize, f64)],
    rows: &[LinearConstraint],
    feas_tol: f64,
    basis: &[usize],
) -> Result<LpOutcome, SolveError> {
    match warm(num_vars, objective, rows, basis) {
        Ok(Some(out)) => Ok(out),
        _ => minimize(num_vars, objective, rows, feas_tol),
    }
}

fn warm(
    num_vars: usize,
    objective: &[(usize, f64)],
    rows: &[LinearConstraint],
    basis: &[usize],
) -> Result<Option<LpOutcome>, SolveError> {
    let mut lp = Revised::new(num_vars, rows)?;
    let n = lp.columns.len();
    if basis.len() != lp.m || basis.iter().any(|&j| j >= n) {
        return Ok(None);
    }
    lp.set_basis(basis)?;
    let cost = dense_cost(n, num_vars, objective)?;
    let y = lp.prices(&cost);
    let mut shifted = cost.clone();
    for j in 0..lp.first_art {
        if !lp.in_basis[j] {
            let d = cost[j] - lp.dot(&y, j);
            if d < 0.0 {
                shifted[j] -= d;
            }
        }
    }
    if let Some(ray) = lp.dual(&shifted)? {
        return Ok(Some(lp.infeasible(num_vars, ray)));
    }
    lp.primal(&cost, true)?;
    if lp.since_refactor > 0 {
        lp.refactor()?;
    }
    if !lp.consistent() {
        return Ok(None);
    }
    Ok(Some(lp.finish(num_vars, &cost)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[(usize, f64)], relation: Relation, rhs: f64) -> LinearConstraint {
        LinearConstraint {
            coefficients: c.to_vec(),
            relation,
            rhs,
            origin: "t".into(),
        }
    }

    #[test]
    fn vertex_of_simplex() {
        let rows = [row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0)];
        let out = minimize(2, &[(0, -1.0)], &rows, 1e-9).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 1.0).abs() < 1e-12);
        assert!((out.duals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let rows = [
            row(&[(0, 1.0)], Relation::Le, 4.0),
            row(&[(1, 2.0)], Relation::Le, 12.0),
            row(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
        ];
        let out = minimize(2, &[(0, -3.0), (1, -5.0)], &rows, 1e-9).unwrap();
        assert!((out.objective + 36.0).abs() < 1e-9);
        assert!((out.x[0] - 2.0).abs() < 1e-9 && (out.x[1] - 6.0).abs() < 1e-9);
        let dual_obj: f64 = rows.iter().zip(&out.duals).map(|(r, y)| r.rhs * y).sum();
        assert!((dual_obj - out.objective).abs() < 1e-9);
    }

    #[test]
    fn ge_rows_and_negative_rhs() {
        // min x + y, x + 2y >= 2, -x <= -0.5
        let rows = [
            row(&[(0, 1.0), (1, 2.0)], Relation::Ge, 2.0),
            row(&[(0, -1.0)], Relation::Le, -0.5),
        ];
        let out = minimize(2, &[(0, 1.0), (1, 1.0)], &rows, 1e-9).unwrap();
        assert!((out.objective - 1.25).abs() < 1e-9, "{out:?}");
        let dual_obj: f64 = rows.iter().zip(&out.duals).map(|(r, y)| r.rhs * y).sum();
        assert!((dual_obj - 1.25).abs() < 1e-9);
    }

    #[test]
    fn contradiction_is_infeasible() {
        let rows = [
            row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0),
            row(&[(0, 1.0)], Relation::Eq, 0.6),
            row(&[(0, 1.0)], Relation::Eq, 0.4),
        ];
        let out = minimize(2, &[(0, 1.0)], &rows, 1e-9).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        // the ray separates: y·A <= 0 componentwise and y·b > 0
        let yb: f64 = rows.iter().zip(&out.duals).map(|(r, y)| r.rhs * y).sum();
        assert!(yb > 1e-9);
        for j in 0..2 {
            let col: f64 = rows
                .iter()
                .zip(&out.duals)
                .map(|(r, y)| y * r.coefficients.iter().filter(|c| c.0 == j).map(|c| c.1).sum::<f64>())
                .sum();
            assert!(col <= 1e-9);
        }
        assert!(out.duals[1].abs() > 1e-9 || out.duals[2].abs() > 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let rows = [
            row(&[(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0),
            row(&[(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0),
            row(&[(0, 1.0)], Relation::Eq, 0.3),
        ];
        let out = minimize(3, &[(1, -1.0)], &rows, 1e-9).unwrap();
        assert!((out.objective + 0.7).abs() < 1e-12);
    }

    #[test]
    fn degenerate_transportation() {
        // 3×3 assignment polytope: every vertex is highly degenerate
        let mut rows = Vec::new();
        for i in 0..3 {
            rows.push(row(
                &(0..3).map(|j| (3 * i + j, 1.0)).collect::<Vec<_>>(),
                Relation::Eq,
                1.0,
            ));
            rows.push(row(
                &(0..3).map(|j| (3 * j + i, 1.0)).collect::<Vec<_>>(),
                Relation::Eq,
                1.0,
            ));
        }
        let cost: Vec<(usize, f64)> = (0..9)
            .map(|k| (k, [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0][k]))
            .collect();
        let out = minimize(9, &cost, &rows, 1e-9).unwrap();
        assert!((out.objective - 5.0).abs() < 1e-9, "{}", out.objective);
    }

    #[test]
    fn warm_start_after_rhs_and_coefficient_changes() {
        // max 3x + 5y, then tighten the third row and reweight the first
        let mut rows = vec![
            row(&[(0, 1.0)], Relation::Le, 4.0),
            row(&[(1, 2.0)], Relation::Le, 12.0),
            row(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
        ];
        let cost = [(0, -3.0), (1, -5.0)];
        let first = minimize(2, &cost, &rows, 1e-9).unwrap();
        rows[2].rhs = 12.0;
        rows[0].coefficients = vec![(0, 2.0)];
        let cold = minimize(2, &cost, &rows, 1e-9).unwrap();
        let warm = minimize_from(2, &cost, &rows, 1e-9, &first.basis).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-12);
        assert!((warm.objective + 30.0).abs() < 1e-9, "{warm:?}");
    }

    #[test]
    fn warm_start_detects_infeasibility() {
        let mut rows = vec![
            row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0),
            row(&[(0, 1.0)], Relation::Ge, 0.2),
        ];
        let first = minimize(2, &[(0, 1.0)], &rows, 1e-9).unwrap();
        rows[1].rhs = 1.5;
        let warm = minimize_from(2, &[(0, 1.0)], &rows, 1e-9, &first.basis).unwrap();
        assert_eq!(warm.status, LpStatus::Infeasible);
        let yb: f64 = rows.iter().zip(&warm.duals).map(|(r, y)| r.rhs * y).sum();
        assert!(yb > 1e-9);
    }

    #[test]
    fn garbage_basis_falls_back() {
        let rows = [row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0)];
        let out = minimize_from(2, &[(0, -1.0)], &rows, 1e-9, &[7, 8]).unwrap();
        assert!((out.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn dependent_basis_is_repaired() {
        // x0 and x1 have identical columns, so {x0, x1} is singular
        let rows = [
            row(&[(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0),
            row(&[(0, 2.0), (1, 2.0), (2, 1.0)], Relation::Eq, 1.5),
        ];
        let mut lp = Revised::new(3, &rows).unwrap();
        lp.set_basis(&[0, 1]).unwrap();
        assert_eq!(lp.repairs, 1);
        assert!(lp.basis.iter().filter(|&&j| lp.is_artificial(j)).count() == 1);
        let out = minimize_from(3, &[(2, 1.0)], &rows, 1e-9, &[0, 1]).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 0.5).abs() < 1e-12);
    }
}
