//! Presolve reductions and the matching postsolve.
//!
//! Reductions applied until a fixed point:
//! - empty rows are checked and dropped,
//! - singleton rows become column bounds,
//! - doubleton equality rows substitute one column by the other,
//! - rows implied by the column bounds are dropped,
//! - fixed and empty columns are removed at their (cost-optimal) value.

use super::{LpProblem, Sense};

const FEAS_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;
const GONE: usize = usize::MAX;

#[derive(Debug)]
enum Op {
    Fix { col: usize, value: f64 },
    Substitute { col: usize, other: usize, constant: f64, coef: f64 },
}

/// Undoes presolve reductions on a solution of the reduced problem.
#[derive(Debug)]
pub(crate) struct Postsolve {
    n: usize,
    ops: Vec<Op>,
    pub(crate) col_map: Vec<usize>,
    pub(crate) row_map: Vec<usize>,
    pub(crate) unbounded_ray: bool,
}

impl Postsolve {
    pub(crate) fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &j) in self.col_map.iter().enumerate() {
            x[j] = reduced[r];
        }
        for op in self.ops.iter().rev() {
            match *op {
                Op::Fix { col, value } => x[col] = value,
                Op::Substitute { col, other, constant, coef } => x[col] = constant + coef * x[other],
            }
        }
        x
    }
}

/// Reduced problem in bounded-row form `row_lo ≤ A x ≤ row_up`.
#[derive(Debug, Default)]
pub(crate) struct Reduced {
    pub(crate) n: usize,
    pub(crate) rows: Vec<Vec<(usize, f64)>>,
    pub(crate) row_lo: Vec<f64>,
    pub(crate) row_up: Vec<f64>,
    pub(crate) col_lo: Vec<f64>,
    pub(crate) col_up: Vec<f64>,
    pub(crate) cost: Vec<f64>,
}

pub(crate) enum Presolved {
    Reduced(Reduced, Postsolve),
    Infeasible,
}

struct Work {
    rows: Vec<Vec<(usize, f64)>>,
    row_alive: Vec<bool>,
    row_len: Vec<usize>,
    row_lo: Vec<f64>,
    row_up: Vec<f64>,
    col_rows: Vec<Vec<(usize, usize)>>,
    col_alive: Vec<bool>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    ops: Vec<Op>,
    unbounded_ray: bool,
}

fn tol(v: f64) -> f64 {
    FEAS_TOL * v.abs().max(1.0)
}

impl Work {
    fn incidences(&self, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.col_rows[j].iter().copied().filter(move |&(r, p)| self.row_alive[r] && self.rows[r][p].0 == j)
    }

    fn col_len(&self, j: usize) -> usize {
        self.incidences(j).count()
    }

    fn live_terms(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows[r].iter().copied().filter(|t| t.0 != GONE)
    }

    fn kill_row(&mut self, r: usize) {
        self.row_alive[r] = false;
        self.row_len[r] = 0;
    }

    fn shift_row(&mut self, r: usize, delta: f64) {
        if self.row_lo[r].is_finite() {
            self.row_lo[r] -= delta;
        }
        if self.row_up[r].is_finite() {
            self.row_up[r] -= delta;
        }
    }

    fn fix_column(&mut self, j: usize, value: f64) {
        let inc: Vec<(usize, usize)> = self.incidences(j).collect();
        for (r, p) in inc {
            let a = self.rows[r][p].1;
            self.shift_row(r, a * value);
            self.rows[r][p].0 = GONE;
            self.row_len[r] -= 1;
        }
        self.col_alive[j] = false;
        self.ops.push(Op::Fix { col: j, value });
    }

    /// Tightens the bounds of column `j`; returns false on a contradiction.
    fn tighten(&mut self, j: usize, l: f64, u: f64) -> bool {
        let nl = self.lo[j].max(l);
        let nu = self.up[j].min(u);
        if nl > nu {
            if nl - nu > tol(nu) {
                return false;
            }
            // Within tolerance: collapse onto the tighter side already present.
            let v = if self.lo[j] >= l { self.lo[j] } else { nu };
            self.lo[j] = v;
            self.up[j] = v;
            return true;
        }
        self.lo[j] = nl;
        self.up[j] = nu;
        true
    }

    fn add_to_row(&mut self, r: usize, k: usize, delta: f64) {
        let found = self.col_rows[k].iter().copied().find(|&(rr, p)| rr == r && self.rows[r][p].0 == k);
        match found {
            Some((_, p)) => {
                let v = self.rows[r][p].1 + delta;
                if v.abs() <= ZERO_TOL {
                    self.rows[r][p].0 = GONE;
                    self.row_len[r] -= 1;
                } else {
                    self.rows[r][p].1 = v;
                }
            }
            None => {
                if delta.abs() <= ZERO_TOL {
                    return;
                }
                let p = self.rows[r].len();
                self.rows[r].push((k, delta));
                self.col_rows[k].push((r, p));
                self.row_len[r] += 1;
            }
        }
    }

    /// Eliminates `j` from row `r` (a doubleton equality) via `x_j = c0 + c1 x_k`.
    fn substitute(&mut self, r: usize, j: usize, a: f64, k: usize, b: f64) -> bool {
        let rhs = self.row_lo[r];
        let c0 = rhs / a;
        let c1 = -b / a;
        let (lj, uj) = (self.lo[j], self.up[j]);
        let (mut lk, mut uk) = (f64::NEG_INFINITY, f64::INFINITY);
        if c1 > 0.0 {
            if lj.is_finite() {
                lk = (lj - c0) / c1;
            }
            if uj.is_finite() {
                uk = (uj - c0) / c1;
            }
        } else {
            if uj.is_finite() {
                lk = (uj - c0) / c1;
            }
            if lj.is_finite() {
                uk = (lj - c0) / c1;
            }
        }
        self.kill_row(r);
        if !self.tighten(k, lk, uk) {
            return false;
        }
        self.cost[k] += self.cost[j] * c1;
        let inc: Vec<(usize, usize)> = self.incidences(j).collect();
        for (t, p) in inc {
            let atj = self.rows[t][p].1;
            self.rows[t][p].0 = GONE;
            self.row_len[t] -= 1;
            self.shift_row(t, atj * c0);
            self.add_to_row(t, k, atj * c1);
        }
        self.col_alive[j] = false;
        self.ops.push(Op::Substitute { col: j, other: k, constant: c0, coef: c1 });
        true
    }

    fn process_row(&mut self, r: usize) -> Option<bool> {
        match self.row_len[r] {
            0 => {
                let (lo, up) = (self.row_lo[r], self.row_up[r]);
                if lo > tol(lo) || up < -tol(up) {
                    return None;
                }
                self.kill_row(r);
                Some(true)
            }
            1 => {
                let (j, a) = self.live_terms(r).next().expect("one live term");
                let (mut l, mut u) = (self.row_lo[r] / a, self.row_up[r] / a);
                if a < 0.0 {
                    std::mem::swap(&mut l, &mut u);
                }
                if l.is_nan() {
                    l = f64::NEG_INFINITY;
                }
                if u.is_nan() {
                    u = f64::INFINITY;
                }
                self.kill_row(r);
                if !self.tighten(j, l, u) {
                    return None;
                }
                Some(true)
            }
            2 if self.row_lo[r] == self.row_up[r] => {
                let mut it = self.live_terms(r);
                let (j, a) = it.next().expect("two live terms");
                let (k, b) = it.next().expect("two live terms");
                drop(it);
                let (nj, nk) = (self.col_len(j), self.col_len(k));
                let big = a.abs().max(b.abs());
                let j_ok = a.abs() >= 1e-3 * big;
                let k_ok = b.abs() >= 1e-3 * big;
                let eliminate_j = if j_ok && k_ok { nj <= nk } else { j_ok };
                let ok = if eliminate_j { self.substitute(r, j, a, k, b) } else { self.substitute(r, k, b, j, a) };
                if !ok {
                    return None;
                }
                Some(true)
            }
            _ => {
                let (mut amin, mut amax) = (0.0, 0.0);
                for (j, a) in self.live_terms(r) {
                    let (l, u) = if a > 0.0 { (self.lo[j], self.up[j]) } else { (self.up[j], self.lo[j]) };
                    amin += a * l;
                    amax += a * u;
                }
                let (lo, up) = (self.row_lo[r], self.row_up[r]);
                if amax < lo - tol(lo) || amin > up + tol(up) {
                    return None;
                }
                if amin >= lo && amax <= up {
                    self.kill_row(r);
                    return Some(true);
                }
                Some(false)
            }
        }
    }

    fn process_column(&mut self, j: usize) -> bool {
        if self.lo[j] == self.up[j] {
            let v = self.lo[j];
            self.fix_column(j, v);
            return true;
        }
        if self.col_len(j) == 0 {
            let (l, u, c) = (self.lo[j], self.up[j], self.cost[j]);
            let v = if c > 0.0 {
                if l.is_finite() {
                    l
                } else {
                    self.unbounded_ray = true;
                    if u.is_finite() { u } else { 0.0 }
                }
            } else if c < 0.0 {
                if u.is_finite() {
                    u
                } else {
                    self.unbounded_ray = true;
                    if l.is_finite() { l } else { 0.0 }
                }
            } else if l.is_finite() {
                l
            } else if u.is_finite() {
                u
            } else {
                0.0
            };
            self.fix_column(j, v);
            return true;
        }
        false
    }
}

/// Converts `problem` to bounded-row form without any reduction.
pub(crate) fn passthrough(problem: &LpProblem, cost: &[f64]) -> (Reduced, Postsolve) {
    let n = problem.num_vars();
    let mut red = Reduced {
        n,
        col_lo: problem.lower.clone(),
        col_up: problem.upper.clone(),
        cost: cost.to_vec(),
        ..Default::default()
    };
    for row in &problem.rows {
        let (lo, up) = row_bounds(row.sense, row.rhs);
        red.rows.push(row.terms.clone());
        red.row_lo.push(lo);
        red.row_up.push(up);
    }
    let row_map = (0..problem.num_constraints()).collect();
    (red, Postsolve { n, ops: Vec::new(), col_map: (0..n).collect(), row_map, unbounded_ray: false })
}

fn row_bounds(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

/// Presolves `problem` with objective `cost` (already in minimisation sense).
pub(crate) fn presolve(problem: &LpProblem, cost: &[f64]) -> Presolved {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    let mut w = Work {
        rows: Vec::with_capacity(m),
        row_alive: vec![true; m],
        row_len: Vec::with_capacity(m),
        row_lo: Vec::with_capacity(m),
        row_up: Vec::with_capacity(m),
        col_rows: vec![Vec::new(); n],
        col_alive: vec![true; n],
        lo: problem.lower.clone(),
        up: problem.upper.clone(),
        cost: cost.to_vec(),
        ops: Vec::new(),
        unbounded_ray: false,
    };
    for (r, row) in problem.rows.iter().enumerate() {
        let (lo, up) = row_bounds(row.sense, row.rhs);
        for (p, &(j, _)) in row.terms.iter().enumerate() {
            w.col_rows[j].push((r, p));
        }
        w.rows.push(row.terms.clone());
        w.row_len.push(row.terms.len());
        w.row_lo.push(lo);
        w.row_up.push(up);
    }

    loop {
        let mut changed = false;
        for r in 0..m {
            if !w.row_alive[r] {
                continue;
            }
            match w.process_row(r) {
                None => return Presolved::Infeasible,
                Some(c) => changed |= c,
            }
        }
        for j in 0..n {
            if w.col_alive[j] {
                changed |= w.process_column(j);
            }
        }
        if !changed {
            break;
        }
    }

    let col_map: Vec<usize> = (0..n).filter(|&j| w.col_alive[j]).collect();
    let mut new_index = vec![GONE; n];
    for (r, &j) in col_map.iter().enumerate() {
        new_index[j] = r;
    }
    let mut red = Reduced { n: col_map.len(), ..Default::default() };
    let mut row_map = Vec::new();
    for &j in &col_map {
        red.col_lo.push(w.lo[j]);
        red.col_up.push(w.up[j]);
        red.cost.push(w.cost[j]);
    }
    for r in 0..m {
        if !w.row_alive[r] {
            continue;
        }
        let mut terms: Vec<(usize, f64)> = w.live_terms(r).map(|(j, a)| (new_index[j], a)).collect();
        terms.sort_by_key(|t| t.0);
        red.rows.push(terms);
        row_map.push(r);
        red.row_lo.push(w.row_lo[r]);
        red.row_up.push(w.row_up[r]);
    }
    Presolved::Reduced(red, Postsolve { n, ops: w.ops, col_map, row_map, unbounded_ray: w.unbounded_ray })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Direction, LpProblem, Sense};

    #[test]
    fn chain_of_doubletons_collapses() {
        // y = 2x, z = y + 1, x ∈ [0, 3]; min -z.
        let mut p = LpProblem::new();
        let x = p.add_variable(0.0, 3.0).unwrap();
        let y = p.add_variable(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let z = p.add_variable(f64::NEG_INFINITY, 5.0).unwrap();
        p.add_constraint(&[(y, 1.0), (x, -2.0)], Sense::Eq, 0.0).unwrap();
        p.add_constraint(&[(z, 1.0), (y, -1.0)], Sense::Eq, 1.0).unwrap();
        p.set_objective(&[(z, -1.0)], Direction::Minimize).unwrap();
        let Presolved::Reduced(red, post) = presolve(&p, &p.objective) else { panic!("infeasible") };
        assert!(red.rows.is_empty());
        // z ≤ 5 → x ≤ 2, optimum x = 2 → fixed by the empty-column rule.
        let x_full = post.expand(&vec![0.0; red.n]);
        assert_eq!(x_full, vec![2.0, 4.0, 5.0]);
    }

    #[test]
    fn contradictory_singletons_are_infeasible() {
        let mut p = LpProblem::new();
        let x = p.add_variable(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        p.add_constraint(&[(x, 1.0)], Sense::Ge, 5.0).unwrap();
        p.add_constraint(&[(x, 1.0)], Sense::Le, 3.0).unwrap();
        p.set_objective(&[(x, 1.0)], Direction::Minimize).unwrap();
        assert!(matches!(presolve(&p, &p.objective), Presolved::Infeasible));
    }
}
