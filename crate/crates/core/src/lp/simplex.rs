//! Bounded-variable primal revised simplex.
//!
//! Rows are turned into logical columns (`A x - s = 0`, `row_lo ≤ s ≤ row_up`)
//! so every constraint becomes a column bound. Phase 1 minimises the sum of
//! infeasibilities of the basic variables; phase 2 the real objective.
//! Pricing is Devex (or Dantzig) with ties going to the lowest column index;
//! the ratio test is Harris' two-pass rule. Runs of degenerate pivots switch
//! to Bland's rule until progress resumes.

use super::lu::{factorize, LuFactors};
use super::presolve::{self, Presolved, Reduced};
use super::{Basis, BasisStatus, Direction, LpProblem, LpSolution, Status};

const NONBASIC: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const RHO_DROP: f64 = 1e-13;
const MAX_VERIFY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    Dantzig,
    Devex,
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Pivot budget; `None` picks a generous size-dependent limit.
    pub max_iterations: Option<usize>,
    /// Eta columns kept before the basis is refactorised.
    pub refactor_interval: usize,
    pub presolve: bool,
    /// Consecutive degenerate pivots tolerated before Bland's rule kicks in.
    pub degenerate_limit: usize,
    pub pricing: Pricing,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: None, refactor_interval: 100, presolve: true, degenerate_limit: 50, pricing: Pricing::Devex }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Simplex {
    pub options: SimplexOptions,
}

impl Simplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }

    pub fn solve(&self, problem: &LpProblem) -> LpSolution {
        self.solve_with(problem, None)
    }

    /// Starts from `hint` instead of the crash basis, typically the final
    /// basis of a closely related problem. Missing entries count as nonbasic
    /// at the lower bound; extra entries are ignored.
    pub fn solve_from(&self, problem: &LpProblem, hint: &Basis) -> LpSolution {
        self.solve_with(problem, Some(hint))
    }

    fn solve_with(&self, problem: &LpProblem, hint: Option<&Basis>) -> LpSolution {
        let sign = match problem.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let cost: Vec<f64> = problem.objective.iter().map(|c| sign * c).collect();
        let (red, post) = if self.options.presolve {
            match presolve::presolve(problem, &cost) {
                Presolved::Reduced(red, post) => (red, post),
                Presolved::Infeasible => {
                    let values: Vec<f64> =
                        problem.lower.iter().zip(&problem.upper).map(|(&l, &u)| 0.0f64.clamp(l, u)).collect();
                    let basis = Basis {
                        columns: (0..problem.num_vars())
                            .map(|j| status_of(values[j], problem.lower[j], problem.upper[j]))
                            .collect(),
                        rows: vec![BasisStatus::Basic; problem.num_constraints()],
                    };
                    return finish(problem, Status::Infeasible, values, 0, basis);
                }
            }
        } else {
            presolve::passthrough(problem, &cost)
        };

        let mut core = Core::new(&red, &self.options);
        match hint {
            Some(h) => {
                let get = |v: &[BasisStatus], k: usize| v.get(k).copied().unwrap_or(BasisStatus::AtLower);
                let cols: Vec<_> = post.col_map.iter().map(|&j| get(&h.columns, j)).collect();
                let rows: Vec<_> = post.row_map.iter().map(|&i| get(&h.rows, i)).collect();
                core.warm_start(&cols, &rows);
            }
            None => core.crash(),
        }
        let status = core.run();
        let reduced: Vec<f64> = (0..red.n).map(|j| core.x[j].clamp(red.col_lo[j], red.col_up[j])).collect();
        let mut values = post.expand(&reduced);
        for (j, v) in values.iter_mut().enumerate() {
            *v = v.clamp(problem.lower[j], problem.upper[j]);
        }

        let mut columns: Vec<BasisStatus> =
            (0..problem.num_vars()).map(|j| status_of(values[j], problem.lower[j], problem.upper[j])).collect();
        for (r, &j) in post.col_map.iter().enumerate() {
            columns[j] = core.status(r);
        }
        let mut rows = vec![BasisStatus::Basic; problem.num_constraints()];
        for (r, &i) in post.row_map.iter().enumerate() {
            rows[i] = core.status(red.n + r);
        }

        let status = if status == Status::Optimal && post.unbounded_ray { Status::Unbounded } else { status };
        finish(problem, status, values, core.iterations, Basis { columns, rows })
    }
}

fn finish(problem: &LpProblem, status: Status, values: Vec<f64>, iterations: usize, basis: Basis) -> LpSolution {
    let objective_value = problem.objective_value(&values);
    LpSolution { status, values, objective_value, iterations, basis }
}

fn status_of(v: f64, lo: f64, up: f64) -> BasisStatus {
    if v == lo {
        BasisStatus::AtLower
    } else if v == up {
        BasisStatus::AtUpper
    } else if v == 0.0 && !lo.is_finite() && !up.is_finite() {
        BasisStatus::Zero
    } else {
        BasisStatus::Basic
    }
}

fn tol(v: f64) -> f64 {
    if v.is_finite() {
        PRIMAL_TOL * v.abs().max(1.0)
    } else {
        PRIMAL_TOL
    }
}

struct Ratio {
    theta: f64,
    /// Basis position leaving and the bound it lands on; `None` is a bound flip.
    leave: Option<(usize, f64)>,
}

struct Core {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<usize>,
    lu: LuFactors,
    d: Vec<f64>,
    cb: Vec<f64>,
    weights: Vec<f64>,
    phase1: bool,
    dtol: f64,
    work: Vec<f64>,
    alpha: Vec<f64>,
    alpha_nz: Vec<usize>,
    col_nz: Vec<usize>,
    rho: Vec<f64>,
    rho_nz: Vec<usize>,
    unit: Vec<f64>,
    row_alpha: Vec<f64>,
    touched: Vec<usize>,
    /// Nonbasic columns whose reduced cost is attractive, in no particular order.
    cand: Vec<usize>,
    cand_pos: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
    refactor_interval: usize,
    degenerate_limit: usize,
    pricing: Pricing,
}

impl Core {
    fn new(red: &Reduced, opts: &SimplexOptions) -> Self {
        let n = red.n;
        let m = red.rows.len();
        let nt = n + m;
        let mut row_start = vec![0];
        let mut row_col = Vec::new();
        let mut row_val = Vec::new();
        let mut counts = vec![0usize; n + 1];
        for row in &red.rows {
            for &(j, a) in row {
                row_col.push(j);
                row_val.push(a);
                counts[j + 1] += 1;
            }
            row_start.push(row_col.len());
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut next = counts;
        let mut col_row = vec![0; row_col.len()];
        let mut col_val = vec![0.0; row_col.len()];
        for (i, row) in red.rows.iter().enumerate() {
            for &(j, a) in row {
                col_row[next[j]] = i;
                col_val[next[j]] = a;
                next[j] += 1;
            }
        }

        let mut lo = red.col_lo.clone();
        let mut up = red.col_up.clone();
        lo.extend_from_slice(&red.row_lo);
        up.extend_from_slice(&red.row_up);
        let mut cost = red.cost.clone();
        cost.resize(nt, 0.0);
        let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let dtol = if cmax > 0.0 { DUAL_TOL * cmax } else { DUAL_TOL };

        let mut x = vec![0.0; nt];
        for j in 0..n {
            x[j] = if lo[j].is_finite() {
                lo[j]
            } else if up[j].is_finite() {
                up[j]
            } else {
                0.0
            };
        }
        let head: Vec<usize> = (n..nt).collect();
        let mut pos = vec![NONBASIC; nt];
        for (p, &j) in head.iter().enumerate() {
            pos[j] = p;
        }
        let max_iterations = opts.max_iterations.unwrap_or(100 * nt + 10_000);
        Core {
            m,
            n,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            lo,
            up,
            cost,
            x,
            head,
            pos,
            lu: LuFactors::default(),
            d: vec![0.0; nt],
            cb: vec![0.0; m],
            weights: vec![1.0; nt],
            phase1: true,
            dtol,
            work: vec![0.0; m],
            alpha: vec![0.0; m],
            alpha_nz: Vec::new(),
            col_nz: Vec::new(),
            rho: vec![0.0; m],
            rho_nz: Vec::new(),
            unit: vec![0.0; m],
            row_alpha: vec![0.0; nt],
            touched: Vec::new(),
            cand: Vec::new(),
            cand_pos: vec![NONBASIC; nt],
            iterations: 0,
            max_iterations,
            refactor_interval: opts.refactor_interval.max(1),
            degenerate_limit: opts.degenerate_limit,
            pricing: opts.pricing,
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1]).map(|t| (self.col_row[t], self.col_val[t])).collect()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    fn scatter_column(&self, j: usize, scale: f64, out: &mut [f64]) {
        if j < self.n {
            for t in self.col_start[j]..self.col_start[j + 1] {
                out[self.col_row[t]] += scale * self.col_val[t];
            }
        } else {
            out[j - self.n] -= scale;
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1]).map(|t| y[self.col_row[t]] * self.col_val[t]).sum()
        } else {
            -y[j - self.n]
        }
    }

    /// Replaces logicals of equality rows by structural columns while the
    /// basis stays triangular.
    fn crash(&mut self) {
        let mut row_taken = vec![false; self.m];
        let mut used = vec![false; self.n];
        for i in 0..self.m {
            let j_log = self.n + i;
            if self.lo[j_log] != self.up[j_log] {
                continue;
            }
            let mut best: Option<(usize, usize, f64)> = None;
            for t in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_col[t];
                if used[j] || self.lo[j] == self.up[j] {
                    continue;
                }
                let a = self.row_val[t].abs();
                let mut cmax = 0.0f64;
                let mut blocked = false;
                for s in self.col_start[j]..self.col_start[j + 1] {
                    cmax = cmax.max(self.col_val[s].abs());
                    if row_taken[self.col_row[s]] {
                        blocked = true;
                        break;
                    }
                }
                if blocked || a < 0.1 * cmax {
                    continue;
                }
                let class = if !self.lo[j].is_finite() && !self.up[j].is_finite() {
                    0
                } else if !self.lo[j].is_finite() || !self.up[j].is_finite() {
                    1
                } else {
                    2
                };
                let range = self.up[j] - self.lo[j];
                let better = match best {
                    None => true,
                    Some((c, _, r)) => class < c || (class == c && class == 2 && range > r),
                };
                if better {
                    best = Some((class, j, range));
                }
            }
            if let Some((_, j, _)) = best {
                let p = self.pos[j_log];
                self.head[p] = j;
                self.pos[j] = p;
                self.pos[j_log] = NONBASIC;
                self.x[j_log] = self.lo[j_log];
                row_taken[i] = true;
                used[j] = true;
            }
        }
    }

    /// Installs a hinted basis. Surplus basic entries are dropped and
    /// missing ones are filled with logicals; `refactor` repairs the rest.
    fn warm_start(&mut self, cols: &[BasisStatus], rows: &[BasisStatus]) {
        let nt = self.n + self.m;
        let hinted = |j: usize| if j < self.n { cols[j] } else { rows[j - self.n] };
        let mut head: Vec<usize> = (0..nt).filter(|&j| hinted(j) == BasisStatus::Basic).collect();
        head.truncate(self.m);
        let mut in_basis = vec![false; nt];
        for &j in &head {
            in_basis[j] = true;
        }
        for i in 0..self.m {
            if head.len() == self.m {
                break;
            }
            if !in_basis[self.n + i] {
                head.push(self.n + i);
                in_basis[self.n + i] = true;
            }
        }
        self.pos.iter_mut().for_each(|p| *p = NONBASIC);
        for (p, &j) in head.iter().enumerate() {
            self.pos[j] = p;
        }
        self.head = head;
        for j in 0..nt {
            if self.pos[j] != NONBASIC {
                continue;
            }
            let (l, u) = (self.lo[j], self.up[j]);
            self.x[j] = match hinted(j) {
                BasisStatus::AtLower if l.is_finite() => l,
                BasisStatus::AtUpper if u.is_finite() => u,
                BasisStatus::Zero => 0.0f64.clamp(l, u),
                _ => {
                    self.x[j] = 0.0f64.clamp(l, u);
                    self.snap(j)
                }
            };
        }
    }

    fn status(&self, j: usize) -> BasisStatus {
        if self.pos[j] != NONBASIC {
            BasisStatus::Basic
        } else {
            status_of(self.x[j], self.lo[j], self.up[j])
        }
    }

    fn refactor(&mut self) {
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self.head.iter().map(|&j| self.column(j)).collect();
            match factorize(self.m, cols) {
                Ok(f) => {
                    self.lu = f;
                    return;
                }
                Err(s) => {
                    for (&p, &r) in s.cols.iter().zip(&s.rows) {
                        let j = self.head[p];
                        self.pos[j] = NONBASIC;
                        self.x[j] = self.snap(j);
                        let logical = self.n + r;
                        self.head[p] = logical;
                        self.pos[logical] = p;
                    }
                }
            }
        }
    }

    fn snap(&self, j: usize) -> f64 {
        let (l, u, v) = (self.lo[j], self.up[j], self.x[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if (v - l).abs() <= (u - v).abs() {
                    l
                } else {
                    u
                }
            }
            (true, false) => l,
            (false, true) => u,
            (false, false) => v,
        }
    }

    fn compute_xb(&mut self) {
        let mut rhs = std::mem::take(&mut self.work);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n + self.m {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                self.scatter_column(j, -self.x[j], &mut rhs);
            }
        }
        let mut xb = vec![0.0; self.m];
        self.lu.ftran(&mut rhs, &mut xb);
        for p in 0..self.m {
            self.x[self.head[p]] = xb[p];
        }
        self.work = rhs;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        if self.x[j] < self.lo[j] - tol(self.lo[j]) {
            -1.0
        } else if self.x[j] > self.up[j] + tol(self.up[j]) {
            1.0
        } else {
            0.0
        }
    }

    /// Sets basic costs for the current phase; returns the number of
    /// infeasible basic variables.
    fn set_costs(&mut self) -> usize {
        let mut count = 0;
        for p in 0..self.m {
            let j = self.head[p];
            let s = self.infeasibility(j);
            if s != 0.0 {
                count += 1;
            }
            self.cb[p] = if self.phase1 { s } else { self.cost[j] };
        }
        count
    }

    fn phase_cost(&self, j: usize) -> f64 {
        if self.phase1 {
            0.0
        } else {
            self.cost[j]
        }
    }

    fn compute_duals(&mut self) {
        let mut c = self.cb.clone();
        let mut y = vec![0.0; self.m];
        self.lu.btran(&mut c, &mut y);
        for j in 0..self.n + self.m {
            self.d[j] = if self.pos[j] == NONBASIC { self.phase_cost(j) - self.dot_column(j, &y) } else { 0.0 };
        }
        for &j in &self.cand {
            self.cand_pos[j] = NONBASIC;
        }
        self.cand.clear();
        for j in 0..self.n + self.m {
            self.refresh(j);
        }
    }

    /// Refactorises and recomputes primal values, costs and reduced costs.
    /// Returns the number of infeasible basic variables.
    fn rebuild(&mut self) -> usize {
        self.refactor();
        self.compute_xb();
        let mut count = self.set_costs();
        if self.phase1 && count == 0 {
            self.phase1 = false;
            count = self.set_costs();
        } else if !self.phase1 && count > 0 {
            self.phase1 = true;
            count = self.set_costs();
        }
        self.compute_duals();
        count
    }

    fn attractive(&self, j: usize) -> bool {
        if self.pos[j] != NONBASIC || self.lo[j] == self.up[j] {
            return false;
        }
        let dtol = if self.phase1 { DUAL_TOL } else { self.dtol };
        let dj = self.d[j];
        (dj < -dtol && self.x[j] < self.up[j]) || (dj > dtol && self.x[j] > self.lo[j])
    }

    /// Brings the membership of `j` in the candidate list up to date.
    fn refresh(&mut self, j: usize) {
        let inside = self.cand_pos[j] != NONBASIC;
        if self.attractive(j) {
            if !inside {
                self.cand_pos[j] = self.cand.len();
                self.cand.push(j);
            }
        } else if inside {
            let k = self.cand_pos[j];
            self.cand.swap_remove(k);
            if k < self.cand.len() {
                self.cand_pos[self.cand[k]] = k;
            }
            self.cand_pos[j] = NONBASIC;
        }
    }

    fn price(&self, bland: bool) -> Option<usize> {
        if bland {
            return self.cand.iter().copied().min();
        }
        let mut best: Option<(f64, usize)> = None;
        for &j in &self.cand {
            let dj = self.d[j];
            let score = match self.pricing {
                Pricing::Dantzig => dj.abs(),
                Pricing::Devex => dj * dj / self.weights[j],
            };
            let take = match best {
                None => true,
                Some((bs, bj)) => score > bs || (score == bs && j < bj),
            };
            if take {
                best = Some((score, j));
            }
        }
        best.map(|(_, j)| j)
    }

    /// Bound that basic variable `j` runs into when moving with rate `delta`.
    fn target(&self, j: usize, delta: f64) -> Option<f64> {
        let (l, u, v) = (self.lo[j], self.up[j], self.x[j]);
        if delta < 0.0 {
            if v > u + tol(u) {
                Some(u)
            } else if v < l - tol(l) || !l.is_finite() {
                None
            } else {
                Some(l)
            }
        } else if v < l - tol(l) {
            Some(l)
        } else if v > u + tol(u) || !u.is_finite() {
            None
        } else {
            Some(u)
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Option<Ratio> {
        let range = self.up[q] - self.lo[q];
        if bland {
            let mut best: Option<(f64, usize, usize, f64)> = None;
            for &p in &self.alpha_nz {
                let a = self.alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.head[p];
                let delta = -dir * a;
                let Some(t) = self.target(j, delta) else { continue };
                let ratio = ((self.x[j] - t) / -delta).max(0.0);
                let take = match best {
                    None => true,
                    Some((r, bj, _, _)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && j < bj),
                };
                if take {
                    best = Some((ratio, j, p, t));
                }
            }
            return match best {
                Some((r, _, p, t)) if !(range <= r) => Some(Ratio { theta: r, leave: Some((p, t)) }),
                _ if range.is_finite() => Some(Ratio { theta: range, leave: None }),
                _ => None,
            };
        }

        let mut theta_max = f64::INFINITY;
        for &p in &self.alpha_nz {
            let a = self.alpha[p];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let j = self.head[p];
            let delta = -dir * a;
            if let Some(t) = self.target(j, delta) {
                let relaxed = ((self.x[j] - t) / -delta + tol(t) / delta.abs()).max(0.0);
                theta_max = theta_max.min(relaxed);
            }
        }
        if range.is_finite() && range <= theta_max {
            return Some(Ratio { theta: range, leave: None });
        }
        if theta_max == f64::INFINITY {
            return None;
        }
        let mut best: Option<(f64, usize, usize, f64, f64)> = None;
        for &p in &self.alpha_nz {
            let a = self.alpha[p];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let j = self.head[p];
            let delta = -dir * a;
            let Some(t) = self.target(j, delta) else { continue };
            let ratio = ((self.x[j] - t) / -delta).max(0.0);
            if ratio > theta_max {
                continue;
            }
            let take = match best {
                None => true,
                Some((ba, bj, _, _, _)) => a.abs() > ba || (a.abs() == ba && j < bj),
            };
            if take {
                best = Some((a.abs(), j, p, t, ratio));
            }
        }
        best.map(|(_, _, p, t, r)| Ratio { theta: r, leave: Some((p, t)) })
    }

    fn pivot_row(&mut self, r: usize) {
        for &i in &self.rho_nz {
            self.rho[i] = 0.0;
        }
        self.unit[r] = 1.0;
        let mut rho = std::mem::take(&mut self.rho);
        let mut rho_nz = std::mem::take(&mut self.rho_nz);
        self.lu.btran_sparse(&mut self.unit, &[r], &mut rho, &mut rho_nz);
        for &j in &self.touched {
            self.row_alpha[j] = 0.0;
        }
        self.touched.clear();
        for &i in &rho_nz {
            let ri = rho[i];
            if ri.abs() <= RHO_DROP {
                continue;
            }
            let logical = self.n + i;
            if self.pos[logical] == NONBASIC {
                if self.row_alpha[logical] == 0.0 {
                    self.touched.push(logical);
                }
                self.row_alpha[logical] -= ri;
            }
            for t in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_col[t];
                if self.pos[j] == NONBASIC {
                    if self.row_alpha[j] == 0.0 {
                        self.touched.push(j);
                    }
                    self.row_alpha[j] += ri * self.row_val[t];
                }
            }
        }
        self.rho = rho;
        self.rho_nz = rho_nz;
    }

    fn phase1_changed(&self) -> bool {
        self.alpha_nz.iter().any(|&p| self.infeasibility(self.head[p]) != self.cb[p])
    }

    fn run(&mut self) -> Status {
        let mut infeasible = self.rebuild();
        let mut fresh = true;
        let mut verifications = 0;
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Status::IterationLimit;
            }
            if self.lu.num_etas() >= self.refactor_interval {
                infeasible = self.rebuild();
                fresh = true;
            }
            let bland = degenerate >= self.degenerate_limit;
            let Some(q) = self.price(bland) else {
                if !fresh && verifications < MAX_VERIFY {
                    verifications += 1;
                    infeasible = self.rebuild();
                    fresh = true;
                    continue;
                }
                return if self.phase1 && infeasible > 0 { Status::Infeasible } else { Status::Optimal };
            };
            fresh = false;

            for &p in &self.alpha_nz {
                self.alpha[p] = 0.0;
            }
            let mut col = std::mem::take(&mut self.work);
            self.scatter_column(q, 1.0, &mut col);
            self.col_nz.clear();
            if q < self.n {
                self.col_nz.extend_from_slice(&self.col_row[self.col_start[q]..self.col_start[q + 1]]);
            } else {
                self.col_nz.push(q - self.n);
            }
            self.lu.ftran_sparse(&mut col, &self.col_nz, &mut self.alpha, &mut self.alpha_nz);
            self.work = col;

            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
            let Some(ratio) = self.ratio_test(q, dir, bland) else {
                if self.phase1 {
                    // A phase-1 direction always has a breakpoint; recompute and retry.
                    self.d[q] = 0.0;
                    self.refresh(q);
                    continue;
                }
                return Status::Unbounded;
            };
            let step = dir * ratio.theta;
            if step != 0.0 {
                self.x[q] += step;
                for &p in &self.alpha_nz {
                    let a = self.alpha[p];
                    if a != 0.0 {
                        self.x[self.head[p]] -= step * a;
                    }
                }
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            self.iterations += 1;

            match ratio.leave {
                None => {
                    self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                    self.refresh(q);
                }
                Some((r, bound)) => {
                    let leaving = self.head[r];
                    self.x[leaving] = bound;
                    let arq = self.alpha[r];
                    self.pivot_row(r);
                    let sigma = if self.phase1 { self.cb[r] } else { 0.0 };
                    let dq = self.d[q] + sigma * arq;
                    let theta_d = dq / arq;
                    let shift = sigma - theta_d;
                    let wq = self.weights[q];
                    for &j in &self.touched {
                        if j == q {
                            continue;
                        }
                        let raj = self.row_alpha[j];
                        self.d[j] += shift * raj;
                        if self.pricing == Pricing::Devex {
                            let ratio = raj / arq;
                            self.weights[j] = self.weights[j].max(ratio * ratio * wq);
                        }
                    }
                    self.d[q] = 0.0;
                    self.d[leaving] = -theta_d;
                    self.weights[leaving] = (wq / (arq * arq)).max(1.0);
                    self.head[r] = q;
                    self.pos[q] = r;
                    self.pos[leaving] = NONBASIC;
                    self.cb[r] = self.phase_cost(q);
                    for k in 0..self.touched.len() {
                        let j = self.touched[k];
                        self.refresh(j);
                    }
                    self.refresh(q);
                    self.refresh(leaving);
                    self.lu.push_eta(r, &self.alpha, &self.alpha_nz);
                }
            }

            if self.phase1 && self.phase1_changed() {
                infeasible = self.set_costs();
                if infeasible == 0 {
                    self.phase1 = false;
                    self.set_costs();
                }
                self.compute_duals();
            }
        }
    }
}
