//! Sparse LU factorisation of a simplex basis.
//!
//! Right-looking elimination with Markowitz pivot selection and a threshold
//! test. Basis changes between refactorisations are kept as product-form
//! eta columns. Rows of the basis are indexed by constraint; columns are
//! indexed by basis position.

const ABS_PIVOT_TOL: f64 = 1e-11;
const REL_PIVOT_TOL: f64 = 0.1;
const DROP_TOL: f64 = 1e-14;
const SEARCH_CANDIDATES: usize = 4;

/// Rows and basis positions left without a pivot.
#[derive(Debug)]
pub(crate) struct Singular {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Debug, Default)]
pub(crate) struct LuFactors {
    m: usize,
    l_pivot: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,

    u_prow: Vec<usize>,
    u_pcol: Vec<usize>,
    u_diag: Vec<f64>,
    ur_start: Vec<usize>,
    ur_idx: Vec<usize>,
    ur_val: Vec<f64>,
    uc_start: Vec<usize>,
    uc_step: Vec<usize>,
    uc_val: Vec<f64>,

    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,

    step_of_row: Vec<usize>,
    step_of_pos: Vec<usize>,
    lt_start: Vec<usize>,
    lt_step: Vec<usize>,
    lt_val: Vec<f64>,
    scratch: Scratch,
}

impl LuFactors {
    pub(crate) fn num_etas(&self) -> usize {
        self.eta_pos.len()
    }

    fn l_step(&self, k: usize, b: &mut [f64]) {
        let bp = b[self.l_pivot[k]];
        if bp != 0.0 {
            for t in self.l_start[k]..self.l_start[k + 1] {
                b[self.l_idx[t]] -= self.l_val[t] * bp;
            }
        }
    }

    fn u_step(&self, k: usize, b: &mut [f64], x: &mut [f64]) {
        let p = self.u_prow[k];
        let q = self.u_pcol[k];
        let xq = b[p] / self.u_diag[k];
        b[p] = 0.0;
        x[q] = xq;
        if xq != 0.0 {
            for t in self.uc_start[q]..self.uc_start[q + 1] {
                b[self.u_prow[self.uc_step[t]]] -= self.uc_val[t] * xq;
            }
        }
    }

    fn ut_step(&self, k: usize, c: &mut [f64], y: &mut [f64]) {
        let q = self.u_pcol[k];
        let w = c[q] / self.u_diag[k];
        c[q] = 0.0;
        y[self.u_prow[k]] = w;
        if w != 0.0 {
            for t in self.ur_start[k]..self.ur_start[k + 1] {
                c[self.ur_idx[t]] -= self.ur_val[t] * w;
            }
        }
    }

    fn lt_step(&self, s: usize, y: &mut [f64]) {
        let i = self.l_pivot[s];
        let yi = y[i];
        if yi != 0.0 {
            for t in self.lt_start[i]..self.lt_start[i + 1] {
                y[self.l_pivot[self.lt_step[t]]] -= self.lt_val[t] * yi;
            }
        }
    }

    /// Applies the eta file to `x`; `track` receives positions that become
    /// nonzero when given.
    fn eta_forward(&mut self, x: &mut [f64], mut track: Option<&mut Vec<usize>>) {
        for e in 0..self.eta_pos.len() {
            let r = self.eta_pos[e];
            if x[r] == 0.0 {
                continue;
            }
            let xr = x[r] / self.eta_piv[e];
            x[r] = xr;
            for t in self.eta_start[e]..self.eta_start[e + 1] {
                let i = self.eta_idx[t];
                x[i] -= self.eta_val[t] * xr;
                if let Some(nz) = track.as_deref_mut() {
                    if self.scratch.pos_mark[i] != self.scratch.pos_gen {
                        self.scratch.pos_mark[i] = self.scratch.pos_gen;
                        nz.push(i);
                    }
                }
            }
        }
    }

    fn eta_backward(&mut self, c: &mut [f64], mut track: Option<&mut Vec<usize>>) {
        for e in (0..self.eta_pos.len()).rev() {
            let r = self.eta_pos[e];
            let mut s = c[r];
            for t in self.eta_start[e]..self.eta_start[e + 1] {
                s -= self.eta_val[t] * c[self.eta_idx[t]];
            }
            c[r] = s / self.eta_piv[e];
            if let Some(nz) = track.as_deref_mut() {
                if self.scratch.pos_mark[r] != self.scratch.pos_gen {
                    self.scratch.pos_mark[r] = self.scratch.pos_gen;
                    nz.push(r);
                }
            }
        }
    }

    /// Solves `B x = b`. `b` is indexed by row and is clobbered; `x` is
    /// indexed by basis position.
    pub(crate) fn ftran(&mut self, b: &mut [f64], x: &mut [f64]) {
        for k in 0..self.m {
            self.l_step(k, b);
        }
        for k in (0..self.m).rev() {
            self.u_step(k, b, x);
        }
        self.eta_forward(x, None);
    }

    /// Solves `Bᵀ y = c`. `c` is indexed by basis position and is clobbered;
    /// `y` is indexed by row.
    pub(crate) fn btran(&mut self, c: &mut [f64], y: &mut [f64]) {
        self.eta_backward(c, None);
        for k in 0..self.m {
            self.ut_step(k, c, y);
        }
        for s in (0..self.m).rev() {
            self.lt_step(s, y);
        }
    }

    /// `ftran` for a right-hand side whose nonzeros are confined to the rows
    /// `b_nz`. `x` must be zero on entry; `x_nz` receives a superset of its
    /// nonzero positions. Large fill falls back to the dense solve, which
    /// produces the same values.
    pub(crate) fn ftran_sparse(&mut self, b: &mut [f64], b_nz: &[usize], x: &mut [f64], x_nz: &mut Vec<usize>) {
        self.ftran_limited(b, b_nz, x, x_nz, self.m / 8);
    }

    fn ftran_limited(&mut self, b: &mut [f64], b_nz: &[usize], x: &mut [f64], x_nz: &mut Vec<usize>, limit: usize) {
        x_nz.clear();
        let mut sc = std::mem::take(&mut self.scratch);
        if !sc.reach(b_nz.iter().map(|&i| self.step_of_row[i]), limit, |k, out| {
            out.extend(self.l_idx[self.l_start[k]..self.l_start[k + 1]].iter().map(|&i| self.step_of_row[i]));
        }) {
            self.scratch = sc;
            self.ftran(b, x);
            x_nz.extend((0..self.m).filter(|&p| x[p] != 0.0));
            return;
        }
        sc.list.sort_unstable();
        for &k in &sc.list {
            self.l_step(k, b);
        }
        let mut seeds = std::mem::take(&mut sc.seeds);
        std::mem::swap(&mut seeds, &mut sc.list);
        let sparse = sc.reach(seeds.iter().copied(), limit, |k, out| {
            let q = self.u_pcol[k];
            out.extend_from_slice(&self.uc_step[self.uc_start[q]..self.uc_start[q + 1]]);
        });
        sc.seeds = seeds;
        if !sparse {
            self.scratch = sc;
            for k in (0..self.m).rev() {
                self.u_step(k, b, x);
            }
            self.eta_forward(x, None);
            x_nz.extend((0..self.m).filter(|&p| x[p] != 0.0));
            return;
        }
        sc.list.sort_unstable_by(|a, b| b.cmp(a));
        sc.bump_pos();
        for &k in &sc.list {
            self.u_step(k, b, x);
            let q = self.u_pcol[k];
            sc.pos_mark[q] = sc.pos_gen;
            x_nz.push(q);
        }
        self.scratch = sc;
        self.eta_forward(x, Some(x_nz));
    }

    /// `btran` for a right-hand side whose nonzeros are confined to the
    /// positions `c_nz`. `y` must be zero on entry; `y_nz` receives a
    /// superset of its nonzero rows.
    pub(crate) fn btran_sparse(&mut self, c: &mut [f64], c_nz: &[usize], y: &mut [f64], y_nz: &mut Vec<usize>) {
        self.btran_limited(c, c_nz, y, y_nz, self.m / 8);
    }

    fn btran_limited(&mut self, c: &mut [f64], c_nz: &[usize], y: &mut [f64], y_nz: &mut Vec<usize>, limit: usize) {
        y_nz.clear();
        let mut nz = std::mem::take(&mut self.scratch.seeds);
        nz.clear();
        self.scratch.bump_pos();
        for &q in c_nz {
            if self.scratch.pos_mark[q] != self.scratch.pos_gen {
                self.scratch.pos_mark[q] = self.scratch.pos_gen;
                nz.push(q);
            }
        }
        self.eta_backward(c, Some(&mut nz));
        let mut sc = std::mem::take(&mut self.scratch);
        let sparse_u = sc.reach(nz.iter().map(|&q| self.step_of_pos[q]), limit, |k, out| {
            out.extend(self.ur_idx[self.ur_start[k]..self.ur_start[k + 1]].iter().map(|&q| self.step_of_pos[q]));
        });
        let mut sparse_l = false;
        if sparse_u {
            sc.list.sort_unstable();
            for &k in &sc.list {
                self.ut_step(k, c, y);
            }
            std::mem::swap(&mut nz, &mut sc.list);
            sparse_l = sc.reach(nz.iter().copied(), limit, |s, out| {
                let i = self.l_pivot[s];
                out.extend_from_slice(&self.lt_step[self.lt_start[i]..self.lt_start[i + 1]]);
            });
        } else {
            for k in 0..self.m {
                self.ut_step(k, c, y);
            }
        }
        nz.clear();
        sc.seeds = nz;
        if !sparse_l {
            for s in (0..self.m).rev() {
                self.lt_step(s, y);
            }
            self.scratch = sc;
            y_nz.extend((0..self.m).filter(|&i| y[i] != 0.0));
            return;
        }
        sc.list.sort_unstable_by(|a, b| b.cmp(a));
        for &s in &sc.list {
            self.lt_step(s, y);
            y_nz.push(self.l_pivot[s]);
        }
        self.scratch = sc;
    }

    /// Records the replacement of basis position `r` by a column whose
    /// `ftran` image is `alpha` (dense, by position) with nonzeros among `nz`.
    pub(crate) fn push_eta(&mut self, r: usize, alpha: &[f64], nz: &[usize]) {
        self.eta_pos.push(r);
        self.eta_piv.push(alpha[r]);
        for &i in nz {
            let v = alpha[i];
            if i != r && v.abs() > DROP_TOL {
                self.eta_idx.push(i);
                self.eta_val.push(v);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}

#[derive(Debug, Default)]
struct Scratch {
    visit: Vec<u32>,
    gen: u32,
    pos_mark: Vec<u32>,
    pos_gen: u32,
    stack: Vec<usize>,
    buf: Vec<usize>,
    list: Vec<usize>,
    seeds: Vec<usize>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Self { visit: vec![0; m], pos_mark: vec![0; m], ..Default::default() }
    }

    fn bump_pos(&mut self) {
        if self.pos_gen == u32::MAX {
            self.pos_mark.iter_mut().for_each(|v| *v = 0);
            self.pos_gen = 0;
        }
        self.pos_gen += 1;
    }

    /// Collects into `list` every step reachable from `seeds` along `next`.
    /// Gives up and returns false once more than `limit` steps are found.
    fn reach(
        &mut self,
        seeds: impl IntoIterator<Item = usize>,
        limit: usize,
        mut next: impl FnMut(usize, &mut Vec<usize>),
    ) -> bool {
        if self.gen == u32::MAX {
            self.visit.iter_mut().for_each(|v| *v = 0);
            self.gen = 0;
        }
        self.gen += 1;
        let g = self.gen;
        self.list.clear();
        self.stack.clear();
        for k in seeds {
            if self.visit[k] != g {
                self.visit[k] = g;
                self.stack.push(k);
                self.list.push(k);
            }
        }
        while let Some(k) = self.stack.pop() {
            if self.list.len() > limit {
                return false;
            }
            self.buf.clear();
            next(k, &mut self.buf);
            for &s in &self.buf {
                if self.visit[s] != g {
                    self.visit[s] = g;
                    self.stack.push(s);
                    self.list.push(s);
                }
            }
        }
        self.list.len() <= limit
    }
}

#[derive(Default)]
struct Buckets {
    lists: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(max: usize) -> Self {
        Self { lists: vec![Vec::new(); max + 1] }
    }

    fn push(&mut self, count: usize, item: usize) {
        let c = count.min(self.lists.len() - 1);
        self.lists[c].push(item);
    }
}

/// Factorises the `m × m` matrix whose columns (by basis position) are given
/// as `(row, value)` lists.
pub(crate) fn factorize(m: usize, mut cols: Vec<Vec<(usize, f64)>>) -> Result<LuFactors, Singular> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, col) in cols.iter_mut().enumerate() {
        col.retain(|e| e.1 != 0.0);
        for &(i, _) in col.iter() {
            rows[i].push(j);
        }
    }
    let mut row_cnt: Vec<usize> = rows.iter().map(Vec::len).collect();
    let mut col_active = vec![true; m];
    let mut row_active = vec![true; m];
    let mut col_buckets = Buckets::new(m);
    let mut row_buckets = Buckets::new(m);
    for j in 0..m {
        col_buckets.push(cols[j].len(), j);
    }
    for i in 0..m {
        row_buckets.push(row_cnt[i], i);
    }

    let mut f = LuFactors { m, l_start: vec![0], ur_start: vec![0], eta_start: vec![0], ..Default::default() };
    let mut mark = vec![usize::MAX; m];

    for _ in 0..m {
        let Some((p, q)) = find_pivot(&cols, &rows, &row_cnt, &col_active, &row_active, &mut col_buckets, &mut row_buckets)
        else {
            return Err(Singular {
                rows: (0..m).filter(|&i| row_active[i]).collect(),
                cols: (0..m).filter(|&j| col_active[j]).collect(),
            });
        };

        let piv = cols[q].iter().find(|e| e.0 == p).map(|e| e.1).expect("pivot entry present");
        let l_begin = f.l_idx.len();
        for &(i, v) in &cols[q] {
            if i != p {
                f.l_idx.push(i);
                f.l_val.push(v / piv);
                row_cnt[i] -= 1;
            }
        }
        f.l_pivot.push(p);
        f.l_start.push(f.l_idx.len());
        col_active[q] = false;
        row_active[p] = false;
        cols[q] = Vec::new();

        f.u_prow.push(p);
        f.u_pcol.push(q);
        f.u_diag.push(piv);
        let prow = std::mem::take(&mut rows[p]);
        for &j in &prow {
            if !col_active[j] {
                continue;
            }
            let col = &mut cols[j];
            let Some(k) = col.iter().position(|e| e.0 == p) else { continue };
            let (_, u) = col.swap_remove(k);
            f.ur_idx.push(j);
            f.ur_val.push(u);
            if f.l_idx.len() > l_begin {
                for (idx, &(i, _)) in col.iter().enumerate() {
                    mark[i] = idx;
                }
                for t in l_begin..f.l_idx.len() {
                    let i = f.l_idx[t];
                    let delta = f.l_val[t] * u;
                    if mark[i] != usize::MAX {
                        col[mark[i]].1 -= delta;
                    } else {
                        mark[i] = col.len();
                        col.push((i, -delta));
                        rows[i].push(j);
                        row_cnt[i] += 1;
                    }
                }
                for &(i, _) in col.iter() {
                    mark[i] = usize::MAX;
                }
            }
            col_buckets.push(col.len(), j);
        }
        f.ur_start.push(f.ur_idx.len());
        for t in l_begin..f.l_idx.len() {
            let i = f.l_idx[t];
            row_buckets.push(row_cnt[i], i);
        }
    }

    // Column-wise copy of U for forward solves.
    let mut counts = vec![0usize; m + 1];
    for &j in &f.ur_idx {
        counts[j + 1] += 1;
    }
    for j in 0..m {
        counts[j + 1] += counts[j];
    }
    f.uc_start = counts.clone();
    f.uc_step = vec![0; f.ur_idx.len()];
    f.uc_val = vec![0.0; f.ur_idx.len()];
    let mut next = counts;
    for k in 0..m {
        for t in f.ur_start[k]..f.ur_start[k + 1] {
            let j = f.ur_idx[t];
            let slot = next[j];
            next[j] += 1;
            f.uc_step[slot] = k;
            f.uc_val[slot] = f.ur_val[t];
        }
    }

    // Row-wise copy of L for sparse transposed solves.
    f.step_of_row = vec![0; m];
    f.step_of_pos = vec![0; m];
    for k in 0..m {
        f.step_of_row[f.u_prow[k]] = k;
        f.step_of_pos[f.u_pcol[k]] = k;
    }
    let mut counts = vec![0usize; m + 1];
    for &i in &f.l_idx {
        counts[i + 1] += 1;
    }
    for i in 0..m {
        counts[i + 1] += counts[i];
    }
    f.lt_start = counts.clone();
    f.lt_step = vec![0; f.l_idx.len()];
    f.lt_val = vec![0.0; f.l_idx.len()];
    let mut next = counts;
    for k in 0..m {
        for t in f.l_start[k]..f.l_start[k + 1] {
            let i = f.l_idx[t];
            f.lt_step[next[i]] = k;
            f.lt_val[next[i]] = f.l_val[t];
            next[i] += 1;
        }
    }
    f.scratch = Scratch::new(m);
    Ok(f)
}

fn column_max(col: &[(usize, f64)]) -> f64 {
    col.iter().fold(0.0, |acc, e| acc.max(e.1.abs()))
}

#[allow(clippy::too_many_arguments)]
fn find_pivot(
    cols: &[Vec<(usize, f64)>],
    rows: &[Vec<usize>],
    row_cnt: &[usize],
    col_active: &[bool],
    row_active: &[bool],
    col_buckets: &mut Buckets,
    row_buckets: &mut Buckets,
) -> Option<(usize, usize)> {
    // (cost, -|value|, row, col) ordered lexicographically.
    let mut best: Option<(usize, f64, usize, usize)> = None;
    let mut examined = 0usize;
    let better = |best: &Option<(usize, f64, usize, usize)>, cand: (usize, f64, usize, usize)| match best {
        None => true,
        Some(b) => (cand.0, -cand.1, cand.3, cand.2) < (b.0, -b.1, b.3, b.2),
    };
    let max_count = col_buckets.lists.len();
    for c in 1..max_count {
        let list = &mut col_buckets.lists[c];
        let mut idx = 0;
        while idx < list.len() {
            let j = list[idx];
            if !col_active[j] || cols[j].len() != c {
                list.swap_remove(idx);
                continue;
            }
            idx += 1;
            let cmax = column_max(&cols[j]);
            if cmax < ABS_PIVOT_TOL {
                continue;
            }
            for &(i, v) in &cols[j] {
                if v.abs() >= REL_PIVOT_TOL * cmax && v.abs() >= ABS_PIVOT_TOL {
                    let cand = ((row_cnt[i] - 1) * (c - 1), v.abs(), i, j);
                    if better(&best, cand) {
                        best = Some(cand);
                    }
                }
            }
            examined += 1;
            if let Some(b) = best {
                if b.0 == 0 || examined >= SEARCH_CANDIDATES {
                    return Some((b.2, b.3));
                }
            }
        }
        let list = &mut row_buckets.lists[c];
        let mut idx = 0;
        while idx < list.len() {
            let i = list[idx];
            if !row_active[i] || row_cnt[i] != c {
                list.swap_remove(idx);
                continue;
            }
            idx += 1;
            for &j in &rows[i] {
                if !col_active[j] {
                    continue;
                }
                let Some(v) = cols[j].iter().find(|e| e.0 == i).map(|e| e.1) else { continue };
                let cmax = column_max(&cols[j]);
                if v.abs() >= REL_PIVOT_TOL * cmax && v.abs() >= ABS_PIVOT_TOL {
                    let cand = ((c - 1) * (cols[j].len() - 1), v.abs(), i, j);
                    if better(&best, cand) {
                        best = Some(cand);
                    }
                }
            }
            examined += 1;
            if let Some(b) = best {
                if b.0 == 0 || examined >= SEARCH_CANDIDATES {
                    return Some((b.2, b.3));
                }
            }
        }
    }
    best.map(|b| (b.2, b.3))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m).map(|j| (0..m).filter(|&i| a[i][j] != 0.0).map(|i| (i, a[i][j])).collect()).collect()
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m).map(|j| (0..m).map(|i| a[i][j] * y[i]).sum()).collect()
    }

    fn sample() -> Vec<Vec<f64>> {
        vec![
            vec![4.0, 0.0, 1.0, 0.0, 2.0],
            vec![0.0, 3.0, 0.0, 1.0, 0.0],
            vec![1.0, 0.0, 5.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 6.0, 1.0],
            vec![0.5, 0.0, 0.0, 1.0, 7.0],
        ]
    }

    #[test]
    fn solves_and_transposed_solves_match_dense() {
        let a = sample();
        let mut lu = factorize(5, dense_to_cols(&a)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let mut work = b.clone();
        let mut x = vec![0.0; 5];
        lu.ftran(&mut work, &mut x);
        for (got, want) in matvec(&a, &x).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut c = b.clone();
        let mut y = vec![0.0; 5];
        lu.btran(&mut c, &mut y);
        for (got, want) in mat_t_vec(&a, &y).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_tracks_column_replacement() {
        let mut a = sample();
        let mut lu = factorize(5, dense_to_cols(&a)).unwrap();
        let newcol = [1.0, 1.0, 0.0, -2.0, 3.0];
        let mut work = newcol.to_vec();
        let mut alpha = vec![0.0; 5];
        lu.ftran(&mut work, &mut alpha);
        lu.push_eta(2, &alpha, &[0, 1, 2, 3, 4]);
        for i in 0..5 {
            a[i][2] = newcol[i];
        }
        let b = vec![2.0, 0.0, -1.0, 1.0, 1.0];
        let mut work = b.clone();
        let mut x = vec![0.0; 5];
        lu.ftran(&mut work, &mut x);
        for (got, want) in matvec(&a, &x).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut c = b.clone();
        let mut y = vec![0.0; 5];
        lu.btran(&mut c, &mut y);
        for (got, want) in mat_t_vec(&a, &y).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    /// Banded matrix with a few long-range entries, like a chain of hours.
    fn banded(m: usize) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            a[i][i] = 2.0 + (i % 3) as f64;
            if i + 1 < m {
                a[i + 1][i] = -1.0;
            }
            if i % 7 == 0 && i + 5 < m {
                a[i][i + 5] = 0.5;
            }
        }
        a
    }

    #[test]
    fn sparse_solves_reproduce_dense_solves() {
        let m = 60;
        let mut a = banded(m);
        let mut lu = factorize(m, dense_to_cols(&a)).unwrap();
        let all: Vec<usize> = (0..m).collect();
        for (r, seed) in [(10usize, 3usize), (41, 9), (3, 17)] {
            let newcol: Vec<f64> = (0..m).map(|i| if i == r || i == (r + seed) % m { 1.5 } else { 0.0 }).collect();
            let mut work = newcol.clone();
            let mut alpha = vec![0.0; m];
            lu.ftran(&mut work, &mut alpha);
            lu.push_eta(r, &alpha, &all);
            for i in 0..m {
                a[i][r] = newcol[i];
            }
        }
        for probe in [0usize, 17, 33, 59] {
            let mut b = vec![0.0; m];
            b[probe] = 1.0;
            let (mut dense_x, mut sparse_x) = (vec![0.0; m], vec![0.0; m]);
            lu.ftran(&mut b.clone(), &mut dense_x);
            let mut nz = Vec::new();
            lu.ftran_limited(&mut b.clone(), &[probe], &mut sparse_x, &mut nz, usize::MAX);
            assert_eq!(dense_x, sparse_x);
            assert!((0..m).all(|p| sparse_x[p] == 0.0 || nz.contains(&p)));
            for (got, want) in matvec(&a, &sparse_x).iter().zip(&b) {
                assert!((got - want).abs() < 1e-12);
            }

            let (mut dense_y, mut sparse_y) = (vec![0.0; m], vec![0.0; m]);
            lu.btran(&mut b.clone(), &mut dense_y);
            lu.btran_limited(&mut b.clone(), &[probe], &mut sparse_y, &mut nz, usize::MAX);
            assert_eq!(dense_y, sparse_y);
            assert!((0..m).all(|i| sparse_y[i] == 0.0 || nz.contains(&i)));
            for (got, want) in mat_t_vec(&a, &sparse_y).iter().zip(&b) {
                assert!((got - want).abs() < 1e-12);
            }
            // A tiny limit forces the fallback part way through.
            let mut fallback = vec![0.0; m];
            lu.ftran_limited(&mut b.clone(), &[probe], &mut fallback, &mut nz, 2);
            assert_eq!(dense_x, fallback);
            let mut fallback = vec![0.0; m];
            lu.btran_limited(&mut b.clone(), &[probe], &mut fallback, &mut nz, 2);
            assert_eq!(dense_y, fallback);
        }
    }

    #[test]
    fn singular_matrix_reports_unpivoted_parts() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]];
        let err = factorize(3, dense_to_cols(&a)).unwrap_err();
        assert_eq!(err.rows.len(), 1);
        assert_eq!(err.cols.len(), 1);
    }
}
