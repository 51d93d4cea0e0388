//! Dense linear algebra over a prime field F_p with small p.
//!
//! Entries are stored as `u32` residues; every product fits in `u64`.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
fn inv_mod(a: u32, p: u32) -> u32 {
    // p is prime, so a^(p-2) is the inverse
    crate::modarith::pow_mod(a as u64, p as u64 - 2, p as u64) as u32
}

/// Row echelon form built one row at a time.
///
/// Pivot rows are normalized (leading entry 1) but not back-reduced.
#[derive(Debug, Clone)]
pub struct Echelon {
    p: u32,
    ncols: usize,
    rows: Vec<Vec<u32>>,
    pivot_of_col: Vec<Option<usize>>,
}

impl Echelon {
    pub fn new(ncols: usize, p: u32) -> Self {
        Echelon {
            p,
            ncols,
            rows: Vec::new(),
            pivot_of_col: vec![None; ncols],
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `row` against the current pivots; returns the reduced row.
    pub fn reduce(&self, mut row: Vec<u32>) -> Vec<u32> {
        self.reduce_in_place(&mut row);
        row
    }

    fn reduce_in_place(&self, row: &mut [u32]) -> Option<usize> {
        let p = self.p as u64;
        for col in 0..self.ncols {
            let c = row[col];
            if c == 0 {
                continue;
            }
            match self.pivot_of_col[col] {
                Some(r) => {
                    let pivot = &self.rows[r];
                    let factor = p - c as u64;
                    for j in col..self.ncols {
                        if pivot[j] != 0 {
                            row[j] = ((row[j] as u64 + factor * pivot[j] as u64) % p) as u32;
                        }
                    }
                }
                None => return Some(col),
            }
        }
        None
    }

    /// Insert a row; returns `true` when it raised the rank.
    pub fn insert(&mut self, mut row: Vec<u32>) -> bool {
        debug_assert_eq!(row.len(), self.ncols);
        for x in row.iter_mut() {
            *x %= self.p;
        }
        match self.reduce_in_place(&mut row) {
            None => false,
            Some(col) => {
                let inv = inv_mod(row[col], self.p) as u64;
                let p = self.p as u64;
                for x in row[col..].iter_mut() {
                    *x = ((*x as u64 * inv) % p) as u32;
                }
                self.pivot_of_col[col] = Some(self.rows.len());
                self.rows.push(row);
                true
            }
        }
    }

    /// Insert a sparse row given as `(column, coefficient)` pairs.
    pub fn insert_sparse(&mut self, entries: &[(usize, i64)]) -> bool {
        let mut row = vec![0u32; self.ncols];
        let p = self.p as i64;
        for &(c, v) in entries {
            row[c] = ((row[c] as i64 + v).rem_euclid(p)) as u32;
        }
        self.insert(row)
    }

    pub fn contains(&self, row: &[u32]) -> bool {
        let mut r: Vec<u32> = row.iter().map(|x| x % self.p).collect();
        self.reduce_in_place(&mut r).is_none()
    }

    /// A basis of the null space `{x : row · x = 0 for every inserted row}`.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let p = self.p as u64;
        let mut pivots: Vec<(usize, usize)> = self
            .pivot_of_col
            .iter()
            .enumerate()
            .filter_map(|(c, r)| r.map(|r| (c, r)))
            .collect();
        pivots.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let mut basis = Vec::new();
        for free in (0..self.ncols).filter(|&c| self.pivot_of_col[c].is_none()) {
            let mut x = vec![0u32; self.ncols];
            x[free] = 1;
            for &(col, r) in &pivots {
                let row = &self.rows[r];
                let mut acc = 0u64;
                for j in col + 1..self.ncols {
                    if row[j] != 0 && x[j] != 0 {
                        acc = (acc + row[j] as u64 * x[j] as u64) % p;
                    }
                }
                x[col] = ((p - acc) % p) as u32;
            }
            basis.push(x);
        }
        basis
    }
}

/// Reduced row echelon form with sparse rows, for systems with many short
/// equations (cocycle identities have four terms each).
///
/// Pivot rows are kept fully reduced, so a new row is reduced in one pass
/// and only ever touches free columns.
#[derive(Debug, Clone)]
pub struct SparseRref {
    p: u32,
    ncols: usize,
    /// sorted `(column, value)`; the pivot entry has value 1
    rows: Vec<Vec<(usize, u32)>>,
    pivot_of_col: Vec<Option<usize>>,
    /// rows that may hold a nonzero in a free column (stale entries allowed)
    occurs: Vec<Vec<usize>>,
    scratch: Vec<u32>,
}

impl SparseRref {
    pub fn new(ncols: usize, p: u32) -> Self {
        SparseRref {
            p,
            ncols,
            rows: Vec::new(),
            pivot_of_col: vec![None; ncols],
            occurs: vec![Vec::new(); ncols],
            scratch: vec![0; ncols],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn reduce(&mut self, entries: &[(usize, i64)]) -> Vec<(usize, u32)> {
        let p = self.p as u64;
        let mut touched: Vec<usize> = Vec::new();
        let add = |scratch: &mut Vec<u32>, touched: &mut Vec<usize>, c: usize, v: u64| {
            if v.is_multiple_of(p) {
                return;
            }
            if scratch[c] == 0 {
                touched.push(c);
            }
            scratch[c] = ((scratch[c] as u64 + v) % p) as u32;
        };
        let mut scratch = core::mem::take(&mut self.scratch);
        for &(c, v) in entries {
            let v = v.rem_euclid(self.p as i64) as u64;
            match self.pivot_of_col[c] {
                None => add(&mut scratch, &mut touched, c, v),
                Some(r) => {
                    // row c = -(rest of pivot row)
                    for &(j, w) in &self.rows[r] {
                        if j != c {
                            add(&mut scratch, &mut touched, j, (p - w as u64) * v % p);
                        }
                    }
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut out = Vec::new();
        for c in touched {
            if scratch[c] != 0 {
                out.push((c, scratch[c]));
                scratch[c] = 0;
            }
        }
        self.scratch = scratch;
        out
    }

    /// Insert a sparse row; returns `true` when it raised the rank.
    pub fn insert(&mut self, entries: &[(usize, i64)]) -> bool {
        let mut row = self.reduce(entries);
        if row.is_empty() {
            return false;
        }
        let p = self.p as u64;
        let (pc, pv) = row[0];
        let inv = inv_mod(pv, self.p) as u64;
        for e in row.iter_mut() {
            e.1 = ((e.1 as u64 * inv) % p) as u32;
        }
        // clear the new pivot column from existing rows
        let holders = core::mem::take(&mut self.occurs[pc]);
        for r in holders {
            let Ok(pos) = self.rows[r].binary_search_by_key(&pc, |e| e.0) else {
                continue;
            };
            let f = p - self.rows[r][pos].1 as u64;
            let merged = axpy(&self.rows[r], &row, f, p);
            for &(j, _) in &merged {
                if j != pc && self.pivot_of_col[j].is_none() && !self.rows[r].iter().any(|e| e.0 == j) {
                    self.occurs[j].push(r);
                }
            }
            self.rows[r] = merged;
        }
        let idx = self.rows.len();
        for &(j, _) in &row[1..] {
            self.occurs[j].push(idx);
        }
        self.pivot_of_col[pc] = Some(idx);
        self.rows.push(row);
        true
    }

    /// A basis of the null space of the inserted rows.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let p = self.p;
        let mut basis = Vec::new();
        for free in (0..self.ncols).filter(|&c| self.pivot_of_col[c].is_none()) {
            let mut x = vec![0u32; self.ncols];
            x[free] = 1;
            for &r in &self.occurs[free] {
                if let Ok(pos) = self.rows[r].binary_search_by_key(&free, |e| e.0) {
                    let pivot = self.rows[r][0].0;
                    x[pivot] = (p - self.rows[r][pos].1) % p;
                }
            }
            basis.push(x);
        }
        basis
    }
}

/// `a + f·b` on sorted sparse rows.
fn axpy(a: &[(usize, u32)], b: &[(usize, u32)], f: u64, p: u64) -> Vec<(usize, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        let (c, v) = if take_a {
            i += 1;
            (a[i - 1].0, a[i - 1].1 as u64)
        } else if take_b {
            j += 1;
            (b[j - 1].0, f * b[j - 1].1 as u64 % p)
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, (a[i - 1].1 as u64 + f * b[j - 1].1 as u64) % p)
        };
        if v != 0 {
            out.push((c, v as u32));
        }
    }
    out
}

/// Rank of a dense matrix over F_p.
pub fn rank(rows: &[Vec<u32>], ncols: usize, p: u32) -> usize {
    let mut e = Echelon::new(ncols, p);
    for r in rows {
        e.insert(r.clone());
    }
    e.rank()
}

/// Null space basis of a dense matrix over F_p.
pub fn kernel(rows: &[Vec<u32>], ncols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut e = Echelon::new(ncols, p);
    for r in rows {
        e.insert(r.clone());
    }
    e.kernel()
}

/// Solve `A x = b` over F_p; `None` when inconsistent.
pub fn solve(rows: &[Vec<u32>], rhs: &[u32], ncols: usize, p: u32) -> Option<Vec<u32>> {
    // augmented system: the last column carries -b so that x with x_last = 1 solves it
    let mut e = Echelon::new(ncols + 1, p);
    for (r, &b) in rows.iter().zip(rhs) {
        let mut row = r.clone();
        row.push((p - b % p) % p);
        e.insert(row);
    }
    if e.pivot_of_col[ncols].is_some() {
        return None;
    }
    // pin x_last = 1, free variables 0, back-substitute
    let pm = p as u64;
    let mut x = vec![0u32; ncols + 1];
    x[ncols] = 1;
    let mut pivots: Vec<(usize, usize)> = e
        .pivot_of_col
        .iter()
        .enumerate()
        .filter_map(|(c, r)| r.map(|r| (c, r)))
        .collect();
    pivots.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    for &(col, r) in &pivots {
        let row = &e.rows[r];
        let mut acc = 0u64;
        for j in col + 1..=ncols {
            acc = (acc + row[j] as u64 * x[j] as u64) % pm;
        }
        x[col] = ((pm - acc) % pm) as u32;
    }
    x.truncate(ncols);
    Some(x)
}
