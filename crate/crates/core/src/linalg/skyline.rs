use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

use super::sparse::CsrMatrix;

/// Failure of the sparse symmetric factorisation.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    /// Non-positive pivot encountered; the system is singular or indefinite.
    /// Carries the (unpermuted) equation index, which usually points at a
    /// zero-energy mode or a missing boundary condition.
    NotPositiveDefinite {
        /// Equation index in the caller's numbering.
        equation: usize,
    },
    /// Right-hand side length does not match the matrix dimension.
    DimensionMismatch,
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::NotPositiveDefinite { equation } => write!(
                f,
                "factorization failed at equation {equation}: matrix is not positive definite \
                 (possible zero-energy mode or missing constraint)"
            ),
            SolveError::DimensionMismatch => write!(f, "right-hand side dimension mismatch"),
        }
    }
}

impl core::error::Error for SolveError {}

/// Skyline (envelope) Cholesky factorisation of a sparse SPD matrix,
/// reordered by reverse Cuthill-McKee to compress the envelope.
///
/// Stores the upper factor `U` (with `K = U^T U`) column by column between
/// each column's first nonzero row and the diagonal.
pub struct SkylineCholesky {
    dim: usize,
    perm: Vec<usize>,     // new -> old
    perm_inv: Vec<usize>, // old -> new
    first_row: Vec<usize>,
    col_start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factor a symmetric positive definite matrix given in CSR form.
    /// Only requires the upper or full symmetric pattern; values are read
    /// symmetrically from whatever triangle is present.
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolveError> {
        let n = a.dim();
        let perm = rcm_order(a);
        let mut perm_inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            perm_inv[old] = new;
        }

        // envelope: first nonzero (permuted) row per permuted column
        let mut first_row: Vec<usize> = (0..n).collect();
        for r in 0..n {
            let pr = perm_inv[r];
            for &c in a.row_cols(r) {
                let pc = perm_inv[c as usize];
                let (lo, hi) = if pr < pc { (pr, pc) } else { (pc, pr) };
                if lo < first_row[hi] {
                    first_row[hi] = lo;
                }
            }
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + (j - first_row[j] + 1);
        }
        let mut data = vec![0.0f64; col_start[n]];

        // scatter values into the envelope (upper triangle, permuted)
        for r in 0..n {
            let pr = perm_inv[r];
            for (c, v) in a.row_cols(r).iter().zip(a.row_values(r)) {
                let pc = perm_inv[*c as usize];
                if pr <= pc {
                    let p = col_start[pc] + (pr - first_row[pc]);
                    data[p] = *v;
                }
            }
        }

        // column-wise factorisation
        for j in 0..n {
            let fj = first_row[j];
            for i in fj..j {
                let fi = first_row[i];
                let lo = if fi > fj { fi } else { fj };
                let mut s = data[col_start[j] + (i - fj)];
                if lo < i {
                    let ci = col_start[i] + (lo - fi);
                    let cj = col_start[j] + (lo - fj);
                    let len = i - lo;
                    let (ui, uj) = (&data[ci..ci + len], &data[cj..cj + len]);
                    let mut acc = 0.0;
                    for k in 0..len {
                        acc += ui[k] * uj[k];
                    }
                    s -= acc;
                }
                let dii = data[col_start[i] + (i - fi)];
                data[col_start[j] + (i - fj)] = s / dii;
            }
            let mut s = data[col_start[j] + (j - fj)];
            for k in fj..j {
                let v = data[col_start[j] + (k - fj)];
                s -= v * v;
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(SolveError::NotPositiveDefinite { equation: perm[j] });
            }
            data[col_start[j] + (j - fj)] = fmath::sqrt(s);
        }

        Ok(Self {
            dim: n,
            perm,
            perm_inv,
            first_row,
            col_start,
            data,
        })
    }

    /// Solve `K x = b` using the stored factor.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        if b.len() != self.dim {
            return Err(SolveError::DimensionMismatch);
        }
        let n = self.dim;
        let mut y = vec![0.0f64; n];
        for j in 0..n {
            y[j] = b[self.perm[j]];
        }
        // forward: U^T y = b
        for j in 0..n {
            let fj = self.first_row[j];
            let base = self.col_start[j];
            let mut s = y[j];
            for k in fj..j {
                s -= self.data[base + (k - fj)] * y[k];
            }
            y[j] = s / self.data[base + (j - fj)];
        }
        // backward: U x = y
        for j in (0..n).rev() {
            let fj = self.first_row[j];
            let base = self.col_start[j];
            let xj = y[j] / self.data[base + (j - fj)];
            y[j] = xj;
            for k in fj..j {
                y[k] -= self.data[base + (k - fj)] * xj;
            }
        }
        let mut x = vec![0.0f64; n];
        for j in 0..n {
            x[self.perm[j]] = y[j];
        }
        Ok(x)
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized CSR pattern.
/// Returns the permutation as `new -> old`.
fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    // symmetric adjacency without the diagonal
    let mut deg = vec![0usize; n];
    for r in 0..n {
        for &c in a.row_cols(r) {
            let c = c as usize;
            if c != r {
                deg[r] += 1;
                deg[c] += 1;
            }
        }
    }
    let mut adj_ptr = vec![0usize; n + 1];
    for i in 0..n {
        adj_ptr[i + 1] = adj_ptr[i] + deg[i];
    }
    let mut adj = vec![0u32; adj_ptr[n]];
    let mut fill = adj_ptr.clone();
    for r in 0..n {
        for &c in a.row_cols(r) {
            let c = c as usize;
            if c != r {
                adj[fill[r]] = c as u32;
                fill[r] += 1;
                adj[fill[c]] = r as u32;
                fill[c] += 1;
            }
        }
    }
    // dedup neighbor lists (entries may repeat if both triangles were stored)
    let mut adj_ptr2 = vec![0usize; n + 1];
    let mut adj2: Vec<u32> = Vec::with_capacity(adj.len());
    for r in 0..n {
        let s = &mut adj[adj_ptr[r]..adj_ptr[r + 1]];
        s.sort_unstable();
        let mut prev = u32::MAX;
        for &v in s.iter() {
            if v != prev {
                adj2.push(v);
                prev = v;
            }
        }
        adj_ptr2[r + 1] = adj2.len();
    }
    let degree = |v: usize| adj_ptr2[v + 1] - adj_ptr2[v];

    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut queue: Vec<usize> = Vec::with_capacity(n);
    let mut nbrs: Vec<usize> = Vec::new();

    for start_scan in 0..n {
        if visited[start_scan] {
            continue;
        }
        // pseudo-peripheral start: run BFS twice from the component seed
        let mut start = start_scan;
        for _ in 0..2 {
            let mut level = vec![usize::MAX; n];
            level[start] = 0;
            queue.clear();
            queue.push(start);
            let mut head = 0;
            let mut last = start;
            while head < queue.len() {
                let v = queue[head];
                head += 1;
                last = v;
                for &w in &adj2[adj_ptr2[v]..adj_ptr2[v + 1]] {
                    let w = w as usize;
                    if level[w] == usize::MAX && !visited[w] {
                        level[w] = level[v] + 1;
                        queue.push(w);
                    }
                }
            }
            start = last;
        }
        // Cuthill-McKee BFS with neighbors sorted by degree
        let mark = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = mark;
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            for &w in &adj2[adj_ptr2[v]..adj_ptr2[v + 1]] {
                let w = w as usize;
                if !visited[w] {
                    visited[w] = true;
                    nbrs.push(w);
                }
            }
            nbrs.sort_unstable_by_key(|&w| (degree(w), w));
            order.extend_from_slice(&nbrs);
        }
    }
    order.reverse();
    order
}
