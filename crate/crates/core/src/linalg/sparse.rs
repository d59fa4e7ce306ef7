use alloc::vec;
use alloc::vec::Vec;

/// Unsorted triplet accumulator for a square sparse matrix. Duplicate
/// entries add up when converted to CSR.
#[derive(Clone, Debug)]
pub struct Triplets {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl Triplets {
    /// Empty accumulator for an `dim x dim` matrix.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Append one entry.
    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row as u32, col as u32, value));
    }

    /// All raw entries in insertion order.
    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// Reserve capacity for `n` additional entries.
    pub fn reserve(&mut self, n: usize) {
        self.entries.reserve(n);
    }
}

/// Compressed sparse row matrix with sorted, duplicate-free columns per row.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Compress triplets: duplicates are summed, columns sorted per row.
    pub fn from_triplets(t: &Triplets) -> Self {
        let dim = t.dim;
        let mut counts = vec![0usize; dim + 1];
        for &(r, _, _) in &t.entries {
            counts[r as usize + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0u32; t.entries.len()];
        let mut vals = vec![0.0f64; t.entries.len()];
        let mut fill = counts.clone();
        for &(r, c, v) in &t.entries {
            let p = fill[r as usize];
            cols[p] = c;
            vals[p] = v;
            fill[r as usize] += 1;
        }
        // sort within each row and merge duplicates
        let mut row_ptr = vec![0usize; dim + 1];
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        let mut scratch: Vec<(u32, f64)> = Vec::new();
        for r in 0..dim {
            scratch.clear();
            for p in counts[r]..counts[r + 1] {
                scratch.push((cols[p], vals[p]));
            }
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < scratch.len() {
                let c = scratch[i].0;
                let mut s = 0.0;
                while i < scratch.len() && scratch[i].0 == c {
                    s += scratch[i].1;
                    i += 1;
                }
                out_cols.push(c);
                out_vals.push(s);
            }
            row_ptr[r + 1] = out_cols.len();
        }
        Self {
            dim,
            row_ptr,
            col_idx: out_cols,
            values: out_vals,
        }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices of row `r`.
    pub fn row_cols(&self, r: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Values of row `r`.
    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Mutable values of row `r`.
    pub fn row_values_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Value at `(r, c)`, zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let cols = self.row_cols(r);
        match cols.binary_search(&(c as u32)) {
            Ok(p) => self.row_values(r)[p],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for r in 0..self.dim {
            let mut s = 0.0;
            for (c, v) in self.row_cols(r).iter().zip(self.row_values(r)) {
                s += v * x[*c as usize];
            }
            y[r] = s;
        }
        y
    }

    /// Largest absolute diagonal entry.
    pub fn max_abs_diag(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.dim {
            let d = self.get(r, r);
            if d.abs() > m {
                m = d.abs();
            }
        }
        m
    }

    /// Maximum relative asymmetry `|a_ij - a_ji| / scale`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs_diag().max(1e-300);
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for (c, v) in self.row_cols(r).iter().zip(self.row_values(r)) {
                let d = (v - self.get(*c as usize, r)).abs() / scale;
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}
