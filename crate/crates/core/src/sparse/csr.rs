use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("triplet ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Rows below this count never use the thread pool for products.
const PARALLEL_ROW_THRESHOLD: usize = 4096;

static MATVEC_THREADS: AtomicUsize = AtomicUsize::new(1);

/// Sets how many threads matrix-vector products may use. `1` (the default)
/// keeps every product on the calling thread.
///
/// Each output row is always accumulated sequentially, so results do not
/// depend on this setting.
pub fn set_matvec_threads(threads: usize) {
    MATVEC_THREADS.store(threads.max(1), Ordering::Relaxed);
}

pub fn matvec_threads() -> usize {
    MATVEC_THREADS.load(Ordering::Relaxed)
}

/// Compressed-row real matrix. Column indices are strictly increasing within
/// each row; explicitly stored zeros are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// in the order they appear after a stable sort by position, which makes
    /// the result independent of hashing or threading.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for &(i, j, _) in triplets {
            if i >= rows || j >= cols {
                return Err(SparseError::IndexOutOfRange {
                    row: i,
                    col: j,
                    rows,
                    cols,
                });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *data.last_mut().expect("entry exists") += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            data,
        })
    }

    /// Assembles from raw CSR arrays; rows must already be sorted and free of
    /// duplicate columns.
    pub(crate) fn from_raw(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(indptr.len(), rows + 1);
        debug_assert!((0..rows).all(|i| {
            indices[indptr[i]..indptr[i + 1]]
                .windows(2)
                .all(|w| w[0] < w[1])
        }));
        Self {
            rows,
            cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Iterates `(col, value)` over the stored entries of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[row]..self.indptr[row + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.data[range].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.indptr[row]..self.indptr[row + 1];
        match self.indices[range.clone()].binary_search(&col) {
            Ok(k) => self.data[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn row_dot(&self, row: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in self.indptr[row]..self.indptr[row + 1] {
            acc += self.data[k] * x[self.indices[k]];
        }
        acc
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec: x has wrong length");
        assert_eq!(y.len(), self.rows, "matvec: y has wrong length");
        if matvec_threads() > 1 && self.rows >= PARALLEL_ROW_THRESHOLD {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    /// `y = Aᵀ x`.
    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                let slot = next[j];
                indices[slot] = i;
                data[slot] = v;
                next[j] += 1;
            }
        }
        Self::from_raw(self.cols, self.rows, counts, indices, data)
    }

    /// Returns `alpha * self + beta * other`; both must have equal shape.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self, SparseError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SparseError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut data = Vec::with_capacity(self.nnz() + other.nnz());
        indptr.push(0);
        for i in 0..self.rows {
            let (mut a, a_end) = (self.indptr[i], self.indptr[i + 1]);
            let (mut b, b_end) = (other.indptr[i], other.indptr[i + 1]);
            while a < a_end || b < b_end {
                let ja = if a < a_end { self.indices[a] } else { usize::MAX };
                let jb = if b < b_end { other.indices[b] } else { usize::MAX };
                if ja == jb {
                    indices.push(ja);
                    data.push(alpha * self.data[a] + beta * other.data[b]);
                    a += 1;
                    b += 1;
                } else if ja < jb {
                    indices.push(ja);
                    data.push(alpha * self.data[a]);
                    a += 1;
                } else {
                    indices.push(jb);
                    data.push(beta * other.data[b]);
                    b += 1;
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self::from_raw(self.rows, self.cols, indptr, indices, data))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `max |A - Aᵀ|` over all entries.
    pub fn symmetry_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        match self.linear_combination(1.0, &t, -1.0) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// True when `max |A - Aᵀ| <= rel_tol * max |A|`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.symmetry_defect() <= rel_tol * self.max_abs()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        dense
    }

    /// MatrixMarket coordinate format, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::new();
        out.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.rows, self.cols, self.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                let _ = writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v);
            }
        }
        out
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut file = io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(self.to_matrix_market().as_bytes())?;
        file.flush()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_triplets_are_summed() {
        let a = CsrMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.to_dense(), vec![vec![3.0]]);
    }

    #[test]
    fn empty_triplets_give_zero_matrix() {
        let a = CsrMatrix::from_triplets(3, 3, &[]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.matvec(&[1.0, 2.0, 3.0]), vec![0.0; 3]);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        let err = CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, SparseError::IndexOutOfRange { row: 2, .. }));
    }

    #[test]
    fn reference_triangle_stiffness_from_triplets() {
        // gradients of the hat functions on (0,0),(1,0),(0,1)
        let grads = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let area = 0.5;
        let mut triplets = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let g: [f64; 2] = grads[i];
                let h: [f64; 2] = grads[j];
                triplets.push((i, j, area * (g[0] * h[0] + g[1] * h[1])));
            }
        }
        let a = CsrMatrix::from_triplets(3, 3, &triplets).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn transpose_and_symmetry_defect() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.0), (1, 0, 3.0), (1, 1, 1.0)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(0, 1), 3.0);
        assert_eq!(t.get(1, 0), 2.0);
        assert_eq!(a.symmetry_defect(), 1.0);
        assert!(CsrMatrix::identity(4).is_symmetric(1e-12));
    }

    #[test]
    fn matrix_market_header() {
        let a = CsrMatrix::identity(2);
        let text = a.to_matrix_market();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n"));
    }
}
