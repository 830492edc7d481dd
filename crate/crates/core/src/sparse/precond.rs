use super::csr::CsrMatrix;

/// Preconditioner selection for the Krylov solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
    /// Incomplete LU with the sparsity pattern of the matrix.
    Ilu0,
}

pub(crate) enum Applied {
    Identity,
    Jacobi(Vec<f64>),
    Ilu0(Ilu0),
}

impl Applied {
    pub(crate) fn build(kind: Preconditioner, a: &CsrMatrix) -> Self {
        match kind {
            Preconditioner::None => Applied::Identity,
            Preconditioner::Jacobi => Applied::Jacobi(
                a.diagonal()
                    .into_iter()
                    .map(|d| if d != 0.0 && d.is_finite() { 1.0 / d } else { 1.0 })
                    .collect(),
            ),
            Preconditioner::Ilu0 => Applied::Ilu0(Ilu0::factor(a)),
        }
    }

    pub(crate) fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Applied::Identity => z.copy_from_slice(r),
            Applied::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
            Applied::Ilu0(f) => f.solve(r, z),
        }
    }
}

/// ILU(0) factors stored in one CSR array: strictly lower part holds L (unit
/// diagonal implied), the rest holds U.
pub(crate) struct Ilu0 {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub(crate) fn factor(a: &CsrMatrix) -> Self {
        let n = a.rows();
        let mut indptr = a.indptr().to_vec();
        let mut indices = a.indices().to_vec();
        let mut values = a.values().to_vec();

        // every row needs a diagonal slot
        let missing: Vec<usize> = (0..n).filter(|&i| a.get(i, i) == 0.0 && !has_entry(a, i, i)).collect();
        if !missing.is_empty() {
            let mut triplets = Vec::with_capacity(values.len() + missing.len());
            for i in 0..n {
                for (j, v) in a.row(i) {
                    triplets.push((i, j, v));
                }
            }
            for &i in &missing {
                triplets.push((i, i, 0.0));
            }
            let padded = CsrMatrix::from_triplets(n, n, &triplets).expect("indices in range");
            indptr = padded.indptr().to_vec();
            indices = padded.indices().to_vec();
            values = padded.values().to_vec();
        }

        let mut diag = vec![0usize; n];
        for i in 0..n {
            let row = &indices[indptr[i]..indptr[i + 1]];
            diag[i] = indptr[i] + row.binary_search(&i).expect("diagonal slot present");
        }

        let row_scale: Vec<f64> = (0..n)
            .map(|i| {
                values[indptr[i]..indptr[i + 1]]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect();

        let mut position = vec![usize::MAX; n];
        for i in 0..n {
            for k in indptr[i]..indptr[i + 1] {
                position[indices[k]] = k;
            }
            for kk in indptr[i]..diag[i] {
                let k = indices[kk];
                let pivot = values[diag[k]];
                let factor = values[kk] / pivot;
                values[kk] = factor;
                for m in (diag[k] + 1)..indptr[k + 1] {
                    let j = indices[m];
                    let slot = position[j];
                    if slot != usize::MAX {
                        values[slot] -= factor * values[m];
                    }
                }
            }
            let d = values[diag[i]];
            let floor = 1e-14 * row_scale[i].max(f64::MIN_POSITIVE);
            if !d.is_finite() || d.abs() < floor {
                values[diag[i]] = if d < 0.0 { -floor } else { floor.max(1e-300) };
            }
            for k in indptr[i]..indptr[i + 1] {
                position[indices[k]] = usize::MAX;
            }
        }
        Self {
            n,
            indptr,
            indices,
            values,
            diag,
        }
    }

    pub(crate) fn solve(&self, r: &[f64], z: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = r[i];
            for k in self.indptr[i]..self.diag[i] {
                acc -= self.values[k] * z[self.indices[k]];
            }
            z[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = z[i];
            for k in (self.diag[i] + 1)..self.indptr[i + 1] {
                acc -= self.values[k] * z[self.indices[k]];
            }
            z[i] = acc / self.values[self.diag[i]];
        }
    }
}

fn has_entry(a: &CsrMatrix, i: usize, j: usize) -> bool {
    a.row(i).any(|(c, _)| c == j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ilu0_is_exact_for_tridiagonal() {
        // tridiagonal matrices have no fill, so ILU(0) is the exact LU
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -2.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let ilu = Ilu0::factor(&a);
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let b = a.matvec(&x);
        let mut z = vec![0.0; n];
        ilu.solve(&b, &mut z);
        for (zi, xi) in z.iter().zip(&x) {
            assert!((zi - xi).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_handles_zero_diagonal() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 1, 2.0)]).unwrap();
        let p = Applied::build(Preconditioner::Jacobi, &a);
        let mut z = vec![0.0; 2];
        p.apply(&[3.0, 4.0], &mut z);
        assert_eq!(z, vec![3.0, 2.0]);
    }
}
