//! Column-compressed complex matrices for the Fock truncation, where every
//! operator of interest has a handful of nonzeros per column.

use num_complex::Complex64;

/// Square sparse matrix stored by columns; each column is sorted by row and
/// holds no explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        SparseMatrix {
            dim,
            cols: (0..dim).map(|j| vec![(j, Complex64::new(1.0, 0.0))]).collect(),
        }
    }

    /// Builds from per-column entries; duplicates are summed.
    pub fn from_columns(dim: usize, cols: Vec<Vec<(usize, Complex64)>>) -> Self {
        assert_eq!(cols.len(), dim);
        let cols = cols.into_iter().map(normalise).collect();
        SparseMatrix { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> &[(usize, Complex64)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.cols[col]
            .binary_search_by_key(&row, |e| e.0)
            .map(|i| self.cols[col][i].1)
            .unwrap_or_default()
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut cols = vec![Vec::new(); self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i].push((j, v.conj()));
            }
        }
        // columns visited in increasing order, so rows arrive sorted
        SparseMatrix { dim: self.dim, cols }
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc = Vec::new();
                for &(k, b) in col {
                    for &(i, a) in &self.cols[k] {
                        acc.push((i, a * b));
                    }
                }
                normalise(acc)
            })
            .collect();
        SparseMatrix { dim: self.dim, cols }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + c other`.
    pub fn axpy(&self, c: Complex64, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut acc = a.clone();
                acc.extend(b.iter().map(|&(i, v)| (i, c * v)));
                normalise(acc)
            })
            .collect();
        SparseMatrix { dim: self.dim, cols }
    }

    pub fn scale(&self, c: Complex64) -> SparseMatrix {
        let cols = self
            .cols
            .iter()
            .map(|col| normalise(col.iter().map(|&(i, v)| (i, c * v)).collect()))
            .collect();
        SparseMatrix { dim: self.dim, cols }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            if x[j] != Complex64::new(0.0, 0.0) {
                for &(i, v) in col {
                    y[i] += v * x[j];
                }
            }
        }
        y
    }

    /// `self^* x`.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v.conj() * x[i]).sum())
            .collect()
    }

    /// Largest entry modulus over the columns selected by `keep`.
    pub fn max_abs_on(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.cols
            .iter()
            .enumerate()
            .filter(|(j, _)| keep(*j))
            .flat_map(|(_, col)| col.iter().map(|e| e.1.norm()))
            .fold(0.0, f64::max)
    }
}

fn normalise(mut col: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
    col.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(col.len());
    for (i, v) in col {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|e| e.1 != Complex64::new(0.0, 0.0));
    out
}
