//! Small helpers for products of dense matrices with sparse ladder-type operators.
//!
//! Field operators over a truncated Fock space have O(dim) nonzeros, so every
//! product in the trace engines goes through [`SparseOp`].

use nalgebra::DMatrix;

use crate::tensor::{C64, ZERO};

pub type CMatrix = DMatrix<C64>;

/// Coordinate-list view of a matrix, holding only its nonzero entries in
/// column-major order.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        assert!(m.is_square());
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v != ZERO {
                    entries.push((r, c, v));
                }
            }
        }
        Self {
            dim: m.nrows(),
            entries,
        }
    }

    /// Builds from `(row, col, value)` triples; repeated positions add.
    pub fn from_entries(dim: usize, entries: Vec<(usize, usize, C64)>) -> Self {
        debug_assert!(entries.iter().all(|&(r, c, _)| r < dim && c < dim));
        Self { dim, entries }
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `dense * self`.
    pub fn right_mul(&self, dense: &CMatrix) -> CMatrix {
        assert_eq!(dense.ncols(), self.dim);
        let mut out = CMatrix::zeros(dense.nrows(), self.dim);
        for &(k, c, v) in &self.entries {
            for r in 0..dense.nrows() {
                out[(r, c)] += dense[(r, k)] * v;
            }
        }
        out
    }

    /// `self * dense`.
    pub fn left_mul(&self, dense: &CMatrix) -> CMatrix {
        assert_eq!(dense.nrows(), self.dim);
        let mut out = CMatrix::zeros(self.dim, dense.ncols());
        for &(r, k, v) in &self.entries {
            for c in 0..dense.ncols() {
                out[(r, c)] += v * dense[(k, c)];
            }
        }
        out
    }

    /// `Tr(dense * self)`, summed in entry order.
    pub fn trace_with(&self, dense: &CMatrix) -> C64 {
        assert_eq!(dense.ncols(), self.dim);
        self.entries
            .iter()
            .fold(ZERO, |acc, &(r, c, v)| acc + dense[(c, r)] * v)
    }
}

/// `Tr(a * b)` for dense matrices with a fixed summation order.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = ZERO;
    for r in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(r, k)] * b[(k, r)];
        }
    }
    acc
}

/// Largest elementwise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
