//! Dense complex Cartesian tensors over three spatial indices.
//!
//! Storage is row-major: the first index is the slowest running one, so the
//! first-index slice `t[j, ..]` is a contiguous block of `3^(rank-1)` entries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Totally antisymmetric symbol on {0,1,2}.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// The six nonzero entries of the Levi-Civita symbol as `(i, j, k, sign)`.
pub const EPSILON_TERMS: [(usize, usize, usize, f64); 6] = [
    (0, 1, 2, 1.0),
    (1, 2, 0, 1.0),
    (2, 0, 1, 1.0),
    (0, 2, 1, -1.0),
    (2, 1, 0, -1.0),
    (1, 0, 2, -1.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CTensor {
    rank: usize,
    data: Vec<C64>,
}

impl CTensor {
    pub fn zeros(rank: usize) -> Self {
        Self {
            rank,
            data: vec![ZERO; 3usize.pow(rank as u32)],
        }
    }

    pub fn from_vec(rank: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), 3usize.pow(rank as u32), "tensor data length");
        Self { rank, data }
    }

    /// Outer product of a list of complex 3-vectors, in order.
    pub fn outer(vectors: &[[C64; 3]]) -> Self {
        let mut t = Self::zeros(vectors.len());
        for (flat, value) in t.data.iter_mut().enumerate() {
            let idx = unflatten(flat, vectors.len());
            *value = idx
                .iter()
                .zip(vectors)
                .fold(ONE, |acc, (&i, v)| acc * v[i]);
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Number of entries in one first-index slice.
    pub fn passive_len(&self) -> usize {
        self.data.len() / 3
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        self.data[flatten(idx)] = value;
    }

    /// Entries `t[j, ..]` for a fixed first index.
    pub fn first_slice(&self, j: usize) -> &[C64] {
        let n = self.passive_len();
        &self.data[j * n..(j + 1) * n]
    }

    pub fn first_slice_mut(&mut self, j: usize) -> &mut [C64] {
        let n = self.passive_len();
        &mut self.data[j * n..(j + 1) * n]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Self {
            rank: self.rank,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rank: self.rank,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, ONE);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -ONE);
        out
    }

    /// Reverses the index order: `out[i_r, ..., i_1] = self[i_1, ..., i_r]`.
    pub fn reversed_indices(&self) -> Self {
        let mut out = Self::zeros(self.rank);
        for flat in 0..self.data.len() {
            let mut idx = unflatten(flat, self.rank);
            idx.reverse();
            out.data[flatten(&idx)] = self.data[flat];
        }
        out
    }

    /// Builds a tensor from per-first-index slices.
    pub fn from_first_slices(slices: [&[C64]; 3]) -> Self {
        let n = slices[0].len();
        let mut data = Vec::with_capacity(3 * n);
        for s in slices {
            assert_eq!(s.len(), n, "slice length");
            data.extend_from_slice(s);
        }
        let rank = (3 * n).ilog(3) as usize;
        Self::from_vec(rank, data)
    }
}

pub fn flatten(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| {
        debug_assert!(i < 3);
        acc * 3 + i
    })
}

pub fn unflatten(mut flat: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % 3;
        flat /= 3;
    }
    idx
}

/// Sesquilinear contraction `sum_k a[k] * conj(b[k])` over two equal-length slices.
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x * y.conj())
}
