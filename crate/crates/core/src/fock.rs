//! Truncated two-mode Fock space and the sparse complex matrices that act
//! on it.
//!
//! Basis states `|m, n⟩` (m CW photons, n CCW photons) are flattened
//! CW-major: `index = m * (n_max_ccw + 1) + n`.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::Mode;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("photon cutoff must be at least 1 (got cw={0}, ccw={1})")]
    ZeroCutoff(usize, usize),
    #[error("Hilbert-space dimension overflows for cutoffs ({0}, {1})")]
    Overflow(usize, usize),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("entry ({0}, {1}) outside a {2}x{3} matrix")]
    OutOfBounds(usize, usize, usize, usize),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max_cw: usize,
    n_max_ccw: usize,
    dim: usize,
}

impl FockSpace {
    pub fn new(n_max_cw: usize, n_max_ccw: usize) -> Result<Self, FockError> {
        if n_max_cw == 0 || n_max_ccw == 0 {
            return Err(FockError::ZeroCutoff(n_max_cw, n_max_ccw));
        }
        let dim = n_max_cw
            .checked_add(1)
            .and_then(|a| n_max_ccw.checked_add(1).and_then(|b| a.checked_mul(b)))
            // the Liouvillian needs dim² entries to be addressable too
            .filter(|d| d.checked_mul(*d).is_some())
            .ok_or(FockError::Overflow(n_max_cw, n_max_ccw))?;
        Ok(FockSpace {
            n_max_cw,
            n_max_ccw,
            dim,
        })
    }

    /// Same cutoff on both modes.
    pub fn symmetric(n_max: usize) -> Result<Self, FockError> {
        Self::new(n_max, n_max)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self, mode: Mode) -> usize {
        match mode {
            Mode::Cw => self.n_max_cw,
            Mode::Ccw => self.n_max_ccw,
        }
    }

    /// Flat index of `|m, n⟩`. Panics if either count exceeds its cutoff.
    pub fn index(&self, m: usize, n: usize) -> usize {
        assert!(
            m <= self.n_max_cw && n <= self.n_max_ccw,
            "|{m},{n}> outside truncation"
        );
        m * (self.n_max_ccw + 1) + n
    }

    /// Inverse of [`FockSpace::index`].
    pub fn state(&self, idx: usize) -> (usize, usize) {
        assert!(idx < self.dim);
        (idx / (self.n_max_ccw + 1), idx % (self.n_max_ccw + 1))
    }

    pub fn photons(&self, idx: usize, mode: Mode) -> usize {
        let (m, n) = self.state(idx);
        match mode {
            Mode::Cw => m,
            Mode::Ccw => n,
        }
    }

    /// Basis vector `|m, n⟩`.
    pub fn basis_vector(&self, m: usize, n: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim];
        v[self.index(m, n)] = C64::new(1.0, 0.0);
        v
    }

    /// Annihilation operator of `mode`: `⟨m-1,n|a_cw|m,n⟩ = √m`.
    pub fn annihilation(&self, mode: Mode) -> SparseMatrix {
        let mut trip = Vec::with_capacity(self.dim);
        for col in 0..self.dim {
            let (m, n) = self.state(col);
            match mode {
                Mode::Cw if m > 0 => {
                    trip.push((self.index(m - 1, n), col, C64::new((m as f64).sqrt(), 0.0)))
                }
                Mode::Ccw if n > 0 => {
                    trip.push((self.index(m, n - 1), col, C64::new((n as f64).sqrt(), 0.0)))
                }
                _ => {}
            }
        }
        SparseMatrix::from_triplets(self.dim, self.dim, trip)
            .expect("ladder entries are finite and in range")
    }

    pub fn creation(&self, mode: Mode) -> SparseMatrix {
        self.annihilation(mode).adjoint()
    }

    /// `a†a` for `mode`, assembled as the product of the ladder operators.
    pub fn number_op(&self, mode: Mode) -> SparseMatrix {
        self.factorial_moment_op(mode, 1)
    }

    /// Normally ordered moment operator `a†ᵏ aᵏ`, diagonal with entries
    /// `n!/(n−k)!`. Built directly so the entries are exact integers.
    pub fn factorial_moment_op(&self, mode: Mode, k: usize) -> SparseMatrix {
        let trip = (0..self.dim).filter_map(|i| {
            let n = self.photons(i, mode);
            (n >= k).then(|| {
                let v: f64 = (n + 1 - k..=n).map(|j| j as f64).product();
                (i, i, C64::new(v, 0.0))
            })
        });
        SparseMatrix::from_triplets(self.dim, self.dim, trip.collect()).expect("diagonal entries")
    }

    pub fn identity(&self) -> SparseMatrix {
        SparseMatrix::identity(self.dim)
    }
}

/// Complex matrix in compressed-row form. Entries are unique per `(row, col)`
/// and finite; explicit zeros are dropped on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Build from coordinate triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self, FockError> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(FockError::OutOfBounds(r, c, rows, cols));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(FockError::NonFinite(r, c));
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        // drop exact zeros produced by cancellation
        let mut keep_c = Vec::with_capacity(col_idx.len());
        let mut keep_v = Vec::with_capacity(values.len());
        for ((r, c), v) in row_of.into_iter().zip(col_idx).zip(values) {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_c.push(c);
                keep_v.push(v);
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx: keep_c,
            values: keep_v,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)` pairs in increasing column order.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        SparseMatrix::from_triplets(self.cols, self.rows, trip).expect("valid source")
    }

    pub fn transpose(&self) -> SparseMatrix {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        SparseMatrix::from_triplets(self.cols, self.rows, trip).expect("valid source")
    }

    pub fn conj(&self) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn scale(&self, alpha: C64) -> SparseMatrix {
        let trip = self.triplets().map(|(r, c, v)| (r, c, alpha * v)).collect();
        SparseMatrix::from_triplets(self.rows, self.cols, trip).expect("valid source")
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, FockError> {
        if self.cols != rhs.rows {
            return Err(FockError::DimensionMismatch(
                self.rows, self.cols, rhs.rows, rhs.cols,
            ));
        }
        let mut trip = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    trip.push((r, c, a * b));
                }
            }
        }
        SparseMatrix::from_triplets(self.rows, rhs.cols, trip)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: C64, other: &SparseMatrix) -> Result<SparseMatrix, FockError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FockError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let trip = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, alpha * v)))
            .collect();
        SparseMatrix::from_triplets(self.rows, self.cols, trip)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let mut trip = Vec::with_capacity(self.nnz() * rhs.nnz());
        for (r1, c1, a) in self.triplets() {
            for (r2, c2, b) in rhs.triplets() {
                trip.push((r1 * rhs.rows + r2, c1 * rhs.cols + c2, a * b));
            }
        }
        SparseMatrix::from_triplets(self.rows * rhs.rows, self.cols * rhs.cols, trip)
            .expect("valid factors")
    }

    /// `y = self * x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// Largest absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows * self.cols];
        for (r, c, v) in self.triplets() {
            out[r * self.cols + c] = v;
        }
        out
    }

    /// Lower and upper bandwidths `(kl, ku)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.triplets().fold((0, 0), |(kl, ku), (r, c, _)| {
            if r > c {
                (kl.max(r - c), ku)
            } else {
                (kl, ku.max(c - r))
            }
        })
    }

    /// Largest elementwise difference to `other`; `inf` on shape mismatch.
    pub fn max_diff(&self, other: &SparseMatrix) -> f64 {
        match self.add_scaled(C64::new(-1.0, 0.0), other) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Triplet text dump: one `row col re im` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# {} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn dump_triplets(&self, path: &Path) -> io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_triplets(io::BufWriter::new(f))
    }
}
