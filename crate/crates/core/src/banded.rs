//! Banded LU factorization with partial pivoting for complex matrices.
//!
//! Row `i` keeps columns `i - kl ..= i + kl + ku` in a fixed-width window,
//! which leaves room for the fill-in that row exchanges create in `U`.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::SparseMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum BandedError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("pivot {pivot:.3e} at column {column} is below {threshold:.3e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("right-hand side has length {0}, expected {1}")]
    Length(usize, usize),
}

#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    pivots: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedLu {
    /// Factor `a`. A pivot whose modulus is below `rel_threshold` times the
    /// largest entry of `a` is reported as singular.
    pub fn factor(a: &SparseMatrix, rel_threshold: f64) -> Result<Self, BandedError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(BandedError::NotSquare(a.rows(), a.cols()));
        }
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut data = vec![C64::new(0.0, 0.0); n * width];
        for (r, c, v) in a.triplets() {
            data[r * width + (c + kl - r)] = v;
        }
        let threshold = rel_threshold * a.max_abs();
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            data,
            pivots: vec![0; n],
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };
        lu.eliminate(threshold)?;
        Ok(lu)
    }

    /// Storage slot of `(r, c)`; requires `r - kl <= c <= r + kl + ku`.
    #[inline]
    fn at(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.kl - r)
    }

    fn eliminate(&mut self, threshold: f64) -> Result<(), BandedError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) {
                return Err(BandedError::Singular {
                    column: k,
                    pivot: best,
                    threshold,
                });
            }
            self.min_pivot = self.min_pivot.min(best);
            self.max_pivot = self.max_pivot.max(best);
            self.pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (x, y) = (self.at(k, c), self.at(p, c));
                    self.data.swap(x, y);
                }
            }
            let inv = C64::new(1.0, 0.0) / self.data[self.at(k, k)];
            for i in k + 1..=last_row {
                let li = self.at(i, k);
                let l = self.data[li] * inv;
                self.data[li] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let (base_k, base_i) = (self.at(k, k), self.at(i, k));
                let len = last_col - k;
                // row k lies wholly before row i in storage
                let (head, tail) = self.data.split_at_mut(base_i);
                let pivot_row = &head[base_k + 1..=base_k + len];
                for (x, u) in tail[1..=len].iter_mut().zip(pivot_row) {
                    *x -= l * u;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of the smallest to the largest pivot modulus.
    pub fn pivot_ratio(&self) -> f64 {
        self.min_pivot / self.max_pivot
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>, BandedError> {
        if b.len() != self.n {
            return Err(BandedError::Length(b.len(), self.n));
        }
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == C64::new(0.0, 0.0) {
                continue;
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.data[self.at(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= self.data[self.at(k, c)] * x[c];
            }
            x[k] = acc / self.data[self.at(k, k)];
        }
        Ok(x)
    }
}
