//! Complex band matrices and LU factorization with partial pivoting.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;

use super::SolverError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `n x n` matrix with `kl` sub- and `ku` super-diagonals, stored by columns
/// with `kl` extra rows for pivoting fill-in.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: alloc::vec![ZERO; ldab * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            ZERO
        }
    }

    /// Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Zeroes row and column `k` and puts `diag` on the diagonal.
    pub fn constrain(&mut self, k: usize, diag: Complex64) {
        let lo = k.saturating_sub(self.kl.max(self.ku));
        let hi = (k + self.kl.max(self.ku) + 1).min(self.n);
        for j in lo..hi {
            if self.in_band(k, j) {
                self.set(k, j, ZERO);
            }
            if self.in_band(j, k) {
                self.set(j, k, ZERO);
            }
        }
        self.set(k, k, diag);
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = alloc::vec![ZERO; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl + 1).min(self.n);
            for i in lo..hi {
                y[i] += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A_ij - A_ji|` over `i, j` in `range`.
    pub fn transpose_defect(&self, range: core::ops::Range<usize>) -> f64 {
        let mut d: f64 = 0.0;
        for i in range.clone() {
            for j in range.clone() {
                if self.in_band(i, j) {
                    d = d.max((self.get(i, j) - self.get(j, i)).norm());
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// LU factorization with partial pivoting. Fails on an exactly zero pivot.
    pub fn factor(&self) -> Result<BandLu, SolverError> {
        let mut a = self.clone();
        let n = a.n;
        let kl = a.kl;
        let mut ipiv = alloc::vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        let mut min_col = 0;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for p in 0..=km {
                let v = a.data[a.idx(j + p, j)].norm();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            if best < min_pivot {
                min_pivot = best;
                min_col = j;
            }
            max_pivot = max_pivot.max(best);
            if best == 0.0 {
                return Err(SolverError::Singular { column: j, pivot: 0.0 });
            }
            ju = ju.max((j + a.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (x, y) = (a.idx(j, c), a.idx(j + jp, c));
                    a.data.swap(x, y);
                }
            }
            let pivot = a.data[a.idx(j, j)];
            for p in 1..=km {
                let k = a.idx(j + p, j);
                a.data[k] /= pivot;
            }
            for c in j + 1..=ju {
                let t = a.data[a.idx(j, c)];
                if t == ZERO {
                    continue;
                }
                for p in 1..=km {
                    let l = a.data[a.idx(j + p, j)];
                    let k = a.idx(j + p, c);
                    a.data[k] -= l * t;
                }
            }
        }
        Ok(BandLu {
            lu: a,
            ipiv,
            pivots: PivotReport {
                min_pivot,
                max_pivot,
                min_pivot_column: min_col,
                ratio: min_pivot / max_pivot,
            },
        })
    }
}

/// Pivot magnitudes seen during factorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivotReport {
    pub min_pivot: f64,
    pub max_pivot: f64,
    pub min_pivot_column: usize,
    /// `min_pivot / max_pivot`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    ipiv: Vec<usize>,
    pub pivots: PivotReport,
}

impl BandLu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let a = &self.lu;
        let n = a.n;
        let kv = a.kl + a.ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let km = a.kl.min(n - 1 - j);
            x.swap(j, self.ipiv[j]);
            let xj = x[j];
            if xj != ZERO {
                for p in 1..=km {
                    x[j + p] -= a.data[a.idx(j + p, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= a.data[a.idx(j, j)];
            let xj = x[j];
            if xj != ZERO {
                for i in j.saturating_sub(kv)..j {
                    x[i] -= a.data[a.idx(i, j)] * xj;
                }
            }
        }
        x
    }
}
