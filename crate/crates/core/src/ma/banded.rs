//! Banded LU with partial pivoting.
//!
//! Row `i` is stored densely over columns `[i − kl, i + kl + ku]`; the extra
//! `kl` columns absorb fill from row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<f64>,
    /// Row interchanged with row `k` at step `k`.
    piv: Vec<usize>,
    factored: bool,
}

impl BandLu {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandLu {
            n,
            kl,
            ku,
            width,
            a: vec![0.0; n * width],
            piv: vec![0; n],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`; the entry must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(!self.factored);
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    /// Factorizes in place.
    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.a[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.a[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= f64::EPSILON * scale * 1e-6 || best == 0.0 {
                return Err(Error::SingularMatrix(k));
            }
            let last_col = (k + kl + ku).min(n - 1);
            self.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (ik, ip) = (self.idx(k, j), self.idx(p, j));
                    self.a.swap(ik, ip);
                }
            }
            let pivot = self.a[self.idx(k, k)];
            let row_start = self.idx(k, k);
            let len = last_col - k + 1;
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let f = self.a[ik] / pivot;
                if f == 0.0 {
                    continue;
                }
                self.a[ik] = f;
                let (head, tail) = self.a.split_at_mut(ik.max(row_start));
                // Row k precedes row i in storage.
                let src = &head[row_start + 1..row_start + len];
                let dst = &mut tail[1..len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` after [`factor`](Self::factor).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert!(self.factored, "factor() must be called before solve()");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        // Multipliers are not permuted by later interchanges, so the
        // interchanges are replayed step by step.
        let mut y = b.to_vec();
        for k in 0..n {
            y.swap(k, self.piv[k]);
            let last_row = (k + kl).min(n - 1);
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=last_row {
                    y[i] -= self.a[self.idx(i, k)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let mut s = y[k];
            for j in k + 1..=last_col {
                s -= self.a[self.idx(k, j)] * y[j];
            }
            y[k] = s / self.a[self.idx(k, k)];
        }
        y
    }
}
