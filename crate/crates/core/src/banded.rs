//! Banded linear systems with partial pivoting.
//!
//! Each row stores a dense window `[i - kl, i + kl + ku]` around the diagonal;
//! the extra `kl` columns absorb the fill produced by row pivoting, so
//! factorization never reallocates. Row swaps copy values column-aligned,
//! which keeps every intermediate row inside its slot's window.

use crate::error::Error;
use crate::Result;

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let start = i.saturating_sub(kl);
                let end = (i + kl + ku + 1).min(n);
                vec![0.0; end - start]
            })
            .collect();
        BandedMatrix { n, kl, ku, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn start(&self, i: usize) -> usize {
        i.saturating_sub(self.kl)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.start(i);
        let row = &mut self.rows[i];
        assert!(j >= s && j < s + row.len(), "entry ({i}, {j}) outside band");
        row[j - s] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.start(i);
        let row = &mut self.rows[i];
        assert!(j >= s && j < s + row.len(), "entry ({i}, {j}) outside band");
        row[j - s] = v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let s = self.start(i);
        let row = &self.rows[i];
        if j >= s && j < s + row.len() {
            row[j - s]
        } else {
            0.0
        }
    }

    /// Exchange the values of rows `a` and `b` column by column.
    fn swap_values(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let lo = self.start(a).min(self.start(b));
        let hi = (self.start(a) + self.rows[a].len()).max(self.start(b) + self.rows[b].len());
        for col in lo..hi {
            let va = self.get(a, col);
            let vb = self.get(b, col);
            if va != vb {
                self.put_checked(a, col, vb);
                self.put_checked(b, col, va);
            }
        }
    }

    fn put_checked(&mut self, i: usize, j: usize, v: f64) {
        let s = self.start(i);
        let row = &mut self.rows[i];
        if j >= s && j < s + row.len() {
            row[j - s] = v;
        } else {
            assert!(v == 0.0, "pivot fill escaped the band at ({i}, {j})");
        }
    }

    /// LU factorization with partial pivoting. Consumes the matrix.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let mut pivots = Vec::with_capacity(n);
        let mut mults: Vec<Vec<f64>> = Vec::with_capacity(n);

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::LinearSolveFailure(format!(
                    "zero or non-finite pivot in column {k}"
                )));
            }
            self.swap_values(k, p);
            pivots.push(p);

            let pivot = self.get(k, k);
            let krow: Vec<(usize, f64)> = {
                let s = self.start(k);
                self.rows[k]
                    .iter()
                    .enumerate()
                    .filter(|(off, v)| s + off > k && **v != 0.0)
                    .map(|(off, v)| (s + off, *v))
                    .collect()
            };
            let mut col_mults = Vec::with_capacity(last - k);
            for r in k + 1..=last {
                let l = self.get(r, k) / pivot;
                col_mults.push(l);
                self.set(r, k, 0.0);
                if l != 0.0 {
                    for &(col, kv) in &krow {
                        self.add(r, col, -l * kv);
                    }
                }
            }
            mults.push(col_mults);
        }

        Ok(BandedLu {
            n,
            kl,
            urows: self.rows,
            pivots,
            mults,
        })
    }
}

/// Factored banded system; solves many right-hand sides.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    urows: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    mults: Vec<Vec<f64>>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();

        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for (off, l) in self.mults[k].iter().enumerate() {
                    x[k + 1 + off] -= l * xk;
                }
            }
        }

        for i in (0..n).rev() {
            let start = i.saturating_sub(self.kl);
            let row = &self.urows[i];
            let mut acc = x[i];
            for j in i + 1..(start + row.len()).min(n) {
                let v = row[j - start];
                if v != 0.0 {
                    acc -= v * x[j];
                }
            }
            x[i] = acc / row[i - start];
        }

        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolveFailure(
                "non-finite solution component".into(),
            ));
        }
        Ok(x)
    }
}
