//! Banded and tridiagonal direct solvers.

use crate::error::{Error, Result};

/// Solves a tridiagonal system with partial pivoting.
///
/// `sub[i]` couples row `i + 1` to column `i`, `sup[i]` couples row `i` to
/// column `i + 1`. Works for indefinite matrices.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(Error::config("tridiagonal: inconsistent band lengths"));
    }
    let mut band = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        band.set(i, i, diag[i]);
        if i + 1 < n {
            band.set(i, i + 1, sup[i]);
            band.set(i + 1, i, sub[i]);
        }
    }
    band.solve(rhs)
}

/// Dense storage of a banded matrix with `kl` sub- and `ku` super-diagonals,
/// with room for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // Row-major, each row holds columns [i - kl, i + ku + kl].
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        // Column offset relative to i - kl.
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.data[k])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j).expect("entry outside band");
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j).expect("entry outside band");
        self.data[k] += v;
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting; consumes a copy.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::config("band solve: rhs length mismatch"));
        }
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        let upper = self.ku + self.kl;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut best = a.get(k, k).abs();
            for i in (k + 1)..=last {
                let v = a.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= 1e-300 * scale || best == 0.0 {
                return Err(Error::NonConvergence {
                    message: format!("singular matrix at pivot {k}"),
                    residual: best,
                });
            }
            let jmax = (k + upper).min(n - 1);
            if piv != k {
                for j in k..=jmax {
                    let (x, y) = (a.get(k, j), a.get(piv, j));
                    a.set(k, j, y);
                    a.set(piv, j, x);
                }
                b.swap(k, piv);
            }
            let pivot = a.get(k, k);
            for i in (k + 1)..=last {
                let factor = a.get(i, k) / pivot;
                if factor == 0.0 {
                    continue;
                }
                a.set(i, k, 0.0);
                for j in (k + 1)..=jmax {
                    let v = a.get(k, j);
                    if v != 0.0 {
                        a.add(i, j, -factor * v);
                    }
                }
                b[i] -= factor * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let jmax = (k + upper).min(n - 1);
            let mut acc = b[k];
            for j in (k + 1)..=jmax {
                acc -= a.get(k, j) * x[j];
            }
            x[k] = acc / a.get(k, k);
        }
        Ok(x)
    }
}
