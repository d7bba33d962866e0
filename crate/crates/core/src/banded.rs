//! Banded Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Row `i`
/// stores columns `i - kl ..= i + kl + ku`; the extra `kl` columns hold
/// fill-in from row swaps.
#[derive(Clone, Debug)]
pub(crate) struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub(crate) fn zeros(n: usize, kl: usize, ku: usize) -> Banded {
        let width = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku || j >= self.n {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku && j < self.n, "outside the band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// `A x`.
    pub(crate) fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b`, consuming the matrix.
    pub(crate) fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let scale = self.data.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * n as f64;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            for i in k + 1..=last {
                if self.get(i, k).abs() > self.get(p, k).abs() {
                    p = i;
                }
            }
            let pivot = self.get(p, k);
            if !(pivot.abs() > tiny) {
                return Err(Error::SingularJacobian(k));
            }
            let right = (k + reach).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, c) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, c);
                    self.set(p, j, a);
                }
                b.swap(k, p);
            }
            for i in k + 1..=last {
                let factor = self.get(i, k) / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=right {
                    let v = self.get(i, j) - factor * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] -= factor * b[k];
            }
        }
        for k in (0..n).rev() {
            let right = (k + reach).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=right {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        // zero leading diagonal forces a row swap
        let n = 9;
        let mut a = Banded::zeros(n, 2, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let v = if i == j {
                    if i % 3 == 0 { 0.0 } else { 4.0 }
                } else {
                    1.0 / (2.0 + (i as f64) + 0.5 * (j as f64))
                };
                a.add(i, j, v);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let b = a.mul(&x);
        let got = a.solve(b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = Banded::zeros(4, 1, 1);
        assert_eq!(a.solve(vec![1.0; 4]), Err(Error::SingularJacobian(0)));
    }
}
