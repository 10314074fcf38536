//! Square banded matrices with symmetric half-bandwidth, used to store the
//! finite-difference stencils and the V-form preconditioner.

use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix<T> {
    n: usize,
    k: usize,
    // row-major, entry (i, j) at i * (2k + 1) + (j + k - i)
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            data: vec![T::zero(); n * (2 * k + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.k
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || i.abs_diff(j) > self.k {
            return None;
        }
        Some(i * (2 * self.k + 1) + (j + self.k - i))
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    /// Sets entry `(i, j)`. Panics if `(i, j)` lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += value;
    }

    fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.k)..(i + self.k + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_range(i).fold(T::zero(), |acc, j| acc + self.get(i, j) * x[j]))
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            if x[i] == T::zero() {
                continue;
            }
            for j in self.row_range(i) {
                y[j] += self.get(i, j) * x[i];
            }
        }
        y
    }

    /// `Mᵀ diag(w) M`, returned with half-bandwidth `2k`.
    pub fn weighted_gram(&self, w: &[T]) -> Self {
        assert_eq!(w.len(), self.n);
        let mut out = Self::zeros(self.n, 2 * self.k);
        for i in 0..self.n {
            if w[i] == T::zero() {
                continue;
            }
            let range = self.row_range(i);
            for a in range.clone() {
                let mia = self.get(i, a);
                if mia == T::zero() {
                    continue;
                }
                for b in range.clone() {
                    out.add(a, b, mia * w[i] * self.get(i, b));
                }
            }
        }
        out
    }

    /// Adds `d[i]` to each diagonal entry.
    pub fn add_diagonal(&mut self, d: &[T]) {
        assert_eq!(d.len(), self.n);
        for (i, &v) in d.iter().enumerate() {
            self.add(i, i, v);
        }
    }

    /// Entrywise sum of two matrices of equal size; the result takes the
    /// larger bandwidth.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let k = self.k.max(other.k);
        let mut out = Self::zeros(self.n, k);
        for i in 0..self.n {
            for j in out.row_range(i) {
                let v = self.get(i, j) + other.get(i, j);
                out.set(i, j, v);
            }
        }
        out
    }

    /// Replaces row and column `i` with those of the identity.
    pub fn pin_identity(&mut self, i: usize) {
        for j in self.row_range(i) {
            self.set(i, j, T::zero());
            self.set(j, i, T::zero());
        }
        self.set(i, i, T::one());
    }

    /// Banded Cholesky factorization `A = G Gᵀ`. Returns `None` if the matrix
    /// is not numerically positive definite.
    pub fn cholesky(&self) -> Option<BandCholesky<T>> {
        let n = self.n;
        let k = self.k;
        let mut g = Self::zeros(n, k);
        for j in 0..n {
            let lo = j.saturating_sub(k);
            let mut diag = self.get(j, j);
            for p in lo..j {
                let v = g.get(j, p);
                diag -= v * v;
            }
            if !(diag > T::zero()) || !diag.is_finite() {
                return None;
            }
            let djj = diag.sqrt();
            g.set(j, j, djj);
            for i in (j + 1)..(j + k + 1).min(n) {
                let mut s = self.get(i, j);
                for p in i.saturating_sub(k).max(lo)..j {
                    s -= g.get(i, p) * g.get(j, p);
                }
                g.set(i, j, s / djj);
            }
        }
        Some(BandCholesky { factor: g })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky<T> {
    factor: BandMatrix<T>,
}

impl<T: Scalar> BandCholesky<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let g = &self.factor;
        let n = g.n;
        let k = g.k;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for p in i.saturating_sub(k)..i {
                s -= g.get(i, p) * y[p];
            }
            y[i] = s / g.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for p in (i + 1)..(i + k + 1).min(n) {
                s -= g.get(p, i) * y[p];
            }
            y[i] = s / g.get(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(n: usize) -> BandMatrix<f64> {
        let mut m = BandMatrix::zeros(n, 1);
        for i in 0..n {
            m.set(i, i, 2.0 + i as f64 * 0.1);
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
                m.set(i + 1, i, 0.5);
            }
        }
        m
    }

    #[test]
    fn transpose_matches_dense() {
        let m = sample(6);
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 1.0).collect();
        let y = m.matvec_transpose(&x);
        for j in 0..6 {
            let want: f64 = (0..6).map(|i| m.get(i, j) * x[i]).sum();
            assert_relative_eq!(y[j], want, epsilon = 1e-14);
        }
    }

    #[test]
    fn gram_and_cholesky_solve() {
        let m = sample(9);
        let w: Vec<f64> = (0..9).map(|i| 1.0 + i as f64).collect();
        let mut a = m.weighted_gram(&w);
        a.add_diagonal(&[0.1; 9]);
        assert_eq!(a.half_bandwidth(), 2);
        // symmetric
        for i in 0..9 {
            for j in 0..9 {
                assert_relative_eq!(a.get(i, j), a.get(j, i), epsilon = 1e-14);
            }
        }
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).cos()).collect();
        let b = a.matvec(&x);
        let sol = a.cholesky().expect("spd").solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert_relative_eq!(s, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut a = BandMatrix::<f64>::zeros(3, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        a.set(2, 2, 1.0);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn pinned_row_is_identity() {
        let m = sample(5);
        let mut a = m.weighted_gram(&[1.0; 5]);
        a.pin_identity(4);
        assert_eq!(a.get(4, 4), 1.0);
        assert_eq!(a.get(4, 3), 0.0);
        assert_eq!(a.get(2, 4), 0.0);
    }
}
