//! Dense symmetric positive-definite routines on row-major buffers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Diagonal jitter tried, in order, when a factorization fails.
pub const JITTER_LADDER: [f64; 3] = [1e-8, 1e-6, 1e-4];

#[inline]
fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    let mut s = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Lower-triangular Cholesky factor `A = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<F> {
    n: usize,
    /// Row-major; entries above the diagonal are zero.
    l: Vec<F>,
    jitter: F,
}

impl<F: Scalar> Cholesky<F> {
    /// Plain factorization; `None` if `a` is not numerically positive definite.
    pub fn factor(a: &[F], n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![F::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (i * n, j * n);
                let s = a[ri + j] - dot(&l[ri..ri + j], &l[rj..rj + j]);
                if i == j {
                    if !(s > F::zero()) || !s.is_finite() {
                        return None;
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Some(Cholesky {
            n,
            l,
            jitter: F::zero(),
        })
    }

    /// Factorization that escalates through [`JITTER_LADDER`] on failure.
    pub fn factor_with_jitter(a: &[F], n: usize) -> Result<Self> {
        if let Some(c) = Self::factor(a, n) {
            return Ok(c);
        }
        let mut work = a.to_vec();
        for &jit in &JITTER_LADDER {
            let jit = F::lit(jit);
            for i in 0..n {
                work[i * n + i] = a[i * n + i] + jit;
            }
            if let Some(mut c) = Self::factor(&work, n) {
                c.jitter = jit;
                return Ok(c);
            }
        }
        Err(Error::Fit(format!(
            "matrix of size {n} is not positive definite even with jitter {}",
            JITTER_LADDER[JITTER_LADDER.len() - 1]
        )))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that had to be added (zero if none).
    pub fn jitter(&self) -> F {
        self.jitter
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [F]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s = b[i] - dot(row, &b[..i]);
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `L^T x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [F]) {
        let n = self.n;
        for i in (0..n).rev() {
            let xi = b[i] / self.l[i * n + i];
            b[i] = xi;
            // eliminate x_i from the rows above: column i of L^T is row i of L
            let row = &self.l[i * n..i * n + i];
            for (bk, &lik) in b[..i].iter_mut().zip(row) {
                *bk -= lik * xi;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `ln det A`.
    pub fn log_det(&self) -> F {
        let two = F::lit(2.0);
        (0..self.n).map(|i| two * self.l[i * self.n + i].ln()).sum()
    }

    /// Full symmetric inverse `A^{-1}` (row-major).
    pub fn inverse(&self) -> Vec<F> {
        let n = self.n;
        // Column j of L^{-1}, restricted to rows j..n.
        let cols: Vec<Vec<F>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut x = vec![F::zero(); n - j];
                for k in j..n {
                    let row = &self.l[k * n + j..k * n + k];
                    let rhs = if k == j { F::one() } else { F::zero() };
                    x[k - j] = (rhs - dot(row, &x[..k - j])) / self.l[k * n + k];
                }
                x
            })
            .collect();
        // (L^{-T} L^{-1})_{ij} = sum_{k >= max(i,j)} W_ki W_kj
        let upper: Vec<Vec<F>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i..n)
                    .map(|j| dot(&cols[i][j - i..], &cols[j]))
                    .collect()
            })
            .collect();
        let mut inv = vec![F::zero(); n * n];
        for (i, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + off;
                inv[i * n + j] = v;
                inv[j * n + i] = v;
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_spd(n: usize, seed: u64) -> Vec<f64> {
        let mut s = Stream::new(seed);
        let b: Vec<f64> = (0..n * n).map(|_| s.normal()).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += n as f64;
        }
        a
    }

    #[test]
    fn reconstructs_and_solves() {
        let n = 12;
        let a = random_spd(n, 1);
        let c = Cholesky::factor(&a, n).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * x_true[j]).sum())
            .collect();
        let x = c.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
        let inv = c.inverse();
        for i in 0..n {
            for j in 0..n {
                let e: f64 = (0..n).map(|k| a[i * n + k] * inv[k * n + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn log_det_diagonal() {
        let a = vec![2.0, 0.0, 0.0, 3.0];
        let c = Cholesky::factor(&a, 2).unwrap();
        assert!((c.log_det() - 6.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn jitter_ladder_rescues_semidefinite() {
        // rank-one PSD matrix: plain factorization fails
        let a = vec![1.0, 1.0, 1.0, 1.0];
        assert!(Cholesky::factor(&a, 2).is_none());
        let c = Cholesky::factor_with_jitter(&a, 2).unwrap();
        assert!(c.jitter() > 0.0);
        let neg = vec![-1.0, 0.0, 0.0, -1.0];
        assert!(Cholesky::factor_with_jitter(&neg, 2).is_err());
    }
}
