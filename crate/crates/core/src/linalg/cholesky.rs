use num_complex::Complex64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `A = L Lᴴ` for Hermitian positive definite `A`.
///
/// The factorization tracks the envelope of `A` (first nonzero column of each
/// row), which `L` inherits, so banded systems cost `O(n·b²)`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: CMatrix,
    first: Vec<usize>,
}

impl Cholesky {
    /// Factors `a`; only the lower triangle is read.
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Dimension(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let first: Vec<usize> = (0..n)
            .map(|i| (0..i).find(|&j| a[(i, j)] != Complex64::new(0.0, 0.0)).unwrap_or(i))
            .collect();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in first[j]..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite(n));
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in (j + 1)..n {
                if first[i] > j {
                    continue;
                }
                let mut s = a[(i, j)];
                for k in first[i].max(first[j])..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l, first })
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    /// Smallest `L_jj²`, a cheap indicator of near-singularity.
    pub fn min_pivot_sqr(&self) -> f64 {
        (0..self.order()).map(|j| self.l[(j, j)].re.powi(2)).fold(f64::INFINITY, f64::min)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.order();
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = b[i];
            for k in self.first[i]..i {
                s -= row[k] * b[k];
            }
            b[i] = s / row[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for (k, bk) in b.iter().enumerate().skip(i + 1) {
                if self.first[k] <= i {
                    s -= self.l[(k, i)].conj() * bk;
                }
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if b.rows() != self.order() {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows, system has order {}",
                b.rows(),
                self.order()
            )));
        }
        let mut out = CMatrix::zeros(b.rows(), b.cols());
        for c in 0..b.cols() {
            let x = self.solve_vec(&b.column(c));
            out.set_column(c, &x);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::random_matrix;

    #[test]
    fn solves_regularized_gram_system() {
        let a = random_matrix(6, 4, 3);
        let mut g = &a * &a.adjoint();
        g.add_to_diagonal(Complex64::new(0.5, 0.0));
        let chol = Cholesky::new(&g).unwrap();
        let b = random_matrix(6, 2, 4);
        let x = chol.solve(&b).unwrap();
        let resid = (&(&g * &x) - &b).frobenius_norm();
        assert!(resid < 1e-10, "{resid}");
    }

    #[test]
    fn banded_matrix_matches_dense_solve() {
        let n = 12;
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(4.0, 0.0);
            if i + 2 < n {
                a[(i + 2, i)] = Complex64::new(0.5, -1.0);
                a[(i, i + 2)] = Complex64::new(0.5, 1.0);
            }
        }
        let chol = Cholesky::new(&a).unwrap();
        let b = random_matrix(n, 1, 9);
        let x = chol.solve(&b).unwrap();
        assert!((&(&a * &x) - &b).frobenius_norm() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(Cholesky::new(&m), Err(Error::NotPositiveDefinite(2))));
        assert!(Cholesky::new(&CMatrix::zeros(2, 3)).is_err());
    }
}
