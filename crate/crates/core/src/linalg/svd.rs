//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.
//!
//! Column pairs are rotated until every pair is orthogonal to working
//! precision. The accumulated rotations form the right singular vectors and
//! the column norms of the rotated matrix are the singular values.

use num_complex::Complex64;

use super::matrix::{vec_dot, vec_norm, CMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = u · diag(sigma) · vᴴ`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows x k` left singular vectors, `k = min(rows, cols)`.
    pub u: CMatrix,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// `cols x k` right singular vectors.
    pub v: CMatrix,
}

impl SvdResult {
    /// `u · diag(sigma) · vᴴ`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for c in 0..us.cols() {
            let s = Complex64::new(self.sigma[c], 0.0);
            for r in 0..us.rows() {
                us[(r, c)] *= s;
            }
        }
        &us * &self.v.adjoint()
    }
}

/// Columns of the rotated matrix plus the accumulated unitary.
struct Orthogonalized {
    /// `A·V`; columns mutually orthogonal.
    w: Vec<Vec<Complex64>>,
    /// Columns of the unitary `V`.
    v: Vec<Vec<Complex64>>,
}

/// Rotates the columns of `a` (given as column vectors of length `m`) until
/// they are pairwise orthogonal.
fn orthogonalize_columns(mut w: Vec<Vec<Complex64>>, m: usize) -> Result<Orthogonalized> {
    let n = w.len();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    let tol = (m.max(1) as f64 * f64::EPSILON).max(1e-15);
    let mut norms: Vec<f64> = w.iter().map(|c| vec_norm(c).powi(2)).collect();
    // Columns at round-off level relative to the whole matrix count as zero;
    // rotating them against each other never converges.
    let floor = norms.iter().sum::<f64>() * ((m.max(n) as f64) * f64::EPSILON).powi(2);

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = vec_dot(&w[p], &w[q]);
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Hermitian 2x2 Gram block [[alpha, gamma], [conj(gamma), beta]]
                // reduced to a real symmetric one by the phase of gamma.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, p, q, cs, sn, phase);
                rotate(&mut v, p, q, cs, sn, phase);
                norms[p] = vec_norm(&w[p]).powi(2);
                norms[q] = vec_norm(&w[q]).powi(2);
            }
        }
        if !rotated {
            return Ok(Orthogonalized { w, v });
        }
    }
    Err(Error::SvdNoConvergence {
        rows: m,
        cols: n,
        sweeps: MAX_SWEEPS,
    })
}

/// Applies `[a_p a_q] <- [a_p a_q] · [[c, s], [-s·conj(phase), c·conj(phase)]]`.
#[inline]
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, cs: f64, sn: f64, phase: Complex64) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    let ph = phase.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yp = *y * ph;
        let xp = *x;
        *x = xp * cs - yp * sn;
        *y = xp * sn + yp * cs;
    }
}

fn columns_of(a: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..a.cols()).map(|c| a.column(c)).collect()
}

fn ensure_finite(a: &CMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "{}x{} matrix has non-finite entries",
            a.rows(),
            a.cols()
        )))
    }
}

/// Thin SVD of any finite matrix.
pub fn svd(a: &CMatrix) -> Result<SvdResult> {
    ensure_finite(a)?;
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.adjoint())?;
        Ok(SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

fn svd_tall(a: &CMatrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    let Orthogonalized { w, v } = orthogonalize_columns(columns_of(a), m)?;
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma_max = order.first().map_or(0.0, |&i| norms[i]);
    let floor = sigma_max * f64::EPSILON * (m.max(n) as f64);
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        if s > floor && s > 0.0 {
            u_cols.push(w[j].iter().map(|x| x / s).collect());
        } else {
            u_cols.push(vec![Complex64::new(0.0, 0.0); m]);
            deficient.push(k);
        }
        sigma.push(s);
        v_cols.push(v[j].clone());
    }
    if !deficient.is_empty() {
        complete_orthonormal(&mut u_cols, &deficient, m);
    }
    Ok(SvdResult {
        u: CMatrix::from_columns(m, &u_cols),
        sigma,
        v: CMatrix::from_columns(n, &v_cols),
    })
}

/// Fills the columns listed in `holes` with unit vectors orthogonal to every
/// other column, using Gram-Schmidt against the standard basis.
fn complete_orthonormal(cols: &mut [Vec<Complex64>], holes: &[usize], m: usize) {
    let mut basis_idx = 0;
    for &h in holes {
        loop {
            assert!(basis_idx < m, "cannot complete basis");
            let mut cand = vec![Complex64::new(0.0, 0.0); m];
            cand[basis_idx] = Complex64::new(1.0, 0.0);
            basis_idx += 1;
            for _ in 0..2 {
                for (j, col) in cols.iter().enumerate() {
                    if j == h || vec_norm(col) == 0.0 {
                        continue;
                    }
                    let proj = vec_dot(col, &cand);
                    for (c, x) in cand.iter_mut().zip(col) {
                        *c -= proj * x;
                    }
                }
            }
            let nrm = vec_norm(&cand);
            if nrm > 1e-6 {
                cols[h] = cand.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

/// Orthonormal basis of `{x : ‖A x‖ ≤ tol·σ_max}` as the columns of the
/// returned matrix. A full-column-rank input yields a matrix with zero columns.
pub fn null_space(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    ensure_finite(a)?;
    if !(tol > 0.0) {
        return Err(Error::Input(format!("null-space tolerance must be positive, got {tol}")));
    }
    let n = a.cols();
    let Orthogonalized { w, v } = orthogonalize_columns(columns_of(a), a.rows())?;
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    let sigma_max = norms.iter().cloned().fold(0.0, f64::max);
    let cut = tol * sigma_max;
    let null_cols: Vec<Vec<Complex64>> = (0..n)
        .filter(|&j| norms[j] <= cut)
        .map(|j| v[j].clone())
        .collect();
    Ok(CMatrix::from_columns(n, &null_cols))
}

/// Number of singular values above `tol·σ_max`.
pub fn numerical_rank(sigma: &[f64], tol: f64) -> usize {
    let max = sigma.iter().cloned().fold(0.0, f64::max);
    sigma.iter().filter(|&&s| s > tol * max).count()
}
