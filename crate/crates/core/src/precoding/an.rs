//! Artificial noise confined to the null space of Bob's post-prefix channel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{cp_remove_matrix, mimo_block, replicate, OfdmConfig, Taps};
use crate::error::{Error, Result};
use crate::linalg::{null_space, vec_norm, CMatrix, Cholesky, DEFAULT_RANK_TOL};
use crate::rng::{complex_gaussian_vec, rng_from_seed};

/// How the artificial-noise power `P_a` is enforced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnPowerMode {
    /// Every sample is rescaled to `‖z_a‖² = P_a`.
    #[default]
    Exact,
    /// `E‖z_a‖² = P_a`; individual samples fluctuate.
    Expected,
}

/// `R_cp · H` for a time-domain block channel with `rx` receive antennas.
fn post_prefix_channel(h_block: &CMatrix, cfg: &OfdmConfig) -> Result<CMatrix> {
    let len = cfg.symbol_len();
    if !h_block.rows().is_multiple_of(len) || h_block.cols() != cfg.n_tx * len {
        return Err(Error::Dimension(format!(
            "{}x{} block channel does not match N_A = {} and N + N_cp = {len}",
            h_block.rows(),
            h_block.cols(),
            cfg.n_tx
        )));
    }
    let rx = h_block.rows() / len;
    replicate(&cp_remove_matrix(cfg.n_subcarriers, cfg.cp_len), rx).matmul(h_block)
}

/// Orthonormal basis `Q_a` of `{x : R_cp H x = 0}`.
pub fn an_basis(h_block: &CMatrix, cfg: &OfdmConfig) -> Result<CMatrix> {
    let a = post_prefix_channel(h_block, cfg)?;
    let q = null_space(&a, DEFAULT_RANK_TOL)?;
    if q.cols() == 0 {
        return Err(Error::EmptyNullSpace);
    }
    Ok(q)
}

/// `z_a = Q_a d` with `d` i.i.d. complex Gaussian, scaled to `‖z_a‖² = P_a`.
pub fn generate_an(q_a: &CMatrix, power: f64, seed: u64) -> Result<Vec<Complex64>> {
    generate_an_with(q_a, power, AnPowerMode::Exact, seed)
}

pub fn generate_an_with(q_a: &CMatrix, power: f64, mode: AnPowerMode, seed: u64) -> Result<Vec<Complex64>> {
    check_power(power)?;
    if power == 0.0 || q_a.cols() == 0 {
        return Ok(vec![Complex64::new(0.0, 0.0); q_a.rows()]);
    }
    let d = complex_gaussian_vec(&mut rng_from_seed(seed), q_a.cols(), 1.0);
    let z = q_a.matvec(&d)?;
    Ok(normalize(z, power, mode, q_a.cols()))
}

fn check_power(power: f64) -> Result<()> {
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::Input(format!("artificial-noise power must be non-negative, got {power}")));
    }
    Ok(())
}

/// Scales a sample drawn with unit variance per null-space dimension.
fn normalize(mut z: Vec<Complex64>, power: f64, mode: AnPowerMode, dim: usize) -> Vec<Complex64> {
    let factor = match mode {
        AnPowerMode::Exact => {
            let nrm = vec_norm(&z);
            if nrm == 0.0 {
                return z;
            }
            power.sqrt() / nrm
        }
        AnPowerMode::Expected => (power / dim as f64).sqrt(),
    };
    for v in z.iter_mut() {
        *v *= factor;
    }
    z
}

/// Draws artificial noise without forming `Q_a`.
///
/// `A = R_cp H` is wide with full row rank for generic channels, so the
/// orthogonal projector onto its null space is `I − Aᴴ(AAᴴ)⁻¹A`. Projecting a
/// white Gaussian vector gives the same distribution as `Q_a d`. `A` is applied
/// directly from the taps, and with receive samples ordered time-major `AAᴴ`
/// is a banded block-Toeplitz matrix whose Cholesky factor stays banded.
/// Rank-deficient channels fall back to an explicit basis.
#[derive(Clone, Debug)]
pub struct NullSpaceProjector {
    taps: Taps,
    n: usize,
    cp: usize,
    route: Route,
}

#[derive(Clone, Debug)]
enum Route {
    Gram(Cholesky),
    Basis(CMatrix),
}

impl NullSpaceProjector {
    pub fn new(taps: &Taps, cfg: &OfdmConfig) -> Result<Self> {
        if taps.n_tx() != cfg.n_tx || taps.n_taps() > cfg.cp_len.max(1) {
            return Err(Error::Config(format!(
                "taps for {} transmit antennas and {} paths do not fit N_A = {}, N_cp = {}",
                taps.n_tx(),
                taps.n_taps(),
                cfg.n_tx,
                cfg.cp_len
            )));
        }
        let mut proj = Self {
            taps: taps.clone(),
            n: cfg.n_subcarriers,
            cp: cfg.cp_len,
            route: Route::Basis(CMatrix::zeros(0, 0)),
        };
        let gram = proj.gram();
        proj.route = match Cholesky::new(&gram) {
            Ok(ch) if proj.rows() < proj.ambient_dim() && well_conditioned(&gram, &ch) => Route::Gram(ch),
            _ => {
                let h = mimo_block(taps, cfg.symbol_len())?;
                let q = null_space(&post_prefix_channel(&h, cfg)?, DEFAULT_RANK_TOL)?;
                if q.cols() == 0 {
                    return Err(Error::EmptyNullSpace);
                }
                Route::Basis(q)
            }
        };
        Ok(proj)
    }

    fn len(&self) -> usize {
        self.n + self.cp
    }

    fn rows(&self) -> usize {
        self.taps.n_rx() * self.n
    }

    /// Dimension of the artificial-noise subspace.
    pub fn null_dim(&self) -> usize {
        match &self.route {
            Route::Gram(_) => self.ambient_dim() - self.rows(),
            Route::Basis(q) => q.cols(),
        }
    }

    /// `N_A (N + N_cp)`.
    pub fn ambient_dim(&self) -> usize {
        self.taps.n_tx() * self.len()
    }

    /// `R_cp H x`, receive samples ordered time-major (`t·N_B + k`).
    pub fn apply_channel(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.ambient_dim() {
            return Err(Error::Dimension(format!(
                "time-domain vector has {} samples, expected {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        let (nb, len) = (self.taps.n_rx(), self.len());
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows()];
        for k in 0..nb {
            for i in 0..self.taps.n_tx() {
                let xi = &x[i * len..(i + 1) * len];
                for (l, h) in self.taps.pair(k, i).iter().enumerate() {
                    for t in 0..self.n {
                        y[t * nb + k] += h * xi[self.cp + t - l];
                    }
                }
            }
        }
        Ok(y)
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let (nb, len) = (self.taps.n_rx(), self.len());
        let mut x = vec![Complex64::new(0.0, 0.0); self.ambient_dim()];
        for k in 0..nb {
            for i in 0..self.taps.n_tx() {
                let xi = &mut x[i * len..(i + 1) * len];
                for (l, h) in self.taps.pair(k, i).iter().enumerate() {
                    let hc = h.conj();
                    for t in 0..self.n {
                        xi[self.cp + t - l] += hc * y[t * nb + k];
                    }
                }
            }
        }
        x
    }

    /// `AAᴴ`: entry `((t,k),(t',k'))` is `Σ_i Σ_l h_{k,i}(l) conj(h_{k',i}(l − t + t'))`.
    fn gram(&self) -> CMatrix {
        let nb = self.taps.n_rx();
        let taps_len = self.taps.n_taps() as isize;
        let mut corr = vec![Complex64::new(0.0, 0.0); nb * nb * (2 * taps_len as usize).max(1)];
        let idx = |k: usize, kp: usize, d: isize| (k * nb + kp) * (2 * taps_len as usize) + (d + taps_len) as usize;
        for k in 0..nb {
            for kp in 0..nb {
                for d in (1 - taps_len)..taps_len {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..self.taps.n_tx() {
                        let (a, b) = (self.taps.pair(k, i), self.taps.pair(kp, i));
                        for l in 0..taps_len {
                            let lp = l - d;
                            if (0..taps_len).contains(&lp) {
                                acc += a[l as usize] * b[lp as usize].conj();
                            }
                        }
                    }
                    corr[idx(k, kp, d)] = acc;
                }
            }
        }
        let rows = self.rows();
        CMatrix::from_fn(rows, rows, |r, c| {
            let (t, k) = ((r / nb) as isize, r % nb);
            let (tp, kp) = ((c / nb) as isize, c % nb);
            let d = t - tp;
            if d.abs() < taps_len {
                corr[idx(k, kp, d)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Orthogonal projection of `x` onto the null space.
    pub fn project(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.route {
            Route::Gram(ch) => {
                let mut z = x.to_vec();
                // one refinement pass removes the residual left by round-off
                for _ in 0..2 {
                    let coef = ch.solve_vec(&self.apply_channel(&z)?);
                    for (zi, b) in z.iter_mut().zip(self.apply_adjoint(&coef)) {
                        *zi -= b;
                    }
                }
                Ok(z)
            }
            Route::Basis(q) => q.matvec(&q.adjoint_matvec(x)?),
        }
    }

    /// One artificial-noise vector of power `P_a`.
    pub fn sample(&self, power: f64, mode: AnPowerMode, seed: u64) -> Result<Vec<Complex64>> {
        check_power(power)?;
        if power == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); self.ambient_dim()]);
        }
        let g = complex_gaussian_vec(&mut rng_from_seed(seed), self.ambient_dim(), 1.0);
        let z = self.project(&g)?;
        Ok(normalize(z, power, mode, self.null_dim()))
    }
}

/// Rejects Gram matrices whose Cholesky pivots reveal numerical rank loss.
fn well_conditioned(gram: &CMatrix, ch: &Cholesky) -> bool {
    let max_diag = (0..gram.rows()).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
    ch.min_pivot_sqr() > DEFAULT_RANK_TOL * DEFAULT_RANK_TOL * max_diag
}
