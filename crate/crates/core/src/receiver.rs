//! Linear MMSE receivers and error metrics.
//!
//! For a cascade `A` (effective channel times transmit filter) and white noise
//! of variance `σ²`, the MMSE filter is `W = (AAᴴ + σ²I)⁻¹A` and the estimate
//! is `ŝ = Wᴴy`. The same code serves Bob and Eve; only the cascade differs.

use num_complex::Complex64;

use crate::channel::SubcarrierChannel;
use crate::error::{Error, Result};
use crate::frontend::{demodulate, ReceivedFrame, SymbolFrame};
use crate::linalg::{CMatrix, Cholesky};
use crate::precoding::SubcarrierPrecoder;

/// `(AAᴴ + σ²I)⁻¹A` through a Cholesky solve.
pub fn mmse_filter(a: &CMatrix, noise_var: f64) -> Result<CMatrix> {
    check_noise(noise_var)?;
    let mut gram = a.matmul(&a.adjoint())?;
    gram.add_to_diagonal(Complex64::new(noise_var, 0.0));
    Cholesky::new(&gram)?.solve(a)
}

fn check_noise(noise_var: f64) -> Result<()> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::Input(format!("noise variance must be positive, got {noise_var}")));
    }
    Ok(())
}

/// `E‖Wᴴ(As + z) − s‖²` for unit-energy independent symbols:
/// `‖WᴴA − I‖_F² + σ²‖W‖_F²`.
pub fn mse_with_filter(w: &CMatrix, a: &CMatrix, noise_var: f64) -> Result<f64> {
    let mut err = w.adjoint().matmul(a)?;
    if err.rows() != err.cols() {
        return Err(Error::Dimension(format!(
            "filter yields {} estimates for {} streams",
            err.rows(),
            err.cols()
        )));
    }
    err.add_to_diagonal(Complex64::new(-1.0, 0.0));
    Ok(err.norm_sqr() + noise_var * w.norm_sqr())
}

/// MSE of the MMSE receiver for the cascade `a`.
pub fn analytic_mse(a: &CMatrix, noise_var: f64) -> Result<f64> {
    mse_with_filter(&mmse_filter(a, noise_var)?, a, noise_var)
}

/// Result of equalizing and detecting one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualizerReport {
    pub s_hat: Vec<Complex64>,
    /// Expected `‖ŝ − s‖²`, when the cascade is known to the caller.
    pub mse_analytic: Option<f64>,
    /// Observed `‖ŝ − s‖²`.
    pub mse_empirical: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
}

/// Detects `s_hat` against the transmitted frame.
pub fn score(s_hat: Vec<Complex64>, frame: &SymbolFrame, mse_analytic: Option<f64>) -> Result<EqualizerReport> {
    if s_hat.len() != frame.len() {
        return Err(Error::Dimension(format!(
            "{} estimates for a frame of {} symbols",
            s_hat.len(),
            frame.len()
        )));
    }
    let mse_empirical = s_hat.iter().zip(&frame.symbols).map(|(a, b)| (a - b).norm_sqr()).sum();
    let bit_errors = demodulate(&s_hat)
        .iter()
        .zip(&frame.bits)
        .filter(|(a, b)| a != b)
        .count() as u64;
    Ok(EqualizerReport {
        s_hat,
        mse_analytic,
        mse_empirical,
        bit_errors,
        bits_total: frame.bits.len() as u64,
    })
}

/// `ŝ = Wᴴy`, QPSK decisions and error counts.
pub fn equalize_and_score(y: &ReceivedFrame, w: &CMatrix, frame: &SymbolFrame) -> Result<EqualizerReport> {
    score(w.adjoint_matvec(&y.y)?, frame, None)
}

/// MMSE receiver for a block-diagonal cascade: one small filter per subcarrier.
#[derive(Clone, Debug)]
pub struct BlockEqualizer {
    n_rx: usize,
    n_streams: usize,
    filters: Vec<CMatrix>,
    streams: Vec<Vec<usize>>,
    mse: f64,
}

impl BlockEqualizer {
    /// Receiver for `channel` (one `M x N_A` block per subcarrier) behind `precoder`.
    pub fn mmse(channel: &SubcarrierChannel, precoder: &SubcarrierPrecoder, noise_var: f64) -> Result<Self> {
        check_noise(noise_var)?;
        if channel.n_subcarriers() != precoder.n_subcarriers() || channel.n_tx() != precoder.n_tx {
            return Err(Error::Dimension("channel and precoder blocks do not conform".into()));
        }
        let mut filters = Vec::with_capacity(channel.n_subcarriers());
        let mut mse = 0.0;
        for (h, w) in channel.blocks.iter().zip(&precoder.blocks) {
            let a = h.matmul(w)?;
            let f = mmse_filter(&a, noise_var)?;
            mse += mse_with_filter(&f, &a, noise_var)?;
            filters.push(f);
        }
        Ok(Self {
            n_rx: channel.n_rx(),
            n_streams: precoder.n_streams,
            filters,
            streams: precoder.streams.clone(),
            mse,
        })
    }

    /// Expected total `‖ŝ − s‖²` over all streams.
    pub fn analytic_mse(&self) -> f64 {
        self.mse
    }

    pub fn equalize(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.n_rx * self.filters.len() {
            return Err(Error::Dimension(format!(
                "received vector has {} samples, expected {}",
                y.len(),
                self.n_rx * self.filters.len()
            )));
        }
        let mut s_hat = vec![Complex64::new(0.0, 0.0); self.n_streams];
        for (n, (f, st)) in self.filters.iter().zip(&self.streams).enumerate() {
            let est = f.adjoint_matvec(&y[n * self.n_rx..(n + 1) * self.n_rx])?;
            for (&g, v) in st.iter().zip(est) {
                s_hat[g] = v;
            }
        }
        Ok(s_hat)
    }

    pub fn equalize_and_score(&self, y: &ReceivedFrame, frame: &SymbolFrame) -> Result<EqualizerReport> {
        score(self.equalize(&y.y)?, frame, Some(self.mse))
    }

    /// Dense `N·M x N_s·N` filter.
    pub fn to_dense(&self) -> CMatrix {
        let mut w = CMatrix::zeros(self.n_rx * self.filters.len(), self.n_streams);
        for (n, (f, st)) in self.filters.iter().zip(&self.streams).enumerate() {
            for (c, &g) in st.iter().enumerate() {
                for r in 0..self.n_rx {
                    w[(n * self.n_rx + r, g)] = f[(r, c)];
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::random_matrix;
    use crate::rng::{complex_gaussian_vec, rng_from_seed};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_filter_closed_form() {
        let g = c(0.8, -0.6);
        let a = CMatrix::from_vec(1, 1, vec![g]).unwrap();
        let w = mmse_filter(&a, 0.5).unwrap();
        let expected = g / (g.norm_sqr() + 0.5);
        assert!((w[(0, 0)] - expected).norm() < 1e-14);
        // single stream with σ²p = σ_z²
        assert!((analytic_mse(&a, 1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn push_through_identity() {
        let a = random_matrix(4, 2, 8);
        let w = mmse_filter(&a, 1.0).unwrap();
        let mut g = a.adjoint().matmul(&a).unwrap();
        g.add_to_diagonal(c(1.0, 0.0));
        let inv = Cholesky::new(&g).unwrap().solve(&CMatrix::identity(2)).unwrap();
        let alt = &a * &inv;
        assert!((&w - &alt).frobenius_norm() < 1e-9);
    }

    #[test]
    fn zero_forcing_limit() {
        let a = random_matrix(3, 3, 2);
        let w = mmse_filter(&a, 1e-12).unwrap();
        let prod = &w.adjoint() * &a;
        assert!((&prod - &CMatrix::identity(3)).frobenius_norm() < 1e-4);
    }

    #[test]
    fn zero_channel_mse_counts_streams() {
        assert_eq!(analytic_mse(&CMatrix::zeros(4, 3), 1.0).unwrap(), 3.0);
    }

    #[test]
    fn non_positive_noise_is_rejected() {
        assert!(mmse_filter(&CMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn mmse_is_stationary_under_perturbation() {
        let a = random_matrix(4, 2, 11);
        let w = mmse_filter(&a, 0.7).unwrap();
        let base = mse_with_filter(&w, &a, 0.7).unwrap();
        for seed in 0..10 {
            let dw = random_matrix(4, 2, 100 + seed).scale(c(1e-3, 0.0));
            let perturbed = &w + &dw;
            assert!(mse_with_filter(&perturbed, &a, 0.7).unwrap() >= base - 1e-15);
        }
    }

    #[test]
    fn trace_expression_matches_monte_carlo() {
        let a = random_matrix(4, 2, 3);
        let nv = 0.5;
        let w = mmse_filter(&a, nv).unwrap();
        let expected = mse_with_filter(&w, &a, nv).unwrap();
        let mut rng = rng_from_seed(1);
        let trials = 10_000;
        let mut acc = 0.0;
        for t in 0..trials {
            let frame = SymbolFrame::random(2, t);
            let mut y = a.matvec(&frame.symbols).unwrap();
            for (yi, zi) in y.iter_mut().zip(complex_gaussian_vec(&mut rng, 4, nv)) {
                *yi += zi;
            }
            let rep = equalize_and_score(&ReceivedFrame { y, noise_var: nv }, &w, &frame).unwrap();
            acc += rep.mse_empirical;
        }
        let mc = acc / trials as f64;
        assert!((mc / expected - 1.0).abs() < 0.02, "{mc} vs {expected}");
    }

    #[test]
    fn noiseless_identity_has_no_errors() {
        let frame = SymbolFrame::random(16, 4);
        let y = ReceivedFrame { y: frame.symbols.clone(), noise_var: 0.0 };
        let rep = equalize_and_score(&y, &CMatrix::identity(16), &frame).unwrap();
        assert_eq!(rep.bit_errors, 0);
        assert_eq!(rep.bits_total, 32);
        assert!(rep.mse_empirical < 1e-30);
    }

    #[test]
    fn block_equalizer_matches_dense_filter() {
        let n = 4;
        let blocks: Vec<CMatrix> = (0..n).map(|k| random_matrix(2, 3, 20 + k as u64)).collect();
        let ch = SubcarrierChannel { blocks };
        let pre = SubcarrierPrecoder {
            n_tx: 3,
            n_streams: 7,
            blocks: (0..n)
                .map(|k| random_matrix(3, if k == 1 { 1 } else { 2 }, 40 + k as u64))
                .collect(),
            streams: vec![vec![0, 4], vec![6], vec![1, 2], vec![3, 5]],
        };
        let eq = BlockEqualizer::mmse(&ch, &pre, 0.3).unwrap();
        let a = &ch.to_dense() * &pre.to_dense();
        let w = mmse_filter(&a, 0.3).unwrap();
        assert!((&eq.to_dense() - &w).frobenius_norm() < 1e-10);
        assert!((eq.analytic_mse() - analytic_mse(&a, 0.3).unwrap()).abs() < 1e-10);
        let y = complex_gaussian_vec(&mut rng_from_seed(2), 8, 1.0);
        let s1 = eq.equalize(&y).unwrap();
        let s2 = w.adjoint_matvec(&y).unwrap();
        for (p, q) in s1.iter().zip(&s2) {
            assert!((p - q).norm() < 1e-10);
        }
    }
}
