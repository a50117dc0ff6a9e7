//! QPSK mapping and the time-domain MIMO-OFDM transmission chain.
//!
//! `transmit` runs the whole operator chain sample by sample: per-antenna
//! IDFT and cyclic prefix at Alice, optional artificial noise added to the
//! time-domain signal, tap-by-tap convolution through both channels, prefix
//! removal and DFT at each receiver, then AWGN.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{ChannelRealization, OfdmConfig, Taps};
use crate::error::{Error, Result};
use crate::linalg::{twiddle_table, CMatrix};
use crate::rng::{complex_gaussian, derive_seed, rng_from_seed, stream};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Data symbols of one OFDM symbol and the bits they carry.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
    pub bits: Vec<u8>,
}

impl SymbolFrame {
    /// Uniformly random bits for `n_symbols` QPSK symbols.
    pub fn random(n_symbols: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let bits: Vec<u8> = (0..2 * n_symbols).map(|_| rng.random::<bool>() as u8).collect();
        modulate(&bits).expect("even number of binary digits")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The same bits with every symbol multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            symbols: self.symbols.iter().map(|s| s * factor).collect(),
            bits: self.bits.clone(),
        }
    }
}

/// Frequency-domain samples at one receiver, subcarrier-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedFrame {
    pub y: Vec<Complex64>,
    pub noise_var: f64,
}

fn qpsk_point(b0: u8, b1: u8) -> Complex64 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let re = if b0 == 0 { a } else { -a };
    let im = if b1 == 0 { a } else { -a };
    Complex64::new(re, im)
}

/// Gray-mapped QPSK: the first bit of each pair picks the sign of the
/// in-phase part, the second the quadrature part, `0 ↦ +`.
pub fn modulate(bits: &[u8]) -> Result<SymbolFrame> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Input(format!("QPSK needs an even number of bits, got {}", bits.len())));
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::Input(format!("bit values must be 0 or 1, got {b}")));
    }
    let symbols = bits.chunks_exact(2).map(|p| qpsk_point(p[0], p[1])).collect();
    Ok(SymbolFrame { symbols, bits: bits.to_vec() })
}

/// Minimum-distance QPSK decisions.
pub fn demodulate(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [(s.re < 0.0) as u8, (s.im < 0.0) as u8])
        .collect()
}

/// Linear map from the `N_s·N` data symbols to the subcarrier-major
/// frequency-domain transmit vector of length `N_A·N`.
pub trait Precoder {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn precode(&self, s: &[Complex64]) -> Result<Vec<Complex64>>;
}

impl Precoder for CMatrix {
    fn input_len(&self) -> usize {
        self.cols()
    }

    fn output_len(&self) -> usize {
        self.rows()
    }

    fn precode(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matvec(s)
    }
}

/// Per-antenna OFDM modulator/demodulator with a cached twiddle table.
#[derive(Clone, Debug)]
pub struct OfdmModem {
    n: usize,
    cp: usize,
    twiddles: Vec<Complex64>,
}

impl OfdmModem {
    pub fn new(n_subcarriers: usize, cp_len: usize) -> Self {
        Self {
            n: n_subcarriers,
            cp: cp_len,
            twiddles: twiddle_table(n_subcarriers),
        }
    }

    pub fn for_config(cfg: &OfdmConfig) -> Self {
        Self::new(cfg.n_subcarriers, cfg.cp_len)
    }

    pub fn symbol_len(&self) -> usize {
        self.n + self.cp
    }

    fn dft(&self, x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = self.n;
        let scale = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                let acc: Complex64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let w = self.twiddles[(j * k) % n];
                        v * if inverse { w.conj() } else { w }
                    })
                    .sum();
                acc * scale
            })
            .collect()
    }

    /// Subcarrier-major frequency vector for `antennas` antennas to the
    /// antenna-major time-domain signal with cyclic prefix (`T Fᴴ`).
    pub fn modulate(&self, freq: &[Complex64], antennas: usize) -> Result<Vec<Complex64>> {
        check_len(freq.len(), antennas * self.n, "frequency-domain transmit vector")?;
        let len = self.symbol_len();
        let mut out = vec![ZERO; antennas * len];
        for m in 0..antennas {
            let per_antenna: Vec<Complex64> = (0..self.n).map(|n| freq[n * antennas + m]).collect();
            let u = self.dft(&per_antenna, true);
            let block = &mut out[m * len..(m + 1) * len];
            block[..self.cp].copy_from_slice(&u[self.n - self.cp..]);
            block[self.cp..].copy_from_slice(&u);
        }
        Ok(out)
    }

    /// Antenna-major time-domain signal to the subcarrier-major frequency
    /// vector (`F R`): drops the prefix and applies the DFT per antenna.
    pub fn demodulate(&self, time: &[Complex64], antennas: usize) -> Result<Vec<Complex64>> {
        let len = self.symbol_len();
        check_len(time.len(), antennas * len, "time-domain receive vector")?;
        let mut out = vec![ZERO; antennas * self.n];
        for m in 0..antennas {
            let body = &time[m * len + self.cp..(m + 1) * len];
            for (n, v) in self.dft(body, false).into_iter().enumerate() {
                out[n * antennas + m] = v;
            }
        }
        Ok(out)
    }

    /// Applies the Toeplitz block channel of `taps` to an antenna-major
    /// time-domain signal (linear convolution truncated to one symbol).
    pub fn convolve(&self, taps: &Taps, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let len = self.symbol_len();
        check_len(x.len(), taps.n_tx() * len, "time-domain channel input")?;
        let mut out = vec![ZERO; taps.n_rx() * len];
        for k in 0..taps.n_rx() {
            let yk = &mut out[k * len..(k + 1) * len];
            for i in 0..taps.n_tx() {
                let xi = &x[i * len..(i + 1) * len];
                for (l, h) in taps.pair(k, i).iter().enumerate() {
                    for t in l..len {
                        yk[t] += h * xi[t - l];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Frequency-domain image `F R G x` of a time-domain signal `x` seen
    /// through `taps`.
    pub fn through_channel(&self, taps: &Taps, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.demodulate(&self.convolve(taps, x)?, taps.n_rx())
    }

    /// One OFDM symbol from Alice to Bob and Eve.
    pub fn transmit<P: Precoder + ?Sized>(
        &self,
        frame: &SymbolFrame,
        w_t: &P,
        an: Option<&[Complex64]>,
        ch: &ChannelRealization,
        cfg: &OfdmConfig,
        seed: u64,
    ) -> Result<(ReceivedFrame, ReceivedFrame)> {
        if self.n != cfg.n_subcarriers || self.cp != cfg.cp_len {
            return Err(Error::Config("modem does not match the configuration".into()));
        }
        let (n, na) = (cfg.n_subcarriers, cfg.n_tx);
        if w_t.output_len() != na * n || w_t.input_len() != frame.len() {
            return Err(Error::Config(format!(
                "precoder maps {} symbols to {} samples; frame has {} symbols and the array needs {}",
                w_t.input_len(),
                w_t.output_len(),
                frame.len(),
                na * n
            )));
        }
        if ch.taps_bob.n_tx() != na || ch.taps_bob.n_rx() != cfg.n_rx_bob || ch.taps_eve.n_rx() != cfg.n_rx_eve {
            return Err(Error::Config("channel realization does not match the configuration".into()));
        }
        let mut x = self.modulate(&w_t.precode(&frame.symbols)?, na)?;
        if let Some(z) = an {
            if z.len() != x.len() {
                return Err(Error::Config(format!(
                    "artificial noise has {} samples, the transmit signal {}",
                    z.len(),
                    x.len()
                )));
            }
            for (xi, zi) in x.iter_mut().zip(z) {
                *xi += zi;
            }
        }
        let bob = self.receive(&ch.taps_bob, &x, cfg.noise_var, derive_seed(seed, stream::BOB))?;
        let eve = self.receive(&ch.taps_eve, &x, cfg.noise_var, derive_seed(seed, stream::EVE))?;
        Ok((bob, eve))
    }

    fn receive(&self, taps: &Taps, x: &[Complex64], noise_var: f64, seed: u64) -> Result<ReceivedFrame> {
        let mut y = self.through_channel(taps, x)?;
        if noise_var > 0.0 {
            let mut rng = rng_from_seed(seed);
            for v in y.iter_mut() {
                *v += complex_gaussian(&mut rng, noise_var);
            }
        }
        Ok(ReceivedFrame { y, noise_var })
    }
}

/// Convenience wrapper around [`OfdmModem::transmit`].
pub fn transmit<P: Precoder + ?Sized>(
    frame: &SymbolFrame,
    w_t: &P,
    an: Option<&[Complex64]>,
    ch: &ChannelRealization,
    cfg: &OfdmConfig,
    seed: u64,
) -> Result<(ReceivedFrame, ReceivedFrame)> {
    OfdmModem::for_config(cfg).transmit(frame, w_t, an, ch, cfg, seed)
}

fn check_len(got: usize, want: usize, what: &str) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} has length {got}, expected {want}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, cp_insert_matrix, cp_remove_matrix, replicate, subcarrier_major_order};
    use crate::linalg::{dft_matrix, vec_norm};

    fn cfg(n: usize, cp: usize, na: usize, nb: usize, ne: usize, ns: usize, l: usize) -> OfdmConfig {
        OfdmConfig {
            n_subcarriers: n,
            cp_len: cp,
            n_tx: na,
            n_rx_bob: nb,
            n_rx_eve: ne,
            n_streams: ns,
            n_taps: l,
            noise_var: 0.0,
            total_power: 1.0,
        }
    }

    fn random_precoder(rows: usize, cols: usize, seed: u64) -> CMatrix {
        crate::linalg::test_util::random_matrix(rows, cols, seed)
    }

    #[test]
    fn gray_map_points() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = modulate(&[0, 0, 1, 1, 1, 0, 0, 1]).unwrap();
        assert_eq!(f.symbols[0], Complex64::new(h, h));
        assert_eq!(f.symbols[1], Complex64::new(-h, -h));
        assert_eq!(f.symbols[2], Complex64::new(-h, h));
        assert_eq!(f.symbols[3], Complex64::new(h, -h));
        for s in &f.symbols {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn modulate_rejects_bad_input() {
        assert!(matches!(modulate(&[0, 1, 1]), Err(Error::Input(_))));
        assert!(matches!(modulate(&[0, 2]), Err(Error::Input(_))));
    }

    #[test]
    fn noiseless_round_trip() {
        for seed in 0..10_000 {
            let f = SymbolFrame::random(4, seed);
            assert_eq!(demodulate(&f.symbols), f.bits);
        }
    }

    #[test]
    fn identity_chain_is_transparent() {
        let c = cfg(8, 2, 1, 1, 1, 1, 1);
        let one = Taps::from_fn(1, 1, 1, |_, _, _| Complex64::new(1.0, 0.0));
        let ch = ChannelRealization::from_taps(&c, 0, one.clone(), one).unwrap();
        let frame = SymbolFrame::random(8, 1);
        let (bob, _) = transmit(&frame, &CMatrix::identity(8), None, &ch, &c, 0).unwrap();
        for (y, s) in bob.y.iter().zip(&frame.symbols) {
            assert!((y - s).norm() < 1e-12);
        }
    }

    #[test]
    fn time_chain_matches_explicit_operators() {
        let c = cfg(8, 3, 2, 2, 1, 1, 2);
        let ch = draw_channel(&OfdmConfig { noise_var: 1.0, ..c.clone() }, 12).unwrap();
        let w = random_precoder(16, 8, 2);
        let frame = SymbolFrame::random(8, 3);
        let (bob, eve) = transmit(&frame, &w, None, &ch, &c, 0).unwrap();

        let expected_bob = (&ch.h_eff().unwrap() * &w).matvec(&frame.symbols).unwrap();
        let expected_eve = (&ch.g_eff().unwrap() * &w).matvec(&frame.symbols).unwrap();
        for (a, b) in bob.y.iter().zip(&expected_bob) {
            assert!((a - b).norm() < 1e-10);
        }
        for (a, b) in eve.y.iter().zip(&expected_eve) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn modem_steps_match_operator_matrices() {
        let (n, cp, na) = (8, 2, 2);
        let modem = OfdmModem::new(n, cp);
        let f = dft_matrix(n);
        let perm = subcarrier_major_order(na, n);
        let x_sc: Vec<Complex64> = (0..na * n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut x_am = vec![ZERO; na * n];
        for (dst, &src) in perm.iter().enumerate() {
            x_am[src] = x_sc[dst];
        }
        let t_fh = &replicate(&cp_insert_matrix(n, cp), na) * &replicate(&f.adjoint(), na);
        let expected = t_fh.matvec(&x_am).unwrap();
        let got = modem.modulate(&x_sc, na).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
        let f_r = &replicate(&f, na) * &replicate(&cp_remove_matrix(n, cp), na);
        let back = f_r.matvec(&got).unwrap();
        let demod = modem.demodulate(&got, na).unwrap();
        for (dst, &src) in perm.iter().enumerate() {
            assert!((demod[dst] - back[src]).norm() < 1e-12);
            assert!((demod[dst] - x_sc[dst]).norm() < 1e-12);
        }
    }

    #[test]
    fn linearity_in_the_symbols() {
        let c = cfg(16, 4, 2, 2, 2, 2, 3);
        let ch = draw_channel(&OfdmConfig { noise_var: 1.0, ..c.clone() }, 5).unwrap();
        let w = random_precoder(32, 32, 6);
        let frame = SymbolFrame::random(32, 7);
        let alpha = Complex64::new(-1.5, 0.25);
        let (y1, e1) = transmit(&frame, &w, None, &ch, &c, 0).unwrap();
        let (y2, e2) = transmit(&frame.scaled(alpha), &w, None, &ch, &c, 0).unwrap();
        for (a, b) in y1.y.iter().zip(&y2.y).chain(e1.y.iter().zip(&e2.y)) {
            assert!((a * alpha - b).norm() < 1e-11);
        }
    }

    #[test]
    fn noise_is_calibrated() {
        let mut c = cfg(64, 8, 1, 2, 1, 1, 2);
        c.noise_var = 0.7;
        let zero = Taps::zeros(2, 1, 2);
        let ch = ChannelRealization::from_taps(&c, 0, zero, Taps::zeros(1, 1, 2)).unwrap();
        let frame = SymbolFrame::random(64, 1);
        let w = CMatrix::identity(64);
        let modem = OfdmModem::for_config(&c);
        let (mut sum, mut count) = (0.0, 0usize);
        for seed in 0..800 {
            let (bob, _) = modem.transmit(&frame, &w, None, &ch, &c, seed).unwrap();
            sum += bob.y.iter().map(|v| v.norm_sqr()).sum::<f64>();
            count += bob.y.len();
        }
        assert!(count >= 100_000);
        let var = sum / count as f64;
        assert!((var / 0.7 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn bob_and_eve_noise_are_independent_and_seeded() {
        let mut c = cfg(8, 2, 1, 1, 1, 1, 1);
        c.noise_var = 1.0;
        let zero = Taps::zeros(1, 1, 1);
        let ch = ChannelRealization::from_taps(&c, 0, zero.clone(), zero).unwrap();
        let frame = SymbolFrame::random(8, 1);
        let w = CMatrix::identity(8);
        let (b1, e1) = transmit(&frame, &w, None, &ch, &c, 9).unwrap();
        let (b2, _) = transmit(&frame, &w, None, &ch, &c, 9).unwrap();
        assert_eq!(b1, b2);
        assert_ne!(b1.y, e1.y);
    }

    #[test]
    fn parseval_for_unit_tap() {
        let c = cfg(32, 4, 1, 1, 1, 1, 1);
        let modem = OfdmModem::for_config(&c);
        let one = Taps::from_fn(1, 1, 1, |_, _, _| Complex64::new(1.0, 0.0));
        let x: Vec<Complex64> = (0..32).map(|i| Complex64::new((i as f64).cos(), 0.3)).collect();
        let time = modem.modulate(&x, 1).unwrap();
        let y = modem.through_channel(&one, &time).unwrap();
        assert!((vec_norm(&y) - vec_norm(&x)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatches_are_configuration_errors() {
        let c = cfg(8, 2, 2, 1, 1, 1, 1);
        let ch = draw_channel(&OfdmConfig { noise_var: 1.0, ..c.clone() }, 1).unwrap();
        let frame = SymbolFrame::random(8, 1);
        let bad_w = CMatrix::identity(8);
        assert!(matches!(transmit(&frame, &bad_w, None, &ch, &c, 0), Err(Error::Config(_))));
        let w = random_precoder(16, 8, 1);
        let short_an = vec![ZERO; 3];
        assert!(matches!(transmit(&frame, &w, Some(&short_an), &ch, &c, 0), Err(Error::Config(_))));
    }
}
