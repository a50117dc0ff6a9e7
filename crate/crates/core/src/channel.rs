//! Multipath MIMO channel model.
//!
//! A realization holds the tap sequences `h_{k,i}(l)` for the legitimate
//! (Alice→Bob) and wiretap (Alice→Eve) links together with their per-subcarrier
//! frequency responses. The time-domain Toeplitz block channel and the
//! effective frequency-domain channel `F R H T Fᴴ` are materialized on demand
//! from explicit operator matrices.
//!
//! Index conventions used throughout the crate:
//! - time-domain vectors are antenna-major: entry `m·(N+N_cp) + t`;
//! - frequency-domain vectors are subcarrier-major: entry `n·M + m`, so the
//!   effective channel is block-diagonal with one `M_rx x N_A` block per
//!   subcarrier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diag, dft_matrix, twiddle_table, CMatrix};
use crate::rng::{complex_gaussian, derive_seed, rng_from_seed, stream};

/// Static system dimensions and power settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmConfig {
    /// Number of subcarriers `N`.
    pub n_subcarriers: usize,
    /// Cyclic prefix length `N_cp`.
    pub cp_len: usize,
    /// Transmit antennas at Alice `N_A`.
    pub n_tx: usize,
    /// Receive antennas at Bob `N_B`.
    pub n_rx_bob: usize,
    /// Receive antennas at Eve `N_E`.
    pub n_rx_eve: usize,
    /// Data streams per subcarrier `N_s`.
    pub n_streams: usize,
    /// Channel taps `L`.
    pub n_taps: usize,
    /// Complex noise variance per receive sample, linear.
    pub noise_var: f64,
    /// Total transmit power `P_t`, linear.
    pub total_power: f64,
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_subcarriers", self.n_subcarriers),
            ("cp_len", self.cp_len),
            ("n_tx", self.n_tx),
            ("n_rx_bob", self.n_rx_bob),
            ("n_rx_eve", self.n_rx_eve),
            ("n_streams", self.n_streams),
            ("n_taps", self.n_taps),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.n_taps >= self.cp_len {
            return Err(Error::Config(format!(
                "delay spread L = {} must be shorter than the cyclic prefix N_cp = {}",
                self.n_taps, self.cp_len
            )));
        }
        if self.n_streams > self.n_tx.min(self.n_rx_bob) {
            return Err(Error::Config(format!(
                "N_s = {} exceeds min(N_A, N_B) = {}",
                self.n_streams,
                self.n_tx.min(self.n_rx_bob)
            )));
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return Err(Error::Config(format!("noise variance must be positive, got {}", self.noise_var)));
        }
        if !(self.total_power >= 0.0) || !self.total_power.is_finite() {
            return Err(Error::Config(format!(
                "total power must be non-negative, got {}",
                self.total_power
            )));
        }
        Ok(())
    }

    /// `N + N_cp`.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// `N_s · N`, the number of data symbols per OFDM symbol.
    pub fn n_data_symbols(&self) -> usize {
        self.n_streams * self.n_subcarriers
    }
}

/// Tap sequences for every (receive, transmit) antenna pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Taps {
    n_rx: usize,
    n_tx: usize,
    n_taps: usize,
    data: Vec<Complex64>,
}

impl Taps {
    pub fn new(n_rx: usize, n_tx: usize, n_taps: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_rx * n_tx * n_taps {
            return Err(Error::Dimension(format!(
                "{} taps supplied for a {n_rx}x{n_tx}x{n_taps} array",
                data.len()
            )));
        }
        Ok(Self { n_rx, n_tx, n_taps, data })
    }

    pub fn zeros(n_rx: usize, n_tx: usize, n_taps: usize) -> Self {
        Self::from_fn(n_rx, n_tx, n_taps, |_, _, _| Complex64::new(0.0, 0.0))
    }

    pub fn from_fn(
        n_rx: usize,
        n_tx: usize,
        n_taps: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(n_rx * n_tx * n_taps);
        for k in 0..n_rx {
            for i in 0..n_tx {
                for l in 0..n_taps {
                    data.push(f(k, i, l));
                }
            }
        }
        Self { n_rx, n_tx, n_taps, data }
    }

    /// I.i.d. `CN(0, 1/L)` taps: uniform power-delay profile with unit total power.
    pub fn rayleigh(n_rx: usize, n_tx: usize, n_taps: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let var = 1.0 / n_taps as f64;
        Self::from_fn(n_rx, n_tx, n_taps, |_, _, _| complex_gaussian(&mut rng, var))
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    /// Impulse response `h_{k,i}(·)` from transmit antenna `i` to receive antenna `k`.
    pub fn pair(&self, k: usize, i: usize) -> &[Complex64] {
        let start = (k * self.n_tx + i) * self.n_taps;
        &self.data[start..start + self.n_taps]
    }

    /// Nested `[k][i][l] -> [re, im]` layout used for JSON fixtures.
    pub fn to_nested(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        (0..self.n_rx)
            .map(|k| {
                (0..self.n_tx)
                    .map(|i| self.pair(k, i).iter().map(|h| [h.re, h.im]).collect())
                    .collect()
            })
            .collect()
    }

    pub fn from_nested(nested: &[Vec<Vec<[f64; 2]>>]) -> Result<Self> {
        let n_rx = nested.len();
        let n_tx = nested.first().map_or(0, Vec::len);
        let n_taps = nested.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rx * n_tx * n_taps);
        for row in nested {
            if row.len() != n_tx {
                return Err(Error::Dimension("ragged tap array".into()));
            }
            for seq in row {
                if seq.len() != n_taps {
                    return Err(Error::Dimension("ragged tap array".into()));
                }
                data.extend(seq.iter().map(|[re, im]| Complex64::new(*re, *im)));
            }
        }
        Self::new(n_rx, n_tx, n_taps, data)
    }

    /// Per-subcarrier frequency responses `H̃_n[k, i] = Σ_l h_{k,i}(l)·e^{-2πi·nl/N}`.
    pub fn frequency_response(&self, n_subcarriers: usize) -> SubcarrierChannel {
        let tw = twiddle_table(n_subcarriers);
        let blocks = (0..n_subcarriers)
            .map(|n| {
                CMatrix::from_fn(self.n_rx, self.n_tx, |k, i| {
                    self.pair(k, i)
                        .iter()
                        .enumerate()
                        .map(|(l, h)| h * tw[(n * l) % n_subcarriers])
                        .sum()
                })
            })
            .collect();
        SubcarrierChannel { blocks }
    }
}

/// Block-diagonal frequency-domain channel kept as its `N` diagonal blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcarrierChannel {
    pub blocks: Vec<CMatrix>,
}

impl SubcarrierChannel {
    pub fn n_subcarriers(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_rx(&self) -> usize {
        self.blocks.first().map_or(0, CMatrix::rows)
    }

    pub fn n_tx(&self) -> usize {
        self.blocks.first().map_or(0, CMatrix::cols)
    }

    /// Dense subcarrier-major block-diagonal matrix.
    pub fn to_dense(&self) -> CMatrix {
        block_diag(&self.blocks).expect("channel has at least one subcarrier")
    }

    /// Splits a dense subcarrier-major block-diagonal matrix into its blocks.
    pub fn from_dense(dense: &CMatrix, n_subcarriers: usize) -> Result<Self> {
        let (rows, cols) = dense.shape();
        if n_subcarriers == 0 || rows % n_subcarriers != 0 || cols % n_subcarriers != 0 {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix is not made of {n_subcarriers} equal diagonal blocks"
            )));
        }
        let (br, bc) = (rows / n_subcarriers, cols / n_subcarriers);
        let blocks = (0..n_subcarriers)
            .map(|n| dense.submatrix(n * br, n * bc, br, bc))
            .collect();
        Ok(Self { blocks })
    }
}

/// One draw of the legitimate and wiretap channels.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub cfg: OfdmConfig,
    pub seed: u64,
    pub taps_bob: Taps,
    pub taps_eve: Taps,
    /// Per-subcarrier blocks `H̃_n` (N_B x N_A).
    pub freq_bob: SubcarrierChannel,
    /// Per-subcarrier blocks `G̃_n` (N_E x N_A).
    pub freq_eve: SubcarrierChannel,
}

/// Draws independent Rayleigh taps for Bob and Eve from sub-seeds of `seed`.
pub fn draw_channel(cfg: &OfdmConfig, seed: u64) -> Result<ChannelRealization> {
    cfg.validate()?;
    let taps_bob = Taps::rayleigh(cfg.n_rx_bob, cfg.n_tx, cfg.n_taps, derive_seed(seed, stream::BOB));
    let taps_eve = Taps::rayleigh(cfg.n_rx_eve, cfg.n_tx, cfg.n_taps, derive_seed(seed, stream::EVE));
    ChannelRealization::from_taps(cfg, seed, taps_bob, taps_eve)
}

impl ChannelRealization {
    /// Builds a realization from explicit taps (fixtures and test hooks).
    pub fn from_taps(cfg: &OfdmConfig, seed: u64, taps_bob: Taps, taps_eve: Taps) -> Result<Self> {
        let expect = |t: &Taps, rx: usize, who: &str| {
            if t.n_rx() != rx || t.n_tx() != cfg.n_tx || t.n_taps() != cfg.n_taps {
                Err(Error::Dimension(format!(
                    "{who} taps are {}x{}x{}, configuration needs {rx}x{}x{}",
                    t.n_rx(),
                    t.n_tx(),
                    t.n_taps(),
                    cfg.n_tx,
                    cfg.n_taps
                )))
            } else {
                Ok(())
            }
        };
        expect(&taps_bob, cfg.n_rx_bob, "Bob")?;
        expect(&taps_eve, cfg.n_rx_eve, "Eve")?;
        if cfg.n_taps > cfg.symbol_len() {
            return Err(Error::Config("more taps than samples per OFDM symbol".into()));
        }
        Ok(Self {
            freq_bob: taps_bob.frequency_response(cfg.n_subcarriers),
            freq_eve: taps_eve.frequency_response(cfg.n_subcarriers),
            cfg: cfg.clone(),
            seed,
            taps_bob,
            taps_eve,
        })
    }

    /// Alice→Bob time-domain channel `H`, `N_B(N+N_cp) x N_A(N+N_cp)`.
    pub fn h_block(&self) -> CMatrix {
        mimo_block(&self.taps_bob, self.cfg.symbol_len()).expect("taps validated at construction")
    }

    /// Alice→Eve time-domain channel `G`.
    pub fn g_block(&self) -> CMatrix {
        mimo_block(&self.taps_eve, self.cfg.symbol_len()).expect("taps validated at construction")
    }

    /// `H̃` computed from the explicit operator chain.
    pub fn h_eff(&self) -> Result<CMatrix> {
        effective_channel(&self.h_block(), &self.cfg, self.cfg.n_rx_bob)
    }

    /// `G̃` computed from the explicit operator chain.
    pub fn g_eff(&self) -> Result<CMatrix> {
        effective_channel(&self.g_block(), &self.cfg, self.cfg.n_rx_eve)
    }

    pub fn to_record(&self) -> RealizationRecord {
        RealizationRecord {
            config: self.cfg.clone(),
            seed: self.seed,
            taps_bob: self.taps_bob.to_nested(),
            taps_eve: self.taps_eve.to_nested(),
        }
    }

    pub fn from_record(rec: &RealizationRecord) -> Result<Self> {
        Self::from_taps(
            &rec.config,
            rec.seed,
            Taps::from_nested(&rec.taps_bob)?,
            Taps::from_nested(&rec.taps_eve)?,
        )
    }
}

/// JSON form of a realization: configuration, seed and taps as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationRecord {
    pub config: OfdmConfig,
    pub seed: u64,
    pub taps_bob: Vec<Vec<Vec<[f64; 2]>>>,
    pub taps_eve: Vec<Vec<Vec<[f64; 2]>>>,
}

/// `dim x dim` lower-triangular Toeplitz matrix with first column
/// `(h(0), …, h(L-1), 0, …, 0)`.
pub fn toeplitz_block(taps: &[Complex64], dim: usize) -> Result<CMatrix> {
    if taps.len() > dim {
        return Err(Error::Config(format!(
            "{} taps do not fit in a {dim}x{dim} Toeplitz block",
            taps.len()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        if r >= c && r - c < taps.len() {
            taps[r - c]
        } else {
            zero
        }
    }))
}

/// Stacks the per-pair Toeplitz blocks into the full MIMO channel.
pub fn mimo_block(taps: &Taps, dim: usize) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(taps.n_rx() * dim, taps.n_tx() * dim);
    for k in 0..taps.n_rx() {
        for i in 0..taps.n_tx() {
            let b = toeplitz_block(taps.pair(k, i), dim)?;
            for r in 0..dim {
                for c in 0..=r {
                    out[(k * dim + r, i * dim + c)] = b[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

/// CP insertion `(N+N_cp) x N`: prepends the last `N_cp` samples.
pub fn cp_insert_matrix(n: usize, cp: usize) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    let mut t = CMatrix::zeros(n + cp, n);
    for r in 0..n + cp {
        let src = if r < cp { n - cp + r } else { r - cp };
        t[(r, src)] = one;
    }
    t
}

/// CP removal `N x (N+N_cp)`: drops the first `N_cp` samples.
pub fn cp_remove_matrix(n: usize, cp: usize) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    let mut r = CMatrix::zeros(n, n + cp);
    for i in 0..n {
        r[(i, cp + i)] = one;
    }
    r
}

/// `I_M ⊗ op`.
pub fn replicate(op: &CMatrix, copies: usize) -> CMatrix {
    block_diag(&vec![op.clone(); copies]).expect("at least one copy")
}

/// Position of (antenna `m`, subcarrier `n`) in a subcarrier-major vector.
#[inline]
pub fn subcarrier_major(m: usize, n: usize, n_antennas: usize) -> usize {
    n * n_antennas + m
}

/// Position of (antenna `m`, subcarrier `n`) in an antenna-major vector.
#[inline]
pub fn antenna_major(m: usize, n: usize, n_subcarriers: usize) -> usize {
    m * n_subcarriers + n
}

/// For every subcarrier-major slot, the antenna-major slot it is read from.
pub fn subcarrier_major_order(n_antennas: usize, n_subcarriers: usize) -> Vec<usize> {
    let mut map = vec![0; n_antennas * n_subcarriers];
    for n in 0..n_subcarriers {
        for m in 0..n_antennas {
            map[subcarrier_major(m, n, n_antennas)] = antenna_major(m, n, n_subcarriers);
        }
    }
    map
}

/// `F_rx R_rx · block · T_tx F_txᴴ`, evaluated as explicit operator products and
/// reordered to the subcarrier-major block-diagonal layout.
pub fn effective_channel(block: &CMatrix, cfg: &OfdmConfig, rx_antennas: usize) -> Result<CMatrix> {
    let (n, cp, na) = (cfg.n_subcarriers, cfg.cp_len, cfg.n_tx);
    let len = n + cp;
    if block.shape() != (rx_antennas * len, na * len) {
        return Err(Error::Config(format!(
            "channel block is {}x{}, expected {}x{} for {rx_antennas} receive antennas",
            block.rows(),
            block.cols(),
            rx_antennas * len,
            na * len
        )));
    }
    let f = dft_matrix(n);
    let f_rx = replicate(&f, rx_antennas);
    let r_rx = replicate(&cp_remove_matrix(n, cp), rx_antennas);
    let t_tx = replicate(&cp_insert_matrix(n, cp), na);
    let fh_tx = replicate(&f.adjoint(), na);

    let left = r_rx.matmul(block)?;
    let right = t_tx.matmul(&fh_tx)?;
    let raw = f_rx.matmul(&left.matmul(&right)?)?;
    Ok(raw.gather(
        &subcarrier_major_order(rx_antennas, n),
        &subcarrier_major_order(na, n),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_norm;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub(crate) fn small_cfg() -> OfdmConfig {
        OfdmConfig {
            n_subcarriers: 8,
            cp_len: 3,
            n_tx: 2,
            n_rx_bob: 2,
            n_rx_eve: 1,
            n_streams: 1,
            n_taps: 2,
            noise_var: 1.0,
            total_power: 10.0,
        }
    }

    #[test]
    fn toeplitz_examples() {
        assert_eq!(toeplitz_block(&[c(1.0)], 3).unwrap(), CMatrix::identity(3));
        let t = toeplitz_block(&[c(1.0), c(0.5)], 3).unwrap();
        let expected =
            CMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.5, 1.0]]);
        assert_eq!(t, expected);
        assert!(matches!(toeplitz_block(&[c(1.0); 4], 3), Err(Error::Config(_))));
    }

    #[test]
    fn cp_then_toeplitz_then_removal_is_circular_convolution() {
        let (n, cp, dim) = (13, 3, 16);
        let taps = Taps::rayleigh(1, 1, 3, 5);
        let h = toeplitz_block(taps.pair(0, 0), dim).unwrap();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let ext = cp_insert_matrix(n, cp).matvec(&x).unwrap();
        let out = cp_remove_matrix(n, cp).matvec(&h.matvec(&ext).unwrap()).unwrap();
        let t = taps.pair(0, 0);
        for (m, o) in out.iter().enumerate() {
            let circ: Complex64 = (0..t.len()).map(|l| t[l] * x[(m + n - l) % n]).sum();
            assert!((o - circ).norm() < 1e-12);
        }
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let mut cfg = small_cfg();
        cfg.n_taps = cfg.cp_len;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.n_streams = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.noise_var = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.n_rx_eve = 0;
        assert!(cfg.validate().is_err());
        assert!(small_cfg().validate().is_ok());
    }

    #[test]
    fn unit_tap_is_a_flat_channel() {
        let cfg = OfdmConfig {
            n_subcarriers: 8,
            cp_len: 2,
            n_tx: 1,
            n_rx_bob: 1,
            n_rx_eve: 1,
            n_streams: 1,
            n_taps: 1,
            noise_var: 1.0,
            total_power: 1.0,
        };
        let one = Taps::from_fn(1, 1, 1, |_, _, _| c(1.0));
        let ch = ChannelRealization::from_taps(&cfg, 0, one.clone(), one).unwrap();
        assert_eq!(ch.h_block(), CMatrix::identity(10));
        let heff = ch.h_eff().unwrap();
        assert!((&heff - &CMatrix::identity(8)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn draw_is_deterministic_and_shaped() {
        let cfg = small_cfg();
        let a = draw_channel(&cfg, 99).unwrap();
        let b = draw_channel(&cfg, 99).unwrap();
        assert_eq!(a.taps_bob, b.taps_bob);
        assert_eq!(a.taps_eve, b.taps_eve);
        assert_ne!(a.taps_bob.pair(0, 0), a.taps_eve.pair(0, 0));
        assert_eq!(a.h_block().shape(), (2 * 11, 2 * 11));
        assert_eq!(a.g_block().shape(), (11, 2 * 11));
        assert_eq!(a.h_eff().unwrap().shape(), (16, 16));
        assert_eq!(a.g_eff().unwrap().shape(), (8, 16));
    }

    #[test]
    fn h_block_first_column_is_the_tap_sequence() {
        let cfg = small_cfg();
        let ch = draw_channel(&cfg, 4).unwrap();
        let h = ch.h_block();
        let len = cfg.symbol_len();
        for k in 0..cfg.n_rx_bob {
            for i in 0..cfg.n_tx {
                let taps = ch.taps_bob.pair(k, i);
                for r in 0..len {
                    let expected = taps.get(r).copied().unwrap_or(c(0.0));
                    assert_eq!(h[(k * len + r, i * len)], expected);
                }
            }
        }
    }

    #[test]
    fn reorder_is_a_bijection() {
        let map = subcarrier_major_order(3, 5);
        let mut seen = map.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..15).collect::<Vec<_>>());
        assert_eq!(map[subcarrier_major(2, 4, 3)], antenna_major(2, 4, 5));
    }

    #[test]
    fn effective_channel_rejects_wrong_shape() {
        let cfg = small_cfg();
        let bad = CMatrix::zeros(5, 5);
        assert!(matches!(effective_channel(&bad, &cfg, 2), Err(Error::Config(_))));
    }

    #[test]
    fn parseval_through_unitary_chain() {
        let n = 16;
        let f = dft_matrix(n);
        let op = &(&(&f * &cp_remove_matrix(n, 4)) * &cp_insert_matrix(n, 4)) * &f.adjoint();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), 1.0)).collect();
        let y = op.matvec(&x).unwrap();
        assert!((vec_norm(&y) - vec_norm(&x)).abs() < 1e-12);
    }

    #[test]
    fn record_round_trip_is_exact() {
        let ch = draw_channel(&small_cfg(), 8).unwrap();
        let json = serde_json::to_string(&ch.to_record()).unwrap();
        let rec: RealizationRecord = serde_json::from_str(&json).unwrap();
        let back = ChannelRealization::from_record(&rec).unwrap();
        assert_eq!(back.taps_bob, ch.taps_bob);
        assert_eq!(back.taps_eve, ch.taps_eve);
        assert_eq!(back.freq_bob, ch.freq_bob);
    }
}
