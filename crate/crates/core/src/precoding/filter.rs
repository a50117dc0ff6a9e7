//! Transmit filters `W_t = V_t · Diag(√p)` and the equal-power SVD baseline.

use num_complex::Complex64;

use super::an::an_basis;
use super::power::{solve_minpower_mse, solve_waterfill_mse, PowerAllocation};
use crate::channel::{OfdmConfig, SubcarrierChannel};
use crate::error::{Error, Result};
use crate::frontend::Precoder;
use crate::linalg::{svd, CMatrix};

/// Block-diagonal precoder: subcarrier `n` maps the streams listed in
/// `streams[n]` through the `N_A x streams[n].len()` matrix `blocks[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcarrierPrecoder {
    pub n_tx: usize,
    pub n_streams: usize,
    pub blocks: Vec<CMatrix>,
    pub streams: Vec<Vec<usize>>,
}

impl SubcarrierPrecoder {
    pub fn n_subcarriers(&self) -> usize {
        self.blocks.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut w = CMatrix::zeros(self.n_tx * self.blocks.len(), self.n_streams);
        for (n, (b, st)) in self.blocks.iter().zip(&self.streams).enumerate() {
            for (c, &g) in st.iter().enumerate() {
                for r in 0..self.n_tx {
                    w[(n * self.n_tx + r, g)] = b[(r, c)];
                }
            }
        }
        w
    }

    /// Gathers the data symbols carried on subcarrier `n`.
    pub fn symbols_on(&self, n: usize, s: &[Complex64]) -> Vec<Complex64> {
        self.streams[n].iter().map(|&g| s[g]).collect()
    }
}

impl Precoder for SubcarrierPrecoder {
    fn input_len(&self) -> usize {
        self.n_streams
    }

    fn output_len(&self) -> usize {
        self.n_tx * self.blocks.len()
    }

    fn precode(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        if s.len() != self.n_streams {
            return Err(Error::Dimension(format!(
                "precoder expects {} symbols, got {}",
                self.n_streams,
                s.len()
            )));
        }
        let mut out = Vec::with_capacity(self.output_len());
        for n in 0..self.blocks.len() {
            out.extend(self.blocks[n].matvec(&self.symbols_on(n, s))?);
        }
        Ok(out)
    }
}

/// A transmit filter in either dense or per-subcarrier form.
#[derive(Clone, Debug, PartialEq)]
pub enum TransmitFilter {
    Dense(CMatrix),
    PerSubcarrier(SubcarrierPrecoder),
}

impl TransmitFilter {
    pub fn to_dense(&self) -> CMatrix {
        match self {
            Self::Dense(w) => w.clone(),
            Self::PerSubcarrier(p) => p.to_dense(),
        }
    }

    /// `Tr(W_t W_tᴴ)`.
    pub fn power(&self) -> f64 {
        match self {
            Self::Dense(w) => w.norm_sqr(),
            Self::PerSubcarrier(p) => p.blocks.iter().map(CMatrix::norm_sqr).sum(),
        }
    }

    pub fn as_blocks(&self) -> Option<&SubcarrierPrecoder> {
        match self {
            Self::Dense(_) => None,
            Self::PerSubcarrier(p) => Some(p),
        }
    }
}

impl Precoder for TransmitFilter {
    fn input_len(&self) -> usize {
        match self {
            Self::Dense(w) => w.input_len(),
            Self::PerSubcarrier(p) => p.input_len(),
        }
    }

    fn output_len(&self) -> usize {
        match self {
            Self::Dense(w) => w.output_len(),
            Self::PerSubcarrier(p) => p.output_len(),
        }
    }

    fn precode(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Self::Dense(w) => w.precode(s),
            Self::PerSubcarrier(p) => p.precode(s),
        }
    }
}

/// Everything the transmitter decides for one channel realization.
#[derive(Clone, Debug)]
pub struct SecureFilterSet {
    pub w_t: TransmitFilter,
    pub alloc: PowerAllocation,
    /// Singular values of the legitimate channel, descending.
    pub sigma: Vec<f64>,
    /// Orthonormal basis of the artificial-noise subspace, when computed.
    pub q_a: Option<CMatrix>,
    /// `λ_i = σ_i² p_i` per stream.
    pub lambda: Vec<f64>,
}

fn lambda(sigma: &[f64], p: &[f64]) -> Vec<f64> {
    sigma.iter().zip(p).map(|(s, p)| s * s * p).collect()
}

fn scaled_columns(v: &CMatrix, cols: &[usize], powers: &[f64]) -> CMatrix {
    let mut w = v.select_columns(cols);
    for (c, p) in powers.iter().enumerate() {
        let g = p.sqrt();
        for r in 0..w.rows() {
            w[(r, c)] *= g;
        }
    }
    w
}

fn dense_design(
    h_eff: &CMatrix,
    cfg: &OfdmConfig,
    allocate: impl FnOnce(&[f64]) -> Result<PowerAllocation>,
) -> Result<(CMatrix, PowerAllocation, Vec<f64>)> {
    let n_streams = cfg.n_data_symbols();
    let expected = (cfg.n_rx_bob * cfg.n_subcarriers, cfg.n_tx * cfg.n_subcarriers);
    if h_eff.shape() != expected {
        return Err(Error::Dimension(format!(
            "effective channel is {}x{}, expected {}x{}",
            h_eff.rows(),
            h_eff.cols(),
            expected.0,
            expected.1
        )));
    }
    let dec = svd(h_eff)?;
    let alloc = allocate(&dec.sigma[..n_streams])?;
    let cols: Vec<usize> = (0..n_streams).collect();
    let w = scaled_columns(&dec.v, &cols, &alloc.powers);
    Ok((w, alloc, dec.sigma))
}

/// MSE-optimal filter from the SVD of the full effective channel: the first
/// `N_s·N` right-singular vectors weighted by water-filling powers.
pub fn design_mse_filter(h_eff: &CMatrix, cfg: &OfdmConfig) -> Result<SecureFilterSet> {
    let (w, alloc, sigma) =
        dense_design(h_eff, cfg, |s| solve_waterfill_mse(s, cfg.noise_var, cfg.total_power))?;
    Ok(SecureFilterSet {
        lambda: lambda(&sigma, &alloc.powers),
        w_t: TransmitFilter::Dense(w),
        alloc,
        sigma,
        q_a: None,
    })
}

/// Minimum-power filter meeting the MSE cap, with the artificial-noise basis
/// of the time-domain channel `h_block`.
pub fn design_an_filter(
    h_eff: &CMatrix,
    h_block: &CMatrix,
    cfg: &OfdmConfig,
    mse_cap: f64,
) -> Result<SecureFilterSet> {
    let (w, alloc, sigma) = dense_design(h_eff, cfg, |s| {
        solve_minpower_mse(s, cfg.noise_var, cfg.total_power, mse_cap)
    })?;
    Ok(SecureFilterSet {
        lambda: lambda(&sigma, &alloc.powers),
        w_t: TransmitFilter::Dense(w),
        alloc,
        sigma,
        q_a: Some(an_basis(h_block, cfg)?),
    })
}

/// Right-singular pairs of every subcarrier, merged in descending gain order.
struct MergedSvd {
    /// `(σ, subcarrier, index within the subcarrier)`, sorted by `σ` descending.
    modes: Vec<(f64, usize, usize)>,
    v: Vec<CMatrix>,
}

fn merged_svd(h: &SubcarrierChannel) -> Result<MergedSvd> {
    let mut modes = Vec::new();
    let mut v = Vec::with_capacity(h.n_subcarriers());
    for (n, block) in h.blocks.iter().enumerate() {
        let dec = svd(block)?;
        modes.extend(dec.sigma.iter().enumerate().map(|(j, &s)| (s, n, j)));
        v.push(dec.v);
    }
    modes.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(MergedSvd { modes, v })
}

fn block_design(
    h: &SubcarrierChannel,
    cfg: &OfdmConfig,
    allocate: impl FnOnce(&[f64]) -> Result<PowerAllocation>,
) -> Result<SecureFilterSet> {
    check_blocks(h, cfg)?;
    let n_streams = cfg.n_data_symbols();
    let merged = merged_svd(h)?;
    let chosen = &merged.modes[..n_streams];
    let sel_sigma: Vec<f64> = chosen.iter().map(|m| m.0).collect();
    let alloc = allocate(&sel_sigma)?;

    let mut cols = vec![Vec::new(); h.n_subcarriers()];
    let mut streams = vec![Vec::new(); h.n_subcarriers()];
    let mut powers = vec![Vec::new(); h.n_subcarriers()];
    for (g, &(_, n, j)) in chosen.iter().enumerate() {
        cols[n].push(j);
        streams[n].push(g);
        powers[n].push(alloc.powers[g]);
    }
    let blocks = (0..h.n_subcarriers())
        .map(|n| scaled_columns(&merged.v[n], &cols[n], &powers[n]))
        .collect();
    let sigma: Vec<f64> = merged.modes.iter().map(|m| m.0).collect();
    Ok(SecureFilterSet {
        lambda: lambda(&sel_sigma, &alloc.powers),
        w_t: TransmitFilter::PerSubcarrier(SubcarrierPrecoder {
            n_tx: cfg.n_tx,
            n_streams,
            blocks,
            streams,
        }),
        alloc,
        sigma,
        q_a: None,
    })
}

fn check_blocks(h: &SubcarrierChannel, cfg: &OfdmConfig) -> Result<()> {
    if h.n_subcarriers() != cfg.n_subcarriers || h.n_rx() != cfg.n_rx_bob || h.n_tx() != cfg.n_tx {
        return Err(Error::Dimension(format!(
            "{} subcarrier blocks of {}x{} do not match the configuration",
            h.n_subcarriers(),
            h.n_rx(),
            h.n_tx()
        )));
    }
    Ok(())
}

/// [`design_mse_filter`] computed per subcarrier. The singular values of a
/// block-diagonal matrix are the union of the blocks' singular values, so this
/// selects the same streams and powers as the dense design.
pub fn design_mse_filter_blocks(h: &SubcarrierChannel, cfg: &OfdmConfig) -> Result<SecureFilterSet> {
    block_design(h, cfg, |s| solve_waterfill_mse(s, cfg.noise_var, cfg.total_power))
}

/// Per-subcarrier form of the minimum-power design. The artificial-noise
/// basis is left to the caller (see [`super::NullSpaceProjector`]).
pub fn design_an_filter_blocks(
    h: &SubcarrierChannel,
    cfg: &OfdmConfig,
    mse_cap: f64,
) -> Result<SecureFilterSet> {
    block_design(h, cfg, |s| solve_minpower_mse(s, cfg.noise_var, cfg.total_power, mse_cap))
}

/// Conventional per-subcarrier SVD precoding: the first `N_s` right-singular
/// vectors of every `H̃_n` with equal power `P_t/(N_s·N)` on each stream.
/// Streams are numbered subcarrier-major.
pub fn svd_baseline_filter_blocks(h: &SubcarrierChannel, cfg: &OfdmConfig) -> Result<SecureFilterSet> {
    check_blocks(h, cfg)?;
    let ns = cfg.n_streams;
    let n_streams = cfg.n_data_symbols();
    let p = cfg.total_power / n_streams as f64;
    let mut blocks = Vec::with_capacity(h.n_subcarriers());
    let mut streams = Vec::with_capacity(h.n_subcarriers());
    let mut sigma = Vec::with_capacity(n_streams);
    let cols: Vec<usize> = (0..ns).collect();
    for (n, block) in h.blocks.iter().enumerate() {
        let dec = svd(block)?;
        blocks.push(scaled_columns(&dec.v, &cols, &vec![p; ns]));
        streams.push((n * ns..(n + 1) * ns).collect());
        sigma.extend_from_slice(&dec.sigma[..ns]);
    }
    let powers = vec![p; n_streams];
    Ok(SecureFilterSet {
        lambda: lambda(&sigma, &powers),
        w_t: TransmitFilter::PerSubcarrier(SubcarrierPrecoder {
            n_tx: cfg.n_tx,
            n_streams,
            blocks,
            streams,
        }),
        alloc: PowerAllocation {
            consumed: cfg.total_power,
            residual: 0.0,
            dual: 0.0,
            powers,
        },
        sigma,
        q_a: None,
    })
}

/// [`svd_baseline_filter_blocks`] taking the dense effective channel.
pub fn svd_baseline_filter(h_eff: &CMatrix, cfg: &OfdmConfig) -> Result<SecureFilterSet> {
    let h = SubcarrierChannel::from_dense(h_eff, cfg.n_subcarriers)?;
    svd_baseline_filter_blocks(&h, cfg)
}
