use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::OfdmConfig;
use crate::error::{Error, Result};
use crate::precoding::AnPowerMode;

/// Transmit strategy under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// SVD precoder with MSE-minimizing water-filling over all `N_s·N` streams.
    MmseFilter,
    /// Per-subcarrier SVD precoder with equal power.
    SvdBaseline,
    /// Minimum power meeting `Γ_b ≤ γ_b`; the leftover power becomes artificial noise.
    MmseFilterAn,
    /// Minimum power meeting `Γ_b ≤ γ_b`; the leftover power stays unused.
    MmseFilterCapped,
}

impl Scheme {
    pub fn needs_cap(self) -> bool {
        matches!(self, Self::MmseFilterAn | Self::MmseFilterCapped)
    }
}

/// Quantity varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `P_t/σ_z²` in dB.
    TransmitPowerDb,
    /// `N_A`.
    NTxAntennas,
    /// `γ_b`.
    MseCap,
}

/// A complete Monte Carlo experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub cfg: OfdmConfig,
    pub scheme: Scheme,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    /// MSE cap for the capped schemes; the sweep value when sweeping the cap.
    #[serde(default)]
    pub gamma_b: Option<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub an_power: AnPowerMode,
}

impl Scenario {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let sc: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::Config("sweep_values must not be empty".into()));
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep_values must be finite".into()));
        }
        if self.sweep_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep_values must be strictly increasing".into()));
        }
        match self.sweep_axis {
            SweepAxis::NTxAntennas => {
                if self.sweep_values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                    return Err(Error::Config("antenna counts must be positive integers".into()));
                }
            }
            SweepAxis::MseCap => {
                if !self.scheme.needs_cap() {
                    return Err(Error::Config(format!(
                        "sweeping the MSE cap needs a capped scheme, got {:?}",
                        self.scheme
                    )));
                }
            }
            SweepAxis::TransmitPowerDb => {}
        }
        if self.scheme.needs_cap() && self.sweep_axis != SweepAxis::MseCap {
            match self.gamma_b {
                Some(g) if g > 0.0 && g.is_finite() => {}
                _ => return Err(Error::Config(format!("{:?} needs a positive gamma_b", self.scheme))),
            }
        }
        for i in 0..self.sweep_values.len() {
            self.point(i)?.cfg.validate()?;
        }
        Ok(())
    }

    /// Configuration and cap at sweep point `index`.
    pub fn point(&self, index: usize) -> Result<PointSetup> {
        let v = *self
            .sweep_values
            .get(index)
            .ok_or_else(|| Error::Input(format!("sweep point {index} out of range")))?;
        let mut cfg = self.cfg.clone();
        let mut gamma_b = self.gamma_b;
        match self.sweep_axis {
            SweepAxis::TransmitPowerDb => cfg.total_power = cfg.noise_var * 10f64.powf(v / 10.0),
            SweepAxis::NTxAntennas => cfg.n_tx = v as usize,
            SweepAxis::MseCap => gamma_b = Some(v),
        }
        Ok(PointSetup { cfg, gamma_b })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSetup {
    pub cfg: OfdmConfig,
    pub gamma_b: Option<f64>,
}
