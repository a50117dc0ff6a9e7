//! Built-in scenarios for the five experiments.

use super::scenario::{Scenario, Scheme, SweepAxis};
use crate::channel::OfdmConfig;
use crate::precoding::AnPowerMode;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_190_101;

/// Fixed power for the antenna sweep, dB over the noise floor.
pub const ANTENNA_SWEEP_POWER_DB: f64 = 24.0;
/// MSE cap of the artificial-noise power sweep.
pub const AN_SWEEP_CAP: f64 = 10.0;
/// Power of the MSE-cap sweep, dB.
pub const CAP_SWEEP_POWER_DB: f64 = 50.0;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> Scenario,
}

impl Preset {
    pub fn scenario(&self) -> Scenario {
        (self.build)()
    }
}

fn db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

fn cfg(n: usize, cp: usize, n_tx: usize, taps: usize, power_db: f64) -> OfdmConfig {
    OfdmConfig {
        n_subcarriers: n,
        cp_len: cp,
        n_tx,
        n_rx_bob: 2,
        n_rx_eve: 2,
        n_streams: 2,
        n_taps: taps,
        noise_var: 1.0,
        total_power: db(power_db),
    }
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

fn scenario(cfg: OfdmConfig, scheme: Scheme, axis: SweepAxis, values: Vec<f64>, gamma_b: Option<f64>) -> Scenario {
    Scenario {
        cfg,
        scheme,
        sweep_axis: axis,
        sweep_values: values,
        gamma_b,
        trials: DEFAULT_TRIALS,
        master_seed: DEFAULT_SEED,
        an_power: AnPowerMode::Exact,
    }
}

fn fig2(scheme: Scheme) -> Scenario {
    scenario(cfg(64, 16, 4, 8, 0.0), scheme, SweepAxis::TransmitPowerDb, range(0.0, 40.0, 4.0), None)
}

fn fig3(scheme: Scheme) -> Scenario {
    scenario(cfg(128, 32, 4, 16, 0.0), scheme, SweepAxis::TransmitPowerDb, range(0.0, 30.0, 3.0), None)
}

fn fig4(scheme: Scheme) -> Scenario {
    scenario(
        cfg(64, 16, 4, 8, ANTENNA_SWEEP_POWER_DB),
        scheme,
        SweepAxis::NTxAntennas,
        range(2.0, 10.0, 1.0),
        None,
    )
}

fn fig5(scheme: Scheme) -> Scenario {
    scenario(
        cfg(64, 16, 4, 8, 0.0),
        scheme,
        SweepAxis::TransmitPowerDb,
        range(30.0, 60.0, 5.0),
        Some(AN_SWEEP_CAP),
    )
}

fn fig6(scheme: Scheme) -> Scenario {
    scenario(
        cfg(64, 16, 4, 8, CAP_SWEEP_POWER_DB),
        scheme,
        SweepAxis::MseCap,
        vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        None,
    )
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2_mmse",
        description: "BER vs transmit power, N=64, N_cp=16, N_A=4, N_B=N_E=N_s=2, MSE water-filling",
        build: || fig2(Scheme::MmseFilter),
    },
    Preset {
        name: "fig2_svd",
        description: "BER vs transmit power, N=64, N_cp=16, N_A=4, N_B=N_E=N_s=2, per-subcarrier SVD baseline",
        build: || fig2(Scheme::SvdBaseline),
    },
    Preset {
        name: "fig3_mmse",
        description: "BER vs transmit power, N=128, N_cp=32, N_A=4, N_B=N_E=N_s=2, MSE water-filling",
        build: || fig3(Scheme::MmseFilter),
    },
    Preset {
        name: "fig3_svd",
        description: "BER vs transmit power, N=128, N_cp=32, N_A=4, N_B=N_E=N_s=2, per-subcarrier SVD baseline",
        build: || fig3(Scheme::SvdBaseline),
    },
    Preset {
        name: "fig4_mmse",
        description: "BER vs N_A in 2..=10 at 24 dB, N=64, N_cp=16, N_B=N_E=N_s=2, MSE water-filling",
        build: || fig4(Scheme::MmseFilter),
    },
    Preset {
        name: "fig4_svd",
        description: "BER vs N_A in 2..=10 at 24 dB, N=64, N_cp=16, N_B=N_E=N_s=2, per-subcarrier SVD baseline",
        build: || fig4(Scheme::SvdBaseline),
    },
    Preset {
        name: "fig5_an",
        description: "BER vs transmit power with MSE cap 10 and artificial noise, N=64, N_cp=16, N_A=4",
        build: || fig5(Scheme::MmseFilterAn),
    },
    Preset {
        name: "fig5_capped",
        description: "BER vs transmit power with MSE cap 10, no artificial noise, N=64, N_cp=16, N_A=4",
        build: || fig5(Scheme::MmseFilterCapped),
    },
    Preset {
        name: "fig6_an",
        description: "BER vs MSE cap at 50 dB with artificial noise, N=64, N_cp=16, N_A=4",
        build: || fig6(Scheme::MmseFilterAn),
    },
    Preset {
        name: "fig6_capped",
        description: "BER vs MSE cap at 50 dB, no artificial noise, N=64, N_cp=16, N_A=4",
        build: || fig6(Scheme::MmseFilterCapped),
    },
];

pub fn preset(name: &str) -> Option<Scenario> {
    PRESETS.iter().find(|p| p.name == name).map(Preset::scenario)
}
