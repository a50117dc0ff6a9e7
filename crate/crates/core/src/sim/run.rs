use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{PointSetup, Scenario, Scheme};
use crate::channel::{draw_channel, OfdmConfig};
use crate::error::{Error, Result};
use crate::frontend::{OfdmModem, SymbolFrame};
use crate::precoding::{
    design_an_filter_blocks, design_mse_filter_blocks, svd_baseline_filter_blocks, AnPowerMode,
    NullSpaceProjector, SecureFilterSet, TransmitFilter,
};
use crate::receiver::BlockEqualizer;
use crate::rng::{derive_seed, stream, trial_seed};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Aggregated result of one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sweep_value: f64,
    pub ber_bob: f64,
    /// Half-width of the Wilson 95% interval.
    pub ci95_bob: f64,
    pub ber_eve: f64,
    pub ci95_eve: f64,
    /// Mean of `‖ŝ − s‖²` over trials.
    pub mse_bob: f64,
    pub mse_eve: f64,
    pub trials_run: usize,
    pub bit_errors_bob: u64,
    pub bit_errors_eve: u64,
    pub bits_total: u64,
    /// Trials whose MSE cap could not be met within the power budget.
    pub infeasible_trials: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
}

impl CurvePoint {
    pub fn ci_bob(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors_bob, self.bits_total)
    }

    pub fn ci_eve(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors_eve, self.bits_total)
    }

    pub fn fully_infeasible(&self) -> bool {
        self.infeasible_trials == self.trials_run
    }
}

/// Wilson score interval at 95% for `errors` out of `total`.
pub fn wilson_interval(errors: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors >= total { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Outcome of a single channel realization.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub bit_errors_bob: u64,
    pub bit_errors_eve: u64,
    pub bits: u64,
    pub mse_bob: f64,
    pub mse_eve: f64,
    pub mse_bob_analytic: f64,
    /// Best achievable MSE when the cap was out of reach.
    pub infeasible: Option<f64>,
}

fn design(setup: &PointSetup, scheme: Scheme, ch: &crate::channel::ChannelRealization) -> Result<(SecureFilterSet, Option<f64>)> {
    let cfg = &setup.cfg;
    match scheme {
        Scheme::MmseFilter => Ok((design_mse_filter_blocks(&ch.freq_bob, cfg)?, None)),
        Scheme::SvdBaseline => Ok((svd_baseline_filter_blocks(&ch.freq_bob, cfg)?, None)),
        Scheme::MmseFilterAn | Scheme::MmseFilterCapped => {
            let cap = setup.gamma_b.ok_or_else(|| Error::Config("missing gamma_b".into()))?;
            match design_an_filter_blocks(&ch.freq_bob, cfg, cap) {
                Ok(set) => Ok((set, None)),
                // spend the whole budget on data; the trial is flagged
                Err(Error::Infeasible { best_mse, .. }) => {
                    let mut set = design_mse_filter_blocks(&ch.freq_bob, cfg)?;
                    set.alloc.residual = 0.0;
                    Ok((set, Some(best_mse)))
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// Runs one trial of `scheme` at `setup` with the given trial seed.
pub fn run_trial(setup: &PointSetup, scheme: Scheme, an_mode: AnPowerMode, seed: u64, modem: &OfdmModem) -> Result<TrialOutcome> {
    let cfg: &OfdmConfig = &setup.cfg;
    let ch = draw_channel(cfg, derive_seed(seed, stream::CHANNEL))?;
    let (set, infeasible) = design(setup, scheme, &ch)?;
    let TransmitFilter::PerSubcarrier(pre) = &set.w_t else {
        return Err(Error::Config("harness expects a per-subcarrier precoder".into()));
    };
    let an = if scheme == Scheme::MmseFilterAn && set.alloc.residual > 0.0 {
        let proj = NullSpaceProjector::new(&ch.taps_bob, cfg)?;
        Some(proj.sample(set.alloc.residual, an_mode, derive_seed(seed, stream::ARTIFICIAL_NOISE))?)
    } else {
        None
    };
    let frame = SymbolFrame::random(cfg.n_data_symbols(), derive_seed(seed, stream::BITS));
    let (y_bob, y_eve) = modem.transmit(&frame, pre, an.as_deref(), &ch, cfg, derive_seed(seed, stream::NOISE))?;

    let bob = BlockEqualizer::mmse(&ch.freq_bob, pre, cfg.noise_var)?;
    let eve = BlockEqualizer::mmse(&ch.freq_eve, pre, cfg.noise_var)?;
    let rb = bob.equalize_and_score(&y_bob, &frame)?;
    let re = eve.equalize_and_score(&y_eve, &frame)?;
    Ok(TrialOutcome {
        bit_errors_bob: rb.bit_errors,
        bit_errors_eve: re.bit_errors,
        bits: rb.bits_total,
        mse_bob: rb.mse_empirical,
        mse_eve: re.mse_empirical,
        mse_bob_analytic: bob.analytic_mse(),
        infeasible,
    })
}

/// Sums trial outcomes in index order.
pub fn aggregate(sweep_value: f64, outcomes: &[TrialOutcome]) -> CurvePoint {
    let mut p = CurvePoint {
        sweep_value,
        ber_bob: 0.0,
        ci95_bob: 0.0,
        ber_eve: 0.0,
        ci95_eve: 0.0,
        mse_bob: 0.0,
        mse_eve: 0.0,
        trials_run: outcomes.len(),
        bit_errors_bob: 0,
        bit_errors_eve: 0,
        bits_total: 0,
        infeasible_trials: 0,
        diagnostic: None,
    };
    let mut worst_gap: Option<f64> = None;
    for o in outcomes {
        p.bit_errors_bob += o.bit_errors_bob;
        p.bit_errors_eve += o.bit_errors_eve;
        p.bits_total += o.bits;
        p.mse_bob += o.mse_bob;
        p.mse_eve += o.mse_eve;
        if let Some(best) = o.infeasible {
            p.infeasible_trials += 1;
            worst_gap = Some(worst_gap.map_or(best, |w: f64| w.max(best)));
        }
    }
    let t = outcomes.len().max(1) as f64;
    p.mse_bob /= t;
    p.mse_eve /= t;
    if p.bits_total > 0 {
        p.ber_bob = p.bit_errors_bob as f64 / p.bits_total as f64;
        p.ber_eve = p.bit_errors_eve as f64 / p.bits_total as f64;
    }
    let half = |e| {
        let (lo, hi) = wilson_interval(e, p.bits_total);
        (hi - lo) / 2.0
    };
    p.ci95_bob = half(p.bit_errors_bob);
    p.ci95_eve = half(p.bit_errors_eve);
    if let Some(best) = worst_gap {
        p.diagnostic = Some(format!(
            "{} of {} trials could not meet the MSE cap within the power budget \
             (worst best-achievable MSE {best}); they used full-budget water-filling without artificial noise",
            p.infeasible_trials, p.trials_run
        ));
    }
    p
}

/// Runs every sweep point of `sc` on `workers` threads. The output depends
/// only on the scenario, never on the worker count.
pub fn run_scenario(sc: &Scenario, workers: usize) -> Result<Vec<CurvePoint>> {
    sc.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..sc.sweep_values.len())
            .map(|i| {
                let setup = sc.point(i)?;
                let modem = OfdmModem::for_config(&setup.cfg);
                let outcomes: Vec<TrialOutcome> = (0..sc.trials)
                    .into_par_iter()
                    .map(|t| run_trial(&setup, sc.scheme, sc.an_power, trial_seed(sc.master_seed, i, t), &modem))
                    .collect::<Result<_>>()?;
                Ok(aggregate(sc.sweep_values[i], &outcomes))
            })
            .collect()
    })
}
