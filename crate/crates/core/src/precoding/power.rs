//! Power allocation over parallel streams with gains `σ_i` under the MMSE
//! metric `Σ σ_z² / (σ_i² p_i + σ_z²)`.
//!
//! Both problems are separable and convex, so their KKT conditions pin down
//! the active set (a prefix of the streams sorted by gain) and, for a given
//! active set, the dual variable in closed form. The solvers scan active-set
//! sizes and return the unique consistent one; no iterative search is needed.

use crate::error::{Error, Result};

/// Per-stream powers and their bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAllocation {
    /// `p_i`, in the order of the input gains.
    pub powers: Vec<f64>,
    /// `P_c = Σ p_i`.
    pub consumed: f64,
    /// `P_a = budget − P_c`, available for artificial noise.
    pub residual: f64,
    /// KKT multiplier of the power (water-filling) or MSE (min-power) constraint.
    pub dual: f64,
}

impl PowerAllocation {
    fn new(powers: Vec<f64>, budget: f64, dual: f64) -> Self {
        let consumed: f64 = powers.iter().sum();
        Self {
            powers,
            consumed,
            residual: (budget - consumed).max(0.0),
            dual,
        }
    }
}

/// `Σ σ_z² / (σ_i² p_i + σ_z²)`.
pub fn mse_objective(sigma: &[f64], noise_var: f64, powers: &[f64]) -> f64 {
    sigma
        .iter()
        .zip(powers)
        .map(|(s, p)| noise_var / (s * s * p + noise_var))
        .sum()
}

/// Validated gains `a_i = σ_i²/σ_z²` with their descending order.
struct Gains {
    a: Vec<f64>,
    order: Vec<usize>,
    /// Streams with strictly positive gain.
    active_max: usize,
}

fn gains(sigma: &[f64], noise_var: f64, budget: f64) -> Result<Gains> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::Input(format!("noise variance must be positive, got {noise_var}")));
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::Input(format!("power budget must be non-negative, got {budget}")));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(Error::Input(format!("singular values must be finite and non-negative, got {s}")));
    }
    let a: Vec<f64> = sigma.iter().map(|s| s * s / noise_var).collect();
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    let active_max = a.iter().filter(|&&x| x > 0.0).count();
    Ok(Gains { a, order, active_max })
}

/// Minimizes the MSE subject to `Σ p_i ≤ budget`.
///
/// With `t = 1/√μ` the optimum is `p_i = t/√a_i − 1/a_i` on the active set
/// `{i : t√a_i > 1}`, where `t = (P + Σ 1/a_i) / Σ 1/√a_i` over that set.
pub fn solve_waterfill_mse(sigma: &[f64], noise_var: f64, budget: f64) -> Result<PowerAllocation> {
    let g = gains(sigma, noise_var, budget)?;
    let mut powers = vec![0.0; sigma.len()];
    if g.active_max == 0 {
        return Ok(PowerAllocation::new(powers, budget, 0.0));
    }
    if budget == 0.0 {
        let dual = g.a[g.order[0]];
        return Ok(PowerAllocation::new(powers, budget, dual));
    }
    let (mut inv_sum, mut inv_sqrt_sum) = (0.0, 0.0);
    let mut best = None;
    for k in 0..g.active_max {
        let a = g.a[g.order[k]];
        inv_sum += 1.0 / a;
        inv_sqrt_sum += 1.0 / a.sqrt();
        let t = (budget + inv_sum) / inv_sqrt_sum;
        if t * a.sqrt() > 1.0 {
            best = Some((k + 1, t));
        }
    }
    let (k, t) = best.expect("the strongest stream is always active for a positive budget");
    for &i in &g.order[..k] {
        let a = g.a[i];
        powers[i] = (t / a.sqrt() - 1.0 / a).max(0.0);
    }
    Ok(PowerAllocation::new(powers, budget, 1.0 / (t * t)))
}

/// Minimizes `Σ p_i` subject to an MSE no larger than `mse_cap`.
///
/// With `s = 1/√ν` the optimum is `p_i = (√a_i/s − 1)/a_i` on the active set
/// `{i : √a_i > s}`, where `s = (γ − (n − k)) / Σ 1/√a_i` over the `k` active
/// streams. A cap that needs more than `budget` is reported as
/// [`Error::Infeasible`] with the best MSE the full budget can reach.
pub fn solve_minpower_mse(
    sigma: &[f64],
    noise_var: f64,
    budget: f64,
    mse_cap: f64,
) -> Result<PowerAllocation> {
    let g = gains(sigma, noise_var, budget)?;
    if !(mse_cap > 0.0) || !mse_cap.is_finite() {
        return Err(Error::Input(format!("MSE cap must be positive, got {mse_cap}")));
    }
    let n = sigma.len();
    let mut powers = vec![0.0; n];
    if mse_cap >= n as f64 {
        return Ok(PowerAllocation::new(powers, budget, 0.0));
    }
    let infeasible = || -> Result<PowerAllocation> {
        let best = solve_waterfill_mse(sigma, noise_var, budget)?;
        Err(Error::Infeasible {
            cap: mse_cap,
            best_mse: mse_objective(sigma, noise_var, &best.powers),
        })
    };

    let mut inv_sqrt_sum = 0.0;
    let mut found = None;
    for k in 0..g.active_max {
        let sqrt_a = g.a[g.order[k]].sqrt();
        inv_sqrt_sum += 1.0 / sqrt_a;
        let slack = mse_cap - (n - (k + 1)) as f64;
        if slack <= 0.0 {
            continue;
        }
        let s = slack / inv_sqrt_sum;
        let next = if k + 1 < g.active_max { g.a[g.order[k + 1]].sqrt() } else { 0.0 };
        if sqrt_a > s && s >= next {
            found = Some((k + 1, s));
            break;
        }
    }
    let Some((k, s)) = found else {
        return infeasible();
    };
    for &i in &g.order[..k] {
        let a = g.a[i];
        powers[i] = ((a.sqrt() / s - 1.0) / a).max(0.0);
    }
    let total: f64 = powers.iter().sum();
    if total > budget * (1.0 + 1e-12) {
        return infeasible();
    }
    Ok(PowerAllocation::new(powers, budget, 1.0 / (s * s)))
}
