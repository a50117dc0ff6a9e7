//! Secure transmit filter design.

mod an;
mod filter;
mod power;

pub use an::{an_basis, generate_an, generate_an_with, AnPowerMode, NullSpaceProjector};
pub use filter::{
    design_an_filter, design_an_filter_blocks, design_mse_filter, design_mse_filter_blocks,
    svd_baseline_filter, svd_baseline_filter_blocks, SecureFilterSet, SubcarrierPrecoder, TransmitFilter,
};
pub use power::{mse_objective, solve_minpower_mse, solve_waterfill_mse, PowerAllocation};
