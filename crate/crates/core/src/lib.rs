//! MIMO-OFDM wiretap link simulator.
//!
//! Alice transmits `N_s` QPSK streams per subcarrier over a frequency-selective
//! channel to Bob while Eve listens through an independent channel. The crate
//! provides the channel model, the OFDM front end, MSE-optimal secure
//! precoding with optional artificial noise, linear MMSE receivers and a
//! reproducible Monte Carlo harness.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod frontend;
pub mod linalg;
pub mod precoding;
pub mod receiver;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
