//! Probabilistic amplitude shaping over staircase codes with hard-decision
//! decoding.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf`] and [`bch`]: GF(2^v) arithmetic and shortened BCH component codes.
//! * [`staircase`]: code geometry, the shaping-aware bit placement, streaming
//!   encoder and sliding-window iterative decoder.
//! * [`shaping`]: Maxwell-Boltzmann distributions, shaping-parameter
//!   optimisation and the constant-composition distribution matcher.
//! * [`modem`]: ASK labelling, amplitude/sign mappers, AWGN and MAP detection.
//! * [`rates`]: mutual information, hard-decision achievable rates, shaping
//!   gains, operating points and code-parameter search.
//! * [`sim`]: the end-to-end chain, Monte Carlo sweeps and result export.

pub mod bch;
pub mod error;
pub mod gf;
pub mod modem;
pub mod rates;
pub mod shaping;
pub mod sim;
pub mod staircase;

pub use error::{Error, Result};
