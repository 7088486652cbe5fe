//! Simulation and analysis of BB84 without public announcement of bases,
//! followed by two-way classical post-processing.
//!
//! - [`channel`]: qubit records, Pauli noise, adversaries, basis sequences.
//! - [`session`]: the two-party protocol and its public transcript.
//! - [`distill`]: B and P steps, public estimates and schedules on bit strings.
//! - [`gf2`]: linear codes and coset reconciliation for the final one-way step.
//! - [`belldiag`]: the same steps as exact maps on Bell-diagonal error
//!   distributions, used for threshold and schedule analysis.
//!
//! The numeric core is generic over the scalar type; the aliases below fix
//! it to `f64`.

pub mod belldiag;
pub mod channel;
pub mod distill;
pub mod error;
pub mod gf2;
pub mod scalar;
pub mod session;

pub use error::{Error, Result};
pub use scalar::{Prob, RealProb};

pub type BellDiagonalF64 = belldiag::BellDiagonal<f64>;
pub type BellDiagonalF32 = belldiag::BellDiagonal<f32>;
pub type PauliChannelF64 = channel::PauliChannel<f64>;
pub type PauliChannelF32 = channel::PauliChannel<f32>;
pub type ThresholdReportF64 = belldiag::ThresholdReport<f64>;
pub type InitialConditionF64 = belldiag::InitialCondition<f64>;
