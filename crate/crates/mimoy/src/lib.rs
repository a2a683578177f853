//! Simulation laboratory for distributed user scheduling in the MIMO-Y relay
//! channel.
//!
//! Three clusters of multi-antenna users exchange pairwise unicasts through a
//! single amplify-and-forward relay. The crate implements the two transmission
//! chains (minimum-user-antenna joint beamforming with a variable-gain relay,
//! and equal-relay/user-antenna local beamforming with a fixed-gain relay),
//! the centralized and distributed cluster-wise/group-wise scheduling
//! criteria, timer/beacon contention protocols with overhead accounting,
//! closed-form outage bounds with their high-SNR approximations, and a
//! deterministic trial-parallel Monte Carlo harness that validates the
//! analytics against simulation.
//!
//! Modules mirror the system layers:
//!
//! - [`mathkit`]: complex linear-algebra kernels (null spaces, angles,
//!   chordal distances, Hermitian eigenvalues, Haar sampling)
//! - [`channel`]: network configuration, fading realizations, reference
//!   signal space
//! - [`minua`] / [`erua`]: the two transmission chains and their
//!   post-processing stream SNRs
//! - [`scheduling`]: the six selection criteria plus the chordal variant
//! - [`protocol`]: timer-based contention and progressive feedback with
//!   message/bit/computation ledgers
//! - [`analysis`]: outage bound evaluators, special functions, diversity
//!   slope fitting, DMT
//! - [`harness`]: Monte Carlo engine with Wilson intervals and common random
//!   numbers

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod erua;
mod error;
pub mod harness;
pub mod mathkit;
pub mod minua;
pub mod protocol;
pub mod scheduling;

pub use error::{Error, Result};
