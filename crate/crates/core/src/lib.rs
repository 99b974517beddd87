//! Monte Carlo simulator for buffer-aided relay selection with multi-antenna
//! nodes.
//!
//! A source and a destination, each with `M` antennas, communicate directly
//! or through one of `N` half-duplex decode-and-forward relays with FIFO
//! buffers of `J` packets. Every slot one link is selected by either the
//! minimum-distance (MMD) or the quadratic-norm (QN) criterion, `M` packets
//! are spatially multiplexed over it and detected by exhaustive ML search.
//!
//! Modules, bottom up:
//!
//! - [`constellation`]: BPSK/QPSK mappers, candidate vectors, difference sets.
//! - [`channel`]: Rayleigh MIMO draws, channel-estimation error, noise.
//! - [`detection`]: ML detection.
//! - [`selection`]: link metrics and per-slot mode decisions.
//! - [`protocol`]: buffers, packet flow and the slot loop.
//! - [`analysis`]: pairwise error probability and operation counts.
//! - [`experiment`]: SNR campaigns, PEP sweeps, CSV output.
//!
//! All randomness flows from a single `u64` seed through [`rng::StreamSeed`],
//! so results are reproducible and independent of [`exec::Execution`].

pub mod analysis;
pub mod channel;
pub mod constellation;
pub mod detection;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod protocol;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
