//! Noise-based logic over clocked stochastic spike trains.
//!
//! Binary spike trains on a discrete clock act as logic carriers. The crate
//! covers the whole pipeline:
//!
//! - [`spikes`]: seeded train generation, orthogonal sets, superposition,
//!   parity folds, coincidence counts, and the train file formats.
//! - [`coincidence`]: presence/absence readout of a component inside a
//!   superposition, with closed-form undecided and false-positive curves.
//! - [`gates`]: threshold neurons with excitatory and inhibitory inputs,
//!   the three-neuron XOR block, and N-wide parity fold circuits.
//! - [`protocol`]: two-party string verification through hyperspace parity
//!   signals, including the lossy channel and Monte Carlo validation.
//! - [`cli`]: the `noise-logic` command-line front end.
//!
//! Every random quantity is drawn from a labeled ChaCha stream rooted at an
//! explicit 64-bit seed, so any result can be reproduced bit for bit. The
//! `examples/` directory has one runnable walkthrough per capability; start
//! with `cargo run --release --example string_verification`.

pub mod cli;
pub mod coincidence;
mod error;
pub mod gates;
pub mod protocol;
pub mod spikes;

pub use error::{Error, Result};
pub use spikes::{ClockConfig, OrthogonalSet, SpikeTrain, Superposition};
