//! Binary-firing neuron networks embedded in a unit cube, trained by a
//! matrix-form co-firing rule with reward modulation, memory consolidation,
//! and novelty-driven intrinsic reward — plus the environments and the
//! experiment harness used to exercise them.
//!
//! The crate is organised around four pieces:
//!
//! * [`network`] — the substrate: spatial topology, threshold firing, and
//!   action readout from the output slice.
//! * [`learning`] — the plasticity rules: the paired-snapshot update, five
//!   direct-reward strategies, the summing reward neuron, novelty measures,
//!   and consolidation.
//! * [`env`] — small deterministic environments: XOR, mountain car (discrete
//!   and continuous), pendulum, a two-pattern frame stream, and a jump-runner.
//! * [`harness`] — experiment loop, logging, snapshots, and analysis tools
//!   (preferred-stimulus probing, heatmap export, log summaries).

pub mod config;
pub mod encode;
pub mod env;
pub mod error;
pub mod harness;
pub mod learning;
pub mod matrix;
pub mod network;

pub use config::{
    Encoding, EnvSpec, ExperimentConfig, MemoryMode, NetworkConfig, RewardSource, RewardStrategy,
    StdpMode,
};
pub use error::Error;
pub use matrix::Matrix;
pub use network::{FiringState, Network, NeuronRole};
