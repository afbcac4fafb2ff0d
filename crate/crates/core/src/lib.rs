//! Capacity of additive-noise channels `Y = f(X) + N` under average cost
//! constraints, with heavy-tailed (alpha-stable) noise in scope.
//!
//! The crate evaluates noise densities and tail envelopes, computes
//! capacity-achieving discrete inputs with KKT certification, and classifies
//! whether the optimal input support is compact or unbounded.

pub mod capacity;
pub mod channel;
pub mod classify;
pub mod error;
pub mod noise;
pub mod quad;

pub use capacity::{CapacityResult, DiscreteInput, KktReport, SolverConfig};
pub use channel::{ChannelInstance, CostFunction, Growth, InputMap};
pub use classify::{SupportKind, SupportVerdict};
pub use error::{Error, Result};
pub use noise::{NoiseSpec, StableParams, TailEnvelopes};
pub use quad::QuadratureConfig;
