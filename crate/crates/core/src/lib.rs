//! Simulation and security analysis of two-party quantum bit-commitment
//! protocols on finite communication trees.
//!
//! The crate is organized in layers:
//!
//! - [`numerics`]: dense complex linear algebra, Haar sampling, mutually
//!   unbiased bases, maximally entangled states.
//! - [`hybrid`]: classical-quantum hybrid states and operators (direct sums
//!   of weighted density matrices indexed by classical message histories).
//! - [`channels`]: quantum channels between hybrid systems, Stinespring
//!   dilations, channel fidelities and distance estimators, the isometry
//!   alignment optimizer, and special channel constructions (randomizing,
//!   depolarizing, measure-and-prepare, energy truncation).
//! - [`protocol`]: the communication-tree protocol engine with strategy
//!   validation, execution, local purification, Bob's strategy register,
//!   concealment measurement and constructive cheat synthesis.
//! - [`instances`]: concrete protocols (Bell commitment, anonymous-state
//!   commitment, the notarized shredder commitment and the decoherence
//!   monster commitment) with dedicated security evaluators.
//! - [`report`]: reproducible machine-readable report schema shared with the
//!   command-line front end.

pub mod channels;
pub mod drivers;
pub mod error;
pub mod hybrid;
pub mod instances;
pub mod numerics;
pub mod protocol;
pub mod report;

pub use error::{Error, Result};
