//! Batch reinforcement-learning lab built around least-squares policy
//! iteration (LSPI) with non-deterministic policy improvement.
//!
//! The crate bundles everything needed to study how the stochasticity of the
//! policy-improvement step affects the stability of batch RL with linear
//! value-function approximation:
//!
//! * [`navsim`] — a deterministic continuous navigation simulator with
//!   U-shaped and S-shaped worlds and random-walk batch collection,
//! * [`features`] — trigonometric Fourier state features and the
//!   state ⊗ action-indicator composition used for linear Q-functions,
//! * [`sfa`] — sparse-kernel slow feature analysis as a learned alternative
//!   state representation,
//! * [`policy`] — greedy / softmax / ε-greedy improvement operators with
//!   optional per-state Q-value normalization,
//! * [`lspi`] — soft-LSTD system assembly and the LSPI outer loop,
//! * [`bench`] — greedy evaluation, γ×β×seed sweeps, CSV and SVG reporting.
//!
//! All randomness flows through seeded [`rng`] streams so that every batch,
//! sweep and evaluation is reproducible bit-for-bit.

pub mod bench;
pub mod error;
pub mod features;
pub mod lspi;
pub mod navsim;
pub mod policy;
pub mod rng;
pub mod sfa;

pub use error::{Error, Result};
