//! Exact construction and verification of hard-instance ReLU networks.
//!
//! The crate builds compressible Boolean families (parities, Learning with
//! Rounding functions, a keyed toy), lifts them to Gaussian-input ReLU
//! networks with the sign/soft-indicator gadgets, and checks the resulting
//! identities exactly over rationals. Around that core it simulates
//! statistical-query oracles, measures pairwise independence of finite
//! families, plays the adversarial-oracle game, and runs the Gaussian
//! elimination attack that learns lifted parities from raw examples.

pub mod attacks;
pub mod cli;
pub mod families;
pub mod gadgets;
pub mod lift;
pub mod rational;
pub mod relu_ir;
pub mod rng;
pub mod sq;
pub mod stats;

pub use rational::Rational;
pub use relu_ir::ReluNetwork;
