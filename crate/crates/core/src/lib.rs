//! Simulation-based search for Hex.
//!
//! Three searchers share one small policy-value network: Monte Carlo Search
//! (root bandit over fixed-policy simulations), Monte Carlo Tree Search
//! (PUCT at every node) and Policy Gradient Search, which fine-tunes a private
//! copy of the policy head with REINFORCE while it searches. Around them sit an
//! Expert Iteration trainer, a round-robin tournament harness with
//! Bradley-Terry Elo estimation, and an exact solver for small boards.
//!
//! The numeric core is generic over [`Scalar`]; [`Net`] (single precision) is
//! what training and play use, [`NetF64`] exists for gradient verification.

pub mod arena;
pub mod exit;
pub mod hex;
pub mod net;
pub mod search;

mod scalar;
mod seed;

pub use scalar::Scalar;
pub use seed::derive_seed;

pub type Net = net::PolicyValueNet<f32>;
pub type NetF64 = net::PolicyValueNet<f64>;
pub type Head = net::PolicyHead<f32>;
pub type Features = net::TrunkFeatures<f32>;
