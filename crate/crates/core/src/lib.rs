//! Decentralized finite-sum optimization over simulated synchronous networks.
//!
//! The crate implements GT-SARAH (local SARAH-type variance reduction fused with
//! gradient tracking) alongside the DSGD and DSGT baselines, the lazy Metropolis
//! weight construction, step-size and complexity calculators, and an experiment
//! engine that records stationary gaps against epochs.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases at
//! the crate root fix the common double precision case.

pub mod algorithms;
pub mod data;
pub mod engine;
pub mod graph;
pub mod objective;
mod scalar;

pub use scalar::Scalar;

pub type MixingMatrix64 = graph::MixingMatrix<f64>;
pub type MixingMatrix32 = graph::MixingMatrix<f32>;
pub type LogisticDataset64 = objective::LogisticDataset<f64>;
pub type QuadraticProblem64 = objective::QuadraticProblem<f64>;
pub type NetworkState64 = algorithms::NetworkState<f64>;
pub type RunConfig64 = algorithms::RunConfig<f64>;
pub type RunTrace64 = engine::RunTrace<f64>;
