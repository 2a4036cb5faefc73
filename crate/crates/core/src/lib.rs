//! Hierarchical MDS coded computation for straggler-resilient distributed
//! matrix multiplication.
//!
//! Workers are organised in `n2` groups. Each group runs an inner
//! `(n1, k1)` MDS code and the groups together carry an outer `(n2, k2)`
//! code, so a submaster can decode as soon as any `k1` of its workers report
//! and the master as soon as any `k2` submasters report.
//!
//! The crate covers:
//! - [`mds_codec`] and [`hierarchical`]: encoding and the two-stage decode,
//! - [`latency`]: the exponential latency model and order statistics,
//! - [`bounds`]: the Markov-chain lower bound and closed-form upper bounds,
//! - [`sim`]: reproducible Monte Carlo estimation of `E[T]`,
//! - [`cost_model`]: computing time and decode cost of competing schemes.

pub mod bounds;
pub mod cost_model;
pub mod hierarchical;
pub mod latency;
pub mod matrix;
pub mod mds_codec;
pub mod rng;
pub mod sim;

pub use latency::{HomogeneousParams, LatencyParams};
pub use matrix::Matrix;
pub use sim::Estimate;
