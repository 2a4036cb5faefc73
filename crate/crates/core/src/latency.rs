//! Exponential latency model for the homogeneous `(n1, k1) x (n2, k2)` scheme.
//!
//! Worker `w(i, j)` finishes after `T_{i,j} ~ Exp(mu1)` and group `i` needs a
//! further `T_i^(c) ~ Exp(mu2)` to reach the master, all independent. Group `i`
//! is done at `S_i`, the `k1`-th smallest of its worker times, and the job at
//! `T`, the `k2`-th smallest of `T_i^(c) + S_i`. Decode time is not part of `T`.

use std::cmp::Ordering;

use rand_distr::{Beta, Distribution};
use thiserror::Error;

use crate::rng::{exponential, Role, StreamKey};

#[derive(Debug, Error, PartialEq)]
pub enum LatencyError {
    #[error("rates must be finite and strictly positive (mu1={mu1}, mu2={mu2})")]
    InvalidRates { mu1: f64, mu2: f64 },
    #[error("need 1 <= k <= n, got n={n}, k={k}")]
    InvalidOrder { n: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyParams {
    mu1: f64,
    mu2: f64,
}

impl LatencyParams {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self, LatencyError> {
        let ok = |m: f64| m.is_finite() && m > 0.0;
        if !ok(mu1) || !ok(mu2) {
            return Err(LatencyError::InvalidRates { mu1, mu2 });
        }
        Ok(Self { mu1, mu2 })
    }

    /// Worker completion rate.
    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    /// Group-to-master communication rate.
    pub fn mu2(&self) -> f64 {
        self.mu2
    }
}

/// `(n1, k1) x (n2, k2)` with every group using the same inner code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HomogeneousParams {
    pub n1: usize,
    pub k1: usize,
    pub n2: usize,
    pub k2: usize,
}

impl HomogeneousParams {
    pub fn new(n1: usize, k1: usize, n2: usize, k2: usize) -> Result<Self, LatencyError> {
        for (n, k) in [(n1, k1), (n2, k2)] {
            if k == 0 || k > n {
                return Err(LatencyError::InvalidOrder { n, k });
            }
        }
        Ok(Self { n1, k1, n2, k2 })
    }

    pub fn workers(&self) -> usize {
        self.n1 * self.n2
    }
}

/// `H_k = 1 + 1/2 + ... + 1/k`, with `H_0 = 0`.
pub fn harmonic(k: usize) -> f64 {
    harmonic_diff(k, 0)
}

/// `H_n - H_m` for `m <= n`, summed over `1/(m+1) .. 1/n` directly so that
/// large nearby arguments do not cancel.
pub fn harmonic_diff(n: usize, m: usize) -> f64 {
    assert!(m <= n, "harmonic_diff needs m <= n");
    (m + 1..=n).rev().map(|l| 1.0 / l as f64).sum()
}

/// Mean of the `k`-th smallest of `n` i.i.d. `Exp(mu)` variables, `(H_n - H_{n-k}) / mu`.
pub fn expected_order_stat(n: usize, k: usize, mu: f64) -> Result<f64, LatencyError> {
    if k == 0 || k > n {
        return Err(LatencyError::InvalidOrder { n, k });
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(LatencyError::InvalidRates { mu1: mu, mu2: mu });
    }
    Ok(harmonic_diff(n, n - k) / mu)
}

/// One draw of every latency in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// `n2` rows of `n1` worker times.
    pub worker_times: Vec<Vec<f64>>,
    pub comm_times: Vec<f64>,
    pub seed: u64,
    pub trial: u64,
}

/// Draws all `n1 * n2` worker times and `n2` communication times for trial
/// `trial` from the `(seed, trial)` substreams.
pub fn sample_realization(
    params: &HomogeneousParams,
    lat: &LatencyParams,
    seed: u64,
    trial: u64,
) -> Realization {
    let mut wrng = StreamKey::new(seed, trial, Role::Worker).rng();
    let worker_times = (0..params.n2)
        .map(|_| (0..params.n1).map(|_| exponential(&mut wrng, lat.mu1)).collect())
        .collect();
    Realization {
        worker_times,
        comm_times: sample_comm_times(params.n2, lat, seed, trial),
        seed,
        trial,
    }
}

/// The `n2` communication times of a trial. Independent of `n1` and of how
/// worker times are drawn, so different schemes see the same values.
pub fn sample_comm_times(n2: usize, lat: &LatencyParams, seed: u64, trial: u64) -> Vec<f64> {
    let mut crng = StreamKey::new(seed, trial, Role::Comm).rng();
    (0..n2).map(|_| exponential(&mut crng, lat.mu2)).collect()
}

/// Draws `S_i` for every group directly from its distribution: the `k1`-th
/// of `n1` uniforms satisfies `1 - U_(k1) ~ Beta(n1 - k1 + 1, k1)`, and
/// `S = -ln(1 - U_(k1)) / mu1`. One draw per group instead of `n1`.
pub fn sample_group_times_direct(
    params: &HomogeneousParams,
    lat: &LatencyParams,
    seed: u64,
    trial: u64,
) -> Vec<f64> {
    let beta = Beta::new((params.n1 - params.k1 + 1) as f64, params.k1 as f64)
        .expect("shape parameters are positive");
    let mut wrng = StreamKey::new(seed, trial, Role::Worker).rng();
    (0..params.n2)
        .map(|_| {
            let mut v: f64 = beta.sample(&mut wrng);
            while v <= 0.0 {
                v = beta.sample(&mut wrng);
            }
            -v.ln() / lat.mu1
        })
        .collect()
}

/// Index-stable ordering: ties resolve to the lower index.
fn by_value_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// The `k`-th smallest (1-based) element of `values`, returned with its index.
pub fn kth_smallest(values: &[f64], k: usize) -> (f64, usize) {
    assert!(k >= 1 && k <= values.len(), "k={k} out of range for {} values", values.len());
    let mut tagged: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
    let (_, kth, _) = tagged.select_nth_unstable_by(k - 1, by_value_then_index);
    *kth
}

/// `S_i`, the `k1`-th fastest worker of each group.
pub fn group_times(r: &Realization, k1: usize) -> Vec<f64> {
    r.worker_times.iter().map(|row| kth_smallest(row, k1).0).collect()
}

/// `k2`-th smallest of `T_i^(c) + S_i`.
pub fn completion_time(group_times: &[f64], comm_times: &[f64], k2: usize) -> f64 {
    let arrivals: Vec<f64> = comm_times.iter().zip(group_times).map(|(c, s)| c + s).collect();
    kth_smallest(&arrivals, k2).0
}

/// Total computation time `T` of one realization.
pub fn total_time(r: &Realization, k1: usize, k2: usize) -> f64 {
    completion_time(&group_times(r, k1), &r.comm_times, k2)
}

/// All worker times pooled and sorted ascending: `T_(1) <= ... <= T_(n1 n2)`.
pub fn pooled_order_stats(r: &Realization) -> Vec<f64> {
    let mut all: Vec<f64> = r.worker_times.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all
}
