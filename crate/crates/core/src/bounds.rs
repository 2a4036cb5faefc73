//! Bounds on `E[T]` for the homogeneous `(n1, k1) x (n2, k2)` scheme.
//!
//! The lower bound replaces each group's finishing time `S_i` by the
//! `(i k1)`-th pooled worker order statistic, which can only be earlier. Its
//! mean is the expected hitting time of a continuous-time Markov chain on
//! states `(u, v)`: `u` workers finished, `v` groups delivered to the master.
//!
//! - `(u, v) -> (u + 1, v)` at rate `(n1 n2 - u) mu1` while `u < n2 k1`,
//! - `(u, v) -> (u, v + 1)` at rate `(floor(u / k1) - v) mu2` while
//!   `v < min(floor(u / k1), k2)`,
//!
//! absorbed once `v = k2`. Both moves increase `u + v`, so the chain is a DAG
//! and the hitting time follows from one backward pass.

use std::collections::HashMap;

use thiserror::Error;

use crate::latency::{harmonic, harmonic_diff, pooled_order_stats, sample_realization, HomogeneousParams, LatencyParams};
use crate::sim::{monte_carlo, Estimate, SimError};

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("delta1 must be positive, got {0}")]
    InvalidDelta(f64),
    #[error("need 1 <= k2 <= n2, got n2={n2}, k2={k2}")]
    InvalidOuter { n2: usize, k2: usize },
    #[error("bounds are defined for homogeneous inner codes only")]
    NotHomogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainState {
    /// Completed workers.
    pub u: usize,
    /// Groups delivered to the master.
    pub v: usize,
}

#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub params: HomogeneousParams,
    pub lat: LatencyParams,
    /// Reachable states in `(u, v)` lexicographic order, which is a
    /// topological order of the transition graph.
    pub states: Vec<ChainState>,
    /// Outgoing `(successor index, rate)` per state; empty on the target set.
    pub transitions: Vec<Vec<(usize, f64)>>,
    index: HashMap<ChainState, usize>,
}

impl ChainSpec {
    pub fn index_of(&self, s: ChainState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn successors(&self, s: ChainState) -> &[(usize, f64)] {
        self.index_of(s).map_or(&[], |i| &self.transitions[i])
    }

    /// Rate of the edge `from -> to`, if there is one.
    pub fn rate(&self, from: ChainState, to: ChainState) -> Option<f64> {
        let to = self.index_of(to)?;
        self.successors(from).iter().find(|(s, _)| *s == to).map(|(_, r)| *r)
    }

    pub fn is_target(&self, s: ChainState) -> bool {
        s.v == self.params.k2
    }
}

/// Enumerates every state reachable from `(0, 0)` with its exit rates.
pub fn build_chain(params: &HomogeneousParams, lat: &LatencyParams) -> ChainSpec {
    let HomogeneousParams { n1, k1, n2, k2 } = *params;
    let u_max = n2 * k1;
    let mut states = Vec::new();
    for u in 0..=u_max {
        for v in 0..=(u / k1).min(k2) {
            states.push(ChainState { u, v });
        }
    }
    let index: HashMap<ChainState, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let transitions = states
        .iter()
        .map(|&ChainState { u, v }| {
            let mut out = Vec::with_capacity(2);
            if v == k2 {
                return out;
            }
            if v * k1 <= u && u < u_max {
                out.push((index[&ChainState { u: u + 1, v }], (n1 * n2 - u) as f64 * lat.mu1()));
            }
            let activated = u / k1;
            if v < activated.min(k2) {
                out.push((index[&ChainState { u, v: v + 1 }], (activated - v) as f64 * lat.mu2()));
            }
            out
        })
        .collect();
    ChainSpec { params: *params, lat: *lat, states, transitions, index }
}

/// Expected hitting time of `{v = k2}` from `(0, 0)` by first-step analysis:
/// `E[s] = (1 + sum_t rate(s, t) E[t]) / R(s)` with `R(s)` the total exit rate,
/// evaluated in reverse topological order.
pub fn lower_bound(chain: &ChainSpec) -> f64 {
    let mut expected = vec![0.0; chain.states.len()];
    for i in (0..chain.states.len()).rev() {
        let edges = &chain.transitions[i];
        if edges.is_empty() {
            debug_assert!(chain.is_target(chain.states[i]));
            continue;
        }
        let total: f64 = edges.iter().map(|(_, r)| r).sum();
        let onward: f64 = edges.iter().map(|(s, r)| r * expected[*s]).sum();
        expected[i] = (1.0 + onward) / total;
    }
    expected[0]
}

/// Direct simulation of `E[k2-th min_i (T_i^(c) + T_(i k1))]`, pairing the
/// `i`-th communication draw with the `(i k1)`-th pooled order statistic.
pub fn mc_lower_bound(
    params: &HomogeneousParams,
    lat: &LatencyParams,
    trials: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Estimate, SimError> {
    monte_carlo(trials, threads, |t| {
        let r = sample_realization(params, lat, seed, t);
        let pooled = pooled_order_stats(&r);
        let surrogate: Vec<f64> = (1..=params.n2).map(|i| pooled[i * params.k1 - 1]).collect();
        crate::latency::completion_time(&surrogate, &r.comm_times, params.k2)
    })
}

/// Waiting for every worker and then for the `k2`-th of `n2` communications:
/// `H_{n1 n2} / mu1 + (H_{n2} - H_{n2 - k2}) / mu2`.
pub fn upper_bound_allworkers(params: &HomogeneousParams, lat: &LatencyParams) -> f64 {
    harmonic(params.workers()) / lat.mu1() + harmonic_diff(params.n2, params.n2 - params.k2) / lat.mu2()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBound {
    pub value: f64,
    /// Always true: the vanishing-in-`k1` remainder is not included, so the
    /// value is only an upper bound in the large-`k1` limit.
    pub vanishing_term_dropped: bool,
}

/// `ln((1 + delta1) / delta1) / mu1 + (H_{n2} - H_{n2 - k2}) / mu2` for
/// `n1 = (1 + delta1) k1`, without the `o(1)` remainder.
pub fn upper_bound_asymptotic(
    delta1: f64,
    n2: usize,
    k2: usize,
    lat: &LatencyParams,
) -> Result<AsymptoticBound, BoundsError> {
    if !(delta1 > 0.0 && delta1.is_finite()) {
        return Err(BoundsError::InvalidDelta(delta1));
    }
    if k2 == 0 || k2 > n2 {
        return Err(BoundsError::InvalidOuter { n2, k2 });
    }
    let intra = (1.0 / delta1).ln_1p() / lat.mu1();
    Ok(AsymptoticBound {
        value: intra + harmonic_diff(n2, n2 - k2) / lat.mu2(),
        vanishing_term_dropped: true,
    })
}
