//! Monte Carlo estimation of `E[T]` and parameter sweeps with bounds.
//!
//! Trial `t` draws only from the `(seed, t)` substreams and writes its result
//! into slot `t`; the reduction then runs sequentially in index order. The
//! estimate is therefore bit-identical for any thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{self, BoundsError};
use crate::latency::{
    completion_time, group_times, sample_comm_times, sample_group_times_direct, sample_realization,
    HomogeneousParams, LatencyError, LatencyParams,
};

/// Below this many trials a sweep row's 3-sigma comparison is not meaningful.
pub const MIN_SWEEP_TRIALS: usize = 100;
pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("trial count must be at least {min}, got {got}")]
    TooFewTrials { got: usize, min: usize },
    #[error("sweep value {value} violates code constraints: {source}")]
    InvalidSweepPoint {
        value: usize,
        #[source]
        source: LatencyError,
    },
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// `sample_std / sqrt(trials)`; zero for a single trial.
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "estimate needs at least one sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, trials: n }
    }
}

/// How worker latencies are drawn in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    /// Every `T_{i,j}` is drawn and `S_i` selected from them.
    #[default]
    Full,
    /// `S_i` is drawn directly from its order-statistic law. Same distribution
    /// of `T`, far cheaper when `n1` is in the hundreds.
    OrderStatistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub sampler: Sampler,
}

/// Evaluates `f(trial)` for every trial index and reduces in index order.
pub fn monte_carlo<F>(trials: usize, threads: Option<usize>, f: F) -> Result<Estimate, SimError>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    if trials == 0 {
        return Err(SimError::TooFewTrials { got: 0, min: 1 });
    }
    let run = || (0..trials as u64).into_par_iter().map(&f).collect::<Vec<f64>>();
    let samples = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(Estimate::from_samples(&samples))
}

/// One trial of the total computation time `T`.
pub fn sample_total_time(
    params: &HomogeneousParams,
    lat: &LatencyParams,
    seed: u64,
    trial: u64,
    sampler: Sampler,
) -> f64 {
    match sampler {
        Sampler::Full => {
            let r = sample_realization(params, lat, seed, trial);
            completion_time(&group_times(&r, params.k1), &r.comm_times, params.k2)
        }
        Sampler::OrderStatistic => {
            let s = sample_group_times_direct(params, lat, seed, trial);
            let c = sample_comm_times(params.n2, lat, seed, trial);
            completion_time(&s, &c, params.k2)
        }
    }
}

/// Monte Carlo estimate of `E[T]`.
pub fn estimate_et(
    params: &HomogeneousParams,
    lat: &LatencyParams,
    trials: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Estimate, SimError> {
    monte_carlo(trials, opts.threads, |t| sample_total_time(params, lat, seed, t, opts.sampler))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Fixed `(n1, k1, n2)`, varying `k2`.
    K2 { n1: usize, k1: usize, n2: usize, k2: Vec<usize> },
    /// Fixed `(n2, k2)` and `n1 = (1 + delta1) k1`, varying `k1`.
    K1 { k1: Vec<usize>, delta1: f64, n2: usize, k2: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sweep: Sweep,
    pub lat: LatencyParams,
    pub trials: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub params: HomogeneousParams,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub lower_bound: f64,
    pub ub_allworkers: f64,
    pub ub_asymptotic: f64,
}

impl EstimateRow {
    /// `lower <= mean + z*stderr` and `min(upper bounds) >= mean - z*stderr`.
    pub fn sandwiched(&self, z: f64) -> bool {
        let slack = z * self.stderr;
        self.lower_bound <= self.mean + slack
            && self.ub_allworkers.min(self.ub_asymptotic) >= self.mean - slack
    }
}

impl SweepConfig {
    pub fn points(&self) -> Result<Vec<HomogeneousParams>, SimError> {
        match &self.sweep {
            Sweep::K2 { n1, k1, n2, k2 } => k2
                .iter()
                .map(|&k| {
                    HomogeneousParams::new(*n1, *k1, *n2, k)
                        .map_err(|source| SimError::InvalidSweepPoint { value: k, source })
                })
                .collect(),
            Sweep::K1 { k1, delta1, n2, k2 } => k1
                .iter()
                .map(|&k| {
                    let n1 = ((1.0 + delta1) * k as f64).round() as usize;
                    HomogeneousParams::new(n1, k, *n2, *k2)
                        .map_err(|source| SimError::InvalidSweepPoint { value: k, source })
                })
                .collect(),
        }
    }
}

/// One row per sweep point: simulated `E[T]` next to the lower bound and both
/// upper bounds. Every point reuses `base_seed`, so the points share random
/// numbers and are directly comparable.
pub fn run_sweep(cfg: &SweepConfig, opts: RunOptions) -> Result<Vec<EstimateRow>, SimError> {
    if cfg.trials < MIN_SWEEP_TRIALS {
        return Err(SimError::TooFewTrials { got: cfg.trials, min: MIN_SWEEP_TRIALS });
    }
    cfg.points()?
        .into_iter()
        .map(|p| {
            let est = estimate_et(&p, &cfg.lat, cfg.trials, cfg.base_seed, opts)?;
            let chain = bounds::build_chain(&p, &cfg.lat);
            let delta1 = p.n1 as f64 / p.k1 as f64 - 1.0;
            let ub_asymptotic = if delta1 > 0.0 {
                bounds::upper_bound_asymptotic(delta1, p.n2, p.k2, &cfg.lat)?.value
            } else {
                f64::INFINITY
            };
            Ok(EstimateRow {
                params: p,
                mean: est.mean,
                stderr: est.stderr,
                trials: est.trials,
                lower_bound: bounds::lower_bound(&chain),
                ub_allworkers: bounds::upper_bound_allworkers(&p, &cfg.lat),
                ub_asymptotic,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::{expected_order_stat, harmonic};

    fn lat(mu1: f64, mu2: f64) -> LatencyParams {
        LatencyParams::new(mu1, mu2).unwrap()
    }

    #[test]
    fn two_unit_exponentials() {
        let p = HomogeneousParams::new(1, 1, 1, 1).unwrap();
        let e = estimate_et(&p, &lat(1.0, 1.0), 1_000_000, 11, RunOptions::default()).unwrap();
        assert!((e.mean - 2.0).abs() <= 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn single_group_mean_is_order_stat_plus_comm() {
        let p = HomogeneousParams::new(8, 3, 1, 1).unwrap();
        let l = lat(4.0, 2.0);
        let e = estimate_et(&p, &l, 100_000, 5, RunOptions::default()).unwrap();
        let expected = expected_order_stat(8, 3, 4.0).unwrap() + 0.5;
        assert!((e.mean - expected).abs() <= 3.0 * e.stderr, "{e:?} vs {expected}");
    }

    #[test]
    fn thread_count_does_not_change_estimate() {
        let p = HomogeneousParams::new(10, 5, 10, 5).unwrap();
        let l = lat(10.0, 1.0);
        let one = RunOptions { threads: Some(1), ..Default::default() };
        let three = RunOptions { threads: Some(3), ..Default::default() };
        let a = estimate_et(&p, &l, 20_000, 77, one).unwrap();
        let b = estimate_et(&p, &l, 20_000, 77, three).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn samplers_agree_in_distribution() {
        let p = HomogeneousParams::new(12, 6, 6, 4).unwrap();
        let l = lat(10.0, 1.0);
        let full = estimate_et(&p, &l, 100_000, 9, RunOptions::default()).unwrap();
        let os = RunOptions { sampler: Sampler::OrderStatistic, ..Default::default() };
        let direct = estimate_et(&p, &l, 100_000, 9, os).unwrap();
        let tol = 3.0 * (full.stderr.powi(2) + direct.stderr.powi(2)).sqrt();
        assert!((full.mean - direct.mean).abs() <= tol, "{full:?} vs {direct:?}");
    }

    #[test]
    fn single_trial_estimate_is_that_sample() {
        let p = HomogeneousParams::new(3, 2, 3, 2).unwrap();
        let l = lat(10.0, 1.0);
        let e = estimate_et(&p, &l, 1, 4, RunOptions::default()).unwrap();
        assert_eq!(e.mean, sample_total_time(&p, &l, 4, 0, Sampler::Full));
        assert_eq!(e.stderr, 0.0);
        assert!(estimate_et(&p, &l, 0, 4, RunOptions::default()).is_err());
    }

    fn small_sweep(k2: Vec<usize>, trials: usize) -> SweepConfig {
        SweepConfig {
            sweep: Sweep::K2 { n1: 10, k1: 5, n2: 10, k2 },
            lat: lat(10.0, 1.0),
            trials,
            base_seed: 2018,
        }
    }

    #[test]
    fn empty_sweep_gives_no_rows() {
        assert!(run_sweep(&small_sweep(vec![], 1000), RunOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn sweep_rows_follow_points() {
        let rows = run_sweep(&small_sweep(vec![1, 4, 7], 2_000), RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().map(|r| r.params.k2).collect::<Vec<_>>(), vec![1, 4, 7]);
        for r in &rows {
            assert!(r.sandwiched(3.0), "{r:?}");
        }
        // Shared random numbers make the means nondecreasing in k2 exactly.
        assert!(rows.windows(2).all(|w| w[0].mean <= w[1].mean));
    }

    #[test]
    fn sweep_bound_columns_match_closed_forms() {
        let rows = run_sweep(&small_sweep(vec![5], 1_000), RunOptions::default()).unwrap();
        let r = &rows[0];
        let comm = harmonic(10) - harmonic(5);
        assert!((r.ub_allworkers - (harmonic(100) / 10.0 + comm)).abs() < 1e-12);
        assert!((r.ub_asymptotic - (2f64.ln() / 10.0 + comm)).abs() < 1e-12);
        // With the vanishing term dropped, the all-workers bound sits above the
        // asymptotic one at k1 = 5 (first terms 0.5187 vs 0.0693).
        assert!(r.ub_allworkers > r.ub_asymptotic);
    }

    #[test]
    fn sweep_rejects_invalid_points_and_tiny_trials() {
        assert!(matches!(
            run_sweep(&small_sweep(vec![11], 1000), RunOptions::default()),
            Err(SimError::InvalidSweepPoint { value: 11, .. })
        ));
        assert!(matches!(
            run_sweep(&small_sweep(vec![1], 10), RunOptions::default()),
            Err(SimError::TooFewTrials { .. })
        ));
    }

    #[test]
    fn k1_sweep_uses_delta() {
        let cfg = SweepConfig {
            sweep: Sweep::K1 { k1: vec![5, 50], delta1: 1.0, n2: 4, k2: 2 },
            lat: lat(10.0, 1.0),
            trials: 500,
            base_seed: 1,
        };
        let pts = cfg.points().unwrap();
        assert_eq!((pts[0].n1, pts[1].n1), (10, 100));
    }
}
