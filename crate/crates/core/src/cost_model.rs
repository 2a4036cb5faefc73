//! Computing time and decoding cost of replication, hierarchical, product and
//! polynomial codes at equal total workers `n = n1 n2` and equal dimension
//! `k = k1 k2`, combined as `T_exec = T_comp + alpha * T_dec`.
//!
//! Decoding an `(n, k)` MDS code costs `k^beta`. The leading constant of
//! every cost term is 1 for every scheme; only the ordering of schemes and
//! the location of crossovers in `alpha` are meaningful.

use std::fmt;

use thiserror::Error;

use crate::latency::{harmonic, harmonic_diff, LatencyParams};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("product code needs n/k > 1, got {0}")]
    ProductRedundancy(f64),
    #[error("hierarchical computing time needs an E[T] estimate")]
    MissingExpectedTime,
    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Replication,
    Hierarchical,
    Product,
    Polynomial,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Replication, Scheme::Hierarchical, Scheme::Product, Scheme::Polynomial];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Replication => "replication",
            Scheme::Hierarchical => "hierarchical",
            Scheme::Product => "product",
            Scheme::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub n1: usize,
    pub k1: usize,
    pub n2: usize,
    pub k2: usize,
    /// Decode exponent, `> 1`.
    pub beta: f64,
    /// Weight of decoding cost, `>= 0`.
    pub alpha: f64,
    pub lat: LatencyParams,
}

impl SchemeParams {
    pub fn new(
        (n1, k1): (usize, usize),
        (n2, k2): (usize, usize),
        beta: f64,
        alpha: f64,
        lat: LatencyParams,
    ) -> Result<Self, CostError> {
        if k1 == 0 || k1 > n1 || k2 == 0 || k2 > n2 {
            return Err(CostError::InvalidParams(format!("({n1},{k1})x({n2},{k2})")));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(CostError::InvalidParams(format!("beta must exceed 1, got {beta}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(CostError::InvalidParams(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self { n1, k1, n2, k2, beta, alpha, lat })
    }

    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn k(&self) -> usize {
        self.k1 * self.k2
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }
}

/// Computing time of `scheme`. The hierarchical entry is `E[T]` itself and
/// must be supplied (typically a Monte Carlo estimate).
pub fn comp_time(scheme: Scheme, p: &SchemeParams, expected_t: Option<f64>) -> Result<f64, CostError> {
    let (n, k) = (p.n(), p.k());
    let mu2 = p.lat.mu2();
    match scheme {
        Scheme::Replication => Ok(k as f64 * harmonic(k) / (n as f64 * mu2)),
        Scheme::Hierarchical => expected_t.ok_or(CostError::MissingExpectedTime),
        Scheme::Product => {
            let r = n as f64 / k as f64;
            if r <= 1.0 {
                return Err(CostError::ProductRedundancy(r));
            }
            let s = r.sqrt();
            Ok(((s + r.powf(0.25)) / (s - 1.0)).ln() / mu2)
        }
        Scheme::Polynomial => Ok(harmonic_diff(n, n - k) / mu2),
    }
}

/// Normalised decode cost for real-valued `k1`, `k2` (used by ratio scans
/// where `k1 = k2^p` need not be an integer).
pub fn decode_cost(scheme: Scheme, k1: f64, k2: f64, beta: f64) -> f64 {
    match scheme {
        Scheme::Replication => 0.0,
        // n2 parallel inner decodes, then k1 outer decodes.
        Scheme::Hierarchical => k1.powf(beta) + k1 * k2.powf(beta),
        Scheme::Product => k1 * k2.powf(beta) + k2 * k1.powf(beta),
        Scheme::Polynomial => k1.powf(beta) * k2.powf(beta),
    }
}

pub fn dec_cost(scheme: Scheme, p: &SchemeParams) -> f64 {
    decode_cost(scheme, p.k1 as f64, p.k2 as f64, p.beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeReport {
    pub scheme: Scheme,
    pub t_comp: f64,
    pub t_dec: f64,
    pub t_exec: f64,
}

pub fn exec_time(scheme: Scheme, p: &SchemeParams, expected_t: Option<f64>) -> Result<SchemeReport, CostError> {
    let t_comp = comp_time(scheme, p, expected_t)?;
    let t_dec = dec_cost(scheme, p);
    Ok(SchemeReport { scheme, t_comp, t_dec, t_exec: t_comp + p.alpha * t_dec })
}

/// `T_exec` of all four schemes at one `alpha`, in [`Scheme::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub alpha: f64,
    pub reports: [SchemeReport; 4],
}

impl CompareRow {
    pub fn t_exec(&self, scheme: Scheme) -> f64 {
        self.reports.iter().find(|r| r.scheme == scheme).map(|r| r.t_exec).expect("all schemes present")
    }

    /// The unique minimiser of `T_exec`, or `None` on an exact tie.
    pub fn argmin(&self) -> Option<Scheme> {
        let best = self.reports.iter().map(|r| r.t_exec).fold(f64::INFINITY, f64::min);
        let mut winners = self.reports.iter().filter(|r| r.t_exec == best);
        let first = winners.next()?;
        winners.next().is_none().then_some(first.scheme)
    }
}

pub fn compare_over_alpha(p: &SchemeParams, alphas: &[f64], expected_t: f64) -> Result<Vec<CompareRow>, CostError> {
    alphas
        .iter()
        .map(|&alpha| {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(CostError::InvalidParams(format!("alpha must be >= 0, got {alpha}")));
            }
            let q = p.with_alpha(alpha);
            let mut reports = [SchemeReport { scheme: Scheme::Replication, t_comp: 0.0, t_dec: 0.0, t_exec: 0.0 }; 4];
            for (slot, scheme) in reports.iter_mut().zip(Scheme::ALL) {
                *slot = exec_time(scheme, &q, Some(expected_t))?;
            }
            Ok(CompareRow { alpha, reports })
        })
        .collect()
}

/// `n` points evenly spaced in `log10` between `start` and `stop` inclusive.
pub fn log_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.log10(), stop.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub k2: f64,
    pub p: f64,
    pub beta: f64,
    /// `k2^p`.
    pub k1: f64,
    pub product: f64,
    pub hierarchical: f64,
    /// `product / hierarchical`.
    pub ratio: f64,
}

/// Product-to-hierarchical decode-cost ratios with `k1 = k2^p`, one row per
/// `(k2, p, beta)` in nested order `k2`, then `beta`, then `p`.
pub fn decode_cost_ratio_scan(k2s: &[f64], ps: &[f64], betas: &[f64]) -> Vec<RatioRow> {
    let mut rows = Vec::with_capacity(k2s.len() * ps.len() * betas.len());
    for &k2 in k2s {
        for &beta in betas {
            for &p in ps {
                let k1 = k2.powf(p);
                let product = decode_cost(Scheme::Product, k1, k2, beta);
                let hierarchical = decode_cost(Scheme::Hierarchical, k1, k2, beta);
                rows.push(RatioRow { k2, p, beta, k1, product, hierarchical, ratio: product / hierarchical });
            }
        }
    }
    rows
}

/// True when, for each fixed `(k2, beta)`, the ratio is nondecreasing in `p`.
pub fn ratio_monotone_in_p(rows: &[RatioRow]) -> bool {
    let mut sorted: Vec<&RatioRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.k2.total_cmp(&b.k2).then(a.beta.total_cmp(&b.beta)).then(a.p.total_cmp(&b.p))
    });
    sorted
        .windows(2)
        .filter(|w| w[0].k2 == w[1].k2 && w[0].beta == w[1].beta)
        .all(|w| w[0].ratio <= w[1].ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params(alpha: f64) -> SchemeParams {
        SchemeParams::new((800, 400), (40, 20), 2.0, alpha, LatencyParams::new(10.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn polynomial_comp_time() {
        let direct: f64 = (24001..=32000).map(|l| 1.0 / l as f64).sum();
        let v = comp_time(Scheme::Polynomial, &reference_params(0.0), None).unwrap();
        assert!((v - direct).abs() < 1e-12);
        assert!((v - 0.287684).abs() < 1e-5);
    }

    #[test]
    fn product_comp_time() {
        let p = SchemeParams::new((4, 1), (4, 4), 2.0, 0.0, LatencyParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.n() / p.k(), 4);
        let v = comp_time(Scheme::Product, &p, None).unwrap();
        assert!((v - (2.0 + 2f64.sqrt()).ln()).abs() < 1e-12);
        assert!((v - 1.227947).abs() < 5e-7);
        let flat = SchemeParams::new((2, 2), (3, 3), 2.0, 0.0, LatencyParams::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(comp_time(Scheme::Product, &flat, None), Err(CostError::ProductRedundancy(1.0)));
    }

    #[test]
    fn replication_comp_time() {
        let h8000: f64 = (1..=8000).map(|l| 1.0 / l as f64).sum();
        let v = comp_time(Scheme::Replication, &reference_params(0.0), None).unwrap();
        assert!((v - 8000.0 * h8000 / 32000.0).abs() < 1e-12);
        assert!((v - 2.3910).abs() < 5e-4);
    }

    #[test]
    fn decode_costs_at_beta_two() {
        let p = reference_params(0.0);
        assert_eq!(dec_cost(Scheme::Hierarchical, &p), 320_000.0);
        assert_eq!(dec_cost(Scheme::Product, &p), 3_360_000.0);
        assert_eq!(dec_cost(Scheme::Replication, &p), 0.0);
        assert_eq!(dec_cost(Scheme::Polynomial, &p), 64_000_000.0);
    }

    #[test]
    fn decode_cost_monotone() {
        for s in [Scheme::Hierarchical, Scheme::Product, Scheme::Polynomial] {
            assert!(decode_cost(s, 10.0, 5.0, 2.5) > decode_cost(s, 10.0, 5.0, 2.0));
            assert!(decode_cost(s, 11.0, 5.0, 2.0) > decode_cost(s, 10.0, 5.0, 2.0));
            assert!(decode_cost(s, 10.0, 6.0, 2.0) > decode_cost(s, 10.0, 5.0, 2.0));
        }
    }

    #[test]
    fn zero_alpha_is_comp_time() {
        let p = reference_params(0.0);
        for s in Scheme::ALL {
            let r = exec_time(s, &p, Some(0.75)).unwrap();
            assert_eq!(r.t_exec, r.t_comp);
        }
        assert_eq!(exec_time(Scheme::Hierarchical, &p, None), Err(CostError::MissingExpectedTime));
    }

    #[test]
    fn replication_wins_for_huge_alpha() {
        let rows = compare_over_alpha(&reference_params(0.0), &[1.0], 0.75).unwrap();
        assert_eq!(rows[0].argmin(), Some(Scheme::Replication));
    }

    #[test]
    fn ratio_scan_dominant_terms() {
        // k1 = k2^2, beta = 2: ratio (k2^4 + k2^5) / (2 k2^4) = (1 + k2) / 2.
        let rows = decode_cost_ratio_scan(&[10.0, 50.0], &[2.0], &[2.0]);
        assert!((rows[0].ratio - 5.5).abs() < 1e-9);
        assert!((rows[1].ratio - 25.5).abs() < 1e-9);
        // k1 = k2: ratio 2 k2 / (1 + k2) -> 2.
        let r = decode_cost_ratio_scan(&[1e6], &[1.0], &[2.0])[0].ratio;
        assert!((r - 2.0).abs() < 1e-5);
        let scan = decode_cost_ratio_scan(&[20.0], &[1.0, 1.5, 2.0], &[2.0]);
        assert!(ratio_monotone_in_p(&scan));
        // k1 = k2^1.5: numerator k2^3.5 + k2^4, denominator k2^3 + k2^3.5.
        let k = 20f64;
        assert!((scan[1].ratio - (k.powf(3.5) + k.powi(4)) / (k.powi(3) + k.powf(3.5))).abs() < 1e-9);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-12, 1e-2, 11);
        assert_eq!(g.len(), 11);
        assert!((g[0] - 1e-12).abs() < 1e-24);
        assert!((g[10] - 1e-2).abs() < 1e-14);
        assert!((g[1] - 1e-11).abs() < 1e-23);
    }
}
