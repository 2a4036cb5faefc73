//! Experiment configuration: one TOML file with a table per subcommand.
//!
//! Every table is optional and falls back to the reference experiment
//! settings. Unknown keys anywhere are rejected. Scalars can be overridden
//! from the command line with `--set table.key=value` before validation.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::{Table, Value};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 2018;
pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub latency: LatencyConfig,
    pub bounds: BoundsConfig,
    pub compare: CompareConfig,
    pub ratio: RatioConfig,
    pub codec_demo: CodecDemoConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            latency: LatencyConfig::default(),
            bounds: BoundsConfig::default(),
            compare: CompareConfig::default(),
            ratio: RatioConfig::default(),
            codec_demo: CodecDemoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LatencyConfig {
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self { mu1: 10.0, mu2: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub n1: usize,
    pub k1: usize,
    pub n2: usize,
    /// Defaults to `1..=n2`.
    pub k2: Option<Vec<usize>>,
    pub sampler: SamplerChoice,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { n1: 10, k1: 5, n2: 10, k2: None, sampler: SamplerChoice::Full }
    }
}

impl BoundsConfig {
    pub fn k2_values(&self) -> Vec<usize> {
        self.k2.clone().unwrap_or_else(|| (1..=self.n2).collect())
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    Full,
    OrderStatistic,
}

impl From<SamplerChoice> for hiercode_core::sim::Sampler {
    fn from(s: SamplerChoice) -> Self {
        match s {
            SamplerChoice::Full => Self::Full,
            SamplerChoice::OrderStatistic => Self::OrderStatistic,
        }
    }
}

/// `points` values log-spaced from `start` to `stop` inclusive.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self { start: 1e-12, stop: 1e-2, points: 41 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub n1: usize,
    pub k1: usize,
    pub n2: usize,
    pub k2: usize,
    pub beta: f64,
    /// Explicit alpha values; takes precedence over `alpha_grid`.
    pub alpha: Option<Vec<f64>>,
    pub alpha_grid: AlphaGrid,
    pub sampler: SamplerChoice,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            n1: 800,
            k1: 400,
            n2: 40,
            k2: 20,
            beta: 2.0,
            alpha: None,
            alpha_grid: AlphaGrid::default(),
            sampler: SamplerChoice::OrderStatistic,
        }
    }
}

impl CompareConfig {
    pub fn alphas(&self) -> Vec<f64> {
        match &self.alpha {
            Some(a) => a.clone(),
            None => hiercode_core::cost_model::log_grid(
                self.alpha_grid.start,
                self.alpha_grid.stop,
                self.alpha_grid.points,
            ),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RatioConfig {
    pub k2: Vec<f64>,
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            k2: vec![10.0, 20.0, 50.0],
            p: vec![1.0, 1.5, 2.0],
            beta: vec![2.0],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CodecDemoConfig {
    pub n1: usize,
    pub k1: usize,
    pub n2: usize,
    pub k2: usize,
    /// Per-group `[n1, k1]` pairs; overrides `n1`/`k1` when present.
    pub inner: Option<Vec<[usize; 2]>>,
    /// Size of the generated `A` when `matrix` is not given.
    pub rows: usize,
    pub cols: usize,
    /// Columns of the generated `B` for the `A^T B` run.
    pub b_cols: usize,
    /// CSV file holding `A` (row-major, no header).
    pub matrix: Option<PathBuf>,
    /// CSV file holding `x`, one value per line or a single row.
    pub vector: Option<PathBuf>,
    /// Erased workers as `[group, index]`, 0-based.
    pub drop_workers: Vec<[usize; 2]>,
    /// Erased groups, 0-based.
    pub drop_groups: Vec<usize>,
    /// Ignore the lists above and erase a seeded random threshold pattern:
    /// `n2 - k2` groups, then `n1 - k1` workers in each remaining group.
    pub random_threshold: bool,
    pub tolerance: f64,
}

impl Default for CodecDemoConfig {
    fn default() -> Self {
        Self {
            n1: 3,
            k1: 2,
            n2: 3,
            k2: 2,
            inner: None,
            rows: 8,
            cols: 4,
            b_cols: 2,
            matrix: None,
            vector: None,
            drop_workers: vec![[0, 0], [1, 2]],
            drop_groups: vec![2],
            random_threshold: false,
            tolerance: 1e-9,
        }
    }
}

/// Reads `path` (if any), applies `key=value` overrides and validates.
/// Relative file paths inside the config resolve against its directory.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut cfg: ExperimentConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    if let Some(base) = path.and_then(Path::parent) {
        for p in [&mut cfg.codec_demo.matrix, &mut cfg.codec_demo.vector].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(cfg)
}

/// `a.b.c=value`, where the value is parsed as a TOML literal and falls back
/// to a bare string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let value = parse_literal(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        assert_eq!(load(None, &[]).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[bounds]\nn1 = 10\nbogus = 3\n").unwrap();
        assert!(matches!(load(Some(&p), &[]), Err(CliError::Config(_))));
        std::fs::write(&p, "colour = 1\n").unwrap();
        assert!(load(Some(&p), &[]).is_err());
    }

    #[test]
    fn overrides_reach_nested_scalars() {
        let cfg = load(None, &["bounds.n1=600".into(), "latency.mu2 = 2.5".into(), "compare.sampler=full".into()])
            .unwrap();
        assert_eq!(cfg.bounds.n1, 600);
        assert_eq!(cfg.latency.mu2, 2.5);
        assert_eq!(cfg.compare.sampler, SamplerChoice::Full);
        assert!(load(None, &["trials".into()]).is_err());
        assert!(load(None, &["nope.x=1".into()]).is_err());
    }

    #[test]
    fn relative_paths_follow_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[codec_demo]\nmatrix = \"a.csv\"\n").unwrap();
        let cfg = load(Some(&p), &[]).unwrap();
        assert_eq!(cfg.codec_demo.matrix.unwrap(), dir.path().join("a.csv"));
    }

    #[test]
    fn default_alpha_grid_spans_ten_decades() {
        let a = CompareConfig::default().alphas();
        assert_eq!(a.len(), 41);
        assert!((a[0] / 1e-12 - 1.0).abs() < 1e-12 && (a[40] / 1e-2 - 1.0).abs() < 1e-12);
    }
}
