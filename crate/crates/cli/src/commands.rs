use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use hiercode_core::cost_model::{self, Scheme, SchemeParams};
use hiercode_core::hierarchical::{self, HierCodeParams, HierarchicalCode, WorkerId};
use hiercode_core::mds_codec::CodeParams;
use hiercode_core::sim::{self, RunOptions, Sweep, SweepConfig};
use hiercode_core::{HomogeneousParams, LatencyParams, Matrix};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CodecDemoConfig, ExperimentConfig};
use crate::error::CliError;
use crate::svg::{Chart, Series};
use crate::table::{self, Table};

/// What a subcommand produced. `files[0]` is the primary output and goes to
/// stdout when no output directory is given.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<(String, String)>,
    /// Human-readable summary, printed to stdout.
    pub summary: Option<String>,
    /// Set when the run finished but must exit nonzero.
    pub failure: Option<CliError>,
}

pub struct Context {
    pub cfg: ExperimentConfig,
    pub threads: Option<usize>,
    pub svg: bool,
}

fn latency(cfg: &ExperimentConfig) -> Result<LatencyParams, CliError> {
    Ok(LatencyParams::new(cfg.latency.mu1, cfg.latency.mu2)?)
}

pub fn bounds(ctx: &Context) -> Result<Report, CliError> {
    let b = &ctx.cfg.bounds;
    let sweep = SweepConfig {
        sweep: Sweep::K2 { n1: b.n1, k1: b.k1, n2: b.n2, k2: b.k2_values() },
        lat: latency(&ctx.cfg)?,
        trials: ctx.cfg.trials,
        base_seed: ctx.cfg.seed,
    };
    let rows = sim::run_sweep(&sweep, RunOptions { threads: ctx.threads, sampler: b.sampler.into() })?;

    let mut t = Table::new(&["k2", "mean", "stderr", "lower", "ub_allworkers", "ub_asymptotic"]);
    for r in &rows {
        t.push(vec![r.params.k2 as f64, r.mean, r.stderr, r.lower_bound, r.ub_allworkers, r.ub_asymptotic]);
    }
    let mut report = Report { files: vec![("bounds.csv".into(), t.to_csv())], ..Report::default() };
    if ctx.svg {
        let series = |name: &str, col: &str| Series {
            name: name.into(),
            points: t.column("k2").unwrap().into_iter().zip(t.column(col).unwrap()).collect(),
        };
        let chart = Chart {
            title: format!("E[T] and bounds, ({},{}) x ({},k2)", b.n1, b.k1, b.n2),
            x_label: "k2".into(),
            y_label: "time".into(),
            log_x: false,
            log_y: false,
            series: vec![
                series("simulated E[T]", "mean"),
                series("lower bound", "lower"),
                series("all-workers bound", "ub_allworkers"),
                series("asymptotic bound", "ub_asymptotic"),
            ],
        };
        report.files.push(("bounds.svg".into(), chart.render()));
    }
    Ok(report)
}

pub fn compare(ctx: &Context) -> Result<Report, CliError> {
    let c = &ctx.cfg.compare;
    let alphas = c.alphas();
    if alphas.is_empty() {
        return Err(CliError::Config("alpha grid is empty".into()));
    }
    let lat = latency(&ctx.cfg)?;
    let hp = HomogeneousParams::new(c.n1, c.k1, c.n2, c.k2)?;
    let opts = RunOptions { threads: ctx.threads, sampler: c.sampler.into() };
    let et = sim::estimate_et(&hp, &lat, ctx.cfg.trials, ctx.cfg.seed, opts)?;
    let p = SchemeParams::new((c.n1, c.k1), (c.n2, c.k2), c.beta, 0.0, lat)?;
    let rows = cost_model::compare_over_alpha(&p, &alphas, et.mean)?;

    let mut header = vec!["alpha"];
    header.extend(Scheme::ALL.iter().map(|s| s.name()));
    let mut t = Table::new(&header);
    for r in &rows {
        let mut v = vec![r.alpha];
        v.extend(Scheme::ALL.iter().map(|&s| r.t_exec(s)));
        t.push(v);
    }
    let mut report = Report { files: vec![("compare.csv".into(), t.to_csv())], ..Report::default() };
    if ctx.svg {
        let chart = Chart {
            title: format!("T_exec, ({},{}) x ({},{}), beta={}", c.n1, c.k1, c.n2, c.k2, c.beta),
            x_label: "alpha".into(),
            y_label: "T_exec".into(),
            log_x: true,
            log_y: true,
            series: Scheme::ALL
                .iter()
                .map(|&s| Series {
                    name: s.name().into(),
                    points: rows.iter().map(|r| (r.alpha, r.t_exec(s))).collect(),
                })
                .collect(),
        };
        report.files.push(("compare.svg".into(), chart.render()));
    }
    Ok(report)
}

pub fn ratio(ctx: &Context) -> Result<Report, CliError> {
    let r = &ctx.cfg.ratio;
    let rows = cost_model::decode_cost_ratio_scan(&r.k2, &r.p, &r.beta);
    let mut t = Table::new(&["k2", "p", "beta", "k1", "product", "hierarchical", "ratio"]);
    for row in &rows {
        t.push(vec![row.k2, row.p, row.beta, row.k1, row.product, row.hierarchical, row.ratio]);
    }
    let mut report = Report { files: vec![("ratio.csv".into(), t.to_csv())], ..Report::default() };
    if ctx.svg {
        let mut series: BTreeMap<(u64, u64), Series> = BTreeMap::new();
        for row in &rows {
            series
                .entry((row.beta.to_bits(), row.p.to_bits()))
                .or_insert_with(|| Series { name: format!("p={}, beta={}", row.p, row.beta), points: Vec::new() })
                .points
                .push((row.k2, row.ratio));
        }
        let chart = Chart {
            title: "product / hierarchical decode cost, k1 = k2^p".into(),
            x_label: "k2".into(),
            y_label: "ratio".into(),
            log_x: false,
            log_y: true,
            series: series.into_values().collect(),
        };
        report.files.push(("ratio.svg".into(), chart.render()));
    }
    Ok(report)
}

pub fn codec_demo(ctx: &Context) -> Result<Report, CliError> {
    let d = &ctx.cfg.codec_demo;
    let params = demo_params(d)?;
    let code = HierarchicalCode::new(params.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);

    let a = match &d.matrix {
        Some(p) => table::read_matrix(p)?,
        None => random_matrix(&mut rng, d.rows, d.cols)?,
    };
    let x = match &d.vector {
        Some(p) => {
            let v = table::read_matrix(p)?;
            Matrix::column(v.as_slice())
        }
        None => random_matrix(&mut rng, a.cols(), 1)?,
    };
    if x.rows() != a.cols() {
        return Err(CliError::Input(format!("x has {} entries but A has {} columns", x.rows(), a.cols())));
    }
    let b = random_matrix(&mut rng, a.rows(), d.b_cols)?;
    let erased = erasures(d, &params, &mut rng)?;

    let mut s = String::new();
    let inner: Vec<String> = (0..params.groups())
        .map(|g| format!("({},{})", params.inner(g).n(), params.inner(g).k()))
        .collect();
    let _ = writeln!(s, "outer code: ({},{})", params.outer().n(), params.outer().k());
    let _ = writeln!(s, "inner codes: {}", inner.join(" "));
    let _ = writeln!(s, "A: {}x{}, B: {}x{}", a.rows(), a.cols(), b.rows(), b.cols());
    let mut listed: Vec<String> = erased.iter().map(|w| format!("({},{})", w.group, w.index)).collect();
    if listed.is_empty() {
        listed.push("none".into());
    }
    let _ = writeln!(s, "erased workers: {}", listed.join(" "));

    let reference = a.matmul(&x).map_err(|e| CliError::Input(e.to_string()))?;
    let tasks = code.encode_matvec(&a).map_err(|e| CliError::Input(e.to_string()))?;
    let results: BTreeMap<WorkerId, Matrix> = tasks
        .tasks
        .iter()
        .filter(|(w, _)| !erased.contains(w))
        .map(|(w, t)| Ok((*w, hierarchical::worker_compute_matvec(t, &x)?)))
        .collect::<Result<_, hierarchical::SchemeError>>()
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut report = Report::default();
    let decoded = match code.decode_matvec(&results, tasks.padding_rows) {
        Ok(m) => m,
        Err(e) => {
            let tier = e.tier().map_or(String::new(), |t| format!(" (tier {t})"));
            let _ = writeln!(s, "status: decode failed{tier}: {e}");
            report.failure = Some(CliError::Numerical(format!("decode failed{tier}: {e}")));
            report.files.push(("codec_demo.txt".into(), s.clone()));
            report.summary = Some(s);
            return Ok(report);
        }
    };
    let err_ax = decoded.max_rel_error(&reference);
    let identical = decoded.as_slice().iter().zip(reference.as_slice()).all(|(p, q)| p.to_bits() == q.to_bits());
    let _ = writeln!(s, "A x max relative error: {err_ax:.3e}");
    let _ = writeln!(s, "A x bitwise identical: {identical}");

    let mm = code.encode_matmat(&a, &b).map_err(|e| CliError::Input(e.to_string()))?;
    let outputs: BTreeMap<WorkerId, Matrix> = mm
        .tasks
        .iter()
        .filter(|(w, _)| !erased.contains(w))
        .map(|(w, (ab, bb))| Ok((*w, hierarchical::worker_compute_matmat(ab, bb)?)))
        .collect::<Result<_, hierarchical::SchemeError>>()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let atb = code
        .matmat_decode_pipeline(&outputs, mm.a_cols, mm.b_cols)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let atb_ref = a.transpose().matmul(&b).map_err(|e| CliError::Input(e.to_string()))?;
    let err_atb = atb.max_rel_error(&atb_ref);
    let _ = writeln!(s, "A^T B max relative error: {err_atb:.3e}");

    let worst = err_ax.max(err_atb);
    if worst.is_nan() || worst > d.tolerance {
        let _ = writeln!(s, "status: error {worst:.3e} exceeds tolerance {:.3e}", d.tolerance);
        report.failure = Some(CliError::Numerical(format!("relative error {worst:.3e} above tolerance {:.3e}", d.tolerance)));
    } else {
        let _ = writeln!(s, "status: ok");
    }
    report.files.push(("codec_demo.txt".into(), s.clone()));
    report.files.push(("ax_decoded.csv".into(), table::matrix_to_csv(&decoded)));
    report.files.push(("ax_reference.csv".into(), table::matrix_to_csv(&reference)));
    report.files.push(("atb_decoded.csv".into(), table::matrix_to_csv(&atb)));
    report.summary = Some(s);
    Ok(report)
}

fn demo_params(d: &CodecDemoConfig) -> Result<HierCodeParams, CliError> {
    let cfg_err = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
    match &d.inner {
        None => HierCodeParams::homogeneous(d.n1, d.k1, d.n2, d.k2).map_err(|e| cfg_err(&e)),
        Some(list) => {
            let outer = CodeParams::new(d.n2, d.k2).map_err(|e| cfg_err(&e))?;
            let inner = list
                .iter()
                .map(|&[n, k]| CodeParams::new(n, k))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| cfg_err(&e))?;
            HierCodeParams::new(outer, inner).map_err(|e| cfg_err(&e))
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<Matrix, CliError> {
    if rows == 0 || cols == 0 {
        return Err(CliError::Config(format!("matrix size must be positive, got {rows}x{cols}")));
    }
    Ok(Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)))
}

fn erasures(d: &CodecDemoConfig, params: &HierCodeParams, rng: &mut ChaCha8Rng) -> Result<BTreeSet<WorkerId>, CliError> {
    let n2 = params.groups();
    let mut erased = BTreeSet::new();
    let drop_group = |g: usize, erased: &mut BTreeSet<WorkerId>| {
        for j in 0..params.inner(g).n() {
            erased.insert(WorkerId::new(g, j));
        }
    };
    if d.random_threshold {
        let groups = index::sample(rng, n2, n2 - params.outer().k()).into_vec();
        for g in 0..n2 {
            if groups.contains(&g) {
                drop_group(g, &mut erased);
            } else {
                let c = params.inner(g);
                for j in index::sample(rng, c.n(), c.n() - c.k()) {
                    erased.insert(WorkerId::new(g, j));
                }
            }
        }
        return Ok(erased);
    }
    for &g in &d.drop_groups {
        if g >= n2 {
            return Err(CliError::Config(format!("drop_groups: group {g} out of range (n2={n2})")));
        }
        drop_group(g, &mut erased);
    }
    for &[g, j] in &d.drop_workers {
        if g >= n2 || j >= params.inner(g).n() {
            return Err(CliError::Config(format!("drop_workers: worker ({g},{j}) does not exist")));
        }
        erased.insert(WorkerId::new(g, j));
    }
    Ok(erased)
}
