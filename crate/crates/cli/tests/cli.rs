use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hiercode_cli::table::{parse_matrix, Table};
use hiercode_core::cost_model::{comp_time, Scheme, SchemeParams};
use hiercode_core::LatencyParams;

fn hiercode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiercode")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_table(path: &Path) -> Table {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    Table::parse(&text).unwrap()
}

#[test]
fn codec_demo_default_recovers_product() {
    let o = hiercode(&["codec-demo"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let err: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("A x max relative error: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-9);
    assert!(text.contains("status: ok"));
}

#[test]
fn codec_demo_reports_tier_one_failure() {
    let o = hiercode(&["codec-demo", "--set", "codec_demo.drop_workers=[[0,0],[0,1]]"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tier 1"));
}

#[test]
fn codec_demo_reports_tier_two_failure() {
    let o = hiercode(&["codec-demo", "--set", "codec_demo.drop_groups=[0,2]", "--set", "codec_demo.drop_workers=[]"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tier 2"));
}

#[test]
fn codec_demo_tolerance_violation_exits_3() {
    let o = hiercode(&["codec-demo", "--set", "codec_demo.tolerance=0.0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn identity_code_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[codec_demo]\nn1 = 1\nk1 = 1\nn2 = 1\nk2 = 1\ndrop_workers = []\ndrop_groups = []\n").unwrap();
    let out = dir.path().join("out");
    let o = hiercode(&["codec-demo", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("A x bitwise identical: true"));
    assert_eq!(fs::read(out.join("ax_decoded.csv")).unwrap(), fs::read(out.join("ax_reference.csv")).unwrap());
}

#[test]
fn codec_demo_reads_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "1,2,3\n4,5,6\n7,8,9\n10,11,12\n-1,0,1\n").unwrap();
    fs::write(dir.path().join("x.csv"), "1\n-2\n0.5\n").unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[codec_demo]\nmatrix = \"a.csv\"\nvector = \"x.csv\"\n").unwrap();
    let out = dir.path().join("out");
    let o = hiercode(&["codec-demo", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let y = parse_matrix(&fs::read_to_string(out.join("ax_decoded.csv")).unwrap()).unwrap();
    let want = [-1.5, -3.0, -4.5, -6.0, -0.5];
    for (got, want) in y.as_slice().iter().zip(want) {
        assert!((got - want).abs() < 1e-12);
    }

    let missing = hiercode(&["codec-demo", "--set", "codec_demo.matrix=\"/nonexistent/a.csv\""]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bounds_csv_has_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = hiercode(&["bounds", "--trials", "500", "--out", dir.path().to_str().unwrap(), "--svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&dir.path().join("bounds.csv"));
    assert_eq!(t.header, ["k2", "mean", "stderr", "lower", "ub_allworkers", "ub_asymptotic"]);
    assert_eq!(t.column("k2").unwrap(), (1..=10).map(f64::from).collect::<Vec<_>>());
    assert!(t.rows.iter().all(|r| r[3] <= r[4]));
    assert!(fs::read_to_string(dir.path().join("bounds.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn bounds_stdout_equals_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bounds", "--trials", "300", "--set", "bounds.k2=[2,4]"];
    let o = hiercode(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", dir.path().to_str().unwrap()]);
    assert_eq!(hiercode(&with_out).status.code(), Some(0));
    assert_eq!(o.stdout, fs::read(dir.path().join("bounds.csv")).unwrap());
    let t = Table::parse(&stdout(&o)).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.to_csv(), stdout(&o));
}

#[test]
fn compare_at_zero_alpha_is_computing_time() {
    let o = hiercode(&["compare", "--trials", "2000", "--set", "compare.alpha=[0.0, 1e-6]"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::parse(&stdout(&o)).unwrap();
    assert_eq!(t.header, ["alpha", "replication", "hierarchical", "product", "polynomial"]);
    let lat = LatencyParams::new(10.0, 1.0).unwrap();
    let p = SchemeParams::new((800, 400), (40, 20), 2.0, 0.0, lat).unwrap();
    for (col, scheme) in [(1, Scheme::Replication), (3, Scheme::Product), (4, Scheme::Polynomial)] {
        assert_eq!(t.rows[0][col], comp_time(scheme, &p, None).unwrap());
    }
    for r in &t.rows {
        assert!(r[2] < r[3]);
    }
}

#[test]
fn ratio_never_below_one() {
    let o = hiercode(&["ratio", "--set", "ratio.k2=[2.0, 7.0, 30.0]", "--set", "ratio.beta=[1.5, 2.0, 3.0]"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Table::parse(&stdout(&o)).unwrap();
    assert_eq!(t.header, ["k2", "p", "beta", "k1", "product", "hierarchical", "ratio"]);
    assert_eq!(t.rows.len(), 27);
    assert!(t.column("ratio").unwrap().iter().all(|&r| r >= 1.0));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[bounds]\nn1 = 10\nk3 = 2\n").unwrap();
    for args in [
        vec!["bounds", "--config", cfg.to_str().unwrap()],
        vec!["bounds", "--config", "/nonexistent.toml"],
        vec!["bounds", "--svg"],
        vec!["bounds", "--trials", "10"],
        vec!["compare", "--set", "compare.alpha=[]"],
        vec!["compare", "--set", "compare.k1=900"],
        vec!["codec-demo", "--set", "codec_demo.drop_groups=[7]"],
        vec!["ratio", "--threads", "0"],
    ] {
        let o = hiercode(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            hiercode_cli::config::load(Some(&path), &[]).unwrap();
            n += 1;
        }
    }
    assert!(n >= 4);
}
