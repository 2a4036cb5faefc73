//! CSV tables of floats and plain matrix files.

use std::path::Path;

use csv::{ReaderBuilder, Terminator, WriterBuilder};
use hiercode_core::Matrix;

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| fmt_f64(x))).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is ASCII")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut r = ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| CliError::Input(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                let rec = rec.map_err(|e| CliError::Input(e.to_string()))?;
                rec.iter().map(parse_f64).collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Input(format!("not a number: `{s}`")))
}

/// Row-major doubles, no header. Every row must have the same width.
pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_matrix(text: &str) -> Result<Matrix, CliError> {
    let mut r = ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Input(e.to_string()))?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(parse_f64).collect::<Result<Vec<_>, _>>()?);
    }
    if rows.is_empty() {
        return Err(CliError::Input("matrix file is empty".into()));
    }
    Matrix::from_rows(&rows).map_err(|e| CliError::Input(e.to_string()))
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5e-324, f64::MAX, -2.5e-7, 0.0, f64::INFINITY] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0 / 7.0, -3.0]);
        t.push(vec![1e300, f64::INFINITY]);
        let csv = t.to_csv();
        assert!(csv.starts_with("a,b\n") && !csv.contains('\r'));
        assert_eq!(Table::parse(&csv).unwrap(), t);
    }

    #[test]
    fn matrix_files() {
        let m = parse_matrix("1,2\n3.5, -4\n\n").unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(1, 1)], -4.0);
        assert_eq!(parse_matrix(&matrix_to_csv(&m)).unwrap(), m);
        assert!(parse_matrix("1,2\n3\n").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("1,x\n").is_err());
    }
}
