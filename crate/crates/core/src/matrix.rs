//! Dense row-major real matrices and the small amount of linear algebra the
//! codecs need (products, stacking, splitting, inversion by partial pivoting).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: {op} on {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("ragged rows: row {row} has {got} columns, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("cannot split {len} into {parts} equal parts")]
    UnevenSplit { len: usize, parts: usize },
    #[error("matrix is singular (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(MatrixError::Ragged { row: i, got: row.len(), expected: cols });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    /// A `len x 1` column vector.
    pub fn column(values: &[f64]) -> Self {
        Self { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Matrix) -> Result<(), MatrixError> {
        if self.shape() != other.shape() {
            return Err(MatrixError::DimensionMismatch {
                op: "axpy",
                left: self.shape(),
                right: other.shape(),
            });
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn vstack(parts: &[Matrix]) -> Result<Matrix, MatrixError> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(MatrixError::DimensionMismatch {
                    op: "vstack",
                    left: (rows, cols),
                    right: p.shape(),
                });
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn hstack(parts: &[Matrix]) -> Result<Matrix, MatrixError> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if let Some(bad) = parts.iter().find(|p| p.rows != rows) {
            return Err(MatrixError::DimensionMismatch {
                op: "hstack",
                left: (rows, 0),
                right: bad.shape(),
            });
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(p.row(r));
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Splits into `parts` row blocks of equal height.
    pub fn split_rows(&self, parts: usize) -> Result<Vec<Matrix>, MatrixError> {
        if parts == 0 || !self.rows.is_multiple_of(parts) {
            return Err(MatrixError::UnevenSplit { len: self.rows, parts });
        }
        let h = self.rows / parts;
        Ok((0..parts).map(|p| self.slice_rows(p * h, (p + 1) * h)).collect())
    }

    /// Splits into `parts` column blocks of equal width.
    pub fn split_cols(&self, parts: usize) -> Result<Vec<Matrix>, MatrixError> {
        if parts == 0 || !self.cols.is_multiple_of(parts) {
            return Err(MatrixError::UnevenSplit { len: self.cols, parts });
        }
        let w = self.cols / parts;
        Ok((0..parts).map(|p| self.slice_cols(p * w, (p + 1) * w)).collect())
    }

    pub fn slice_rows(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn slice_cols(&self, start: usize, end: usize) -> Matrix {
        Matrix::from_fn(self.rows, end - start, |r, c| self[(r, start + c)])
    }

    /// Appends zero rows until the row count is `rows`.
    pub fn pad_rows(&self, rows: usize) -> Matrix {
        let mut data = self.data.clone();
        data.resize(rows.max(self.rows) * self.cols, 0.0);
        Matrix { rows: rows.max(self.rows), cols: self.cols, data }
    }

    /// Appends zero columns until the column count is `cols`.
    pub fn pad_cols(&self, cols: usize) -> Matrix {
        let cols = cols.max(self.cols);
        Matrix::from_fn(self.rows, cols, |r, c| if c < self.cols { self[(r, c)] } else { 0.0 })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max elementwise deviation, relative to the largest entry of `reference`
    /// (absolute when the reference is identically zero).
    pub fn max_rel_error(&self, reference: &Matrix) -> f64 {
        assert_eq!(self.shape(), reference.shape(), "shape mismatch in max_rel_error");
        let diff = self
            .data
            .iter()
            .zip(&reference.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = reference.max_abs();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, a[(r, col)]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty pivot range");
            if pivot.abs() <= scale * f64::EPSILON * n as f64 {
                return Err(MatrixError::Singular { column: col, pivot });
            }
            a.swap_rows(col, pivot_row);
            inv.swap_rows(col, pivot_row);
            let p = a[(col, col)];
            for c in 0..n {
                a[(col, c)] /= p;
                inv[(col, c)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a[(r, c)] -= f * a[(col, c)];
                    inv[(r, c)] -= f * inv[(col, c)];
                }
            }
        }
        Ok(inv)
    }

    /// 1-norm condition number, `inf` when singular.
    pub fn condition_number(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm1() * inv.norm1(),
            Err(_) => f64::INFINITY,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_permuted_matrix_needs_pivoting() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let inv = m.inverse().unwrap();
        let prod = m.matmul(&inv).unwrap();
        assert!(prod.max_rel_error(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(m.inverse(), Err(MatrixError::Singular { .. })));
        assert!(m.condition_number().is_infinite());
    }

    #[test]
    fn split_and_stack_are_inverse() {
        let m = Matrix::from_fn(6, 4, |r, c| (r * 4 + c) as f64);
        let rows = m.split_rows(3).unwrap();
        assert_eq!(Matrix::vstack(&rows).unwrap(), m);
        let cols = m.split_cols(2).unwrap();
        assert_eq!(Matrix::hstack(&cols).unwrap(), m);
        assert!(m.split_rows(4).is_err());
    }

    #[test]
    fn matmul_rejects_bad_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        assert!(a.matmul(&b).is_err());
        assert_eq!(a.matmul(&b.transpose()).unwrap().shape(), (2, 2));
    }

    #[test]
    fn padding_appends_zeros() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let p = m.pad_rows(3).pad_cols(3);
        assert_eq!(p.shape(), (3, 3));
        assert_eq!(p[(0, 1)], 2.0);
        assert_eq!(p[(2, 2)], 0.0);
    }
}
