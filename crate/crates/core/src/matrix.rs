use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::vector::{self, C64, ZERO};

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        Ok(Self {
            rows,
            cols,
            data: vector::zeros(rows * cols),
        })
    }

    /// Builds a matrix from column-major entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        Error::check_len("matrix entries", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_columns<I, V>(rows: usize, columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[C64]>,
    {
        let mut data = Vec::new();
        let mut cols = 0;
        for col in columns {
            let col = col.as_ref();
            Error::check_len("matrix column", rows, col.len())?;
            data.extend_from_slice(col);
            cols += 1;
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks_exact(self.rows)
    }

    pub fn as_col_major(&self) -> &[C64] {
        &self.data
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.columns().map(vector::norm2).collect()
    }

    /// Scales every column to unit ℓ2 norm, returning the original norms.
    pub fn normalize_columns(&mut self) -> Result<Vec<f64>> {
        let rows = self.rows;
        let mut norms = Vec::with_capacity(self.cols);
        for (j, col) in self.data.chunks_exact_mut(rows).enumerate() {
            let nrm = vector::normalize(col);
            if nrm == 0.0 {
                return Err(Error::NotNormalized { column: j, norm: 0.0 });
            }
            norms.push(nrm);
        }
        Ok(norms)
    }

    /// Fails with the first column whose norm is not within `tol` of one.
    pub fn check_column_normalized(&self, tol: f64) -> Result<()> {
        for (j, col) in self.columns().enumerate() {
            let nrm = vector::norm2(col);
            if !((nrm - 1.0).abs() <= tol) {
                return Err(Error::NotNormalized { column: j, norm: nrm });
            }
        }
        Ok(())
    }

    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        for &j in idx {
            if j >= self.cols {
                return Err(Error::invalid("column index out of range"));
            }
        }
        Self::from_columns(self.rows, idx.iter().map(|&j| self.column(j)))
    }

    /// `y = A x`, skipping zero entries of `x` so sparse inputs are cheap.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        y.fill(ZERO);
        for (j, &xj) in x.iter().enumerate() {
            if xj != ZERO {
                vector::axpy(xj, self.column(j), y);
            }
        }
    }

    /// `x = A* y`
    pub fn adjoint_matvec_into(&self, y: &[C64], x: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (xj, col) in x.iter_mut().zip(self.columns()) {
            *xj = vector::dot(col, y);
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        Error::check_len("matvec input", self.cols, x.len())?;
        let mut y = vector::zeros(self.rows);
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    pub fn adjoint_matvec(&self, y: &[C64]) -> Result<Vec<C64>> {
        Error::check_len("adjoint matvec input", self.rows, y.len())?;
        let mut x = vector::zeros(self.cols);
        self.adjoint_matvec_into(y, &mut x);
        Ok(x)
    }

    /// Largest `|⟨aᵢ, aⱼ⟩|` over distinct column pairs.
    pub fn mutual_coherence(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.cols {
            for j in (i + 1)..self.cols {
                best = best.max(vector::dot(self.column(i), self.column(j)).norm());
            }
        }
        best
    }
}

impl LinearOperator for DenseMatrix {
    fn dim_in(&self) -> usize {
        self.cols
    }

    fn dim_out(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y);
    }

    fn apply_adjoint(&self, y: &[C64], x: &mut [C64]) {
        self.adjoint_matvec_into(y, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn column_major_layout() {
        let m = DenseMatrix::from_col_major(2, 2, alloc::vec![c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)])
            .unwrap();
        assert_eq!(m.get(1, 0), c(2., 0.));
        assert_eq!(m.get(0, 1), c(3., 0.));
        let y = m.matvec(&[c(1., 0.), c(1., 0.)]).unwrap();
        assert_eq!(y, alloc::vec![c(4., 0.), c(6., 0.)]);
    }

    #[test]
    fn entry_count_checked() {
        assert!(DenseMatrix::from_col_major(2, 2, vector::zeros(3)).is_err());
        assert!(DenseMatrix::zeros(0, 2).is_err());
    }

    #[test]
    fn normalization_flags_bad_columns() {
        let mut m = DenseMatrix::from_fn(3, 2, |i, j| c((i + j) as f64 + 1.0, 0.5)).unwrap();
        assert!(m.check_column_normalized(1e-12).is_err());
        m.normalize_columns().unwrap();
        m.check_column_normalized(1e-12).unwrap();
    }

    #[test]
    fn zero_column_cannot_be_normalized() {
        let mut m = DenseMatrix::zeros(2, 2).unwrap();
        assert!(matches!(
            m.normalize_columns(),
            Err(Error::NotNormalized { column: 0, .. })
        ));
    }
}
