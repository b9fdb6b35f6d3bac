//! Least squares on a column subset, used to refit amplitudes on a recovered support.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::vector::{self, C64};

/// Relative residual below which a column counts as dependent on earlier ones.
const RANK_TOL: f64 = 1e-10;

/// Thin QR of a column set by classical Gram-Schmidt with one
/// re-orthogonalization pass.
#[derive(Debug, Clone)]
pub struct ThinQr {
    rows: usize,
    q: Vec<Vec<C64>>,
    /// Upper triangle, `r[j]` holds column `j` (entries `0..=j`).
    r: Vec<Vec<C64>>,
}

impl ThinQr {
    /// Factorizes the given columns, reporting the positions of any columns
    /// that lie (numerically) in the span of the preceding ones.
    pub fn new<'a, I>(rows: usize, columns: I) -> core::result::Result<Self, Vec<usize>>
    where
        I: IntoIterator<Item = &'a [C64]>,
    {
        let mut q: Vec<Vec<C64>> = Vec::new();
        let mut r: Vec<Vec<C64>> = Vec::new();
        let mut dependent = Vec::new();
        for (pos, col) in columns.into_iter().enumerate() {
            let orig = vector::norm2(col);
            let mut v = col.to_vec();
            let mut coeffs = vector::zeros(q.len());
            for _ in 0..2 {
                for (qi, ci) in q.iter().zip(coeffs.iter_mut()) {
                    let h = vector::dot(qi, &v);
                    *ci += h;
                    vector::axpy(-h, qi, &mut v);
                }
            }
            let rem = vector::norm2(&v);
            if rem <= RANK_TOL * orig || orig == 0.0 {
                dependent.push(pos);
                continue;
            }
            vector::scale(&mut v, 1.0 / rem);
            coeffs.push(C64::new(rem, 0.0));
            q.push(v);
            r.push(coeffs);
        }
        if dependent.is_empty() {
            Ok(Self { rows, q, r })
        } else {
            Err(dependent)
        }
    }

    /// Minimizer of `‖Q R x − b‖₂`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        debug_assert_eq!(b.len(), self.rows);
        let s = self.q.len();
        let mut y: Vec<C64> = self.q.iter().map(|qi| vector::dot(qi, b)).collect();
        for j in (0..s).rev() {
            let xj = y[j] / self.r[j][j];
            y[j] = xj;
            for i in 0..j {
                y[i] -= self.r[j][i] * xj;
            }
        }
        y
    }
}

/// Least-squares amplitudes of `b` on the columns in `support`, embedded in a
/// length-`K` vector that is zero off the support.
pub fn debias_l2(a: &DenseMatrix, b: &[C64], support: &[usize]) -> Result<Vec<C64>> {
    Error::check_len("data vector", a.rows(), b.len())?;
    let k = a.cols();
    if let Some(&bad) = support.iter().find(|&&j| j >= k) {
        return Err(Error::invalid(alloc::format!("support index {bad} out of range 0..{k}")));
    }
    let mut out = vector::zeros(k);
    if support.is_empty() {
        return Ok(out);
    }
    let qr = ThinQr::new(a.rows(), support.iter().map(|&j| a.column(j))).map_err(|pos| Error::RankDeficient {
        columns: pos.into_iter().map(|p| support[p]).collect(),
    })?;
    let x = qr.solve(b);
    for (&j, xj) in support.iter().zip(x) {
        out[j] = xj;
    }
    Ok(out)
}
