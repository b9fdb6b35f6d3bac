//! Linear operators and spectral-norm estimation by power iteration.

use alloc::vec::Vec;


use crate::math;
use crate::random::{sample_complex_gaussian, Seed};
use crate::vector::{self, C64};

/// A complex linear map with its adjoint.
///
/// Implementations must satisfy `⟨apply(x), y⟩ = ⟨x, apply_adjoint(y)⟩`.
/// Slice lengths are the caller's responsibility (`dim_in` for `x`,
/// `dim_out` for `y`).
pub trait LinearOperator {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
    fn apply_adjoint(&self, y: &[C64], x: &mut [C64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply(x, y)
    }
    fn apply_adjoint(&self, y: &[C64], x: &mut [C64]) {
        (**self).apply_adjoint(y, x)
    }
}

/// Horizontal concatenation `[A | B]` of two operators with the same output space.
#[derive(Debug, Clone, Copy)]
pub struct HStack<A, B> {
    pub left: A,
    pub right: B,
}

impl<A: LinearOperator, B: LinearOperator> LinearOperator for HStack<A, B> {
    fn dim_in(&self) -> usize {
        self.left.dim_in() + self.right.dim_in()
    }

    fn dim_out(&self) -> usize {
        self.left.dim_out()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let (xl, xr) = x.split_at(self.left.dim_in());
        self.left.apply(xl, y);
        let mut tmp = vector::zeros(y.len());
        self.right.apply(xr, &mut tmp);
        for (a, b) in y.iter_mut().zip(&tmp) {
            *a += b;
        }
    }

    fn apply_adjoint(&self, y: &[C64], x: &mut [C64]) {
        let (xl, xr) = x.split_at_mut(self.left.dim_in());
        self.left.apply_adjoint(y, xl);
        self.right.apply_adjoint(y, xr);
    }
}

/// Diagonal operator, mostly useful in tests.
#[derive(Debug, Clone)]
pub struct Diagonal(pub Vec<C64>);

impl LinearOperator for Diagonal {
    fn dim_in(&self) -> usize {
        self.0.len()
    }
    fn dim_out(&self) -> usize {
        self.0.len()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
            *yi = d * xi;
        }
    }
    fn apply_adjoint(&self, y: &[C64], x: &mut [C64]) {
        for ((xi, yi), d) in x.iter_mut().zip(y).zip(&self.0) {
            *xi = d.conj() * yi;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: Seed,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 500,
            seed: Seed(0x5eed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralNorm {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of `op` by power iteration on `op* op`.
///
/// Stops once the Rayleigh estimate of `σ²` changes by less than `tol`
/// relative between sweeps. On exhaustion of `max_iter` the best estimate is
/// returned with `converged = false`.
pub fn spectral_norm<Op: LinearOperator + ?Sized>(op: &Op, opts: &PowerIteration) -> SpectralNorm {
    let (n_in, n_out) = (op.dim_in(), op.dim_out());
    if n_in == 0 || n_out == 0 {
        return SpectralNorm {
            value: 0.0,
            converged: true,
            iterations: 0,
        };
    }
    let mut x = sample_complex_gaussian(n_in, opts.seed).unwrap_or_else(|_| vector::zeros(n_in));
    vector::normalize(&mut x);
    let mut y = vector::zeros(n_out);
    let mut prev = 0.0;
    let mut best = 0.0;
    for it in 1..=opts.max_iter.max(1) {
        op.apply(&x, &mut y);
        // Rayleigh quotient of op*op at unit x
        let est = vector::norm2_sqr(&y);
        best = f64::max(best, est);
        op.apply_adjoint(&y, &mut x);
        let nrm = vector::normalize(&mut x);
        if nrm == 0.0 {
            // start vector in the null space (or op = 0)
            return SpectralNorm {
                value: math::sqrt(best),
                converged: true,
                iterations: it,
            };
        }
        if it > 1 && (est - prev).abs() <= opts.tol * est {
            return SpectralNorm {
                value: math::sqrt(best),
                converged: true,
                iterations: it,
            };
        }
        prev = est;
    }
    SpectralNorm {
        value: math::sqrt(best),
        converged: false,
        iterations: opts.max_iter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_has_unit_norm() {
        let op = Diagonal(alloc::vec![c(1.0); 17]);
        let s = spectral_norm(&op, &PowerIteration::default());
        assert!(s.converged);
        assert!((s.value - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn diagonal_norm_is_max_entry() {
        let op = Diagonal(alloc::vec![c(3.0), c(1.0), c(0.5)]);
        let s = spectral_norm(&op, &PowerIteration::default());
        assert!((s.value - 3.0).abs() <= 3.0 * 1e-4, "{s:?}");
    }

    #[test]
    fn non_convergence_is_flagged() {
        // two nearly equal singular values converge slowly
        let op = Diagonal(alloc::vec![c(1.0), c(0.999_999)]);
        let opts = PowerIteration {
            tol: 1e-300,
            max_iter: 3,
            seed: Seed(1),
        };
        let s = spectral_norm(&op, &opts);
        assert!(!s.converged);
        assert!(s.value > 0.99 && s.value <= 1.0 + 1e-12);
    }
}
