//! Complex vector helpers on plain slices.
//!
//! Inner products are conjugate-linear in the first argument:
//! `⟨x, y⟩ = Σ conj(xᵢ) yᵢ`.

use alloc::vec::Vec;
use num_complex::Complex;

use crate::math;

pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    // four independent accumulator pairs so the reduction pipelines
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let xc = x.chunks_exact(4);
    let yc = y.chunks_exact(4);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        for l in 0..4 {
            re[l] += a[l].re * b[l].re + a[l].im * b[l].im;
            im[l] += a[l].re * b[l].im - a[l].im * b[l].re;
        }
    }
    for (a, b) in xr.iter().zip(yr) {
        re[0] += a.re * b.re + a.im * b.im;
        im[0] += a.re * b.im - a.im * b.re;
    }
    C64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]))
}

pub fn norm2_sqr(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    math::sqrt(norm2_sqr(x))
}

/// Sum of complex moduli.
pub fn norm1(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

pub fn norm_inf(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `max |xᵢ - yᵢ|`.
pub fn dist_inf(x: &[C64], y: &[C64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

pub fn dist2(x: &[C64], y: &[C64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum();
    math::sqrt(s)
}

pub fn is_finite(x: &[C64]) -> bool {
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Scales `x` to unit ℓ2 norm in place and returns the original norm.
/// A zero vector is left untouched.
pub fn normalize(x: &mut [C64]) -> f64 {
    let nrm = norm2(x);
    if nrm > 0.0 {
        let inv = 1.0 / nrm;
        x.iter_mut().for_each(|v| *v *= inv);
    }
    nrm
}

pub fn scale(x: &mut [C64], s: f64) {
    x.iter_mut().for_each(|v| *v *= s);
}

/// `y += a x`
#[inline]
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn zeros(n: usize) -> Vec<C64> {
    alloc::vec![ZERO; n]
}

/// Unit-modulus phase `y / |y|`, zero for `y = 0`.
#[inline]
pub fn phase(y: C64) -> C64 {
    let r = y.norm();
    if r > 0.0 {
        y / r
    } else {
        ZERO
    }
}
