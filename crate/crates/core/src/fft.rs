//! Arbitrary-length discrete Fourier transform.
//!
//! Forward: `X_m = Σ_k v_k exp(-2πi k m / n)`. Inverse carries the `1/n` factor.
//! Lengths whose prime factors are all small use an iterative mixed-radix
//! Stockham plan (self-sorting, no bit reversal); anything else goes through
//! Bluestein's chirp-z reformulation on a power-of-two inner transform.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;
use crate::vector::{self, C64, ZERO};

/// Largest prime factor handled by direct butterflies before switching to Bluestein.
const MAX_DIRECT_RADIX: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    Forward,
    Inverse,
}

/// A precomputed transform plan for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Stockham(Vec<Stage>),
    Bluestein {
        inner: Box<Fft>,
        chirp: Vec<C64>,
        kernel_spectrum: Vec<C64>,
    },
}

/// One radix-`p` pass over sub-transforms of length `len` at stride `stride`.
#[derive(Debug, Clone)]
struct Stage {
    radix: usize,
    len: usize,
    stride: usize,
    /// `exp(-2πi q r / len)` for `q < len/p`, `1 <= r < p`, row-major in `q`.
    twiddles: Vec<C64>,
    /// `exp(-2πi t / p)` for the generic butterfly.
    roots: Vec<C64>,
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    // radix 4 first keeps the pass count low for powers of two
    while n % 4 == 0 {
        out.push(4);
        n /= 4;
    }
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `exp(-2πi k / n)` with `k` reduced mod `n` first.
#[inline]
fn root(k: usize, n: usize) -> C64 {
    math::cis(-2.0 * PI * ((k % n) as f64) / (n as f64))
}

#[inline]
fn mul_neg_i(v: C64) -> C64 {
    C64::new(v.im, -v.re)
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("transform length must be positive"));
        }
        let factors = factorize(n);
        let largest = factors.iter().copied().max().unwrap_or(1);
        if largest <= MAX_DIRECT_RADIX {
            let mut stages = Vec::with_capacity(factors.len());
            let (mut len, mut stride) = (n, 1);
            for &p in &factors {
                let m = len / p;
                let mut twiddles = Vec::with_capacity(m * (p - 1));
                for q in 0..m {
                    for r in 1..p {
                        twiddles.push(root(q * r, len));
                    }
                }
                let roots = (0..p).map(|t| root(t, p)).collect();
                stages.push(Stage {
                    radix: p,
                    len,
                    stride,
                    twiddles,
                    roots,
                });
                len = m;
                stride *= p;
            }
            return Ok(Self {
                n,
                kind: Kind::Stockham(stages),
            });
        }

        let m = (2 * n - 1).next_power_of_two();
        let inner = Fft::new(m)?;
        let two_n = 2 * n;
        // w_k = exp(-πi k²/n); k² is reduced mod 2n so large k keep full accuracy
        let chirp: Vec<C64> = (0..n)
            .map(|k| math::cis(-PI * (((k * k) % two_n) as f64) / (n as f64)))
            .collect();
        let mut kernel = vector::zeros(m);
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        let mut kernel_spectrum = vector::zeros(m);
        inner.forward_into(&kernel, &mut kernel_spectrum);
        Ok(Self {
            n,
            kind: Kind::Bluestein {
                inner: Box::new(inner),
                chirp,
                kernel_spectrum,
            },
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place unnormalized forward transform; `scratch` must have length `n`.
    pub fn forward_in_place(&self, data: &mut [C64], scratch: &mut [C64]) {
        assert_eq!(data.len(), self.n, "fft input length");
        assert_eq!(scratch.len(), self.n, "fft scratch length");
        match &self.kind {
            Kind::Stockham(stages) => {
                let mut in_data = true;
                for stage in stages {
                    if in_data {
                        stage.run(data, scratch);
                    } else {
                        stage.run(scratch, data);
                    }
                    in_data = !in_data;
                }
                if !in_data {
                    data.copy_from_slice(scratch);
                }
            }
            Kind::Bluestein {
                inner,
                chirp,
                kernel_spectrum,
            } => {
                let m = inner.len();
                let mut a = vector::zeros(m);
                for ((ak, xk), wk) in a.iter_mut().zip(data.iter()).zip(chirp) {
                    *ak = xk * wk;
                }
                let mut tmp = vector::zeros(m);
                inner.forward_in_place(&mut a, &mut tmp);
                for (s, kk) in a.iter_mut().zip(kernel_spectrum) {
                    *s *= kk;
                }
                inner.inverse_in_place(&mut a, &mut tmp);
                for ((o, ck), wk) in data.iter_mut().zip(&a).zip(chirp) {
                    *o = ck * wk;
                }
            }
        }
    }

    /// In-place inverse transform including the `1/n` factor.
    pub fn inverse_in_place(&self, data: &mut [C64], scratch: &mut [C64]) {
        data.iter_mut().for_each(|v| *v = v.conj());
        self.forward_in_place(data, scratch);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|v| *v = v.conj() * s);
    }

    /// Unnormalized forward transform. Panics if slice lengths differ from the plan.
    pub fn forward_into(&self, input: &[C64], output: &mut [C64]) {
        output.copy_from_slice(input);
        let mut scratch = vector::zeros(self.n);
        self.forward_in_place(output, &mut scratch);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse_into(&self, input: &[C64], output: &mut [C64]) {
        output.copy_from_slice(input);
        let mut scratch = vector::zeros(self.n);
        self.inverse_in_place(output, &mut scratch);
    }

    pub fn process(&self, input: &[C64], direction: Direction) -> Vec<C64> {
        let mut out = vector::zeros(self.n);
        match direction {
            Direction::Forward => self.forward_into(input, &mut out),
            Direction::Inverse => self.inverse_into(input, &mut out),
        }
        out
    }
}

impl Stage {
    /// Decimation-in-frequency pass: reads `x[j + s(q + m r)]`, writes
    /// `y[j + s(p q + r)] = w^{qr} Σ_t x_t exp(-2πi t r / p)`.
    fn run(&self, x: &[C64], y: &mut [C64]) {
        let (p, s) = (self.radix, self.stride);
        let m = self.len / p;
        match p {
            2 => {
                for q in 0..m {
                    let w1 = self.twiddles[q];
                    for j in 0..s {
                        let a = x[j + s * q];
                        let b = x[j + s * (q + m)];
                        y[j + s * 2 * q] = a + b;
                        y[j + s * (2 * q + 1)] = (a - b) * w1;
                    }
                }
            }
            3 => {
                let c = -0.5;
                let d = -math::sqrt(3.0) / 2.0;
                for q in 0..m {
                    let tw = &self.twiddles[2 * q..2 * q + 2];
                    for j in 0..s {
                        let a0 = x[j + s * q];
                        let a1 = x[j + s * (q + m)];
                        let a2 = x[j + s * (q + 2 * m)];
                        let t1 = a1 + a2;
                        let t2 = a0 + t1 * c;
                        // d * (a1 - a2) rotated by i
                        let t3 = a1 - a2;
                        let t3 = C64::new(-t3.im * d, t3.re * d);
                        let o = j + s * 3 * q;
                        y[o] = a0 + t1;
                        y[o + s] = (t2 + t3) * tw[0];
                        y[o + 2 * s] = (t2 - t3) * tw[1];
                    }
                }
            }
            4 => {
                for q in 0..m {
                    let tw = &self.twiddles[3 * q..3 * q + 3];
                    for j in 0..s {
                        let a0 = x[j + s * q];
                        let a1 = x[j + s * (q + m)];
                        let a2 = x[j + s * (q + 2 * m)];
                        let a3 = x[j + s * (q + 3 * m)];
                        let s02 = a0 + a2;
                        let d02 = a0 - a2;
                        let s13 = a1 + a3;
                        let d13 = mul_neg_i(a1 - a3);
                        let o = j + s * 4 * q;
                        y[o] = s02 + s13;
                        y[o + s] = (d02 + d13) * tw[0];
                        y[o + 2 * s] = (s02 - s13) * tw[1];
                        y[o + 3 * s] = (d02 - d13) * tw[2];
                    }
                }
            }
            5 => {
                let (w1, w2) = (self.roots[1], self.roots[2]);
                for q in 0..m {
                    let tw = &self.twiddles[4 * q..4 * q + 4];
                    for j in 0..s {
                        let a0 = x[j + s * q];
                        let a1 = x[j + s * (q + m)];
                        let a2 = x[j + s * (q + 2 * m)];
                        let a3 = x[j + s * (q + 3 * m)];
                        let a4 = x[j + s * (q + 4 * m)];
                        let s14 = a1 + a4;
                        let d14 = a1 - a4;
                        let s23 = a2 + a3;
                        let d23 = a2 - a3;
                        // real parts of the roots act on sums, imaginary parts on differences
                        let r1 = a0 + s14 * w1.re + s23 * w2.re;
                        let r2 = a0 + s14 * w2.re + s23 * w1.re;
                        let i1 = d14 * w1.im + d23 * w2.im;
                        let i2 = d14 * w2.im - d23 * w1.im;
                        let i1 = C64::new(-i1.im, i1.re);
                        let i2 = C64::new(-i2.im, i2.re);
                        let o = j + s * 5 * q;
                        y[o] = a0 + s14 + s23;
                        y[o + s] = (r1 + i1) * tw[0];
                        y[o + 2 * s] = (r2 + i2) * tw[1];
                        y[o + 3 * s] = (r2 - i2) * tw[2];
                        y[o + 4 * s] = (r1 - i1) * tw[3];
                    }
                }
            }
            _ => {
                let mut a = [ZERO; MAX_DIRECT_RADIX];
                for q in 0..m {
                    let tw = &self.twiddles[(p - 1) * q..(p - 1) * (q + 1)];
                    for j in 0..s {
                        for (t, at) in a[..p].iter_mut().enumerate() {
                            *at = x[j + s * (q + m * t)];
                        }
                        let o = j + s * p * q;
                        for r in 0..p {
                            let mut acc = ZERO;
                            for (t, at) in a[..p].iter().enumerate() {
                                acc += at * self.roots[(t * r) % p];
                            }
                            y[o + s * r] = if r == 0 { acc } else { acc * tw[r - 1] };
                        }
                    }
                }
            }
        }
    }
}

/// One-shot transform of arbitrary positive length.
pub fn dft(v: &[C64], direction: Direction) -> Result<Vec<C64>> {
    let plan = Fft::new(v.len())?;
    Ok(plan.process(v, direction))
}

/// O(n²) reference transform, used as an oracle for the fast path.
pub fn naive_dft(v: &[C64], direction: Direction) -> Result<Vec<C64>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::invalid("transform length must be positive"));
    }
    let out = (0..n)
        .map(|m| {
            let mut acc = ZERO;
            for (k, vk) in v.iter().enumerate() {
                let w = root(k * m % n, n);
                acc += vk * if direction == Direction::Forward { w } else { w.conj() };
            }
            if direction == Direction::Inverse {
                acc / n as f64
            } else {
                acc
            }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{sample_complex_gaussian, Seed};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        vector::dist2(a, b) / vector::norm2(b).max(1e-300)
    }

    #[test]
    fn delta_transforms_to_ones() {
        let out = dft(&[c(1.), c(0.), c(0.), c(0.)], Direction::Forward).unwrap();
        for v in out {
            assert!((v - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ones_transform_to_scaled_delta() {
        let out = dft(&[c(1.); 4], Direction::Forward).unwrap();
        let expect = naive_dft(&[c(1.); 4], Direction::Forward).unwrap();
        assert!(rel_err(&out, &expect) < 1e-14);
        assert!((out[0] - c(4.0)).norm() < 1e-14);
        for v in &out[1..] {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn empty_rejected() {
        assert!(dft(&[], Direction::Forward).is_err());
        assert!(naive_dft(&[], Direction::Inverse).is_err());
    }

    #[test]
    fn matches_naive_for_many_lengths() {
        // covers radix 2, 4, odd primes, prime powers and the Bluestein path
        for n in [1usize, 2, 3, 4, 5, 6, 7, 8, 12, 16, 25, 30, 37, 61, 64, 97, 125, 127, 128, 210, 625] {
            let v = sample_complex_gaussian(n, Seed(n as u64)).unwrap();
            for dir in [Direction::Forward, Direction::Inverse] {
                let fast = dft(&v, dir).unwrap();
                let slow = naive_dft(&v, dir).unwrap();
                assert!(rel_err(&fast, &slow) < 1e-11, "n={n} {dir:?}");
            }
        }
    }

    #[test]
    fn round_trip_625() {
        let v = sample_complex_gaussian(625, Seed(7)).unwrap();
        let back = dft(&dft(&v, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        assert!(rel_err(&back, &v) <= 1e-12);
    }

    #[test]
    fn round_trip_bluestein() {
        let v = sample_complex_gaussian(1009, Seed(3)).unwrap();
        let back = dft(&dft(&v, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        assert!(rel_err(&back, &v) <= 1e-12);
    }
}
