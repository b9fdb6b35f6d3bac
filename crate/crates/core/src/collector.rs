//! Random circulant noise collector `C = [C₁ | C₂ | … | C_B]`.
//!
//! Block `Cᵢ` is the `n × n` circulant whose first column is the unit-norm
//! generator `gᵢ`; column `k` of the block is `gᵢ` cyclically shifted down by
//! `k`, so `Cᵢ x = gᵢ ⊛ x = IDFT(DFT(gᵢ) ⊙ DFT(x))`. Only the generators and
//! their spectra are stored; products with `C` and `C*` cost `O(B n log n)`.

use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::linop::LinearOperator;
use crate::matrix::DenseMatrix;
use crate::random::{sample_unit_sphere, Seed};
use crate::vector::{self, C64, ZERO};

/// Default cap on `n · Σ` for [`NoiseCollector::materialize_dense`].
pub const DEFAULT_DENSE_GUARD: usize = 1_000_000;

/// Default number of sampled pairs per category in [`NoiseCollector::coherence_audit`].
pub const DEFAULT_AUDIT_SAMPLES: usize = 100_000;

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NoiseCollector {
    n: usize,
    seed: Seed,
    beta: f64,
    generators: Vec<Vec<C64>>,
    spectra: Vec<Vec<C64>>,
    fft: Fft,
}

/// Sampled coherence statistics of `[A | C]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoherenceReport {
    /// Largest sampled `|⟨aᵢ, cⱼ⟩|`.
    pub max_ac: f64,
    /// Largest sampled `|⟨cᵢ, cⱼ⟩|`, `i ≠ j`.
    pub max_cc: f64,
    /// `c₀ √(ln n / n)`.
    pub threshold: f64,
    /// Pairs evaluated across both categories.
    pub num_pairs_sampled: usize,
    pub pass: bool,
}

/// `ceil(n^(β-1))`, tolerant to `powf` rounding just above an integer.
pub fn blocks_for(n: usize, beta: f64) -> usize {
    let raw = math::powf(n as f64, beta - 1.0);
    let rounded = libm::round(raw);
    let b = if (raw - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded
    } else {
        libm::ceil(raw)
    };
    (b as usize).max(1)
}

impl NoiseCollector {
    /// Collector with `ceil(n^(β-1))` blocks.
    pub fn build(n: usize, beta: f64, seed: Seed) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("noise collector needs n >= 2"));
        }
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::invalid("beta must be a finite number > 1 so that Σ exceeds n"));
        }
        let mut nc = Self::with_blocks(n, blocks_for(n, beta), seed)?;
        nc.beta = beta;
        Ok(nc)
    }

    /// Collector with an explicit block count `B` (`Σ = B n`).
    pub fn with_blocks(n: usize, blocks: usize, seed: Seed) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("noise collector needs n >= 2"));
        }
        if blocks == 0 {
            return Err(Error::invalid("noise collector needs at least one block"));
        }
        let generators = (0..blocks)
            .map(|i| sample_unit_sphere(n, seed.derive(&[i as u64])))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(n, seed, None, generators)
    }

    /// Collector with `Σ` columns; `Σ` must be a positive multiple of `n`.
    pub fn with_columns(n: usize, sigma: usize, seed: Seed) -> Result<Self> {
        if n == 0 || sigma == 0 || sigma % n != 0 {
            return Err(Error::invalid("collector size Σ must be a positive multiple of n"));
        }
        Self::with_blocks(n, sigma / n, seed)
    }

    /// Wraps caller-supplied generators, which must all be unit norm.
    pub fn from_generators(generators: Vec<Vec<C64>>, seed: Seed, beta: Option<f64>) -> Result<Self> {
        let n = generators.first().map(Vec::len).unwrap_or(0);
        if n < 2 {
            return Err(Error::invalid("noise collector needs n >= 2 and at least one generator"));
        }
        for (i, g) in generators.iter().enumerate() {
            Error::check_len("generator length", n, g.len())?;
            let nrm = vector::norm2(g);
            if !((nrm - 1.0).abs() <= UNIT_TOL) {
                return Err(Error::NotNormalized { column: i, norm: nrm });
            }
        }
        Self::assemble(n, seed, beta, generators)
    }

    fn assemble(n: usize, seed: Seed, beta: Option<f64>, generators: Vec<Vec<C64>>) -> Result<Self> {
        let fft = Fft::new(n)?;
        let spectra = generators
            .iter()
            .map(|g| {
                let mut s = vector::zeros(n);
                fft.forward_into(g, &mut s);
                s
            })
            .collect();
        let blocks = generators.len();
        let beta = beta.unwrap_or_else(|| 1.0 + math::ln(blocks as f64) / math::ln(n as f64));
        Ok(Self {
            n,
            seed,
            beta,
            generators,
            spectra,
            fft,
        })
    }

    /// Data dimension (rows of `C`).
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_blocks(&self) -> usize {
        self.generators.len()
    }

    /// Total column count `Σ = B n`.
    #[inline]
    pub fn num_columns(&self) -> usize {
        self.n * self.generators.len()
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    /// The `β` requested at build time, or `1 + ln B / ln n` otherwise.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn generators(&self) -> &[Vec<C64>] {
        &self.generators
    }

    pub fn spectra(&self) -> &[Vec<C64>] {
        &self.spectra
    }

    /// Column `j` of `C` (block `j / n`, shift `j % n`).
    pub fn column(&self, j: usize) -> Vec<C64> {
        let n = self.n;
        let g = &self.generators[j / n];
        let k = j % n;
        (0..n).map(|r| g[(r + n - k) % n]).collect()
    }

    /// `C η`, summing the block spectra before a single inverse transform.
    pub fn matvec_into(&self, eta: &[C64], out: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(eta.len(), self.num_columns());
        debug_assert_eq!(out.len(), n);
        let mut acc = vector::zeros(n);
        let mut tmp = vector::zeros(n);
        let mut any = false;
        for (slice, spec) in eta.chunks_exact(n).zip(&self.spectra) {
            if slice.iter().all(|v| *v == ZERO) {
                continue;
            }
            any = true;
            self.fft.forward_into(slice, &mut tmp);
            for ((a, t), s) in acc.iter_mut().zip(&tmp).zip(spec) {
                *a += t * s;
            }
        }
        if any {
            self.fft.inverse_into(&acc, out);
        } else {
            out.fill(ZERO);
        }
    }

    /// `C* v`, stacked block by block.
    pub fn adjoint_matvec_into(&self, v: &[C64], out: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), self.num_columns());
        let mut vhat = vector::zeros(n);
        self.fft.forward_into(v, &mut vhat);
        let mut tmp = vector::zeros(n);
        for (block, spec) in out.chunks_exact_mut(n).zip(&self.spectra) {
            for ((t, s), vh) in tmp.iter_mut().zip(spec).zip(&vhat) {
                *t = s.conj() * vh;
            }
            self.fft.inverse_into(&tmp, block);
        }
    }

    pub fn matvec(&self, eta: &[C64]) -> Result<Vec<C64>> {
        Error::check_len("collector matvec input", self.num_columns(), eta.len())?;
        let mut out = vector::zeros(self.n);
        self.matvec_into(eta, &mut out);
        Ok(out)
    }

    pub fn adjoint_matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        Error::check_len("collector adjoint input", self.n, v.len())?;
        let mut out = vector::zeros(self.num_columns());
        self.adjoint_matvec_into(v, &mut out);
        Ok(out)
    }

    /// Dense `n × Σ` copy of `C`, refused when `n Σ > guard`.
    pub fn materialize_dense(&self, guard: usize) -> Result<DenseMatrix> {
        let entries = self.n * self.num_columns();
        if entries > guard {
            return Err(Error::ResourceLimit {
                requested: entries,
                limit: guard,
            });
        }
        DenseMatrix::from_columns(self.n, (0..self.num_columns()).map(|j| self.column(j)))
    }

    /// Monte-Carlo check of the incoherence bounds
    /// `|⟨aᵢ, cⱼ⟩| ≤ c₀ √(ln n / n)` and `|⟨cᵢ, cⱼ⟩| ≤ c₀ √(ln n / n)`.
    ///
    /// Each category draws `num_samples` uniform pairs, or is enumerated
    /// exhaustively when it has no more than `num_samples` pairs.
    pub fn coherence_audit(&self, a: &DenseMatrix, c0: f64, num_samples: usize, seed: Seed) -> Result<CoherenceReport> {
        if num_samples == 0 {
            return Err(Error::invalid("coherence audit needs at least one sample"));
        }
        Error::check_len("measurement matrix rows", self.n, a.rows())?;
        a.check_column_normalized(1e-10)?;

        let k = a.cols();
        let sigma = self.num_columns();
        let mut rng = seed.rng();
        let mut pairs = 0usize;

        let mut max_ac: f64 = 0.0;
        if k.saturating_mul(sigma) <= num_samples {
            for j in 0..sigma {
                let cj = self.column(j);
                for col in a.columns() {
                    max_ac = max_ac.max(vector::dot(col, &cj).norm());
                    pairs += 1;
                }
            }
        } else {
            for _ in 0..num_samples {
                let i = rng.random_range(0..k);
                let j = rng.random_range(0..sigma);
                max_ac = max_ac.max(vector::dot(a.column(i), &self.column(j)).norm());
                pairs += 1;
            }
        }

        let mut max_cc: f64 = 0.0;
        let cc_total = sigma.saturating_mul(sigma - 1) / 2;
        if cc_total <= num_samples {
            let cols: Vec<Vec<C64>> = (0..sigma).map(|j| self.column(j)).collect();
            for i in 0..sigma {
                for j in (i + 1)..sigma {
                    max_cc = max_cc.max(vector::dot(&cols[i], &cols[j]).norm());
                    pairs += 1;
                }
            }
        } else {
            for _ in 0..num_samples {
                let i = rng.random_range(0..sigma);
                let mut j = rng.random_range(0..sigma - 1);
                if j >= i {
                    j += 1;
                }
                max_cc = max_cc.max(vector::dot(&self.column(i), &self.column(j)).norm());
                pairs += 1;
            }
        }

        let nf = self.n as f64;
        let threshold = c0 * math::sqrt(math::ln(nf) / nf);
        Ok(CoherenceReport {
            max_ac,
            max_cc,
            threshold,
            num_pairs_sampled: pairs,
            pass: max_ac <= threshold && max_cc <= threshold,
        })
    }
}

impl LinearOperator for NoiseCollector {
    fn dim_in(&self) -> usize {
        self.num_columns()
    }

    fn dim_out(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y);
    }

    fn apply_adjoint(&self, y: &[C64], x: &mut [C64]) {
        self.adjoint_matvec_into(y, x);
    }
}
