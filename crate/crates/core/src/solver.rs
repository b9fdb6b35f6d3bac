//! Weighted augmented ℓ1 recovery:
//!
//! ```text
//! (ρ_τ, η_τ) = argmin  τ‖ρ‖₁ + ‖η‖₁   subject to   A ρ + C η = b
//! ```
//!
//! solved as the saddle point `max_z min_{ρ,η} F(ρ, η, z)` of
//!
//! ```text
//! F = λ(τ‖ρ‖₁ + ‖η‖₁) + ½‖Aρ + Cη − b‖² + ⟨z, b − Aρ − Cη⟩
//! ```
//!
//! with the iterative soft-thresholding scheme
//!
//! ```text
//! r      = b − A ρ_k − C η_k
//! ρ_k+1  = S_{τλΔt₁}(ρ_k + Δt₁ A*(z_k + r))
//! η_k+1  = S_{λΔt₁}(η_k + Δt₁ C*(z_k + r))
//! z_k+1  = z_k + Δt₂ r
//! ```
//!
//! The saddle point does not depend on `λ`; only the path to it does.
//! Without a collector the `η` terms vanish and the scheme is plain ℓ1
//! minimization subject to `A ρ = b`.

use alloc::vec::Vec;


use crate::math;
use crate::collector::NoiseCollector;
use crate::error::{Error, Result};
use crate::linop::{spectral_norm, HStack, PowerIteration, SpectralNorm};
use crate::lstsq::debias_l2;
use crate::matrix::DenseMatrix;
use crate::vector::{self, C64, ZERO};

/// Unit-norm tolerance applied to the measurement matrix on entry.
const COLUMN_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    /// Weight on `‖ρ‖₁`; `None` derives `c0 √(ln n)`.
    pub tau: Option<f64>,
    pub lambda: f64,
    pub c0: f64,
    /// Primal step; `None` selects `2 / (safety ‖[A|C]‖²)`.
    pub dt1: Option<f64>,
    /// Dual step; `None` selects `min(λ, 1) / (safety ‖A‖)`.
    pub dt2: Option<f64>,
    pub max_iter: usize,
    /// Stop when `‖r‖₂ ≤ tol_residual ‖b‖₂` ...
    pub tol_residual: f64,
    /// ... and the last update moved `ρ` and `η` by at most this much (ℓ∞).
    pub tol_change: f64,
    /// Inflation applied to estimated operator norms.
    pub safety: f64,
    /// Relative floor for support extraction.
    pub support_floor: f64,
    pub kkt_tol: f64,
    pub power: PowerIteration,
    /// Refit amplitudes by least squares on the extracted support.
    pub debias: bool,
    /// Keep `‖r_k‖₂` for every iteration in the result.
    pub track_residuals: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: None,
            lambda: 1.0,
            c0: 0.8,
            dt1: None,
            dt2: None,
            max_iter: 200_000,
            tol_residual: 1e-8,
            tol_change: 1e-10,
            safety: 1.01,
            support_floor: 1e-6,
            kkt_tol: 1e-3,
            power: PowerIteration::default(),
            debias: true,
            track_residuals: false,
        }
    }
}

impl SolverConfig {
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self.tau = None;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if let Some(t) = self.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::invalid("tau must be finite and non-negative"));
            }
        } else if !pos(self.c0) {
            return Err(Error::invalid("c0 must be positive when tau is derived"));
        }
        if !pos(self.lambda) {
            return Err(Error::invalid("lambda must be positive"));
        }
        if self.dt1.is_some_and(|v| !pos(v)) || self.dt2.is_some_and(|v| !pos(v)) {
            return Err(Error::invalid("step sizes must be positive"));
        }
        if !(self.safety >= 1.0) || !pos(self.tol_residual) || !(self.tol_change >= 0.0) {
            return Err(Error::invalid("safety must be >= 1 and tolerances non-negative"));
        }
        if !(0.0..1.0).contains(&self.support_floor) {
            return Err(Error::invalid("support floor must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// `c0 √(ln n)`.
pub fn tau_from(n: usize, c0: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("tau needs n >= 2 so that ln n > 0"));
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::invalid("c0 must be positive"));
    }
    Ok(c0 * math::sqrt(math::ln(n as f64)))
}

/// Phase-preserving shrinkage `(y/|y|) max(0, |y| − level)`.
pub fn soft_threshold(y: C64, level: f64) -> Result<C64> {
    if !(level >= 0.0) {
        return Err(Error::invalid("threshold level must be non-negative"));
    }
    Ok(shrink(y, level))
}

#[inline]
fn shrink(y: C64, level: f64) -> C64 {
    let r = y.norm();
    if r <= level {
        ZERO
    } else {
        y * ((r - level) / r)
    }
}

/// Indices `k` with `|ρ_k| > rel_floor · ‖ρ‖∞`, ascending and zero-based.
pub fn extract_support(rho: &[C64], rel_floor: f64) -> Result<Vec<usize>> {
    if !(0.0..1.0).contains(&rel_floor) {
        return Err(Error::invalid("support floor must lie in [0, 1)"));
    }
    let peak = vector::norm_inf(rho);
    if peak == 0.0 {
        return Ok(Vec::new());
    }
    let cut = rel_floor * peak;
    Ok(rho
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > cut)
        .map(|(k, _)| k)
        .collect())
}

/// First-order optimality certificate evaluated at the dual iterate `z`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KktReport {
    /// `max_j |⟨a_j, z⟩|`, bounded by `λτ` at optimality.
    pub max_a_dual: f64,
    /// `max_j |⟨c_j, z⟩|`, bounded by `λ` at optimality.
    pub max_c_dual: f64,
    /// `max_{ρ_j ≠ 0} |⟨a_j, z⟩ − λτ phase(ρ_j)|`.
    pub support_gap_a: f64,
    /// `max_{η_j ≠ 0} |⟨c_j, z⟩ − λ phase(η_j)|`.
    pub support_gap_c: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepSizes {
    pub dt1: f64,
    pub dt2: f64,
    /// Estimate of `‖[A|C]‖` when `dt1` was auto-selected.
    pub norm_full: Option<SpectralNorm>,
    /// Estimate of `‖A‖` when `dt2` was auto-selected.
    pub norm_a: Option<SpectralNorm>,
}

impl StepSizes {
    /// Resolves the step sizes of `config`, estimating operator norms as needed.
    pub fn select(a: &DenseMatrix, nc: Option<&NoiseCollector>, config: &SolverConfig) -> Self {
        let norm_a = config.dt2.is_none().then(|| spectral_norm(a, &config.power));
        let norm_full = config.dt1.is_none().then(|| match nc {
            Some(nc) => spectral_norm(&HStack { left: a, right: nc }, &config.power),
            None => norm_a.unwrap_or_else(|| spectral_norm(a, &config.power)),
        });
        let dt1 = config.dt1.unwrap_or_else(|| {
            let s = norm_full.map_or(1.0, |s| s.value);
            2.0 / (config.safety * s * s)
        });
        let dt2 = config
            .dt2
            .unwrap_or_else(|| dual_scale(config.lambda) / (config.safety * norm_a.map_or(1.0, |s| s.value)));
        Self {
            dt1,
            dt2,
            norm_full,
            norm_a,
        }
    }

    /// Steps for a different `λ`, assuming `self` was auto-selected for `from`.
    pub fn rescale_lambda(self, from: f64, to: f64) -> Self {
        Self {
            dt2: self.dt2 * dual_scale(to) / dual_scale(from),
            ..self
        }
    }
}

/// `Δt₂ = min(λ, 1) / ‖A‖`. The dual step must also stay below one: on a
/// fixed active set the linearized update has determinant
/// `1 − Δt₁ s² (1 − Δt₂)` for every singular value `s`, so `Δt₂ ≥ 1`
/// diverges whatever `λ` is. For `λ ≤ 1` the cap is inactive because unit
/// columns force `‖A‖ ≥ 1`.
fn dual_scale(lambda: f64) -> f64 {
    lambda.min(1.0)
}

/// Iterates of the primal-dual scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub rho: Vec<C64>,
    pub eta: Vec<C64>,
    pub z: Vec<C64>,
    pub iter: usize,
    /// `‖b − Aρ − Cη‖₂` at the current `(ρ, η)`.
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RecoveryResult {
    pub rho_tau: Vec<C64>,
    pub eta_tau: Vec<C64>,
    pub z: Vec<C64>,
    /// Zero-based indices into `ρ`.
    pub support: Vec<usize>,
    /// Least-squares refit on `support`, zero elsewhere. `None` when disabled or
    /// when the support columns are dependent.
    pub debiased: Option<Vec<C64>>,
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub last_change: f64,
    pub tau: f64,
    pub lambda: f64,
    pub steps: StepSizes,
    pub kkt: KktReport,
    pub residual_history: Vec<f64>,
}

impl RecoveryResult {
    pub fn has_collector(&self) -> bool {
        !self.eta_tau.is_empty()
    }
}

/// A solver bound to one `(A, C)` pair with resolved `τ` and step sizes, so
/// repeated solves against new data skip the norm estimates.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    a: &'a DenseMatrix,
    nc: Option<&'a NoiseCollector>,
    config: SolverConfig,
    tau: f64,
    steps: StepSizes,
}

impl<'a> Solver<'a> {
    pub fn new(a: &'a DenseMatrix, nc: Option<&'a NoiseCollector>, config: SolverConfig) -> Result<Self> {
        Self::check_inputs(a, nc, &config)?;
        let steps = StepSizes::select(a, nc, &config);
        Self::assemble(a, nc, config, steps)
    }

    /// Reuses previously selected steps (e.g. across trials sharing `A` and `C`).
    pub fn with_steps(
        a: &'a DenseMatrix,
        nc: Option<&'a NoiseCollector>,
        config: SolverConfig,
        steps: StepSizes,
    ) -> Result<Self> {
        Self::check_inputs(a, nc, &config)?;
        if !(steps.dt1 > 0.0 && steps.dt2 > 0.0) {
            return Err(Error::invalid("step sizes must be positive"));
        }
        Self::assemble(a, nc, config, steps)
    }

    fn check_inputs(a: &DenseMatrix, nc: Option<&NoiseCollector>, config: &SolverConfig) -> Result<()> {
        config.validate()?;
        a.check_column_normalized(COLUMN_NORM_TOL)?;
        if let Some(nc) = nc {
            Error::check_len("collector dimension", a.rows(), nc.n())?;
        }
        Ok(())
    }

    fn assemble(
        a: &'a DenseMatrix,
        nc: Option<&'a NoiseCollector>,
        config: SolverConfig,
        steps: StepSizes,
    ) -> Result<Self> {
        let tau = match config.tau {
            Some(t) => t,
            None => tau_from(a.rows(), config.c0)?,
        };
        Ok(Self {
            a,
            nc,
            config,
            tau,
            steps,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> StepSizes {
        self.steps
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Zero initial state.
    pub fn initial_state(&self) -> SolverState {
        SolverState {
            rho: vector::zeros(self.a.cols()),
            eta: vector::zeros(self.nc.map_or(0, NoiseCollector::num_columns)),
            z: vector::zeros(self.a.rows()),
            iter: 0,
            residual_norm: f64::INFINITY,
        }
    }

    /// `r = b − Aρ − Cη`.
    fn residual(&self, b: &[C64], state: &SolverState, r: &mut [C64], scratch: &mut [C64]) -> f64 {
        self.a.matvec_into(&state.rho, r);
        if let Some(nc) = self.nc {
            nc.matvec_into(&state.eta, scratch);
            for (ri, ci) in r.iter_mut().zip(scratch.iter()) {
                *ri += ci;
            }
        }
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        vector::norm2(r)
    }

    /// One update given the residual `r` of the current state. Returns the
    /// ℓ∞ change of `(ρ, η)`.
    fn update(&self, state: &mut SolverState, r: &[C64], w: &mut [C64], ga: &mut [C64], gc: &mut [C64]) -> f64 {
        let StepSizes { dt1, dt2, .. } = self.steps;
        let lambda = self.config.lambda;
        for ((wi, zi), ri) in w.iter_mut().zip(&state.z).zip(r) {
            *wi = zi + ri;
        }
        let mut change: f64 = 0.0;

        self.a.adjoint_matvec_into(w, ga);
        let level = self.tau * lambda * dt1;
        for (x, g) in state.rho.iter_mut().zip(ga.iter()) {
            let next = shrink(*x + g * dt1, level);
            change = change.max((next - *x).norm());
            *x = next;
        }

        if let Some(nc) = self.nc {
            nc.adjoint_matvec_into(w, gc);
            let level = lambda * dt1;
            for (x, g) in state.eta.iter_mut().zip(gc.iter()) {
                let next = shrink(*x + g * dt1, level);
                change = change.max((next - *x).norm());
                *x = next;
            }
        }

        for (zi, ri) in state.z.iter_mut().zip(r) {
            *zi += ri * dt2;
        }
        state.iter += 1;
        change
    }

    /// Performs one iteration from `state` and refreshes its residual norm.
    /// Returns the ℓ∞ change of `(ρ, η)`.
    pub fn step(&self, b: &[C64], state: &mut SolverState) -> Result<f64> {
        self.check_data(b)?;
        let n = self.a.rows();
        let (mut r, mut scratch, mut w) = (vector::zeros(n), vector::zeros(n), vector::zeros(n));
        let mut ga = vector::zeros(self.a.cols());
        let mut gc = vector::zeros(state.eta.len());
        self.residual(b, state, &mut r, &mut scratch);
        let change = self.update(state, &r, &mut w, &mut ga, &mut gc);
        state.residual_norm = self.residual(b, state, &mut r, &mut scratch);
        Ok(change)
    }

    fn check_data(&self, b: &[C64]) -> Result<()> {
        Error::check_len("data vector", self.a.rows(), b.len())?;
        if !vector::is_finite(b) {
            return Err(Error::invalid("data vector has non-finite entries"));
        }
        Ok(())
    }

    /// Runs the iteration from zero until the residual and iterate-change
    /// tests both pass or `max_iter` updates have been made.
    pub fn run(&self, b: &[C64]) -> Result<(SolverState, bool, f64, Vec<f64>)> {
        self.check_data(b)?;
        let cfg = &self.config;
        let n = self.a.rows();
        let b_norm = vector::norm2(b);
        let mut state = self.initial_state();
        let (mut r, mut scratch, mut w) = (vector::zeros(n), vector::zeros(n), vector::zeros(n));
        let mut ga = vector::zeros(self.a.cols());
        let mut gc = vector::zeros(state.eta.len());
        let mut history = Vec::new();
        let mut last_change = f64::INFINITY;
        let converged = loop {
            let res = self.residual(b, &state, &mut r, &mut scratch);
            state.residual_norm = res;
            if cfg.track_residuals {
                history.push(res);
            }
            if res <= cfg.tol_residual * b_norm && last_change <= cfg.tol_change {
                break true;
            }
            if state.iter >= cfg.max_iter || !res.is_finite() {
                break false;
            }
            last_change = self.update(&mut state, &r, &mut w, &mut ga, &mut gc);
        };
        Ok((state, converged, last_change, history))
    }

    pub fn solve(&self, b: &[C64]) -> Result<RecoveryResult> {
        let (state, converged, last_change, residual_history) = self.run(b)?;
        let support = extract_support(&state.rho, self.config.support_floor)?;
        let debiased = if self.config.debias {
            debias_l2(self.a, b, &support).ok()
        } else {
            None
        };
        let mut result = RecoveryResult {
            rho_tau: state.rho,
            eta_tau: state.eta,
            z: state.z,
            support,
            debiased,
            converged,
            iterations: state.iter,
            residual_norm: state.residual_norm,
            last_change,
            tau: self.tau,
            lambda: self.config.lambda,
            steps: self.steps,
            kkt: KktReport::default(),
            residual_history,
        };
        result.kkt = kkt_check(self.a, self.nc, &result, self.config.kkt_tol);
        Ok(result)
    }
}

/// Convenience wrapper: selects steps and solves once.
pub fn solve(
    a: &DenseMatrix,
    nc: Option<&NoiseCollector>,
    b: &[C64],
    config: &SolverConfig,
) -> Result<RecoveryResult> {
    Solver::new(a, nc, config.clone())?.solve(b)
}

/// Evaluates the dual-certificate conditions of a solver result:
/// `|⟨a_j, z⟩| ≤ λτ` with equality `⟨a_j, z⟩ = λτ phase(ρ_j)` on the support
/// of `ρ`, and the same with bound `λ` for the collector columns.
pub fn kkt_check(a: &DenseMatrix, nc: Option<&NoiseCollector>, result: &RecoveryResult, tol: f64) -> KktReport {
    let lt = result.lambda * result.tau;
    let l = result.lambda;

    let ga = a.adjoint_matvec(&result.z).unwrap_or_default();
    let (max_a_dual, support_gap_a) = dual_stats(&ga, &result.rho_tau, lt);

    let (max_c_dual, support_gap_c) = match nc {
        Some(nc) if result.eta_tau.len() == nc.num_columns() => {
            let gc = nc.adjoint_matvec(&result.z).unwrap_or_default();
            dual_stats(&gc, &result.eta_tau, l)
        }
        _ => (0.0, 0.0),
    };

    let pass = max_a_dual <= lt * (1.0 + tol)
        && max_c_dual <= l * (1.0 + tol)
        && support_gap_a <= tol * lt
        && support_gap_c <= tol * l;
    KktReport {
        max_a_dual,
        max_c_dual,
        support_gap_a,
        support_gap_c,
        tol,
        pass,
    }
}

fn dual_stats(g: &[C64], x: &[C64], bound: f64) -> (f64, f64) {
    let mut max_dual: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for (gj, xj) in g.iter().zip(x) {
        max_dual = max_dual.max(gj.norm());
        if *xj != ZERO {
            gap = gap.max((gj - vector::phase(*xj) * bound).norm());
        }
    }
    (max_dual, gap)
}
