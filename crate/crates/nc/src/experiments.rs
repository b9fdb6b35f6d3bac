//! Numerical studies on the imaging problem: `τ` calibration on pure noise,
//! the with/without collector comparison, and the sparsity vs SNR phase
//! diagram.
//!
//! Every random draw is derived from one master [`Seed`] with
//! [`Seed::derive`], so results are independent of scheduling:
//!
//! | draw                          | seed                                        |
//! |-------------------------------|---------------------------------------------|
//! | noise collector               | `master.derive([COLLECTOR])`                |
//! | calibration noise, trial `t`  | `master.derive([CALIBRATION, t])`           |
//! | phase-diagram trial           | `master.derive([PHASE, m_idx, snr_idx, t])` |
//! | scene / noise of a trial seed | `trial.derive([SCENE])` / `trial.derive([NOISE])` |

use std::sync::OnceLock;

use nc_core::imaging::{add_noise, build_measurement_matrix, noise_vector, random_scene, synthesize_data};
use nc_core::lstsq::debias_l2;
use nc_core::solver::{tau_from, StepSizes};
use nc_core::{vector, DenseMatrix, ImagingConfig, NoiseCollector, RecoveryResult, Seed, Solver, SolverConfig, SourceScene, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod tags {
    pub const COLLECTOR: u64 = 1;
    pub const SCENE: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const CALIBRATION: u64 = 4;
    pub const PHASE: u64 = 5;
    pub const SOLVE: u64 = 6;
}

pub const DEFAULT_C0: f64 = 0.8;
pub const DEFAULT_BETA: f64 = 1.5;
/// Sources in the scene `nc solve` generates.
pub const DEFAULT_SPARSITY: usize = 12;
pub const DEFAULT_AMPLITUDES: [f64; 2] = [0.5, 1.0];
pub const DEFAULT_TRIALS_PER_CELL: usize = 5;
pub const DEFAULT_CALIBRATION_TRIALS: usize = 20;

/// `0.2, 0.3, …, 1.5`.
pub fn default_c0_grid() -> Vec<f64> {
    (2..=15).map(|i| i as f64 / 10.0).collect()
}

/// `1, 2, …, 20`.
pub fn default_m_values() -> Vec<usize> {
    (1..=20).collect()
}

/// `2^-2, 2^-1.5, …, 2^3`.
pub fn default_snr_values() -> Vec<f64> {
    (-4..=6).map(|i| 2f64.powf(i as f64 / 2.0)).collect()
}

/// `τ = c0 √(ln n)`, with `c0 = 0` meaning no weight at all.
pub fn tau_for(n: usize, c0: f64) -> Result<f64> {
    if c0 == 0.0 {
        Ok(0.0)
    } else {
        Ok(tau_from(n, c0)?)
    }
}

/// The imaging system `[A | C]` shared by all trials of an experiment.
///
/// Operator norms are estimated once and reused by every solve.
#[derive(Debug)]
pub struct Problem {
    config: ImagingConfig,
    a: DenseMatrix,
    nc: NoiseCollector,
    base: SolverConfig,
    steps_with_nc: StepSizes,
    steps_plain: OnceLock<StepSizes>,
}

impl Problem {
    /// Builds `A` from `config` and a collector of `sigma` columns, or
    /// `ceil(n^0.5)` blocks when `sigma` is `None`.
    pub fn new(config: ImagingConfig, sigma: Option<usize>, seed: Seed) -> Result<Self> {
        config.validate()?;
        let n = config.data_dim();
        let nc_seed = seed.derive(&[tags::COLLECTOR]);
        let nc = match sigma {
            Some(sigma) => NoiseCollector::with_columns(n, sigma, nc_seed)?,
            None => NoiseCollector::build(n, DEFAULT_BETA, nc_seed)?,
        };
        Self::with_collector(config, nc)
    }

    pub fn with_collector(config: ImagingConfig, nc: NoiseCollector) -> Result<Self> {
        config.validate()?;
        let a = build_measurement_matrix(&config)?;
        nc_core::Error::check_len("collector dimension", a.rows(), nc.n())?;
        let base = SolverConfig::default();
        let steps_with_nc = StepSizes::select(&a, Some(&nc), &base);
        Ok(Self {
            config,
            a,
            nc,
            base,
            steps_with_nc,
            steps_plain: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &ImagingConfig {
        &self.config
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn collector(&self) -> &NoiseCollector {
        &self.nc
    }

    pub fn data_dim(&self) -> usize {
        self.a.rows()
    }

    /// Solver for `config`, reusing the cached norm estimates when the
    /// step-size settings allow it.
    pub fn solver(&self, config: SolverConfig, with_collector: bool) -> Result<Solver<'_>> {
        let nc = with_collector.then_some(&self.nc);
        let reusable = config.dt1.is_none()
            && config.dt2.is_none()
            && config.safety == self.base.safety
            && config.power == self.base.power;
        if !reusable {
            return Ok(Solver::new(&self.a, nc, config)?);
        }
        let steps = if with_collector {
            self.steps_with_nc
        } else {
            *self
                .steps_plain
                .get_or_init(|| StepSizes::select(&self.a, None, &self.base))
        };
        let steps = steps.rescale_lambda(self.base.lambda, config.lambda);
        Ok(Solver::with_steps(&self.a, nc, config, steps)?)
    }

    /// Random `m`-sparse scene with data at the given SNR. `snr = ∞` gives
    /// noiseless data; `m = 0` gives unit-norm pure noise.
    pub fn trial(&self, m: usize, snr: f64, seed: Seed) -> Result<Trial> {
        let scene = random_scene(&self.config, m, DEFAULT_AMPLITUDES, seed.derive(&[tags::SCENE]))?;
        self.trial_for_scene(scene, snr, seed)
    }

    pub fn trial_for_scene(&self, scene: SourceScene, snr: f64, seed: Seed) -> Result<Trial> {
        let b0 = synthesize_data(&self.a, &scene)?;
        let noise_seed = seed.derive(&[tags::NOISE]);
        let (b, noise) = if scene.sparsity() == 0 && snr.is_finite() {
            let e = noise_vector(self.data_dim(), 1.0, noise_seed)?;
            (e.clone(), e)
        } else {
            add_noise(&b0, snr, noise_seed)?
        };
        Ok(Trial { scene, b0, noise, b })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub scene: SourceScene,
    pub b0: Vec<C64>,
    pub noise: Vec<C64>,
    pub b: Vec<C64>,
}

/// Support comparison of one recovery against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportMatch {
    pub false_discoveries: usize,
    pub missed: usize,
}

impl SupportMatch {
    /// Both index sets must be sorted.
    pub fn new(recovered: &[usize], truth: &[usize]) -> Self {
        let hits = recovered.iter().filter(|k| truth.binary_search(k).is_ok()).count();
        Self {
            false_discoveries: recovered.len() - hits,
            missed: truth.len() - hits,
        }
    }

    pub fn exact(&self) -> bool {
        self.false_discoveries == 0 && self.missed == 0
    }
}

/// `‖x − ρ‖₂ / ‖ρ‖₂`.
pub fn relative_error(x: &[C64], truth: &[C64]) -> f64 {
    vector::dist2(x, truth) / vector::norm2(truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub c0_grid: Vec<f64>,
    pub tau: Vec<f64>,
    /// Fraction of pure-noise trials with a nonempty support, per grid value.
    pub phantom_rate: Vec<f64>,
    /// Smallest grid value without phantoms, if any.
    pub chosen_c0: Option<f64>,
    pub trials: usize,
    pub seed: Seed,
    /// Solves that hit `max_iter`; they still count by their support.
    pub nonconverged: usize,
    pub diagnostic: Option<String>,
}

/// Runs `trials` pure-noise solves (unit-norm `b = e`) for each `c0` and
/// picks the smallest `c0` that never produces a phantom. The same noise
/// realizations are used for every grid value.
pub fn calibrate_c0(problem: &Problem, c0_grid: &[f64], trials: usize, seed: Seed) -> Result<CalibrationResult> {
    if c0_grid.is_empty() {
        return Err(Error::Config("c0 grid is empty".into()));
    }
    if c0_grid.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Config("c0 grid values must be finite and non-negative".into()));
    }
    if c0_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("c0 grid must be sorted ascending".into()));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let n = problem.data_dim();
    let tau = c0_grid.iter().map(|&c| tau_for(n, c)).collect::<Result<Vec<_>>>()?;
    let noise = (0..trials)
        .map(|t| noise_vector(n, 1.0, seed.derive(&[tags::CALIBRATION, t as u64])))
        .collect::<nc_core::Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..c0_grid.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(i, t)| {
            let r = problem
                .solver(SolverConfig::default().with_tau(tau[i]), true)?
                .solve(&noise[t])?;
            Ok((!r.support.is_empty(), r.converged))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut phantoms = vec![0usize; c0_grid.len()];
    for (&(i, _), &(phantom, _)) in jobs.iter().zip(&outcomes) {
        phantoms[i] += phantom as usize;
    }
    let phantom_rate: Vec<f64> = phantoms.iter().map(|&p| p as f64 / trials as f64).collect();
    let nonconverged = outcomes.iter().filter(|o| !o.1).count();
    let chosen = phantom_rate.iter().position(|&r| r == 0.0);
    let chosen_c0 = chosen.map(|i| c0_grid[i]);
    let diagnostic = match chosen {
        Some(_) => None,
        None => Some(format!(
            "every grid value produced phantoms; lowest rate {:.2} at c0 = {}",
            phantom_rate.iter().cloned().fold(f64::INFINITY, f64::min),
            c0_grid[phantom_rate
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map_or(0, |(i, _)| i)]
        )),
    };
    Ok(CalibrationResult {
        c0_grid: c0_grid.to_vec(),
        tau,
        phantom_rate,
        chosen_c0,
        trials,
        seed,
        nonconverged,
        diagnostic,
    })
}

/// The four reconstructions of one data realization.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub trial: Trial,
    /// Plain ℓ1 without a collector.
    pub no_collector: RecoveryResult,
    /// Collector with `τ = 1`.
    pub tau_one: RecoveryResult,
    /// Collector with `τ = c0 √(ln n)`.
    pub calibrated: RecoveryResult,
    /// Least squares on the support of `calibrated`; `None` if that support
    /// is rank deficient.
    pub debiased: Option<Vec<C64>>,
}

impl Comparison {
    pub fn truth(&self) -> Vec<C64> {
        self.trial.scene.to_dense(self.calibrated.rho_tau.len()).unwrap_or_default()
    }
}

pub fn run_comparison(problem: &Problem, scene: SourceScene, snr: f64, seed: Seed, c0: f64) -> Result<Comparison> {
    let trial = problem.trial_for_scene(scene, snr, seed)?;
    let tau = tau_for(problem.data_dim(), c0)?;
    let run = |tau: f64, nc: bool| -> Result<RecoveryResult> {
        let config = SolverConfig {
            debias: false,
            ..SolverConfig::default().with_tau(tau)
        };
        Ok(problem.solver(config, nc)?.solve(&trial.b)?)
    };
    let no_collector = run(tau, false)?;
    let tau_one = run(1.0, true)?;
    let calibrated = run(tau, true)?;
    let debiased = debias_l2(problem.matrix(), &trial.b, &calibrated.support).ok();
    Ok(Comparison {
        trial,
        no_collector,
        tau_one,
        calibrated,
        debiased,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub m_values: Vec<usize>,
    pub snr_values: Vec<f64>,
    /// Exact-support rate, rows `M`, columns SNR.
    pub success: Vec<Vec<f64>>,
    /// Rate of trials without false discoveries.
    pub no_false_discovery: Vec<Vec<f64>>,
    pub trials_per_cell: usize,
    pub seed: Seed,
    pub c0: f64,
    /// `(m_idx, snr_idx, trial)` of solves that hit `max_iter`; they count as failures.
    pub nonconverged: Vec<(usize, usize, usize)>,
}

pub fn phase_diagram(
    problem: &Problem,
    m_values: &[usize],
    snr_values: &[f64],
    trials_per_cell: usize,
    seed: Seed,
    c0: f64,
) -> Result<PhaseDiagram> {
    if m_values.is_empty() || snr_values.is_empty() {
        return Err(Error::Config("M and SNR lists must be non-empty".into()));
    }
    if trials_per_cell == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if snr_values.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Config("SNR values must be positive".into()));
    }
    let k = problem.config().num_unknowns();
    if let Some(m) = m_values.iter().find(|&&m| m > k) {
        return Err(Error::Config(format!("M = {m} exceeds the {k} grid points")));
    }
    let tau = tau_for(problem.data_dim(), c0)?;

    let mut jobs = Vec::new();
    for mi in 0..m_values.len() {
        for si in 0..snr_values.len() {
            for t in 0..trials_per_cell {
                jobs.push((mi, si, t));
            }
        }
    }
    let outcomes = jobs
        .par_iter()
        .map(|&(mi, si, t)| {
            let trial_seed = seed.derive(&[tags::PHASE, mi as u64, si as u64, t as u64]);
            let trial = problem.trial(m_values[mi], snr_values[si], trial_seed)?;
            let config = SolverConfig {
                debias: false,
                ..SolverConfig::default().with_tau(tau)
            };
            let r = problem.solver(config, true)?.solve(&trial.b)?;
            Ok((SupportMatch::new(&r.support, &trial.scene.support()), r.converged))
        })
        .collect::<Result<Vec<_>>>()?;

    let shape = vec![vec![0usize; snr_values.len()]; m_values.len()];
    let (mut exact, mut clean) = (shape.clone(), shape);
    let mut nonconverged = Vec::new();
    for (&(mi, si, t), (sm, converged)) in jobs.iter().zip(&outcomes) {
        if !converged {
            nonconverged.push((mi, si, t));
            continue;
        }
        exact[mi][si] += sm.exact() as usize;
        clean[mi][si] += (sm.false_discoveries == 0) as usize;
    }
    let rate = |counts: Vec<Vec<usize>>| -> Vec<Vec<f64>> {
        counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / trials_per_cell as f64).collect())
            .collect()
    };
    let (success, no_fd) = (rate(exact), rate(clean));
    Ok(PhaseDiagram {
        m_values: m_values.to_vec(),
        snr_values: snr_values.to_vec(),
        success,
        no_false_discovery: no_fd,
        trials_per_cell,
        seed,
        c0,
        nonconverged,
    })
}

/// `|ρ_k|` on the grid: one row per cross-range index, one column per range
/// index.
pub fn render_image(rho: &[C64], config: &ImagingConfig) -> Result<Vec<Vec<f64>>> {
    nc_core::Error::check_len("image vector", config.num_unknowns(), rho.len())?;
    Ok(rho
        .chunks(config.pixels_range)
        .map(|row| row.iter().map(|x| x.norm()).collect())
        .collect())
}
