//! `nc solve | phase-diagram | calibrate`.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 solver did not
//! converge, 3 no calibration value was phantom-free. `NC_THREADS` bounds
//! the worker threads (0 or unset: one per core).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use nc_core::{ImagingConfig, Seed, SolverConfig};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{self, tags, Problem, SupportMatch};
use crate::io::{self, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CALIBRATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nc", version, about = "Sparse support recovery with a noise collector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Image a random sparse scene from (noisy) synthetic data.
    Solve(SolveArgs),
    /// Exact-support success rate over a sparsity × SNR grid.
    PhaseDiagram(PhaseArgs),
    /// Smallest c0 that yields no phantoms on pure noise.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Signal-to-noise ratio ‖b₀‖/‖e‖, or `inf` for noiseless data.
    #[arg(long, default_value = "inf", value_parser = parse_snr)]
    snr: f64,
    #[arg(long, conflicts_with = "c0")]
    tau: Option<f64>,
    /// τ = c0 √(ln n); defaults to 0.8.
    #[arg(long)]
    c0: Option<f64>,
    /// Plain ℓ1 without the noise collector.
    #[arg(long)]
    no_collector: bool,
    /// Noise collector columns (a multiple of n); defaults to ceil(√n) blocks.
    #[arg(long)]
    sigma: Option<usize>,
    /// Master seed; defaults to the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated sparsities; defaults to 1..=20.
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    /// Comma-separated SNR values; defaults to 2^-2 … 2^3 in half-octaves.
    #[arg(long, value_delimiter = ',', value_parser = parse_snr)]
    snr_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = experiments::DEFAULT_TRIALS_PER_CELL)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated ascending c0 values; defaults to 0.2, 0.3, …, 1.5.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = experiments::DEFAULT_CALIBRATION_TRIALS)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_snr(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("SNR must be positive, got {s}"))
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let outcome = configure_threads().and_then(|_| match cli.command {
        Command::Solve(a) => cmd_solve(a, &argv),
        Command::PhaseDiagram(a) => cmd_phase_diagram(a, &argv),
        Command::Calibrate(a) => cmd_calibrate(a, &argv),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn configure_threads() -> Result<()> {
    let n = match std::env::var("NC_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("NC_THREADS must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Output directory bookkeeping; the manifest goes last.
struct Run {
    out: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn start(command: &str, argv: &[String], config_path: &Path, config: &ImagingConfig, seed: Seed, out: &Path) -> Result<Self> {
        io::ensure_dir(out)?;
        Ok(Self {
            out: out.to_path_buf(),
            manifest: RunManifest {
                command: command.into(),
                args: argv.to_vec(),
                config_path: config_path.display().to_string(),
                config: config.clone(),
                master_seed: seed.0,
                collector_seed: seed.derive(&[tags::COLLECTOR]).0,
                collector_columns: 0,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                started_at: now(),
                finished_at: 0.0,
                output_paths: Vec::new(),
                notes: Vec::new(),
            },
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.manifest.output_paths.push(p.display().to_string());
        p
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        io::write_json(&p, value)
    }

    fn finish(mut self) -> Result<()> {
        let p = self.path("manifest.json");
        self.manifest.finished_at = now();
        io::write_manifest(&p, &self.manifest)
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Serialize)]
struct SupportReport<'a> {
    support: &'a [usize],
    true_support: &'a [usize],
    false_discoveries: usize,
    missed: usize,
    exact: bool,
}

fn cmd_solve(args: SolveArgs, argv: &[String]) -> Result<i32> {
    let config = io::read_config(&args.config)?;
    if let Some(t) = args.tau {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(usage("--tau must be finite and non-negative"));
        }
    }
    let c0 = args.c0.unwrap_or(experiments::DEFAULT_C0);
    if !(c0 >= 0.0 && c0.is_finite()) {
        return Err(usage("--c0 must be finite and non-negative"));
    }
    let n = config.data_dim();
    if let Some(sigma) = args.sigma {
        if sigma == 0 || sigma % n != 0 {
            return Err(usage(format!("--sigma must be a positive multiple of n = {n}")));
        }
    }
    let tau = match args.tau {
        Some(t) => t,
        None => experiments::tau_for(n, c0)?,
    };
    let seed = Seed(args.seed.unwrap_or(config.seed.0));

    let mut run = Run::start("solve", argv, &args.config, &config, seed, &args.out)?;
    let problem = Problem::new(config, args.sigma, seed)?;
    run.manifest.collector_columns = if args.no_collector { 0 } else { problem.collector().num_columns() };
    let trial = problem.trial(experiments::DEFAULT_SPARSITY, args.snr, seed.derive(&[tags::SOLVE]))?;
    let result = problem
        .solver(SolverConfig::default().with_tau(tau), !args.no_collector)?
        .solve(&trial.b)?;

    let truth = trial.scene.support();
    let sm = SupportMatch::new(&result.support, &truth);
    eprintln!(
        "tau {tau:.4}: {} iterations, converged {}, support {} ({} false, {} missed), kkt {}",
        result.iterations,
        result.converged,
        result.support.len(),
        sm.false_discoveries,
        sm.missed,
        if result.kkt.pass { "pass" } else { "fail" },
    );

    let p = run.path("scene.csv");
    io::write_scene_csv(&p, &trial.scene)?;
    let p = run.path("data.csv");
    io::write_vector_csv(&p, &trial.b)?;
    let p = run.path("rho.csv");
    io::write_vector_csv(&p, &result.rho_tau)?;
    if !args.no_collector {
        let p = run.path("eta.csv");
        io::write_vector_csv(&p, &result.eta_tau)?;
    }
    run.json(
        "support.json",
        &SupportReport {
            support: &result.support,
            true_support: &truth,
            false_discoveries: sm.false_discoveries,
            missed: sm.missed,
            exact: sm.exact(),
        },
    )?;
    match &result.debiased {
        Some(d) => {
            let p = run.path("debiased.csv");
            io::write_vector_csv(&p, d)?;
        }
        None => run
            .manifest
            .notes
            .push("recovered support is rank deficient; debiased.csv not written".into()),
    }
    run.json("kkt.json", &result.kkt)?;
    run.json("result.json", &io::ResultSummary::from(&result))?;
    let image = experiments::render_image(&result.rho_tau, problem.config())?;
    let p = run.path("image.csv");
    io::write_image_csv(&p, &image)?;
    if !result.converged {
        run.manifest
            .notes
            .push(format!("not converged after {} iterations", result.iterations));
    }
    run.finish()?;
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_phase_diagram(args: PhaseArgs, argv: &[String]) -> Result<i32> {
    let config = io::read_config(&args.config)?;
    let m_values = args.m_list.unwrap_or_else(experiments::default_m_values);
    let snr_values = args.snr_list.unwrap_or_else(experiments::default_snr_values);
    if m_values.is_empty() {
        return Err(usage("--m-list is empty"));
    }
    if snr_values.is_empty() {
        return Err(usage("--snr-list is empty"));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let k = config.num_unknowns();
    if let Some(m) = m_values.iter().find(|&&m| m > k) {
        return Err(usage(format!("--m-list value {m} exceeds the {k} grid points")));
    }
    let seed = Seed(args.seed.unwrap_or(config.seed.0));

    let mut run = Run::start("phase-diagram", argv, &args.config, &config, seed, &args.out)?;
    let problem = Problem::new(config, None, seed)?;
    run.manifest.collector_columns = problem.collector().num_columns();
    eprintln!(
        "{} cells × {} trials",
        m_values.len() * snr_values.len(),
        args.trials
    );
    let pd = experiments::phase_diagram(&problem, &m_values, &snr_values, args.trials, seed, experiments::DEFAULT_C0)?;
    for &(mi, si, t) in &pd.nonconverged {
        let note = format!(
            "M = {}, SNR = {}, trial {t}: not converged (counted as failure)",
            pd.m_values[mi], pd.snr_values[si]
        );
        eprintln!("warning: {note}");
        run.manifest.notes.push(note);
    }
    let p = run.path("phase_diagram.csv");
    io::write_phase_diagram_csv(&p, &pd)?;
    run.json("phase_diagram.json", &pd)?;
    run.finish()?;
    Ok(EXIT_OK)
}

fn cmd_calibrate(args: CalibrateArgs, argv: &[String]) -> Result<i32> {
    let config = io::read_config(&args.config)?;
    let grid = args.grid.unwrap_or_else(experiments::default_c0_grid);
    if grid.is_empty() {
        return Err(usage("--grid is empty"));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let seed = Seed(args.seed.unwrap_or(config.seed.0));

    let mut run = Run::start("calibrate", argv, &args.config, &config, seed, &args.out)?;
    let problem = Problem::new(config, None, seed)?;
    run.manifest.collector_columns = problem.collector().num_columns();
    let cal = experiments::calibrate_c0(&problem, &grid, args.trials, seed)?;
    for (c0, rate) in cal.c0_grid.iter().zip(&cal.phantom_rate) {
        eprintln!("c0 {c0}: phantom rate {rate}");
    }
    let p = run.path("calibration.csv");
    io::write_calibration_csv(&p, &cal)?;
    run.json("calibration.json", &cal)?;
    match cal.chosen_c0 {
        Some(c0) => {
            eprintln!("chosen c0 = {c0}");
            if !(0.4..=1.2).contains(&c0) {
                let note = format!("chosen c0 = {c0} lies outside [0.4, 1.2]");
                eprintln!("warning: {note}");
                run.manifest.notes.push(note);
            }
        }
        None => {
            let msg = cal.diagnostic.clone().unwrap_or_default();
            eprintln!("calibration failed: {msg}");
            run.manifest.notes.push(msg);
        }
    }
    if cal.nonconverged > 0 {
        run.manifest
            .notes
            .push(format!("{} solves did not converge", cal.nonconverged));
    }
    run.finish()?;
    Ok(if cal.chosen_c0.is_some() { EXIT_OK } else { EXIT_CALIBRATION })
}
