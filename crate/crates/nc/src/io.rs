//! File formats. Configs, summaries and manifests are JSON; vectors, scenes,
//! images and experiment tables are CSV. Indices in files are 0-based.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nc_core::solver::StepSizes;
use nc_core::{ImagingConfig, KktReport, NoiseCollector, RecoveryResult, Seed, SourceScene, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{CalibrationResult, PhaseDiagram};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut de = serde_json::Deserializer::from_reader(BufReader::new(file));
    // The path-aware wrapper names the offending field in the message.
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        if field == "." {
            Error::json(path, inner)
        } else {
            Error::format(path, format!("field `{field}`: {inner}"))
        }
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::json(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Reads and validates an imaging config.
pub fn read_config(path: &Path) -> Result<ImagingConfig> {
    let config: ImagingConfig = read_json(path)?;
    config
        .validate()
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(config)
}

pub fn write_config(path: &Path, config: &ImagingConfig) -> Result<()> {
    write_json(path, config)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

fn csv_reader(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    index: usize,
    re: f64,
    im: f64,
}

/// `index,re,im` rows, one per entry.
pub fn write_vector_csv(path: &Path, v: &[C64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (index, x) in v.iter().enumerate() {
        w.serialize(Entry { index, re: x.re, im: x.im })
            .map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for (i, row) in csv_reader(path, true)?.deserialize::<Entry>().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        if row.index != i {
            return Err(Error::format(path, format!("row {i} has index {}", row.index)));
        }
        out.push(C64::new(row.re, row.im));
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneRow {
    grid_index: usize,
    re: f64,
    im: f64,
}

/// `grid_index,re,im` rows, one per source.
pub fn write_scene_csv(path: &Path, scene: &SourceScene) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (&grid_index, a) in scene.positions.iter().zip(&scene.amplitudes) {
        w.serialize(SceneRow { grid_index, re: a.re, im: a.im })
            .map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

pub fn read_scene_csv(path: &Path) -> Result<SourceScene> {
    let (mut positions, mut amplitudes) = (Vec::new(), Vec::new());
    for row in csv_reader(path, true)?.deserialize::<SceneRow>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        positions.push(row.grid_index);
        amplitudes.push(C64::new(row.re, row.im));
    }
    SourceScene::new(positions, amplitudes).map_err(|e| Error::format(path, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CollectorHeader {
    n: usize,
    blocks: usize,
    seed: u64,
    beta: f64,
}

/// Header `n,blocks,seed,beta` and its values, then `re,im` rows for every
/// generator in block order.
pub fn write_collector(path: &Path, nc: &NoiseCollector) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header = CollectorHeader {
        n: nc.n(),
        blocks: nc.num_blocks(),
        seed: nc.seed().0,
        beta: nc.beta(),
    };
    let err = |e| Error::csv(path, e);
    w.serialize(&header).map_err(err)?;
    w.write_record(["re", "im"]).map_err(err)?;
    for g in nc.generators() {
        for x in g {
            w.serialize((x.re, x.im)).map_err(err)?;
        }
    }
    finish(w, path)
}

pub fn read_collector(path: &Path) -> Result<NoiseCollector> {
    let mut records = csv_reader(path, false)?.into_records();
    let mut next = |what: &str| -> Result<csv::StringRecord> {
        records
            .next()
            .ok_or_else(|| Error::format(path, format!("missing {what}")))?
            .map_err(|e| Error::csv(path, e))
    };
    let names = next("header")?;
    if names != csv::StringRecord::from(vec!["n", "blocks", "seed", "beta"]) {
        return Err(Error::format(path, "expected header n,blocks,seed,beta"));
    }
    let values = next("header values")?;
    let header: CollectorHeader = values
        .deserialize(Some(&names))
        .map_err(|e| Error::csv(path, e))?;
    let _ = next("generator header")?;
    let mut gens = Vec::with_capacity(header.blocks);
    for b in 0..header.blocks {
        let mut g = Vec::with_capacity(header.n);
        for k in 0..header.n {
            let rec = next(&format!("entry {k} of generator {b}"))?;
            let (re, im): (f64, f64) = rec.deserialize(None).map_err(|e| Error::csv(path, e))?;
            g.push(C64::new(re, im));
        }
        gens.push(g);
    }
    if records.next().is_some() {
        return Err(Error::format(path, "trailing rows after the last generator"));
    }
    NoiseCollector::from_generators(gens, Seed(header.seed), Some(header.beta))
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Scalars, support and diagnostics of a [`RecoveryResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub last_change: f64,
    pub tau: f64,
    pub lambda: f64,
    pub steps: StepSizes,
    pub support: Vec<usize>,
    pub kkt: KktReport,
    pub has_collector: bool,
}

impl From<&RecoveryResult> for ResultSummary {
    fn from(r: &RecoveryResult) -> Self {
        Self {
            converged: r.converged,
            iterations: r.iterations,
            residual_norm: r.residual_norm,
            last_change: r.last_change,
            tau: r.tau,
            lambda: r.lambda,
            steps: r.steps,
            support: r.support.clone(),
            kkt: r.kkt.clone(),
            has_collector: r.has_collector(),
        }
    }
}

/// Writes `result.json` plus `rho.csv`, `eta.csv` (with a collector) and
/// `debiased.csv` (when present) into `dir`. Returns the files written.
pub fn write_result(dir: &Path, result: &RecoveryResult) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut out = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_json(&out("result.json"), &ResultSummary::from(result))?;
    write_vector_csv(&out("rho.csv"), &result.rho_tau)?;
    if result.has_collector() {
        write_vector_csv(&out("eta.csv"), &result.eta_tau)?;
    }
    if let Some(d) = &result.debiased {
        write_vector_csv(&out("debiased.csv"), d)?;
    }
    Ok(written)
}

/// One row per cross-range index, one column per range index, no header.
pub fn write_image_csv(path: &Path, image: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    for row in image {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

pub fn read_image_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    csv_reader(path, false)?
        .deserialize()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

/// Header `M,snr_1,…`; then one row per `M` with the exact-support rates.
pub fn write_phase_diagram_csv(path: &Path, pd: &PhaseDiagram) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| Error::csv(path, e);
    let mut header = vec!["M".to_string()];
    header.extend(pd.snr_values.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(err)?;
    for (m, row) in pd.m_values.iter().zip(&pd.success) {
        let mut rec = vec![m.to_string()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec).map_err(err)?;
    }
    finish(w, path)
}

/// `(m_values, snr_values, success)` from a phase-diagram CSV.
pub fn read_phase_diagram_csv(path: &Path) -> Result<(Vec<usize>, Vec<f64>, Vec<Vec<f64>>)> {
    let mut rdr = csv_reader(path, true)?;
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::format(path, format!("{s:?}: {e}")));
    let snr = header.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
    let (mut ms, mut rows) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let m = rec[0]
            .parse()
            .map_err(|e| Error::format(path, format!("M {:?}: {e}", &rec[0])))?;
        ms.push(m);
        rows.push(rec.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?);
    }
    Ok((ms, snr, rows))
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationRow {
    c0: f64,
    tau: f64,
    phantom_rate: f64,
    trials: usize,
    chosen: bool,
}

/// `c0,tau,phantom_rate,trials,chosen` per grid value.
pub fn write_calibration_csv(path: &Path, cal: &CalibrationResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    for ((&c0, &tau), &phantom_rate) in cal.c0_grid.iter().zip(&cal.tau).zip(&cal.phantom_rate) {
        w.serialize(CalibrationRow {
            c0,
            tau,
            phantom_rate,
            trials: cal.trials,
            chosen: cal.chosen_c0 == Some(c0),
        })
        .map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

/// Record of one CLI run, written last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config_path: String,
    pub config: ImagingConfig,
    pub master_seed: u64,
    pub collector_seed: u64,
    pub collector_columns: usize,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub output_paths: Vec<String>,
    pub notes: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    write_json(path, manifest)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
