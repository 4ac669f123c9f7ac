use std::io::Write;
use std::path::Path;
use std::time::Instant;

use fermishadow::combinat::OccupationVector;
use fermishadow::fastpath::FastEstimator;
use fermishadow::fock::FermionState;
use fermishadow::linalg::UnitaryMatrix;
use fermishadow::shadows::{collect_shadows, format_modes, Aggregate, Aggregation, DenseEstimator, StreamingAggregator};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorKind, ExperimentConfig, OutputFormat, Targets};
use crate::{CliError, Result};

/// Shadows sampled and reduced per parallel batch.
const CHUNK: usize = 1024;

/// Aggregated estimates of one target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct TargetResult {
    pub dense: Option<Aggregate>,
    pub fast: Option<Aggregate>,
}

impl TargetResult {
    pub fn primary(&self) -> &Aggregate {
        self.dense.as_ref().or(self.fast.as_ref()).expect("at least one estimator runs")
    }
}

/// Sample `samples` shadows of `state` and aggregate the single-shot
/// estimates of `⟨D^p_q⟩` for each pair. With `rotation`, every shadow's
/// rotation `u` is replaced by `u·w` first.
pub(crate) fn estimate_targets(
    state: &FermionState,
    seed: u64,
    samples: usize,
    k: usize,
    pairs: &[(OccupationVector, OccupationVector)],
    kind: EstimatorKind,
    aggregation: Aggregation,
    rotation: Option<&UnitaryMatrix>,
) -> Result<Vec<TargetResult>> {
    let (n, eta) = (state.n(), state.eta());
    let dense = matches!(kind, EstimatorKind::Dense | EstimatorKind::Both)
        .then(|| DenseEstimator::new(n, eta, k))
        .transpose()?;
    let fast = matches!(kind, EstimatorKind::Fast | EstimatorKind::Both)
        .then(|| FastEstimator::new(n, eta, k))
        .transpose()?;
    // The full estimation operator pays off once most of S_{n,k}² is requested.
    let dim = fermishadow::combinat::choose(n, k);
    let whole_operator = pairs.len() * 2 >= dim * dim;
    let new_aggs = || -> Result<Vec<StreamingAggregator>> {
        pairs.iter().map(|_| Ok(StreamingAggregator::new(samples, aggregation)?)).collect()
    };
    let mut dense_aggs = if dense.is_some() { new_aggs()? } else { Vec::new() };
    let mut fast_aggs = if fast.is_some() { new_aggs()? } else { Vec::new() };

    let mut start = 0;
    while start < samples {
        let count = CHUNK.min(samples - start);
        let shadows = collect_shadows(state, seed, start as u64, count)?;
        let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = shadows
            .par_iter()
            .map(|s| -> Result<_> {
                let rotated;
                let s = match rotation {
                    Some(w) => {
                        rotated = s.rotated_by(w)?;
                        &rotated
                    }
                    None => s,
                };
                let d = match &dense {
                    Some(est) if whole_operator => {
                        let x = est.estimation_operator(s)?;
                        pairs.iter().map(|(p, q)| x[(q.rank(), p.rank())]).collect()
                    }
                    Some(est) => pairs.iter().map(|(p, q)| est.estimate(s, p, q)).collect::<fermishadow::Result<Vec<_>>>()?,
                    None => Vec::new(),
                };
                let f = match &fast {
                    Some(est) => pairs.iter().map(|(p, q)| est.estimate(s, p, q)).collect::<fermishadow::Result<Vec<_>>>()?,
                    None => Vec::new(),
                };
                Ok((d, f))
            })
            .collect::<Result<_>>()?;
        for (d, f) in rows {
            for (agg, v) in dense_aggs.iter_mut().zip(d) {
                agg.push(v);
            }
            for (agg, v) in fast_aggs.iter_mut().zip(f) {
                agg.push(v);
            }
        }
        start += count;
    }
    let finish = |aggs: &[StreamingAggregator], i: usize| -> Result<Option<Aggregate>> {
        aggs.get(i).map(|a| a.finish()).transpose().map_err(CliError::from)
    };
    (0..pairs.len())
        .map(|i| {
            Ok(TargetResult {
                dense: finish(&dense_aggs, i)?,
                fast: finish(&fast_aggs, i)?,
            })
        })
        .collect()
}

/// One output row of `estimate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub p: String,
    pub q: String,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_estimate_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_estimate_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_stderr_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_stderr_im: Option<f64>,
}

/// Run the estimation experiment described by `config` in memory.
pub fn run_estimate(config: &ExperimentConfig) -> Result<Vec<EstimateRecord>> {
    config.validate()?;
    if config.targets == Targets::SlaterOverlaps {
        return Err(CliError::Config("slater_overlaps targets are run by the slater-overlap command".into()));
    }
    let state = config.load_state()?;
    let pairs = config.target_pairs()?;
    let results = estimate_targets(
        &state,
        config.seed,
        config.samples,
        config.k,
        &pairs,
        config.estimator,
        config.aggregation,
        None,
    )?;
    Ok(pairs
        .iter()
        .zip(results)
        .map(|((p, q), r)| {
            let main = r.primary();
            let fast = r.dense.and(r.fast);
            EstimateRecord {
                p: format_modes(p),
                q: format_modes(q),
                estimate_re: main.value.re,
                estimate_im: main.value.im,
                stderr_re: main.stderr_re,
                stderr_im: main.stderr_im,
                fast_estimate_re: fast.map(|a| a.value.re),
                fast_estimate_im: fast.map(|a| a.value.im),
                fast_stderr_re: fast.map(|a| a.stderr_re),
                fast_stderr_im: fast.map(|a| a.stderr_im),
            }
        })
        .collect())
}

/// Provenance of one run, written next to its output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub git_describe: Option<String>,
    pub version: String,
    pub wall_time_seconds: f64,
    pub output: String,
    pub rows: usize,
}

pub(crate) fn git_describe() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

/// Write `rows` to `path` as CSV or as a JSON array.
pub(crate) fn write_rows<T: Serialize>(path: &Path, rows: &[T], format: OutputFormat) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut file = file;
            serde_json::to_writer_pretty(&mut file, rows)?;
            file.write_all(b"\n")?;
            file.flush()?;
        }
    }
    Ok(())
}

pub(crate) fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    output: &Path,
    rows: usize,
    started: Instant,
) -> Result<RunManifest> {
    let manifest = RunManifest {
        command: command.to_string(),
        config: config.clone(),
        git_describe: git_describe(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        output: output.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        rows,
    };
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

pub(crate) fn output_path(out_dir: &Path, stem: &str, format: OutputFormat) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    Ok(out_dir.join(format!("{stem}.{ext}")))
}

/// Run `config` and write `estimates.{csv,json}` plus `manifest.json` into `out_dir`.
pub fn cmd_estimate(config: &ExperimentConfig, out_dir: &Path, format: OutputFormat) -> Result<RunManifest> {
    if config.targets == Targets::SlaterOverlaps {
        return crate::slater::cmd_slater_overlap(config, out_dir, format);
    }
    let started = Instant::now();
    let rows = run_estimate(config)?;
    let path = output_path(out_dir, "estimates", format)?;
    write_rows(&path, &rows, format)?;
    write_manifest(out_dir, "estimate", config, &path, rows.len(), started)
}
