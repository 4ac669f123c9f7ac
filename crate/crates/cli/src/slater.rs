use std::path::Path;
use std::time::Instant;

use fermishadow::combinat::OccupationVector;
use fermishadow::fock::{apply_rotation, basis_state, slater_superposition, FermionState};
use fermishadow::linalg::{haar_unitary, ComplexMatrix, UnitaryMatrix};
use fermishadow::shadows::{format_modes, shadow_rng};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat, Targets};
use crate::estimate::{estimate_targets, output_path, write_manifest, write_rows, RunManifest};
use crate::{CliError, Result};

/// Stream index of the optional Haar rotation of the overlap targets.
const ROTATION_STREAM: u64 = u64::MAX - 1;

/// Estimated overlap `⟨U(w)q|ψ⟩` for one basis state `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub q: String,
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    /// Sample variance of the single-shot `η`-RDM estimate behind the overlap,
    /// which is half the overlap estimate.
    pub rdm_shot_variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_estimate_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_estimate_im: Option<f64>,
}

/// All overlap estimates of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRun {
    pub records: Vec<OverlapRecord>,
    /// Mean of `rdm_shot_variance` over the targets.
    pub mean_rdm_shot_variance: f64,
}

/// `w ⊕ I_η`, acting on the enlarged mode set.
fn extend_rotation(w: &UnitaryMatrix, extra: usize) -> Result<UnitaryMatrix> {
    let n = w.dim();
    let m = ComplexMatrix::from_fn(n + extra, n + extra, |i, j| match (i < n, j < n) {
        (true, true) => w[(i, j)],
        (false, false) if i == j => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    Ok(UnitaryMatrix::new(m)?)
}

/// The rotation `w` requested by `config`, if any.
pub fn overlap_rotation(config: &ExperimentConfig) -> Result<Option<UnitaryMatrix>> {
    config
        .overlap_rotation_seed
        .map(|seed| Ok(haar_unitary(config.n, &mut shadow_rng(seed, ROTATION_STREAM))?))
        .transpose()
}

/// Exact `⟨U(w)q|ψ⟩`.
pub fn exact_overlap(psi: &FermionState, q: &OccupationVector, w: Option<&UnitaryMatrix>) -> Result<Complex64> {
    let target = match w {
        Some(w) => apply_rotation(&basis_state(q), w)?,
        None => basis_state(q),
    };
    Ok(target.inner(psi))
}

/// Estimate every overlap `⟨U(w)q|ψ⟩`, `q ∈ S_{n,η}`, from shadows of
/// `(|ψ⟩ + |n+1..n+η⟩)/√2`.
///
/// The η-RDM element with ket `n+1..n+η` and bra `q` has expectation `ψ_q/2`,
/// so each overlap estimate is twice the RDM estimate.
pub fn run_slater_overlap(config: &ExperimentConfig) -> Result<OverlapRun> {
    let config = ExperimentConfig {
        targets: Targets::SlaterOverlaps,
        ..config.clone()
    };
    config.validate()?;
    let (n, eta) = (config.n, config.eta);
    let psi = config.load_state()?;
    let enlarged = slater_superposition(&psi)?;
    let n2 = n + eta;
    let anchor = OccupationVector::new(n2, (n + 1..=n2).collect())?;
    let qs: Vec<OccupationVector> = OccupationVector::all(n, eta).collect();
    let pairs = qs
        .iter()
        .map(|q| Ok((anchor.clone(), q.embed(n2)?)))
        .collect::<Result<Vec<_>>>()?;
    let w = overlap_rotation(&config)?;
    let w2 = w.as_ref().map(|w| extend_rotation(w, eta)).transpose()?;
    let results = estimate_targets(
        &enlarged,
        config.seed,
        config.samples,
        eta,
        &pairs,
        config.estimator,
        config.aggregation,
        w2.as_ref(),
    )?;
    let records = qs
        .iter()
        .zip(results)
        .map(|(q, r)| {
            let main = r.primary();
            let exact = exact_overlap(&psi, q, w.as_ref())?;
            let fast = r.dense.and(r.fast);
            Ok(OverlapRecord {
                q: format_modes(q),
                estimate_re: 2.0 * main.value.re,
                estimate_im: 2.0 * main.value.im,
                stderr_re: 2.0 * main.stderr_re,
                stderr_im: 2.0 * main.stderr_im,
                exact_re: exact.re,
                exact_im: exact.im,
                rdm_shot_variance: main.sample_variance,
                fast_estimate_re: fast.map(|a| 2.0 * a.value.re),
                fast_estimate_im: fast.map(|a| 2.0 * a.value.im),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if records.is_empty() {
        return Err(CliError::Config("no overlap targets".into()));
    }
    let mean_rdm_shot_variance = records.iter().map(|r| r.rdm_shot_variance).sum::<f64>() / records.len() as f64;
    Ok(OverlapRun {
        records,
        mean_rdm_shot_variance,
    })
}

/// Run the overlap experiment and write `overlaps.{csv,json}` plus `manifest.json`.
pub fn cmd_slater_overlap(config: &ExperimentConfig, out_dir: &Path, format: OutputFormat) -> Result<RunManifest> {
    let started = Instant::now();
    let run = run_slater_overlap(config)?;
    let path = output_path(out_dir, "overlaps", format)?;
    write_rows(&path, &run.records, format)?;
    let config = ExperimentConfig {
        targets: Targets::SlaterOverlaps,
        ..config.clone()
    };
    write_manifest(out_dir, "slater-overlap", &config, &path, run.records.len(), started)
}
