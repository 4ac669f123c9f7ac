use std::path::{Path, PathBuf};

use fermishadow::combinat::{choose, OccupationVector};
use fermishadow::fock::FermionState;
use fermishadow::shadows::{shadow_rng, Aggregation};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Where the input state comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StateSource {
    /// Haar-random pure state drawn from the run seed.
    RandomPure,
    /// The basis state with the listed modes occupied.
    Basis { z: Vec<usize> },
    /// A state in the `FermionState` JSON format.
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Dense,
    Fast,
    Both,
}

/// Which quantities to estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Targets {
    /// Every `(p, q)` in `S_{n,k}²`.
    AllKrdm,
    /// Explicit `(p, q)` pairs of mode lists.
    List { pairs: Vec<(Vec<usize>, Vec<usize>)> },
    /// Overlaps `⟨q|ψ⟩` through the Slater-superposition construction.
    SlaterOverlaps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_aggregation() -> Aggregation {
    Aggregation::Mean
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub eta: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_state_source")]
    pub state_source: StateSource,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorKind,
    #[serde(default = "default_aggregation")]
    pub aggregation: Aggregation,
    #[serde(default = "default_targets")]
    pub targets: Targets,
    /// Seed of a Haar rotation `w` applied to the overlap targets, if any.
    #[serde(default)]
    pub overlap_rotation_seed: Option<u64>,
}

fn default_state_source() -> StateSource {
    StateSource::RandomPure
}

fn default_estimator() -> EstimatorKind {
    EstimatorKind::Dense
}

fn default_targets() -> Targets {
    Targets::AllKrdm
}

/// Largest Fock dimension a run may allocate for the input state.
pub const MAX_STATE_DIM: usize = 1 << 22;

/// Stream index reserved for drawing the random input state, disjoint from
/// every shadow index.
pub const STATE_STREAM: u64 = u64::MAX;

impl ExperimentConfig {
    pub fn new(n: usize, eta: usize, k: usize, samples: usize, seed: u64) -> Self {
        Self {
            n,
            eta,
            k,
            samples,
            seed,
            state_source: default_state_source(),
            estimator: default_estimator(),
            aggregation: default_aggregation(),
            targets: default_targets(),
            overlap_rotation_seed: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Modes the shadows act on: `n + η` for overlap runs, `n` otherwise.
    pub fn shadow_modes(&self) -> usize {
        match self.targets {
            Targets::SlaterOverlaps => self.n + self.eta,
            _ => self.n,
        }
    }

    /// Check every invariant, reporting the first violation precisely.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.eta > self.n {
            return bad(format!("eta = {} exceeds n = {}", self.eta, self.n));
        }
        if self.k > self.eta {
            return bad(format!("k = {} exceeds eta = {}", self.k, self.eta));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.shadow_modes() > 63 {
            return bad(format!("{} modes exceed the supported maximum of 63", self.shadow_modes()));
        }
        let dim = choose(self.shadow_modes(), self.eta);
        if dim > MAX_STATE_DIM {
            return bad(format!("Fock dimension C({}, {}) = {dim} exceeds {MAX_STATE_DIM}", self.shadow_modes(), self.eta));
        }
        if let Aggregation::MedianOfMeans { batches } = self.aggregation {
            if batches == 0 || self.samples % batches != 0 {
                return bad(format!(
                    "median_of_means batches = {batches} must be positive and divide samples = {}",
                    self.samples
                ));
            }
        }
        if let StateSource::Basis { z } = &self.state_source {
            if z.len() != self.eta {
                return bad(format!("basis state {z:?} has {} particles, expected eta = {}", z.len(), self.eta));
            }
            OccupationVector::from_unsorted(self.n, z.clone())
                .map_err(|e| CliError::Config(format!("basis state {z:?}: {e}")))?;
        }
        match &self.targets {
            Targets::List { pairs } => {
                if pairs.is_empty() {
                    return bad("target list is empty".into());
                }
                for (p, q) in pairs {
                    for legs in [p, q] {
                        if legs.len() != self.k {
                            return bad(format!("target leg {legs:?} has {} modes, expected k = {}", legs.len(), self.k));
                        }
                        OccupationVector::from_unsorted(self.n, legs.clone())
                            .map_err(|e| CliError::Config(format!("target leg {legs:?}: {e}")))?;
                    }
                }
            }
            Targets::SlaterOverlaps if self.eta == 0 => {
                return bad("slater_overlaps needs eta >= 1".into());
            }
            _ => {}
        }
        if self.overlap_rotation_seed.is_some() && self.targets != Targets::SlaterOverlaps {
            return bad("overlap_rotation_seed only applies to slater_overlaps targets".into());
        }
        Ok(())
    }

    /// The input state on `n` modes.
    pub fn load_state(&self) -> Result<FermionState> {
        let state = match &self.state_source {
            StateSource::RandomPure => {
                let mut rng = shadow_rng(self.seed, STATE_STREAM);
                FermionState::random_pure(self.n, self.eta, &mut rng)?
            }
            StateSource::Basis { z } => {
                fermishadow::fock::basis_state(&OccupationVector::from_unsorted(self.n, z.clone())?)
            }
            StateSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read state {}: {e}", path.display())))?;
                FermionState::from_json(&text).map_err(|e| CliError::Config(format!("state file {}: {e}", path.display())))?
            }
        };
        if state.n() != self.n || state.eta() != self.eta {
            return Err(CliError::Config(format!(
                "state has (n, eta) = ({}, {}), config expects ({}, {})",
                state.n(),
                state.eta(),
                self.n,
                self.eta
            )));
        }
        Ok(state)
    }

    /// The `(p, q)` targets on `n` modes, in output order.
    pub fn target_pairs(&self) -> Result<Vec<(OccupationVector, OccupationVector)>> {
        match &self.targets {
            Targets::AllKrdm => {
                let all: Vec<_> = OccupationVector::all(self.n, self.k).collect();
                Ok(all.iter().flat_map(|p| all.iter().map(move |q| (p.clone(), q.clone()))).collect())
            }
            Targets::List { pairs } => pairs
                .iter()
                .map(|(p, q)| {
                    Ok((
                        OccupationVector::from_unsorted(self.n, p.clone())?,
                        OccupationVector::from_unsorted(self.n, q.clone())?,
                    ))
                })
                .collect(),
            Targets::SlaterOverlaps => Err(CliError::Config("slater_overlaps has no (p, q) target list".into())),
        }
    }
}
