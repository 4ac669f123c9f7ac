use std::path::Path;
use std::time::Instant;

use fermishadow::channel::{
    a_coeff, apply_channel_diagonal, eigenvalue, structure_factor, symmetrized_difference, twirl_moments_mc,
    ChannelSpec, EigenoperatorIndex,
};
use fermishadow::combinat::{rat, rational_to_f64, overlap_count, OccupationVector};
use fermishadow::fastpath::FastEstimator;
use fermishadow::fock::{DiagonalOperator, FermionState};
use fermishadow::identities::appendix_sweep;
use fermishadow::shadows::{collect_shadows, shadow_rng, DenseEstimator, EstimationMatrix};
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ValidationLevel {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationOptions {
    pub level: ValidationLevel,
    pub seed: u64,
    /// Perturb one class value of the estimation matrix used by the
    /// per-shadow check. The suite must then fail.
    pub corrupt_estimation_matrix: bool,
}

impl ValidationOptions {
    pub fn new(level: ValidationLevel) -> Self {
        Self {
            level,
            seed: 0x5eed,
            corrupt_estimation_matrix: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub level: ValidationLevel,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Limits {
    projector_n: usize,
    eigen_n: usize,
    appendix_n: usize,
    twirl_n: usize,
    twirl_samples: usize,
    shadow_n: usize,
    fast_n: usize,
}

fn limits(level: ValidationLevel) -> Limits {
    match level {
        ValidationLevel::Quick => Limits {
            projector_n: 8,
            eigen_n: 5,
            appendix_n: 6,
            twirl_n: 3,
            twirl_samples: 10_000,
            shadow_n: 5,
            fast_n: 5,
        },
        ValidationLevel::Full => Limits {
            projector_n: 12,
            eigen_n: 8,
            appendix_n: 10,
            twirl_n: 4,
            twirl_samples: 100_000,
            shadow_n: 6,
            fast_n: 8,
        },
    }
}

/// Outcome of one suite: `Ok(detail)` on success, `Err(detail)` on failure.
type Outcome = std::result::Result<String, String>;

fn run_check(name: &str, f: impl FnOnce() -> fermishadow::Result<Outcome>) -> CheckResult {
    let started = Instant::now();
    let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(Ok(d))) => (true, d),
        Ok(Ok(Err(d))) => (false, d),
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(_) => (false, "panicked".to_string()),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn projector_expansion(n_max: usize) -> fermishadow::Result<Outcome> {
    let mut cases = 0;
    for n in 0..=n_max {
        for eta in 0..=n {
            let mut acc = DiagonalOperator::zero(n, eta);
            for d in 0..=eta.min(n - eta) {
                acc = &acc + &symmetrized_difference(n, eta, d)?.scale(&a_coeff(n, eta, d)?);
            }
            if acc != DiagonalOperator::projector(&OccupationVector::leading(n, eta)) {
                return Ok(Err(format!("expansion differs from the projector at n={n}, eta={eta}")));
            }
            cases += 1;
        }
    }
    Ok(Ok(format!("{cases} (n, eta) cases exact")))
}

/// Every ordered `y` of length `d` drawn from `pool`.
fn arrangements(pool: &[usize], d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &m) in pool.iter().enumerate() {
        let rest: Vec<usize> = pool.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
        for mut tail in arrangements(&rest, d - 1) {
            tail.insert(0, m);
            out.push(tail);
        }
    }
    out
}

/// Every disjoint `(x, y)` with `x` sorted and `y` ordered, `|x| = |y| = d ≥ 1`.
pub fn eigenoperator_indices(n: usize) -> Vec<EigenoperatorIndex> {
    let mut out = Vec::new();
    for d in 1..=n / 2 {
        for x in OccupationVector::all(n, d) {
            let pool: Vec<usize> = (1..=n).filter(|m| !x.contains(*m)).collect();
            for y in arrangements(&pool, d) {
                out.push(EigenoperatorIndex::new(n, x.modes().to_vec(), y).expect("disjoint by construction"));
            }
        }
    }
    out
}

/// `M[ñ_{x,y}] = ñ_{x,y}/C(n+1,d)` on every particle-number sector.
pub fn eigenoperator_law(n: usize) -> fermishadow::Result<Outcome> {
    use rayon::prelude::*;
    let indices = eigenoperator_indices(n);
    let failures: Vec<String> = (0..=n)
        .into_par_iter()
        .map(|eta| -> fermishadow::Result<Vec<String>> {
            let spec = ChannelSpec::new(n, eta)?;
            let mut bad = Vec::new();
            for idx in &indices {
                let op = idx.operator(eta);
                let out = apply_channel_diagonal(&spec, &op)?;
                if out != op.scale(&eigenvalue(n, idx.degree())?) {
                    bad.push(format!("n={n} eta={eta} x={:?} y={:?}", idx.x(), idx.y()));
                }
            }
            Ok(bad)
        })
        .collect::<fermishadow::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if failures.is_empty() {
        Ok(Ok(format!("{} eigenoperators exact on all sectors", indices.len())))
    } else {
        Ok(Err(format!("{} failures, first {}", failures.len(), failures[0])))
    }
}

fn eigenoperators_up_to(n_max: usize) -> fermishadow::Result<Outcome> {
    let mut details = Vec::new();
    for n in 1..=n_max {
        match eigenoperator_law(n)? {
            Ok(d) => details.push(format!("n={n}: {d}")),
            Err(d) => return Ok(Err(d)),
        }
    }
    Ok(Ok(details.join("; ")))
}

pub fn appendix_check(n_max: usize) -> fermishadow::Result<Outcome> {
    let report = appendix_sweep(n_max)?;
    if report.passed {
        Ok(Ok(format!("{} sums exact", report.reports.len())))
    } else {
        let first = report.reports.iter().find(|r| !r.agree);
        Ok(Err(format!(
            "{} disagreements (first {:?}), vandermonde={}, weingarten={}",
            report.failures,
            first.map(|r| (&r.label, r.n, r.eta, r.index, r.s)),
            report.chu_vandermonde,
            report.weingarten_consistent
        )))
    }
}

/// One representative `(p, q)` per overlap class `|p ∩ q| = c`.
pub fn representative_pairs(n: usize, eta: usize) -> Vec<(usize, OccupationVector, OccupationVector)> {
    let p = OccupationVector::leading(n, eta);
    (0..=eta)
        .filter_map(|c| {
            OccupationVector::all(n, eta)
                .find(|q| overlap_count(&p, q) == c)
                .map(|q| (c, p.clone(), q))
        })
        .collect()
}

/// Haar Monte Carlo of the twirl moments against `f(c)` within `sigmas` standard errors.
pub fn twirl_check(n_max: usize, samples: usize, sigmas: f64, seed: u64) -> fermishadow::Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=n_max {
        for eta in 1..=n {
            let reps = representative_pairs(n, eta);
            let pairs: Vec<_> = reps.iter().map(|(_, p, q)| (p.clone(), q.clone())).collect();
            let mut rng = shadow_rng(seed, (n * 100 + eta) as u64);
            let est = twirl_moments_mc(n, eta, &pairs, samples, &mut rng)?;
            for (i, (c, _, _)) in reps.iter().enumerate() {
                let f = rational_to_f64(&structure_factor(n, eta, *c)?);
                let z = (est.mean[i] - f).abs() / est.stderr[i].max(1e-300);
                let exact_zero_error = est.stderr[i] == 0.0 && (est.mean[i] - f).abs() <= 1e-12;
                if !exact_zero_error {
                    worst = worst.max(z);
                    if z > sigmas {
                        return Ok(Err(format!(
                            "n={n} eta={eta} c={c}: mean {} vs f = {f}, {z:.2} standard errors",
                            est.mean[i]
                        )));
                    }
                }
                count += 1;
            }
        }
    }
    Ok(Ok(format!("{count} classes within {sigmas} sigma (worst {worst:.2})")))
}

/// `Σ_{p,q} |estimate|² = Tr[E²]` for every sampled shadow.
fn per_shadow_norm(n_max: usize, seed: u64, corrupt: bool) -> fermishadow::Result<Outcome> {
    let mut shadows_checked = 0;
    for n in 1..=n_max {
        for eta in 1..=n {
            for k in 1..=eta {
                let exact = EstimationMatrix::new(n, eta, k)?;
                let target = rational_to_f64(&exact.trace_sq());
                let est = if corrupt {
                    let mut values = exact.class_values().to_vec();
                    values[0] += rat(1);
                    DenseEstimator::with_matrix(EstimationMatrix::from_class_values(n, eta, k, values)?)
                } else {
                    DenseEstimator::with_matrix(exact)
                };
                let mut rng = shadow_rng(seed, (n * 100 + eta) as u64);
                let state = FermionState::random_pure(n, eta, &mut rng)?;
                for s in collect_shadows(&state, seed, 0, 4)? {
                    let x = est.estimation_operator(&s)?;
                    let total: f64 = x.data().iter().map(|v| v.norm_sqr()).sum();
                    if (total - target).abs() > 1e-8 * target.max(1.0) {
                        return Ok(Err(format!(
                            "n={n} eta={eta} k={k} shadow {}: sum {total} vs Tr[E^2] = {target}",
                            s.index
                        )));
                    }
                    shadows_checked += 1;
                }
            }
        }
    }
    Ok(Ok(format!("{shadows_checked} shadows")))
}

fn fast_vs_dense(n_max: usize, seed: u64) -> fermishadow::Result<Outcome> {
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        for eta in 1..=n {
            let mut rng = shadow_rng(seed, (n * 100 + eta) as u64);
            let state = FermionState::random_pure(n, eta, &mut rng)?;
            let shadows = collect_shadows(&state, seed, 0, 2)?;
            for k in 0..=eta {
                let dense = DenseEstimator::new(n, eta, k)?;
                let fast = FastEstimator::new(n, eta, k)?;
                let all: Vec<_> = OccupationVector::all(n, k).collect();
                let step = (all.len() / 6).max(1);
                for s in &shadows {
                    let x = dense.estimation_operator(s)?;
                    for p in all.iter().step_by(step) {
                        for q in all.iter().step_by(step) {
                            let d = x[(q.rank(), p.rank())];
                            let f = fast.estimate(s, p, q)?;
                            let rel = (d - f).norm() / d.norm().max(1.0);
                            worst = worst.max(rel);
                            if rel > 1e-8 {
                                return Ok(Err(format!("n={n} eta={eta} k={k} p={p} q={q}: {d} vs {f}")));
                            }
                            compared += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(Ok(format!("{compared} estimates, worst relative gap {worst:.1e}")))
}

/// Run every suite at the requested level. Failures are reported, never raised.
pub fn run_validation(options: &ValidationOptions) -> ValidationSummary {
    let l = limits(options.level);
    let seed = options.seed;
    let checks = vec![
        run_check("projector_expansion", || projector_expansion(l.projector_n)),
        run_check("eigenoperator_law", || eigenoperators_up_to(l.eigen_n)),
        run_check("appendix_sums", || appendix_check(l.appendix_n)),
        run_check("twirl_monte_carlo", || twirl_check(l.twirl_n, l.twirl_samples, 5.0, seed)),
        run_check("per_shadow_norm", || per_shadow_norm(l.shadow_n, seed, options.corrupt_estimation_matrix)),
        run_check("fast_vs_dense", || fast_vs_dense(l.fast_n, seed)),
    ];
    ValidationSummary {
        level: options.level,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Run the suites and write the JSON report to `out`, if given.
pub fn cmd_validate(options: &ValidationOptions, out: Option<&Path>) -> Result<ValidationSummary> {
    let summary = run_validation(options);
    if let Some(path) = out {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    Ok(summary)
}
