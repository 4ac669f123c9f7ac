//! The shadow protocol: sampling, the estimation matrix, the dense estimator,
//! aggregation and the variance formulas.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{
    binom, canonical_permutation, choose, fact, maps_leading_onto, rat, ratio, rational_to_f64,
    sign_pow, OccupationVector, PermutationMatrix, Rational,
};
use crate::error::{Error, Result};
use crate::fock::{measure_occupation, FermionState};
use crate::linalg::{compound_matrix, haar_unitary, minor_det_indices, ComplexMatrix, UnitaryMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One protocol sample: the Haar rotation `u` and the measured occupation `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalShadow {
    pub u: UnitaryMatrix,
    pub z: OccupationVector,
    pub seed: u64,
    pub index: u64,
}

impl ClassicalShadow {
    pub fn new(u: UnitaryMatrix, z: OccupationVector, seed: u64, index: u64) -> Result<Self> {
        if z.n() != u.dim() {
            return Err(Error::DimensionMismatch(format!(
                "occupation on {} modes with a {}x{} rotation",
                z.n(),
                u.dim(),
                u.dim()
            )));
        }
        Ok(Self { u, z, seed, index })
    }

    pub fn n(&self) -> usize {
        self.u.dim()
    }

    pub fn eta(&self) -> usize {
        self.z.len()
    }

    /// `v_z† u`: the rows of `u` listed in the order of the image of `v`.
    pub fn effective_rotation(&self, v: &PermutationMatrix) -> ComplexMatrix {
        let n = self.n();
        ComplexMatrix::from_fn(n, n, |i, j| self.u[(v.apply(i + 1) - 1, j)])
    }

    /// The same measurement outcome with the rotation replaced by `u·w`.
    pub fn rotated_by(&self, w: &UnitaryMatrix) -> Result<Self> {
        let u = UnitaryMatrix::new(self.u.matmul(w))?;
        Self::new(u, self.z.clone(), self.seed, self.index)
    }
}

/// The deterministic random stream of shadow `index` under `seed`.
pub fn shadow_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw one shadow from the stream `(seed, index)`.
pub fn sample_shadow(state: &FermionState, seed: u64, index: u64) -> Result<ClassicalShadow> {
    if state.n() == 0 {
        return Err(Error::OutOfRange("shadows need at least one mode".into()));
    }
    let mut rng = shadow_rng(seed, index);
    let u = haar_unitary(state.n(), &mut rng)?;
    let z = measure_occupation(state, &u, &mut rng)?;
    ClassicalShadow::new(u, z, seed, index)
}

/// Shadows `first..first + count` of the stream `seed`, sampled in parallel
/// and returned in index order.
pub fn collect_shadows(
    state: &FermionState,
    seed: u64,
    first: u64,
    count: usize,
) -> Result<Vec<ClassicalShadow>> {
    (first..first + count as u64)
        .into_par_iter()
        .map(|i| sample_shadow(state, seed, i))
        .collect()
}

/// Entry of the estimation matrix `E_{η,k}` at basis states sharing `s'`
/// modes with `[η]`.
pub fn estimation_entry(n: usize, eta: usize, k: usize, s_prime: usize) -> Rational {
    if s_prime > k {
        return Rational::zero();
    }
    let (n, eta, k, s) = (n as i64, eta as i64, k as i64, s_prime as i64);
    let num = binom(eta - s, k - s) * binom(n - eta + s, s);
    if num.is_zero() {
        return Rational::zero();
    }
    Rational::new(num, BigInt::from(sign_pow(k + s)) * binom(k, s))
}

/// The diagonal estimation matrix `E_{η,k}` over `S_{n,k}`, stored by overlap
/// class `s' = |r ∩ [η]|`.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationMatrix {
    n: usize,
    eta: usize,
    k: usize,
    class_values: Vec<Rational>,
    class_f64: Vec<f64>,
}

impl EstimationMatrix {
    pub fn new(n: usize, eta: usize, k: usize) -> Result<Self> {
        check_nek(n, eta, k)?;
        let values = (0..=k).map(|s| estimation_entry(n, eta, k, s)).collect();
        Self::from_class_values(n, eta, k, values)
    }

    /// Build from arbitrary class values. Used to inject faulty matrices in
    /// negative-control tests.
    pub fn from_class_values(n: usize, eta: usize, k: usize, values: Vec<Rational>) -> Result<Self> {
        check_nek(n, eta, k)?;
        if values.len() != k + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} class values for k = {k}",
                values.len()
            )));
        }
        let class_f64 = values.iter().map(rational_to_f64).collect();
        Ok(Self {
            n,
            eta,
            k,
            class_values: values,
            class_f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn class_values(&self) -> &[Rational] {
        &self.class_values
    }

    /// Entry at the k-subset `r`.
    pub fn entry(&self, r: &OccupationVector) -> f64 {
        self.class_f64[r.modes().iter().filter(|&&m| m <= self.eta).count()]
    }

    /// The full diagonal over `S_{n,k}` in rank order.
    pub fn diagonal(&self) -> Vec<f64> {
        OccupationVector::all(self.n, self.k).map(|r| self.entry(&r)).collect()
    }

    /// Number of k-subsets in class `s'`.
    pub fn class_multiplicity(&self, s_prime: usize) -> usize {
        choose(self.eta, s_prime) * choose(self.n - self.eta, self.k - s_prime)
    }

    /// `Tr[E²]`, exact.
    pub fn trace_sq(&self) -> Rational {
        self.class_values
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (s, v)| {
                acc + v * v * rat(self.class_multiplicity(s) as i64)
            })
    }
}

fn check_nek(n: usize, eta: usize, k: usize) -> Result<()> {
    if k > eta || eta > n {
        return Err(Error::OutOfRange(format!(
            "need k <= eta <= n, got n={n}, eta={eta}, k={k}"
        )));
    }
    Ok(())
}

/// Dense single-shot estimator `U_k(v_z†u)† E_{η,k} U_k(v_z†u)`.
#[derive(Clone, Debug)]
pub struct DenseEstimator {
    e: EstimationMatrix,
    diag: Vec<f64>,
    subsets: Vec<Vec<usize>>,
}

impl DenseEstimator {
    pub fn new(n: usize, eta: usize, k: usize) -> Result<Self> {
        Ok(Self::with_matrix(EstimationMatrix::new(n, eta, k)?))
    }

    pub fn with_matrix(e: EstimationMatrix) -> Self {
        let diag = e.diagonal();
        let subsets = OccupationVector::all(e.n, e.k)
            .map(|s| s.modes().iter().map(|m| m - 1).collect())
            .collect();
        Self { e, diag, subsets }
    }

    pub fn matrix(&self) -> &EstimationMatrix {
        &self.e
    }

    fn check(&self, shadow: &ClassicalShadow) -> Result<()> {
        if shadow.n() != self.e.n || shadow.eta() != self.e.eta {
            return Err(Error::DimensionMismatch(format!(
                "shadow on ({}, {}) for estimator on ({}, {})",
                shadow.n(),
                shadow.eta(),
                self.e.n,
                self.e.eta
            )));
        }
        Ok(())
    }

    fn check_legs(&self, p: &OccupationVector, q: &OccupationVector) -> Result<()> {
        if p.len() != self.e.k || q.len() != self.e.k || p.n() != self.e.n || q.n() != self.e.n {
            return Err(Error::DimensionMismatch(format!(
                "legs {p}, {q} for k = {} on {} modes",
                self.e.k, self.e.n
            )));
        }
        Ok(())
    }

    fn column(&self, g: &ComplexMatrix, p: &OccupationVector) -> Vec<Complex64> {
        let cols: Vec<usize> = p.modes().iter().map(|m| m - 1).collect();
        self.subsets.iter().map(|r| minor_det_indices(g, r, &cols)).collect()
    }

    fn estimate_in_frame(&self, g: &ComplexMatrix, p: &OccupationVector, q: &OccupationVector) -> Complex64 {
        let cp = self.column(g, p);
        let cq = if p == q { cp.clone() } else { self.column(g, q) };
        cq.iter()
            .zip(&cp)
            .zip(&self.diag)
            .map(|((a, b), e)| a.conj() * b * *e)
            .sum()
    }

    /// Single-shot estimate of `⟨D^p_q⟩`.
    pub fn estimate(&self, shadow: &ClassicalShadow, p: &OccupationVector, q: &OccupationVector) -> Result<Complex64> {
        self.check(shadow)?;
        self.check_legs(p, q)?;
        let g = shadow.effective_rotation(&canonical_permutation(&shadow.z));
        Ok(self.estimate_in_frame(&g, p, q))
    }

    /// Estimate using an arbitrary permutation `v` that maps `[η]` onto `z`.
    pub fn estimate_with_permutation(
        &self,
        shadow: &ClassicalShadow,
        v: &PermutationMatrix,
        p: &OccupationVector,
        q: &OccupationVector,
    ) -> Result<Complex64> {
        self.check(shadow)?;
        self.check_legs(p, q)?;
        if v.n() != shadow.n() || !maps_leading_onto(v, &shadow.z) {
            return Err(Error::InvalidOccupation(format!(
                "permutation {:?} does not map [eta] onto {}",
                v.image(),
                shadow.z
            )));
        }
        let g = shadow.effective_rotation(v);
        Ok(self.estimate_in_frame(&g, p, q))
    }

    /// All single-shot estimates as the matrix `X`, with `⟨D^p_q⟩ ≈ X[rank q, rank p]`.
    pub fn estimation_operator(&self, shadow: &ClassicalShadow) -> Result<ComplexMatrix> {
        self.check(shadow)?;
        let g = shadow.effective_rotation(&canonical_permutation(&shadow.z));
        let uk = compound_matrix(&g, self.e.k);
        let mut eu = uk.clone();
        for (r, &e) in self.diag.iter().enumerate() {
            for c in 0..eu.cols() {
                eu[(r, c)] *= e;
            }
        }
        Ok(uk.adjoint().matmul(&eu))
    }

    /// Single-shot estimate of `Σ o_{p,q} ⟨D^p_q⟩`.
    pub fn estimate_observable(&self, shadow: &ClassicalShadow, obs: &RdmObservable) -> Result<Complex64> {
        if obs.n != self.e.n || obs.k != self.e.k {
            return Err(Error::DimensionMismatch(format!(
                "observable on ({}, k={}) for estimator on ({}, k={})",
                obs.n, obs.k, self.e.n, self.e.k
            )));
        }
        let x = self.estimation_operator(shadow)?;
        Ok(obs.coeffs.iter().map(|(&(a, b), o)| o * x[(b, a)]).sum())
    }
}

/// Dense single-shot estimate of `⟨D^p_q⟩`.
pub fn estimate_rdm(
    shadow: &ClassicalShadow,
    eta: usize,
    k: usize,
    p: &OccupationVector,
    q: &OccupationVector,
) -> Result<Complex64> {
    DenseEstimator::new(shadow.n(), eta, k)?.estimate(shadow, p, q)
}

/// Dense single-shot estimate of the observable `Σ o_{p,q} D^p_q`.
pub fn estimate_observable(shadow: &ClassicalShadow, obs: &RdmObservable, eta: usize) -> Result<Complex64> {
    DenseEstimator::new(shadow.n(), eta, obs.k)?.estimate_observable(shadow, obs)
}

/// Coefficients `o_{p,q}` of the observable `Σ o_{p,q} D^p_q`, keyed by the
/// ranks of `p` and `q`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RdmObservable {
    n: usize,
    k: usize,
    coeffs: BTreeMap<(usize, usize), Complex64>,
}

impl RdmObservable {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::OutOfRange(format!("k = {k} exceeds n = {n}")));
        }
        Ok(Self {
            n,
            k,
            coeffs: BTreeMap::new(),
        })
    }

    /// The single RDM element `D^p_q`.
    pub fn single(p: &OccupationVector, q: &OccupationVector) -> Result<Self> {
        let mut o = Self::new(p.n(), p.len())?;
        o.set(p, q, Complex64::new(1.0, 0.0))?;
        Ok(o)
    }

    /// The particle-number operator `Σ_p n̂_p` as a 1-RDM observable.
    pub fn particle_number(n: usize) -> Self {
        let coeffs = (0..n).map(|i| ((i, i), Complex64::new(1.0, 0.0))).collect();
        Self { n, k: 1, coeffs }
    }

    /// From a dense `C(n,k)×C(n,k)` coefficient matrix.
    pub fn from_matrix(n: usize, k: usize, m: &ComplexMatrix) -> Result<Self> {
        let dim = choose(n, k);
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} coefficients for C({n},{k}) = {dim}",
                m.rows(),
                m.cols()
            )));
        }
        let mut coeffs = BTreeMap::new();
        for a in 0..dim {
            for b in 0..dim {
                if m[(a, b)] != ZERO {
                    coeffs.insert((a, b), m[(a, b)]);
                }
            }
        }
        Ok(Self { n, k, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn set(&mut self, p: &OccupationVector, q: &OccupationVector, value: Complex64) -> Result<()> {
        if p.len() != self.k || q.len() != self.k || p.n() != self.n || q.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "legs {p}, {q} for k = {} on {} modes",
                self.k, self.n
            )));
        }
        self.coeffs.insert((p.rank(), q.rank()), value);
        Ok(())
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = choose(self.n, self.k);
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (&(a, b), &v) in &self.coeffs {
            m[(a, b)] = v;
        }
        m
    }

    /// `U_k(w) o U_k(w)†`.
    pub fn rotated(&self, w: &ComplexMatrix) -> Result<Self> {
        let uk = compound_matrix(w, self.k);
        Self::from_matrix(self.n, self.k, &uk.matmul(&self.to_matrix()).matmul(&uk.adjoint()))
    }
}

/// How a series of single-shot estimates is combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Aggregation {
    Mean,
    MedianOfMeans { batches: usize },
}

/// Single-shot estimates of one target.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EstimateSeries {
    pub target: String,
    pub values: Vec<Complex64>,
}

/// An aggregated estimate with per-component error bars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub value: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Mean of `|x − x̄|²` over single shots, with the `N − 1` normalization.
    pub sample_variance: f64,
}

/// Combine a series of estimates.
///
/// The mean mode reports the sample mean and the standard error from the
/// `N − 1` sample variance. Median-of-means splits the series into equal
/// consecutive batches and takes the real and imaginary medians of the batch
/// means separately; its error bar is the spread of the batch means over √B.
pub fn aggregate(series: &EstimateSeries, mode: Aggregation) -> Result<Aggregate> {
    let mut acc = StreamingAggregator::new(series.values.len(), mode)?;
    for &v in &series.values {
        acc.push(v);
    }
    acc.finish()
}

/// Incremental version of [`aggregate`] for a series of known length.
#[derive(Clone, Debug)]
pub struct StreamingAggregator {
    len: usize,
    batch: usize,
    count: usize,
    sum: Complex64,
    sumsq_re: f64,
    sumsq_im: f64,
    batch_sum: Complex64,
    batch_means: Vec<Complex64>,
    median: bool,
}

impl StreamingAggregator {
    pub fn new(len: usize, mode: Aggregation) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptySeries);
        }
        let (batch, median) = match mode {
            Aggregation::Mean => (len, false),
            Aggregation::MedianOfMeans { batches } => {
                if batches == 0 || len % batches != 0 {
                    return Err(Error::InvalidBatches { batches, len });
                }
                (len / batches, true)
            }
        };
        Ok(Self {
            len,
            batch,
            count: 0,
            sum: ZERO,
            sumsq_re: 0.0,
            sumsq_im: 0.0,
            batch_sum: ZERO,
            batch_means: Vec::new(),
            median,
        })
    }

    pub fn push(&mut self, v: Complex64) {
        self.count += 1;
        self.sum += v;
        self.sumsq_re += v.re * v.re;
        self.sumsq_im += v.im * v.im;
        self.batch_sum += v;
        if self.count % self.batch == 0 {
            self.batch_means.push(self.batch_sum / self.batch as f64);
            self.batch_sum = ZERO;
        }
    }

    pub fn finish(&self) -> Result<Aggregate> {
        if self.count != self.len {
            return Err(Error::DimensionMismatch(format!(
                "aggregator expected {} values, received {}",
                self.len, self.count
            )));
        }
        let n = self.len as f64;
        let mean = self.sum / n;
        let var = |sumsq: f64, m: f64| {
            if self.len > 1 {
                ((sumsq - n * m * m) / (n - 1.0)).max(0.0)
            } else {
                0.0
            }
        };
        let (var_re, var_im) = (var(self.sumsq_re, mean.re), var(self.sumsq_im, mean.im));
        if !self.median {
            return Ok(Aggregate {
                value: mean,
                stderr_re: (var_re / n).sqrt(),
                stderr_im: (var_im / n).sqrt(),
                sample_variance: var_re + var_im,
            });
        }
        let b = self.batch_means.len() as f64;
        let re: Vec<f64> = self.batch_means.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.batch_means.iter().map(|z| z.im).collect();
        let spread = |xs: &[f64]| {
            if xs.len() < 2 {
                return 0.0;
            }
            let m = xs.iter().sum::<f64>() / b;
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0) / b).sqrt()
        };
        Ok(Aggregate {
            value: Complex64::new(median(&re), median(&im)),
            stderr_re: spread(&re),
            stderr_im: spread(&im),
            sample_variance: var_re + var_im,
        })
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// `Tr[E²]/C(n,k)²` summed over overlap classes.
pub fn q_value_direct(n: usize, eta: usize, k: usize) -> Result<Rational> {
    let e = EstimationMatrix::new(n, eta, k)?;
    let dim = rat(choose(n, k) as i64);
    Ok(e.trace_sq() / (&dim * &dim))
}

/// `Q_{n,η,k} = Tr[E²]/C(n,k)²` from the closed s-sum.
pub fn q_value(n: usize, eta: usize, k: usize) -> Result<Rational> {
    check_nek(n, eta, k)?;
    let (n, eta, k) = (n as i64, eta as i64, k as i64);
    let mut acc = Rational::zero();
    for s in 0..=k {
        let mut prod = Rational::one();
        for j in 0..k {
            prod *= ratio(n - eta + k - s - j, n - j);
        }
        if prod.is_zero() {
            continue;
        }
        let f = ratio(
            fact(eta - k + s) * fact(n - eta + k - s) * fact(n - k),
            fact(n) * fact(eta - k) * fact(n - eta),
        );
        acc += rat(binom(k, s)) * prod * f;
    }
    Ok(rat(binom(eta, k)) * acc)
}

/// `Q_{n,η,η}` from the overlap-class sum used for Slater overlaps.
pub fn q_slater_sum(n: usize, eta: usize) -> Result<Rational> {
    check_nek(n, eta, eta)?;
    let (n, eta) = (n as i64, eta as i64);
    let mut acc = Rational::zero();
    for s in 0..=eta.min(n - eta) {
        let a = fact(n - s);
        acc += ratio(
            fact(eta) * fact(n - eta) * &a * &a,
            fact(eta - s) * fact(n - s - eta) * fact(n) * fact(n),
        );
    }
    Ok(acc)
}

/// Average squared shadow norm over all `(p, q)`:
/// `Tr[E²]/C(n,k)² − C(n−k,η−k)²/(C(n,η)² C(n,k))`.
pub fn avg_shadow_norm_sq(n: usize, eta: usize, k: usize) -> Result<Rational> {
    let q = q_value_direct(n, eta, k)?;
    let (n, eta, k) = (n as i64, eta as i64, k as i64);
    let c = binom(n - k, eta - k);
    let d = binom(n, eta);
    Ok(q - ratio(&c * &c, &d * &d * binom(n, k)))
}

/// Upper bound `C(η,k)(1 − (η−k)/n)^k (1+n)/(1+n−k)` on the average variance, exact.
pub fn variance_bound_exact(n: usize, eta: usize, k: usize) -> Result<Rational> {
    check_nek(n, eta, k)?;
    if k == 0 {
        return Ok(rat(1));
    }
    let (n, eta, k) = (n as i64, eta as i64, k as i64);
    let base = ratio(n - eta + k, n);
    let mut pow = Rational::one();
    for _ in 0..k {
        pow *= &base;
    }
    Ok(rat(binom(eta, k)) * pow * ratio(1 + n, 1 + n - k))
}

/// Upper bound on the average variance as a float.
pub fn variance_bound(n: usize, eta: usize, k: usize) -> Result<f64> {
    Ok(rational_to_f64(&variance_bound_exact(n, eta, k)?))
}

/// Archive record of one shadow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowRecord {
    pub seed: u64,
    pub index: u64,
    /// Row-major `(re, im)` pairs of `u`.
    pub u: Vec<[f64; 2]>,
    pub z: Vec<usize>,
}

impl From<&ClassicalShadow> for ShadowRecord {
    fn from(s: &ClassicalShadow) -> Self {
        Self {
            seed: s.seed,
            index: s.index,
            u: s.u.data().iter().map(|c| [c.re, c.im]).collect(),
            z: s.z.modes().to_vec(),
        }
    }
}

impl TryFrom<ShadowRecord> for ClassicalShadow {
    type Error = Error;
    fn try_from(r: ShadowRecord) -> Result<Self> {
        let n = (r.u.len() as f64).sqrt().round() as usize;
        if n * n != r.u.len() {
            return Err(Error::DimensionMismatch(format!("{} entries is not a square matrix", r.u.len())));
        }
        let u = ComplexMatrix::from_vec(n, n, r.u.iter().map(|[a, b]| Complex64::new(*a, *b)).collect())?;
        ClassicalShadow::new(UnitaryMatrix::new(u)?, OccupationVector::new(n, r.z)?, r.seed, r.index)
    }
}

/// Write shadows as JSON lines.
pub fn write_archive<W: Write>(mut out: W, shadows: &[ClassicalShadow]) -> Result<()> {
    for s in shadows {
        serde_json::to_writer(&mut out, &ShadowRecord::from(s))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read shadows from JSON lines.
pub fn read_archive<R: BufRead>(input: R) -> Result<Vec<ClassicalShadow>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ShadowRecord = serde_json::from_str(&line)?;
        out.push(ClassicalShadow::try_from(rec)?);
    }
    Ok(out)
}

/// Modes rendered as a space-separated list, e.g. `1 3`.
pub fn format_modes(v: &OccupationVector) -> String {
    v.modes().iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parse a space-separated list of modes.
pub fn parse_modes(n: usize, s: &str) -> Result<OccupationVector> {
    let modes = s
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    OccupationVector::new(n, modes)
}

/// One exported single-target estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub p: String,
    pub q: String,
    pub k: usize,
    pub estimate_re: f64,
    pub estimate_im: f64,
}

/// Write estimates as CSV with columns `p, q, k, estimate_re, estimate_im`.
pub fn write_estimates_csv<W: Write>(out: W, rows: &[EstimateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Read estimates written by [`write_estimates_csv`].
pub fn read_estimates_csv<R: std::io::Read>(input: R) -> Result<Vec<EstimateRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{basis_state, expectation_rdm};

    fn ov(n: usize, m: &[usize]) -> OccupationVector {
        OccupationVector::new(n, m.to_vec()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn estimation_entry_examples() {
        assert_eq!(estimation_entry(2, 1, 1, 1), rat(2));
        assert_eq!(estimation_entry(2, 1, 1, 0), rat(-1));
        for eta in 1..6 {
            assert_eq!(estimation_entry(eta, eta, 1, 1), rat(1));
        }
    }

    #[test]
    fn full_filling_estimator_is_identity() {
        for n in 1..=5 {
            for k in 0..=n {
                let e = EstimationMatrix::new(n, n, k).unwrap();
                assert!(e.diagonal().iter().all(|&v| v == 1.0));
            }
        }
    }

    #[test]
    fn dense_estimator_examples() {
        let shadow = ClassicalShadow::new(UnitaryMatrix::identity(2), ov(2, &[1]), 0, 0).unwrap();
        assert_eq!(estimate_rdm(&shadow, 1, 1, &ov(2, &[1]), &ov(2, &[1])).unwrap(), c(2.0));
        assert_eq!(estimate_rdm(&shadow, 1, 1, &ov(2, &[2]), &ov(2, &[2])).unwrap(), c(-1.0));
    }

    #[test]
    fn full_filling_estimates_are_exact() {
        let state = basis_state(&OccupationVector::leading(4, 4));
        let shadow = sample_shadow(&state, 5, 0).unwrap();
        assert_eq!(shadow.z, OccupationVector::leading(4, 4));
        for k in 1..=4 {
            let est = DenseEstimator::new(4, 4, k).unwrap();
            for p in OccupationVector::all(4, k) {
                for q in OccupationVector::all(4, k) {
                    let v = est.estimate(&shadow, &p, &q).unwrap();
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!((v - c(expect)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut rng = shadow_rng(1, 1);
        let state = FermionState::random_pure(4, 2, &mut rng).unwrap();
        let a = sample_shadow(&state, 42, 7).unwrap();
        let b = sample_shadow(&state, 42, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_shadow(&state, 42, 8).unwrap());
        let batch = collect_shadows(&state, 42, 5, 4).unwrap();
        assert_eq!(batch[2], a);
    }

    #[test]
    fn operator_matches_pairwise_estimates() {
        let mut rng = shadow_rng(2, 0);
        let state = FermionState::random_pure(5, 3, &mut rng).unwrap();
        let shadow = sample_shadow(&state, 3, 0).unwrap();
        let est = DenseEstimator::new(5, 3, 2).unwrap();
        let x = est.estimation_operator(&shadow).unwrap();
        for p in OccupationVector::all(5, 2) {
            for q in OccupationVector::all(5, 2) {
                let v = est.estimate(&shadow, &p, &q).unwrap();
                assert!((v - x[(q.rank(), p.rank())]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn particle_number_estimate_is_exact() {
        let mut rng = shadow_rng(3, 0);
        for (n, eta) in [(3, 1), (4, 2), (6, 3), (5, 4)] {
            let state = FermionState::random_pure(n, eta, &mut rng).unwrap();
            let obs = RdmObservable::particle_number(n);
            for i in 0..20 {
                let shadow = sample_shadow(&state, 9, i).unwrap();
                let v = estimate_observable(&shadow, &obs, eta).unwrap();
                assert!((v - c(eta as f64)).norm() < 1e-10, "n={n} eta={eta}: {v}");
            }
        }
    }

    #[test]
    fn single_entry_observable_matches_estimate() {
        let mut rng = shadow_rng(4, 0);
        let state = FermionState::random_pure(4, 2, &mut rng).unwrap();
        let shadow = sample_shadow(&state, 4, 1).unwrap();
        let est = DenseEstimator::new(4, 2, 2).unwrap();
        let (p, q) = (ov(4, &[1, 3]), ov(4, &[2, 4]));
        let obs = RdmObservable::single(&p, &q).unwrap();
        let a = est.estimate_observable(&shadow, &obs).unwrap();
        let b = est.estimate(&shadow, &p, &q).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn observable_rotation_absorbs_into_shadow() {
        let mut rng = shadow_rng(5, 0);
        let state = FermionState::random_pure(4, 2, &mut rng).unwrap();
        let shadow = sample_shadow(&state, 5, 3).unwrap();
        let w = haar_unitary(4, &mut rng).unwrap();
        let obs = RdmObservable::single(&ov(4, &[2]), &ov(4, &[3])).unwrap();
        let lhs = estimate_observable(&shadow.rotated_by(&w).unwrap(), &obs, 2).unwrap();
        let rhs = estimate_observable(&shadow, &obs.rotated(&w).unwrap(), 2).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn hermiticity_per_shadow() {
        let mut rng = shadow_rng(6, 0);
        let state = FermionState::random_pure(5, 2, &mut rng).unwrap();
        let est = DenseEstimator::new(5, 2, 2).unwrap();
        for i in 0..5 {
            let shadow = sample_shadow(&state, 6, i).unwrap();
            for p in OccupationVector::all(5, 2) {
                for q in OccupationVector::all(5, 2) {
                    let a = est.estimate(&shadow, &p, &q).unwrap();
                    let b = est.estimate(&shadow, &q, &p).unwrap();
                    assert!((a.conj() - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unbiased_on_small_system() {
        let mut rng = shadow_rng(7, 0);
        let state = FermionState::random_pure(3, 1, &mut rng).unwrap();
        let est = DenseEstimator::new(3, 1, 1).unwrap();
        let shadows = collect_shadows(&state, 77, 0, 40_000).unwrap();
        for p in OccupationVector::all(3, 1) {
            for q in OccupationVector::all(3, 1) {
                let series = EstimateSeries {
                    target: format!("{p}{q}"),
                    values: shadows.iter().map(|s| est.estimate(s, &p, &q).unwrap()).collect(),
                };
                let agg = aggregate(&series, Aggregation::Mean).unwrap();
                let exact = expectation_rdm(&state, &p, &q).unwrap();
                assert!((agg.value.re - exact.re).abs() < 5.0 * agg.stderr_re + 1e-12);
                assert!((agg.value.im - exact.im).abs() < 5.0 * agg.stderr_im + 1e-12);
            }
        }
    }

    #[test]
    fn aggregate_examples() {
        let constant = EstimateSeries {
            target: "c".into(),
            values: vec![c(2.5); 6],
        };
        let a = aggregate(&constant, Aggregation::Mean).unwrap();
        assert_eq!(a.value, c(2.5));
        assert_eq!((a.stderr_re, a.stderr_im), (0.0, 0.0));

        let outlier = EstimateSeries {
            target: "o".into(),
            values: vec![c(0.0), c(0.0), c(0.0), c(100.0)],
        };
        let m = aggregate(&outlier, Aggregation::MedianOfMeans { batches: 4 }).unwrap();
        assert_eq!(m.value, c(0.0));

        let three = EstimateSeries {
            target: "t".into(),
            values: vec![c(1.0), c(2.0), c(3.0)],
        };
        let a = aggregate(&three, Aggregation::Mean).unwrap();
        assert_eq!(a.value, c(2.0));
        assert!((a.stderr_re - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);

        assert!(matches!(
            aggregate(&EstimateSeries::default(), Aggregation::Mean),
            Err(Error::EmptySeries)
        ));
        assert!(matches!(
            aggregate(&three, Aggregation::MedianOfMeans { batches: 2 }),
            Err(Error::InvalidBatches { .. })
        ));
    }

    #[test]
    fn variance_examples() {
        assert_eq!(avg_shadow_norm_sq(2, 1, 1).unwrap(), ratio(9, 8));
        assert_eq!(variance_bound_exact(2, 1, 1).unwrap(), ratio(3, 2));
        assert_eq!(q_value(2, 1, 1).unwrap(), ratio(5, 4));
        for n in 1..6 {
            assert_eq!(avg_shadow_norm_sq(n, n, n).unwrap(), rat(0));
            for eta in 0..=n {
                assert_eq!(variance_bound(n, eta, 0).unwrap(), 1.0);
            }
        }
        assert_eq!(EstimationMatrix::new(2, 1, 1).unwrap().trace_sq(), rat(5));
    }

    #[test]
    fn q_value_matches_class_sum() {
        for n in 0..=12 {
            for eta in 0..=n {
                for k in 0..=eta {
                    assert_eq!(q_value(n, eta, k).unwrap(), q_value_direct(n, eta, k).unwrap());
                }
                assert_eq!(q_slater_sum(n, eta).unwrap(), q_value(n, eta, eta).unwrap());
            }
        }
    }

    #[test]
    fn norm_never_exceeds_bound() {
        for n in 1..=14 {
            for eta in 0..=n {
                for k in 0..=eta {
                    assert!(
                        avg_shadow_norm_sq(n, eta, k).unwrap() <= variance_bound_exact(n, eta, k).unwrap(),
                        "n={n} eta={eta} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn archive_round_trip() {
        let mut rng = shadow_rng(8, 0);
        let state = FermionState::random_pure(4, 2, &mut rng).unwrap();
        let shadows = collect_shadows(&state, 8, 0, 5).unwrap();
        let mut buf = Vec::new();
        write_archive(&mut buf, &shadows).unwrap();
        let back = read_archive(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, shadows);
    }

    #[test]
    fn estimates_csv_round_trip() {
        let rows = vec![EstimateRow {
            p: format_modes(&ov(4, &[1, 3])),
            q: format_modes(&ov(4, &[2, 3])),
            k: 2,
            estimate_re: 0.25,
            estimate_im: -1.5e-3,
        }];
        let mut buf = Vec::new();
        write_estimates_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("p,q,k,estimate_re,estimate_im\n"));
        assert_eq!(read_estimates_csv(buf.as_slice()).unwrap(), rows);
        assert_eq!(parse_modes(4, &rows[0].p).unwrap(), ov(4, &[1, 3]));
    }
}
