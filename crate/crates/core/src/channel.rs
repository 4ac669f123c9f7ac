//! Closed-form measurement and twirling channel analytics, with Monte-Carlo
//! validators.
//!
//! Only the diagonal action of the channels is represented: every operator the
//! protocol inverts is diagonal in the occupation basis.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinat::{binom, choose, fact, rat, ratio, sign_pow, OccupationVector, Rational};
use crate::error::{Error, Result};
use crate::fock::DiagonalOperator;
use crate::linalg::{compound_matrix, haar_unitary, minor_det_indices};

/// The measurement channel on `eta` particles in `n` modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    n: usize,
    eta: usize,
}

impl ChannelSpec {
    pub fn new(n: usize, eta: usize) -> Result<Self> {
        if eta > n {
            return Err(Error::OutOfRange(format!("eta = {eta} exceeds n = {n}")));
        }
        Ok(Self { n, eta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> usize {
        self.eta
    }
}

/// Paired disjoint mode lists `(x_j, y_j)` labelling `ñ_{x,y} = Π_j (n̂_{x_j} − n̂_{y_j})`.
///
/// `x` is stored sorted and `y` in the order paired with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenoperatorIndex {
    n: usize,
    x: Vec<usize>,
    y: Vec<usize>,
}

impl EigenoperatorIndex {
    pub fn new(n: usize, x: Vec<usize>, y: Vec<usize>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "eigenoperator legs {x:?} and {y:?} differ in length"
            )));
        }
        let mut all: Vec<usize> = x.iter().chain(&y).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) || all.iter().any(|&m| m < 1 || m > n) {
            return Err(Error::InvalidOccupation(format!(
                "eigenoperator legs {x:?}, {y:?} must be disjoint modes of 1..={n}"
            )));
        }
        let mut pairs: Vec<(usize, usize)> = x.into_iter().zip(y).collect();
        pairs.sort_unstable();
        let (x, y) = pairs.into_iter().unzip();
        Ok(Self { n, x, y })
    }

    pub fn degree(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    /// `ñ_{x,y}` as a diagonal operator on `eta` particles.
    pub fn operator(&self, eta: usize) -> DiagonalOperator {
        DiagonalOperator::from_fn(self.n, eta, |r| {
            let v: i64 = self
                .x
                .iter()
                .zip(&self.y)
                .map(|(&a, &b)| i64::from(r.contains(a)) - i64::from(r.contains(b)))
                .product();
            rat(v)
        })
    }
}

/// Diagonal structure factor `f(k)` of the two-fold twirl, for basis states
/// sharing `k` modes.
pub fn structure_factor(n: usize, eta: usize, k: usize) -> Result<Rational> {
    if eta > n || k > eta {
        return Err(Error::OutOfRange(format!(
            "structure factor needs k <= eta <= n, got n={n}, eta={eta}, k={k}"
        )));
    }
    let (n, eta, k) = (n as i64, eta as i64, k as i64);
    Ok(ratio(eta + 1, (eta + 1 - k) * binom(n + 1, eta) * binom(n, eta)))
}

/// Eigenvalue `1/C(n+1, d)` of the measurement channel on degree-`d` eigenoperators.
pub fn eigenvalue(n: usize, d: usize) -> Result<Rational> {
    if d > n + 1 {
        return Err(Error::OutOfRange(format!("degree {d} exceeds n + 1 = {}", n + 1)));
    }
    Ok(ratio(1, binom(n as i64 + 1, d as i64)))
}

fn check_degree(n: usize, eta: usize, d: usize) -> Result<()> {
    if eta > n || d > eta.min(n - eta) {
        return Err(Error::OutOfRange(format!(
            "degree d={d} must satisfy d <= min(eta, n - eta) for n={n}, eta={eta}"
        )));
    }
    Ok(())
}

/// Coefficient `a_d = (n−2d+1)(n−d−η)!(η−d)!/(n−d+1)!` of `Π_[η] = Σ_d a_d ñ_d`.
pub fn a_coeff(n: usize, eta: usize, d: usize) -> Result<Rational> {
    check_degree(n, eta, d)?;
    let (n, eta, d) = (n as i64, eta as i64, d as i64);
    Ok(ratio(
        BigInt::from(n - 2 * d + 1) * fact(n - d - eta) * fact(eta - d),
        fact(n - d + 1),
    ))
}

/// Value of `ñ_d` on a basis state sharing `c` modes with `[η]`.
pub fn symmetrized_difference_value(n: usize, eta: usize, d: usize, c: usize) -> BigInt {
    let (n, eta, d, c) = (n as i64, eta as i64, d as i64, c as i64);
    let mut acc = BigInt::zero();
    for j in 0..=d {
        let term = fact(eta - d + j) / fact(eta - d) * fact(n - eta - j) / fact(n - eta - d)
            * binom(c, d - j)
            * binom(eta - c, j);
        acc += BigInt::from(sign_pow(j)) * term;
    }
    acc
}

/// The symmetrized difference operator `ñ_d` over `S_{n,η}`, from its
/// elementary-symmetric expansion.
pub fn symmetrized_difference(n: usize, eta: usize, d: usize) -> Result<DiagonalOperator> {
    check_degree(n, eta, d)?;
    let values: Vec<Rational> = (0..=eta)
        .map(|c| Rational::from_integer(symmetrized_difference_value(n, eta, d, c)))
        .collect();
    let lead = OccupationVector::leading(n, eta);
    Ok(DiagonalOperator::from_fn(n, eta, |r| {
        values[crate::combinat::overlap_count(r, &lead)].clone()
    }))
}

/// The inverse channel applied to `Π_[η]`: `Σ_d a_d C(n+1,d) ñ_d`.
pub fn inverse_channel_on_projector(n: usize, eta: usize) -> Result<DiagonalOperator> {
    ChannelSpec::new(n, eta)?;
    let mut acc = DiagonalOperator::zero(n, eta);
    for d in 0..=eta.min(n - eta) {
        let w = a_coeff(n, eta, d)? * rat(binom(n as i64 + 1, d as i64));
        acc = &acc + &symmetrized_difference(n, eta, d)?.scale(&w);
    }
    Ok(acc)
}

/// Coefficient of `Π_p` in `M[Π_r]` as a function of the overlap `c = |p ∩ r|`.
fn channel_kernel(n: usize, eta: usize) -> Vec<Rational> {
    let norm = binom(n as i64 + 1, eta as i64);
    (0..=eta)
        .map(|c| {
            (0..=c).fold(Rational::zero(), |acc, j| {
                acc + ratio(binom(c as i64, j as i64), &norm * binom(eta as i64, j as i64))
            })
        })
        .collect()
}

/// Apply the measurement channel to a diagonal operator.
///
/// Uses `M[Π_p] = Σ_j e_j({n̂}_p)/(C(n+1,η) C(η,j))`, so that the output at `r`
/// is `Σ_c g(c) Σ_{|p∩r|=c} D_p`.
pub fn apply_channel_diagonal(spec: &ChannelSpec, d: &DiagonalOperator) -> Result<DiagonalOperator> {
    if d.n() != spec.n || d.eta() != spec.eta {
        return Err(Error::DimensionMismatch(format!(
            "operator on ({}, {}) under channel on ({}, {})",
            d.n(),
            d.eta(),
            spec.n,
            spec.eta
        )));
    }
    let (n, eta) = (spec.n, spec.eta);
    let kernel = channel_kernel(n, eta);
    let masks: Vec<u64> = OccupationVector::all(n, eta).map(|s| s.mask()).collect();

    // Put the entries over a common denominator so the class sums are integer.
    let denom = d
        .values()
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let numer: Vec<BigInt> = d
        .values()
        .iter()
        .map(|v| v.numer() * (&denom / v.denom()))
        .collect();
    let small: Option<Vec<i128>> = numer.iter().map(|v| v.to_i128()).collect();
    let dim = masks.len();
    let fits = small
        .as_ref()
        .is_some_and(|s| s.iter().all(|v| v.unsigned_abs() < (u128::MAX >> 2) / dim.max(1) as u128));

    let class_sums: Vec<Vec<BigInt>> = if fits {
        let s = small.expect("checked above");
        masks
            .iter()
            .map(|&mr| {
                let mut sums = vec![0i128; eta + 1];
                for (&mp, &v) in masks.iter().zip(&s) {
                    sums[(mr & mp).count_ones() as usize] += v;
                }
                sums.into_iter().map(BigInt::from).collect()
            })
            .collect()
    } else {
        masks
            .iter()
            .map(|&mr| {
                let mut sums = vec![BigInt::zero(); eta + 1];
                for (&mp, v) in masks.iter().zip(&numer) {
                    sums[(mr & mp).count_ones() as usize] += v;
                }
                sums
            })
            .collect()
    };

    let values = class_sums
        .into_iter()
        .map(|sums| {
            let total = sums
                .into_iter()
                .zip(&kernel)
                .fold(Rational::zero(), |acc, (s, g)| acc + g * Rational::from_integer(s));
            total / Rational::from_integer(denom.clone())
        })
        .collect();
    DiagonalOperator::new(n, eta, values)
}

/// Per-entry Monte-Carlo means and standard errors of a diagonal operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

/// Running mean and variance accumulator for a vector of observables.
struct VectorMoments {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    count: usize,
}

impl VectorMoments {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sumsq: vec![0.0; len],
            count: 0,
        }
    }

    fn push(&mut self, x: &[f64]) {
        for ((s, q), &v) in self.sum.iter_mut().zip(self.sumsq.iter_mut()).zip(x) {
            *s += v;
            *q += v * v;
        }
        self.count += 1;
    }

    fn finish(self) -> DiagonalEstimate {
        let n = self.count as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let stderr = if self.count > 1 {
            self.sumsq
                .iter()
                .zip(&mean)
                .map(|(q, m)| ((q - n * m * m).max(0.0) / (n - 1.0) / n).sqrt())
                .collect()
        } else {
            vec![0.0; mean.len()]
        };
        DiagonalEstimate {
            mean,
            stderr,
            samples: self.count,
        }
    }
}

/// Monte-Carlo estimate of `M[Π_p]` by Haar sampling.
///
/// For each sampled `u` the outcome average is taken exactly:
/// `Σ_z |⟨z|U|p⟩|² diag(U† Π_z U)`.
pub fn mc_channel_estimate<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    p: &OccupationVector,
    samples: usize,
    rng: &mut R,
) -> Result<DiagonalEstimate> {
    if samples == 0 {
        return Err(Error::OutOfRange("at least one sample is required".into()));
    }
    if p.n() != spec.n || p.len() != spec.eta {
        return Err(Error::DimensionMismatch(format!(
            "projector {p} on channel ({}, {})",
            spec.n, spec.eta
        )));
    }
    let pr = p.rank();
    let mut moments = None;
    for _ in 0..samples {
        let u = haar_unitary(spec.n, rng)?;
        let c = compound_matrix(&u, spec.eta);
        let dim = c.rows();
        let m = moments.get_or_insert_with(|| VectorMoments::new(dim));
        let weights: Vec<f64> = (0..dim).map(|z| c[(z, pr)].norm_sqr()).collect();
        let x: Vec<f64> = (0..dim)
            .map(|r| (0..dim).map(|z| weights[z] * c[(z, r)].norm_sqr()).sum())
            .collect();
        m.push(&x);
    }
    Ok(moments.expect("samples >= 1").finish())
}

/// Monte-Carlo estimates of `E_u |det u_{p,[η]}|² |det u_{q,[η]}|²` for the
/// given pairs, sharing the Haar samples.
pub fn twirl_moments_mc<R: Rng + ?Sized>(
    n: usize,
    eta: usize,
    pairs: &[(OccupationVector, OccupationVector)],
    samples: usize,
    rng: &mut R,
) -> Result<DiagonalEstimate> {
    ChannelSpec::new(n, eta)?;
    if samples == 0 {
        return Err(Error::OutOfRange("at least one sample is required".into()));
    }
    for (p, q) in pairs {
        if p.len() != eta || q.len() != eta || p.n() != n || q.n() != n {
            return Err(Error::DimensionMismatch(format!("pair ({p}, {q}) not in S_({n},{eta})")));
        }
    }
    let lead: Vec<usize> = (0..eta).collect();
    let idx = |s: &OccupationVector| -> Vec<usize> { s.modes().iter().map(|m| m - 1).collect() };
    let pairs_idx: Vec<(Vec<usize>, Vec<usize>)> = pairs.iter().map(|(p, q)| (idx(p), idx(q))).collect();
    let mut moments = VectorMoments::new(pairs.len());
    let mut x = vec![0.0; pairs.len()];
    for _ in 0..samples {
        let u = haar_unitary(n, rng)?;
        for (slot, (p, q)) in x.iter_mut().zip(&pairs_idx) {
            let a: Complex64 = minor_det_indices(&u, p, &lead);
            let b: Complex64 = minor_det_indices(&u, q, &lead);
            *slot = a.norm_sqr() * b.norm_sqr();
        }
        moments.push(&x);
    }
    Ok(moments.finish())
}

/// Coefficients linking `Sim_k(Π_p)` and the elementary symmetric
/// polynomials `e_j({n̂}_p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimExpansion {
    /// `c_j` with `Sim_k = Σ_j c_j e_j`, for `j = 0..=η`.
    pub sim_from_elementary: Vec<BigInt>,
    /// `C(j, k)` with `e_k = Σ_j C(j, k) Sim_j`, for `j = 0..=η`.
    pub elementary_from_sim: Vec<BigInt>,
}

/// Expansion of `Sim_k` in elementary symmetric polynomials and back.
pub fn sim_k_expansion(eta: usize, k: usize) -> Result<SimExpansion> {
    if k > eta {
        return Err(Error::OutOfRange(format!("k = {k} exceeds eta = {eta}")));
    }
    let (eta, k) = (eta as i64, k as i64);
    Ok(SimExpansion {
        sim_from_elementary: (0..=eta)
            .map(|j| BigInt::from(sign_pow(j + k)) * binom(j, k))
            .collect(),
        elementary_from_sim: (0..=eta).map(|j| binom(j, k)).collect(),
    })
}

/// `e_j({n̂}_p)` on the η-particle space: value `C(|p ∩ r|, j)` at `r`.
pub fn elementary_symmetric(n: usize, eta: usize, p: &OccupationVector, j: usize) -> DiagonalOperator {
    DiagonalOperator::from_fn(n, eta, |r| {
        rat(binom(crate::combinat::overlap_count(p, r) as i64, j as i64))
    })
}

/// `Sim_k(Π_p) = Σ_{|p'∩p| = k} Π_{p'}`.
pub fn similarity_projector(n: usize, eta: usize, p: &OccupationVector, k: usize) -> DiagonalOperator {
    DiagonalOperator::from_fn(n, eta, |r| {
        rat(i64::from(crate::combinat::overlap_count(p, r) == k))
    })
}

/// Number of basis states of `S_{n,η}` sharing exactly `c` modes with a fixed one.
pub fn overlap_multiplicity(n: usize, eta: usize, c: usize) -> usize {
    choose(eta, c) * choose(n - eta, eta - c.min(eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ov(n: usize, m: &[usize]) -> OccupationVector {
        OccupationVector::new(n, m.to_vec()).unwrap()
    }

    #[test]
    fn structure_factor_examples() {
        assert_eq!(structure_factor(2, 1, 1).unwrap(), ratio(1, 3));
        assert_eq!(structure_factor(2, 1, 0).unwrap(), ratio(1, 6));
        assert!(structure_factor(2, 1, 2).is_err());
    }

    #[test]
    fn structure_factor_normalization_at_full_filling() {
        // With η = n there is one basis state; f(n) is its squared overlap weight.
        for n in 0..8 {
            assert_eq!(structure_factor(n, n, n).unwrap(), rat(1));
        }
    }

    #[test]
    fn structure_factor_second_moment_sum() {
        // Σ_q E|det u_{p[η]}|²|det u_{q[η]}|² = E|det u_{p[η]}|² = 1/C(n,η).
        for n in 1..=8 {
            for eta in 0..=n {
                let total = (0..=eta).fold(Rational::zero(), |acc, c| {
                    acc + structure_factor(n, eta, c).unwrap() * rat(overlap_multiplicity(n, eta, c) as i64)
                });
                assert_eq!(total, ratio(1, binom(n as i64, eta as i64)), "n={n} eta={eta}");
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalue(5, 0).unwrap(), rat(1));
        assert_eq!(eigenvalue(2, 1).unwrap(), ratio(1, 3));
        assert_eq!(eigenvalue(4, 2).unwrap(), ratio(1, 10));
        assert!(eigenvalue(2, 4).is_err());
    }

    #[test]
    fn a_coeff_examples() {
        assert_eq!(a_coeff(2, 1, 0).unwrap(), ratio(1, 2));
        assert_eq!(a_coeff(2, 1, 1).unwrap(), ratio(1, 2));
        for n in 0..10 {
            for eta in 0..=n {
                assert_eq!(a_coeff(n, eta, 0).unwrap(), ratio(1, binom(n as i64, eta as i64)));
            }
        }
        assert!(a_coeff(2, 1, 2).is_err());
    }

    #[test]
    fn symmetrized_difference_examples() {
        assert_eq!(symmetrized_difference(4, 2, 0).unwrap(), DiagonalOperator::identity(4, 2));
        let nd = symmetrized_difference(2, 1, 1).unwrap();
        assert_eq!(nd.values(), &[rat(1), rat(-1)]);
    }

    /// Literal permutation-sum definition of ñ_d.
    fn symmetrized_difference_bruteforce(n: usize, eta: usize, d: usize) -> DiagonalOperator {
        let outside: Vec<usize> = (eta + 1..=n).collect();
        let mut acc = DiagonalOperator::zero(n, eta);
        for x in OccupationVector::all(eta, d) {
            for y in ordered_selections(&outside, d) {
                let op = EigenoperatorIndex::new(n, x.modes().to_vec(), y).unwrap().operator(eta);
                acc = &acc + &op;
            }
        }
        acc
    }

    fn ordered_selections(pool: &[usize], d: usize) -> Vec<Vec<usize>> {
        if d == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &v) in pool.iter().enumerate() {
            let mut rest = pool.to_vec();
            rest.remove(i);
            for mut tail in ordered_selections(&rest, d - 1) {
                tail.insert(0, v);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn symmetrized_difference_matches_permutation_sum() {
        for n in 0..=7 {
            for eta in 0..=n {
                for d in 0..=eta.min(n - eta) {
                    assert_eq!(
                        symmetrized_difference(n, eta, d).unwrap(),
                        symmetrized_difference_bruteforce(n, eta, d),
                        "n={n} eta={eta} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetrized_difference_projector_trace() {
        // ⟨[η]|ñ_d|[η]⟩ = C(η,d) · (n−η)!/(n−η−d)! (every term contributes +1).
        for n in 0..=9 {
            for eta in 0..=n {
                for d in 0..=eta.min(n - eta) {
                    let lead = OccupationVector::leading(n, eta);
                    let v = symmetrized_difference(n, eta, d).unwrap().value(&lead).clone();
                    let (n, eta, d) = (n as i64, eta as i64, d as i64);
                    let expect = binom(eta, d) * fact(n - eta) / fact(n - eta - d);
                    assert_eq!(v, rat(expect));
                }
            }
        }
    }

    #[test]
    fn inverse_channel_examples() {
        let inv = inverse_channel_on_projector(2, 1).unwrap();
        assert_eq!(inv.values(), &[rat(2), rat(-1)]);
        for n in 0..=7 {
            for eta in 0..=n {
                let spec = ChannelSpec::new(n, eta).unwrap();
                let inv = inverse_channel_on_projector(n, eta).unwrap();
                let back = apply_channel_diagonal(&spec, &inv).unwrap();
                assert_eq!(back, DiagonalOperator::projector(&OccupationVector::leading(n, eta)));
            }
        }
    }

    #[test]
    fn apply_channel_examples() {
        let spec = ChannelSpec::new(2, 1).unwrap();
        let out = apply_channel_diagonal(&spec, &DiagonalOperator::projector(&ov(2, &[1]))).unwrap();
        assert_eq!(out.values(), &[ratio(2, 3), ratio(1, 3)]);
        for n in 0..=6 {
            for eta in 0..=n {
                let spec = ChannelSpec::new(n, eta).unwrap();
                let id = DiagonalOperator::identity(n, eta);
                assert_eq!(apply_channel_diagonal(&spec, &id).unwrap(), id);
            }
        }
    }

    #[test]
    fn apply_channel_big_entries_take_exact_path() {
        let spec = ChannelSpec::new(4, 2).unwrap();
        let huge = rat(BigInt::from(10).pow(60));
        let op = DiagonalOperator::identity(4, 2).scale(&huge);
        assert_eq!(apply_channel_diagonal(&spec, &op).unwrap(), op);
    }

    #[test]
    fn mc_channel_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, eta) in [(2, 1), (3, 1), (3, 2)] {
            let spec = ChannelSpec::new(n, eta).unwrap();
            let p = OccupationVector::leading(n, eta);
            let est = mc_channel_estimate(&spec, &p, 100_000, &mut rng).unwrap();
            let exact = apply_channel_diagonal(&spec, &DiagonalOperator::projector(&p))
                .unwrap()
                .to_f64();
            for ((m, s), e) in est.mean.iter().zip(&est.stderr).zip(&exact) {
                assert!((m - e).abs() <= 3.0 * s + 1e-12, "n={n} eta={eta}: {m} vs {e} ± {s}");
            }
            let total: f64 = est.mean.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sim_expansion_examples() {
        let e = sim_k_expansion(1, 0).unwrap();
        assert_eq!(e.sim_from_elementary, vec![BigInt::from(1), BigInt::from(-1)]);
        for eta in 0..=6 {
            for k in 0..=eta {
                let e = sim_k_expansion(eta, k).unwrap();
                // Σ_j C(j,k) Σ_i c^{(j)}_i e_i = e_k.
                let mut back = vec![BigInt::zero(); eta + 1];
                for (j, w) in e.elementary_from_sim.iter().enumerate() {
                    let inner = sim_k_expansion(eta, j).unwrap();
                    for (i, c) in inner.sim_from_elementary.iter().enumerate() {
                        back[i] += w * c;
                    }
                }
                for (i, v) in back.iter().enumerate() {
                    assert_eq!(*v, BigInt::from(i64::from(i == k)));
                }
            }
        }
    }

    #[test]
    fn sim_expansion_dense() {
        let (n, eta) = (4, 2);
        for p in OccupationVector::all(n, eta) {
            for k in 0..=eta {
                let exp = sim_k_expansion(eta, k).unwrap();
                let mut acc = DiagonalOperator::zero(n, eta);
                for (j, c) in exp.sim_from_elementary.iter().enumerate() {
                    acc = &acc + &elementary_symmetric(n, eta, &p, j).scale(&rat(c.clone()));
                }
                assert_eq!(acc, similarity_projector(n, eta, &p, k));
            }
            assert_eq!(similarity_projector(n, eta, &p, eta), DiagonalOperator::projector(&p));
        }
    }
}
