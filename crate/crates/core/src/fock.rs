//! Dense η-particle Fock-space simulator used as ground truth.
//!
//! Basis kets are the ordered products `a†_{z1} ··· a†_{zη}|0⟩` with `z`
//! increasing, indexed by the colex rank of `z`.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::combinat::{choose, rat, OccupationVector, Rational};
use crate::error::{Error, Result};
use crate::linalg::{compound_matrix, ComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A normalized pure state of `eta` fermions in `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionState {
    n: usize,
    eta: usize,
    amplitudes: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct StateRecord {
    n: usize,
    eta: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl FermionState {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(n: usize, eta: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_space(n, eta)?;
        if amplitudes.len() != choose(n, eta) {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for C({n},{eta}) = {} basis states",
                amplitudes.len(),
                choose(n, eta)
            )));
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, eta, amplitudes })
    }

    /// Normalize the given amplitudes and build a state.
    pub fn normalized(n: usize, eta: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::new(n, eta, amplitudes)
    }

    /// A Haar-random pure state (normalized complex Gaussian vector).
    pub fn random_pure<R: Rng + ?Sized>(n: usize, eta: usize, rng: &mut R) -> Result<Self> {
        check_space(n, eta)?;
        let amps = (0..choose(n, eta))
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(n, eta, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, z: &OccupationVector) -> Complex64 {
        self.amplitudes[z.rank()]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FermionState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = StateRecord {
            n: self.n,
            eta: self.eta,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        };
        Ok(serde_json::to_string(&rec)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: StateRecord = serde_json::from_str(s)?;
        let amps = rec
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Self::new(rec.n, rec.eta, amps)
    }
}

fn check_space(n: usize, eta: usize) -> Result<()> {
    if eta > n {
        return Err(Error::OutOfRange(format!("eta = {eta} exceeds n = {n}")));
    }
    Ok(())
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// The basis state `|z⟩`.
pub fn basis_state(z: &OccupationVector) -> FermionState {
    let mut amps = vec![ZERO; choose(z.n(), z.len())];
    amps[z.rank()] = Complex64::new(1.0, 0.0);
    FermionState {
        n: z.n(),
        eta: z.len(),
        amplitudes: amps,
    }
}

/// `U_η(u)|ψ⟩`, the state after the single-particle rotation `u`.
pub fn apply_rotation(state: &FermionState, u: &ComplexMatrix) -> Result<FermionState> {
    if u.rows() != state.n || u.cols() != state.n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} rotation on {} modes",
            u.rows(),
            u.cols(),
            state.n
        )));
    }
    let amps = compound_matrix(u, state.eta).matvec(&state.amplitudes);
    Ok(FermionState {
        n: state.n,
        eta: state.eta,
        amplitudes: amps,
    })
}

/// Apply `a_j` to a sorted occupation list, returning the sign.
fn annihilate(occ: &mut Vec<usize>, j: usize) -> Option<i32> {
    let pos = occ.binary_search(&j).ok()?;
    occ.remove(pos);
    Some(if pos % 2 == 0 { 1 } else { -1 })
}

/// Apply `a†_j` to a sorted occupation list, returning the sign.
fn create(occ: &mut Vec<usize>, j: usize) -> Option<i32> {
    let pos = occ.binary_search(&j).err()?;
    occ.insert(pos, j);
    Some(if pos % 2 == 0 { 1 } else { -1 })
}

/// `D^p_q |z⟩ = sign · |z'⟩`, or `None` when it vanishes.
pub fn rdm_action(p: &[usize], q: &[usize], z: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut occ = z.to_vec();
    let mut sign = 1;
    // a_{q1} acts first, then a_{q2}, ..., then a†_{pk}, ..., a†_{p1}.
    for &j in q {
        sign *= annihilate(&mut occ, j)?;
    }
    for &j in p.iter().rev() {
        sign *= create(&mut occ, j)?;
    }
    Some((sign, occ))
}

fn check_rdm_legs(state_n: usize, eta: usize, p: &OccupationVector, q: &OccupationVector) -> Result<()> {
    if p.len() != q.len() || p.len() > eta || p.n() != state_n || q.n() != state_n {
        return Err(Error::DimensionMismatch(format!(
            "RDM legs {p} and {q} incompatible with {eta} particles in {state_n} modes"
        )));
    }
    Ok(())
}

/// `D^p_q |ψ⟩` as an unnormalized amplitude vector over the same basis.
pub fn apply_rdm_operator(
    state: &FermionState,
    p: &OccupationVector,
    q: &OccupationVector,
) -> Result<Vec<Complex64>> {
    check_rdm_legs(state.n, state.eta, p, q)?;
    let mut out = vec![ZERO; state.dim()];
    for (z, &a) in OccupationVector::all(state.n, state.eta).zip(&state.amplitudes) {
        if a == ZERO {
            continue;
        }
        if let Some((sign, occ)) = rdm_action(p.modes(), q.modes(), z.modes()) {
            let target = OccupationVector::new(state.n, occ)?.rank();
            out[target] += a * f64::from(sign);
        }
    }
    Ok(out)
}

/// Dense matrix of `D^p_q` on the η-particle space of `n` modes.
pub fn rdm_operator_matrix(
    n: usize,
    eta: usize,
    p: &OccupationVector,
    q: &OccupationVector,
) -> Result<ComplexMatrix> {
    check_space(n, eta)?;
    check_rdm_legs(n, eta, p, q)?;
    let dim = choose(n, eta);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (col, z) in OccupationVector::all(n, eta).enumerate() {
        if let Some((sign, occ)) = rdm_action(p.modes(), q.modes(), z.modes()) {
            let row = OccupationVector::new(n, occ)?.rank();
            m[(row, col)] = Complex64::new(f64::from(sign), 0.0);
        }
    }
    Ok(m)
}

/// `⟨ψ|D^p_q|ψ⟩`.
pub fn expectation_rdm(
    state: &FermionState,
    p: &OccupationVector,
    q: &OccupationVector,
) -> Result<Complex64> {
    let v = apply_rdm_operator(state, p, q)?;
    Ok(state.amplitudes.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
}

/// The full k-RDM as a matrix with entry `[rank p, rank q] = ⟨D^p_q⟩`.
pub fn rdm_matrix(state: &FermionState, k: usize) -> Result<ComplexMatrix> {
    if k > state.eta {
        return Err(Error::OutOfRange(format!("k = {k} exceeds eta = {}", state.eta)));
    }
    let legs: Vec<OccupationVector> = OccupationVector::all(state.n, k).collect();
    let mut m = ComplexMatrix::zeros(legs.len(), legs.len());
    for (i, p) in legs.iter().enumerate() {
        for (j, q) in legs.iter().enumerate() {
            m[(i, j)] = expectation_rdm(state, p, q)?;
        }
    }
    Ok(m)
}

/// Sample an index from nonnegative weights with total `total`.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // Rounding can leave target at the very top; return the last nonzero weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Measure all occupation numbers after rotating by `u`.
pub fn measure_occupation<R: Rng + ?Sized>(
    state: &FermionState,
    u: &ComplexMatrix,
    rng: &mut R,
) -> Result<OccupationVector> {
    let rotated = apply_rotation(state, u)?;
    let probs: Vec<f64> = rotated.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::ProbabilityDefect(total));
    }
    let idx = sample_categorical(&probs, total, rng);
    OccupationVector::unrank(idx, state.n, state.eta)
}

/// `(|ψ⟩ + |n+1, ..., n+η⟩)/√2` on `n + η` modes.
pub fn slater_superposition(psi: &FermionState) -> Result<FermionState> {
    if psi.eta == 0 {
        return Err(Error::OutOfRange(
            "Slater superposition needs at least one particle".into(),
        ));
    }
    let n2 = psi.n + psi.eta;
    let mut amps = vec![ZERO; choose(n2, psi.eta)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Colex ranks of subsets of 1..=n are unchanged when embedded in 1..=n+η.
    for (i, &a) in psi.amplitudes.iter().enumerate() {
        amps[i] = a * s;
    }
    let anchor = OccupationVector::new(n2, (psi.n + 1..=n2).collect())?;
    amps[anchor.rank()] = Complex64::new(s, 0.0);
    FermionState::new(n2, psi.eta, amps)
}

/// A diagonal operator on the η-particle space with exact rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalOperator {
    n: usize,
    eta: usize,
    values: Vec<Rational>,
}

impl DiagonalOperator {
    pub fn new(n: usize, eta: usize, values: Vec<Rational>) -> Result<Self> {
        check_space(n, eta)?;
        if values.len() != choose(n, eta) {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal entries for dimension {}",
                values.len(),
                choose(n, eta)
            )));
        }
        Ok(Self { n, eta, values })
    }

    /// Entry at each basis state given by `f`.
    pub fn from_fn(n: usize, eta: usize, f: impl Fn(&OccupationVector) -> Rational) -> Self {
        let values = OccupationVector::all(n, eta).map(|z| f(&z)).collect();
        Self { n, eta, values }
    }

    pub fn identity(n: usize, eta: usize) -> Self {
        Self::from_fn(n, eta, |_| rat(1))
    }

    pub fn zero(n: usize, eta: usize) -> Self {
        Self::from_fn(n, eta, |_| Rational::zero())
    }

    /// The projector `Π_z = |z⟩⟨z|`.
    pub fn projector(z: &OccupationVector) -> Self {
        let r = z.rank();
        let mut op = Self::zero(z.n(), z.len());
        op.values[r] = rat(1);
        op
    }

    /// The number operator `n̂_mode`.
    pub fn number_operator(n: usize, eta: usize, mode: usize) -> Self {
        Self::from_fn(n, eta, |z| rat(i64::from(z.contains(mode))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, z: &OccupationVector) -> &Rational {
        &self.values[z.rank()]
    }

    pub fn trace(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            n: self.n,
            eta: self.eta,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise product, i.e. the operator product of two diagonals.
    pub fn product(&self, other: &DiagonalOperator) -> Self {
        assert_eq!((self.n, self.eta), (other.n, other.eta));
        Self {
            n: self.n,
            eta: self.eta,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(crate::combinat::rational_to_f64).collect()
    }
}

impl Add for &DiagonalOperator {
    type Output = DiagonalOperator;
    fn add(self, rhs: &DiagonalOperator) -> DiagonalOperator {
        assert_eq!((self.n, self.eta), (rhs.n, rhs.eta));
        DiagonalOperator {
            n: self.n,
            eta: self.eta,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DiagonalOperator {
    type Output = DiagonalOperator;
    fn sub(self, rhs: &DiagonalOperator) -> DiagonalOperator {
        assert_eq!((self.n, self.eta), (rhs.n, rhs.eta));
        DiagonalOperator {
            n: self.n,
            eta: self.eta,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ov(n: usize, m: &[usize]) -> OccupationVector {
        OccupationVector::new(n, m.to_vec()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_state_examples() {
        assert_eq!(basis_state(&ov(4, &[1, 2])).amplitudes()[0], c(1.0));
        assert_eq!(basis_state(&ov(4, &[3, 4])).amplitudes()[5], c(1.0));
        assert_eq!(basis_state(&ov(3, &[2])).amplitudes()[1], c(1.0));
    }

    #[test]
    fn rdm_action_examples() {
        let psi = basis_state(&ov(3, &[2, 3]));
        let out = apply_rdm_operator(&psi, &ov(3, &[1]), &ov(3, &[2])).unwrap();
        assert_eq!(out[ov(3, &[1, 3]).rank()], c(1.0));

        let psi = basis_state(&ov(3, &[1, 2]));
        let out = apply_rdm_operator(&psi, &ov(3, &[3]), &ov(3, &[1])).unwrap();
        assert_eq!(out[ov(3, &[2, 3]).rank()], c(-1.0));

        let out = apply_rdm_operator(&psi, &ov(3, &[1]), &ov(3, &[1])).unwrap();
        assert_eq!(out, psi.amplitudes().to_vec());
    }

    #[test]
    fn expectation_examples() {
        let psi = basis_state(&ov(3, &[1, 2]));
        assert_eq!(expectation_rdm(&psi, &ov(3, &[1]), &ov(3, &[1])).unwrap(), c(1.0));
        assert_eq!(expectation_rdm(&psi, &ov(3, &[3]), &ov(3, &[3])).unwrap(), c(0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = FermionState::new(2, 1, vec![c(s), c(s)]).unwrap();
        let v = expectation_rdm(&plus, &ov(2, &[1]), &ov(2, &[2])).unwrap();
        assert!((v - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn rotation_examples() {
        let swap12 = ComplexMatrix::from_real(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 1.]).unwrap();
        let psi = basis_state(&ov(3, &[1, 3]));
        let out = apply_rotation(&psi, &swap12).unwrap();
        assert_eq!(out.amplitude(&ov(3, &[2, 3])), c(1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = FermionState::random_pure(5, 2, &mut rng).unwrap();
        assert_eq!(apply_rotation(&psi, &ComplexMatrix::identity(5)).unwrap(), psi);
        let u = haar_unitary(5, &mut rng).unwrap();
        let there = apply_rotation(&psi, &u).unwrap();
        let back = apply_rotation(&there, &u.adjoint()).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn rotations_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=6 {
            for eta in 0..=n {
                let psi = FermionState::random_pure(n, eta, &mut rng).unwrap();
                let u = haar_unitary(n, &mut rng).unwrap();
                let v = haar_unitary(n, &mut rng).unwrap();
                let seq = apply_rotation(&apply_rotation(&psi, &u).unwrap(), &v).unwrap();
                let once = apply_rotation(&psi, &v.matmul(&u)).unwrap();
                for (a, b) in seq.amplitudes().iter().zip(once.amplitudes()) {
                    assert!((a - b).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rdm_operators_adjoint_pairs() {
        for n in 1..=5 {
            for eta in 0..=n {
                for k in 0..=eta {
                    for p in OccupationVector::all(n, k) {
                        for q in OccupationVector::all(n, k) {
                            let dpq = rdm_operator_matrix(n, eta, &p, &q).unwrap();
                            let dqp = rdm_operator_matrix(n, eta, &q, &p).unwrap();
                            assert_eq!(dpq.adjoint(), dqp);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rotated_rdm_identity() {
        // ⟨D^p_q⟩ on U|ψ⟩ equals Σ conj(det u_{p p'}) det u_{q q'} ⟨D^{p'}_{q'}⟩ on |ψ⟩.
        let (n, eta, k) = (4, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = FermionState::random_pure(n, eta, &mut rng).unwrap();
        let u = haar_unitary(n, &mut rng).unwrap();
        let rotated = apply_rotation(&psi, &u).unwrap();
        let uk = compound_matrix(&u, k);
        let rdm = rdm_matrix(&psi, k).unwrap();
        // ρ'_{pq} = Σ_{p'q'} conj(U[p,p']) U[q,q'] ρ_{p'q'}
        let expect = uk.conj().matmul(&rdm).matmul(&uk.transpose());
        let actual = rdm_matrix(&rotated, k).unwrap();
        assert!(actual.max_abs_diff(&expect) < 1e-9);
    }

    #[test]
    fn hermitian_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = FermionState::random_pure(5, 3, &mut rng).unwrap();
        let rdm = rdm_matrix(&psi, 2).unwrap();
        assert!(rdm.max_abs_diff(&rdm.adjoint()) < 1e-14);
    }

    #[test]
    fn measurement_of_eigenstate_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = basis_state(&ov(4, &[1, 2]));
        for _ in 0..100 {
            let z = measure_occupation(&psi, &ComplexMatrix::identity(4), &mut rng).unwrap();
            assert_eq!(z, ov(4, &[1, 2]));
        }
    }

    #[test]
    fn measurement_with_balanced_rotation() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).unwrap();
        let psi = basis_state(&ov(2, &[1]));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| measure_occupation(&psi, &h, &mut rng).unwrap() == ov(2, &[1]))
            .count();
        let p = ones as f64 / draws as f64;
        let sigma = (0.25 / draws as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn measurement_distribution_chi_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = FermionState::random_pure(4, 2, &mut rng).unwrap();
        let u = haar_unitary(4, &mut rng).unwrap();
        let probs: Vec<f64> = apply_rotation(&psi, &u)
            .unwrap()
            .amplitudes()
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        let draws = 100_000;
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..draws {
            counts[measure_occupation(&psi, &u, &mut rng).unwrap().rank()] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&o, &p)| {
                let e = p * draws as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // 5 degrees of freedom; the 0.999 quantile is about 20.5.
        assert!(chi2 < 20.5, "chi2 = {chi2}");
    }

    #[test]
    fn slater_superposition_examples() {
        let psi = basis_state(&ov(2, &[1]));
        let out = slater_superposition(&psi).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(out.n(), 3);
        assert!((out.amplitude(&ov(3, &[1])) - c(s)).norm() < 1e-15);
        assert!((out.amplitude(&ov(3, &[3])) - c(s)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let amps: Vec<Complex64> = (0..choose(4, 2)).map(|_| c(rng.random::<f64>() - 0.5)).collect();
        let psi = FermionState::normalized(4, 2, amps).unwrap();
        let out = slater_superposition(&psi).unwrap();
        let anchor = ov(6, &[5, 6]);
        for q in OccupationVector::all(4, 2) {
            let v = expectation_rdm(&out, &anchor, &q.embed(6).unwrap()).unwrap();
            assert!((v - psi.amplitude(&q) / 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = FermionState::random_pure(5, 2, &mut rng).unwrap();
        let back = FermionState::from_json(&psi.to_json().unwrap()).unwrap();
        assert_eq!(back, psi);
        assert!(FermionState::from_json(r#"{"n":2,"eta":1,"amplitudes":[[1,0],[1,0]]}"#).is_err());
    }

    #[test]
    fn diagonal_operator_algebra() {
        let n1 = DiagonalOperator::number_operator(3, 1, 1);
        let id = DiagonalOperator::identity(3, 1);
        assert_eq!(n1.trace(), rat(1));
        assert_eq!((&id - &n1).trace(), rat(2));
        assert_eq!(n1.product(&n1), n1);
        assert_eq!(DiagonalOperator::projector(&ov(3, &[2])).values()[1], rat(1));
    }
}
