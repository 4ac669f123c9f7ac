//! The Pfaffian fast path for single-shot k-RDM estimates.
//!
//! Each `|p⟩⟨q|` is written as a combination of rotated diagonal projectors
//! `U_k(w)|[k]⟩⟨[k]|U_k(w)†`. For one such term the estimate is a fermionic
//! Gaussian trace, which reduces to the spectrum of a `2k×2k` Gram matrix `M`.
//! From `Tr[M^y]` the derivatives of `κ ↦ Pf(A(κ))` follow by recursion, and a
//! fixed linear combination of them gives the estimate in `O(k²η)` time.
//!
//! Conventions, all pinned by the dense-equivalence tests:
//! * `R(c) = Re c ⊗ I₂ + Im c ⊗ Y` with `Y = [[0, −1], [1, 0]]`, applied blockwise.
//! * The Majorana images are taken of `g† = (v_z† u w)†`.
//! * `A(κ) = −ũᵀ(Λ⊗Y)ũ − κ P_η⊗Y` with `ũ = R(g†)`, `Λ = diag(1ᵏ, (−1)ⁿ⁻ᵏ)` and
//!   `P_η` the projector on the first η modes, so `Pf(A(0)) = (−1)ⁿ⁻ᵏ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use num_traits::Zero;

use crate::combinat::{binom, choose, overlap_count, rat, ratio, rational_to_f64, sign_pow, sort_sign, OccupationVector, Rational};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, AntisymmetricMatrix, ComplexMatrix, UnitaryMatrix};
use crate::shadows::{estimation_entry, ClassicalShadow};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real `2n×2n` images `ũ = R(u)` and `ĩu = R(iu)` of a unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaRotation {
    dim: usize,
    u_tilde: Vec<f64>,
    iu_tilde: Vec<f64>,
}

/// The real 2×2 block `R(c)` in row-major order.
fn real_block(c: Complex64) -> [f64; 4] {
    [c.re, -c.im, c.im, c.re]
}

fn realify(h: &ComplexMatrix, factor: Complex64) -> Vec<f64> {
    let (r, c) = (h.rows(), h.cols());
    let w = 2 * c;
    let mut out = vec![0.0; 4 * r * c];
    for i in 0..r {
        for j in 0..c {
            let b = real_block(h[(i, j)] * factor);
            out[2 * i * w + 2 * j] = b[0];
            out[2 * i * w + 2 * j + 1] = b[1];
            out[(2 * i + 1) * w + 2 * j] = b[2];
            out[(2 * i + 1) * w + 2 * j + 1] = b[3];
        }
    }
    out
}

impl MajoranaRotation {
    pub fn new(u: &ComplexMatrix) -> Self {
        assert!(u.is_square(), "Majorana image of a non-square matrix");
        Self {
            dim: 2 * u.rows(),
            u_tilde: realify(u, Complex64::new(1.0, 0.0)),
            iu_tilde: realify(u, I),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ũ` as a row-major `2n×2n` array.
    pub fn u_tilde(&self) -> &[f64] {
        &self.u_tilde
    }

    /// `ĩu` as a row-major `2n×2n` array.
    pub fn iu_tilde(&self) -> &[f64] {
        &self.iu_tilde
    }

    /// `max |OOᵀ − I|` over both images.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim;
        let defect = |m: &[f64]| {
            let mut worst: f64 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let dot: f64 = (0..d).map(|l| m[i * d + l] * m[j * d + l]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((dot - target).abs());
                }
            }
            worst
        };
        defect(&self.u_tilde).max(defect(&self.iu_tilde))
    }
}

/// Sparse column: `(0-based row, value)` pairs.
pub type SparseColumn = Vec<(usize, Complex64)>;

/// One term `c · U_k(w)|[k]⟩⟨[k]|U_k(w)†` of an RDM decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionTerm {
    pub coefficient: Complex64,
    /// The first `k` columns of `w`, which span the occupied orbitals.
    pub frame: Vec<SparseColumn>,
    /// Phase `e^{iθ}` of this term (1 for diagonal elements).
    pub phase: Complex64,
}

/// `|p⟩⟨q| = Σ_l c_l U_k(w_l)|[k]⟩⟨[k]|U_k(w_l)†`.
///
/// For `p = q` a single permutation suffices. Otherwise, with `z = p ∩ q`,
/// `p' = p \ q`, `q' = q \ p` and `k' = |p'|`, the rotations `w_θ` send the
/// leading modes to `(e_{p'_i} + e^{iθ} e_{q'_i})/√2` followed by `e_z`, and
/// averaging over `L = 2k'+2` equally spaced phases with weight `e^{ik'θ}`
/// isolates the `|p⟩⟨q|` cross term. For `k' = 1` this gives four terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RdmDecomposition {
    n: usize,
    p: OccupationVector,
    q: OccupationVector,
    only_p: Vec<usize>,
    only_q: Vec<usize>,
    shared: Vec<usize>,
    terms: Vec<DecompositionTerm>,
}

impl RdmDecomposition {
    pub fn terms(&self) -> &[DecompositionTerm] {
        &self.terms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    /// The full `n×n` rotation of term `i`.
    pub fn rotation(&self, i: usize) -> UnitaryMatrix {
        let n = self.n;
        let term = &self.terms[i];
        let mut columns: Vec<SparseColumn> = term.frame.clone();
        let s = FRAC_1_SQRT_2;
        if self.p != self.q {
            for (&a, &b) in self.only_p.iter().zip(&self.only_q) {
                columns.push(vec![(a - 1, Complex64::new(s, 0.0)), (b - 1, -term.phase * s)]);
            }
        }
        let mut used = vec![false; n];
        for col in &columns {
            for &(r, _) in col {
                used[r] = true;
            }
        }
        for (r, u) in used.iter().enumerate() {
            if !u {
                columns.push(vec![(r, Complex64::new(1.0, 0.0))]);
            }
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for (j, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                m[(r, j)] = v;
            }
        }
        UnitaryMatrix::new_unchecked(m)
    }
}

/// Decompose `D^p_q` into rotated diagonal projectors.
pub fn decompose_rdm(p: &OccupationVector, q: &OccupationVector) -> Result<RdmDecomposition> {
    if p.len() != q.len() || p.n() != q.n() {
        return Err(Error::DimensionMismatch(format!("RDM legs {p} and {q} differ in size")));
    }
    let n = p.n();
    let unit = |m: usize| vec![(m - 1, Complex64::new(1.0, 0.0))];
    if p == q {
        return Ok(RdmDecomposition {
            n,
            p: p.clone(),
            q: q.clone(),
            only_p: vec![],
            only_q: vec![],
            shared: p.modes().to_vec(),
            terms: vec![DecompositionTerm {
                coefficient: Complex64::new(1.0, 0.0),
                frame: p.modes().iter().map(|&m| unit(m)).collect(),
                phase: Complex64::new(1.0, 0.0),
            }],
        });
    }
    let only_p: Vec<usize> = p.modes().iter().copied().filter(|m| !q.contains(*m)).collect();
    let only_q: Vec<usize> = q.modes().iter().copied().filter(|m| !p.contains(*m)).collect();
    let shared: Vec<usize> = p.modes().iter().copied().filter(|m| q.contains(*m)).collect();
    let kp = only_p.len();
    let sigma = {
        let mut a = only_p.clone();
        a.extend(&shared);
        let mut b = only_q.clone();
        b.extend(&shared);
        sort_sign(&a) * sort_sign(&b)
    };
    let count = 2 * kp + 2;
    let weight = sigma as f64 * 2f64.powi(kp as i32) / count as f64;
    let s = FRAC_1_SQRT_2;
    let terms = (0..count)
        .map(|l| {
            let theta = 2.0 * PI * l as f64 / count as f64;
            let phase = Complex64::from_polar(1.0, theta);
            let mut frame: Vec<SparseColumn> = only_p
                .iter()
                .zip(&only_q)
                .map(|(&a, &b)| vec![(a - 1, Complex64::new(s, 0.0)), (b - 1, phase * s)])
                .collect();
            frame.extend(shared.iter().map(|&m| unit(m)));
            DecompositionTerm {
                coefficient: Complex64::from_polar(weight, kp as f64 * theta),
                frame,
                phase,
            }
        })
        .collect();
    Ok(RdmDecomposition {
        n,
        p: p.clone(),
        q: q.clone(),
        only_p,
        only_q,
        shared,
        terms,
    })
}

/// `f_{k,s}(j) = Σ_{x=j}^{k} (−1)^x C(x,s) 2^{−x} C(η−j, η−x)`.
pub fn f_ks(eta: usize, k: usize, s: usize, j: usize) -> Rational {
    let (eta, k, s, j) = (eta as i64, k as i64, s as i64, j as i64);
    let mut acc = Rational::zero();
    for x in j..=k {
        let two = num_bigint::BigInt::from(2).pow(x as u32);
        acc += ratio(
            num_bigint::BigInt::from(sign_pow(x)) * binom(x, s) * binom(eta - j, eta - x),
            two,
        );
    }
    acc
}

/// Coefficients turning Pfaffian derivatives into a diagonal estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct FastCoefficients {
    pub n: usize,
    pub eta: usize,
    pub k: usize,
    /// `f_table[s][j] = f_{k,s}(j)` for `s ≤ k`, `j ≤ η`.
    pub f_table: Vec<Vec<Rational>>,
    /// `α_{η,k,j}` for `j ≤ η`; zero for `j > k`.
    pub alpha: Vec<Complex64>,
    /// `E'_{η,k,s}`: the estimation-matrix entry on the class `|r ∩ [η]| = s`.
    pub e_prime: Vec<Rational>,
}

/// `α_{η,k,j} = Σ_s (−1)^s f_{k,s}(j) i^j E'_{η,k,s}`.
pub fn alpha_coeffs(n: usize, eta: usize, k: usize) -> Result<FastCoefficients> {
    if k > eta || eta > n {
        return Err(Error::OutOfRange(format!("need k <= eta <= n, got n={n}, eta={eta}, k={k}")));
    }
    let f_table: Vec<Vec<Rational>> = (0..=k)
        .map(|s| (0..=eta).map(|j| f_ks(eta, k, s, j)).collect())
        .collect();
    let e_prime: Vec<Rational> = (0..=k).map(|s| estimation_entry(n, eta, k, s)).collect();
    let alpha = (0..=eta)
        .map(|j| {
            let real = (0..=k).fold(Rational::zero(), |acc, s| {
                acc + rat(sign_pow(s as i64)) * &f_table[s][j] * &e_prime[s]
            });
            I.powu(j as u32) * rational_to_f64(&real)
        })
        .collect();
    Ok(FastCoefficients {
        n,
        eta,
        k,
        f_table,
        alpha,
        e_prime,
    })
}

/// The `2k×2η` block of `ĩu(g†)` for the `η×k` block `G = g_{[η],[k]}`, as a
/// real row-major array.
fn majorana_block(g_block: &[Complex64], eta: usize, k: usize) -> Vec<f64> {
    let w = 2 * eta;
    let mut m = vec![0.0; 4 * k * eta];
    for a in 0..k {
        for j in 0..eta {
            let b = real_block(I * g_block[j * k + a].conj());
            m[2 * a * w + 2 * j] = b[0];
            m[2 * a * w + 2 * j + 1] = b[1];
            m[(2 * a + 1) * w + 2 * j] = b[2];
            m[(2 * a + 1) * w + 2 * j + 1] = b[3];
        }
    }
    m
}

/// `M = m mᵀ` for a real row-major `rows × cols` array `m`.
fn gram(m: &[f64], rows: usize, cols: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rows, rows);
    for i in 0..rows {
        for j in i..rows {
            let v: f64 = (0..cols).map(|l| m[i * cols + l] * m[j * cols + l]).sum();
            out[(i, j)] = Complex64::new(v, 0.0);
            out[(j, i)] = Complex64::new(v, 0.0);
        }
    }
    out
}

/// `M = m mᵀ` where `m` is the first `2k` rows and `2η` columns of `ĩu(u_eff†)`.
pub fn build_m(u_eff: &ComplexMatrix, k: usize, eta: usize) -> Result<ComplexMatrix> {
    if !u_eff.is_square() || k > eta || eta > u_eff.rows() {
        return Err(Error::DimensionMismatch(format!(
            "M block with k={k}, eta={eta} from a {}x{} rotation",
            u_eff.rows(),
            u_eff.cols()
        )));
    }
    let block: Vec<Complex64> = (0..eta)
        .flat_map(|j| (0..k).map(move |a| (j, a)))
        .map(|(j, a)| u_eff[(j, a)])
        .collect();
    Ok(gram(&majorana_block(&block, eta, k), 2 * k, 2 * eta))
}

/// `Tr[M^y]` for `y = 1..=max_power`, from the eigenvalues of `M`.
pub fn trace_powers(m: &ComplexMatrix, max_power: usize) -> Result<Vec<Complex64>> {
    let ev = eigenvalues(m)?;
    let mut powers = ev.clone();
    let mut out = Vec::with_capacity(max_power);
    for y in 1..=max_power {
        if y > 1 {
            for (p, e) in powers.iter_mut().zip(&ev) {
                *p *= e;
            }
        }
        out.push(powers.iter().sum());
    }
    Ok(out)
}

/// `Tr[(A(0)⁻¹ ∂_κA)^j] = (−1)^j [2η + Σ_{y=1}^{j} (−2)^y C(j,y) Tr[M^y]]` for `j = 1..=j_max`.
pub fn inverse_trace_sequence(traces: &[Complex64], j_max: usize, eta: usize) -> Result<Vec<Complex64>> {
    if traces.len() < j_max {
        return Err(Error::DimensionMismatch(format!(
            "{} trace powers for order {j_max}",
            traces.len()
        )));
    }
    Ok((1..=j_max)
        .map(|j| {
            let mut acc = Complex64::new(2.0 * eta as f64, 0.0);
            for y in 1..=j {
                let coef = (-2f64).powi(y as i32) * crate::combinat::choose_f64(j, y);
                acc += traces[y - 1] * coef;
            }
            acc * sign_pow(j as i64) as f64
        })
        .collect())
}

/// Taylor coefficients `∂^x Pf(A)/x!` at `κ = 0` for `x = 0..=x_max`.
///
/// Solves `∂^x Pf = ½ Σ_{j<x} C(x−1,j) j! (−1)^j ∂^{x−1−j}Pf · τ_{j+1}` divided
/// through by `x!`, which keeps the recursion free of factorial growth.
pub fn pfaffian_taylor(pf0: Complex64, taus: &[Complex64], x_max: usize) -> Result<Vec<Complex64>> {
    if taus.len() < x_max {
        return Err(Error::DimensionMismatch(format!(
            "{} inverse traces for derivative order {x_max}",
            taus.len()
        )));
    }
    let mut c = Vec::with_capacity(x_max + 1);
    c.push(pf0);
    for x in 1..=x_max {
        let mut acc = ZERO;
        for j in 0..x {
            acc += c[x - 1 - j] * taus[j] * sign_pow(j as i64) as f64;
        }
        c.push(acc / (2.0 * x as f64));
    }
    Ok(c)
}

/// Derivatives `∂^x Pf(A(κ))|₀` for `x = 0..=x_max`.
pub fn pfaffian_derivatives(pf0: Complex64, taus: &[Complex64], x_max: usize) -> Result<Vec<Complex64>> {
    let c = pfaffian_taylor(pf0, taus, x_max)?;
    let mut fact = 1.0;
    Ok(c
        .into_iter()
        .enumerate()
        .map(|(x, v)| {
            if x > 0 {
                fact *= x as f64;
            }
            v * fact
        })
        .collect())
}

/// Dense `A(κ)` for the effective rotation `u_eff`, used as an oracle.
pub fn pfaffian_generator(u_eff: &ComplexMatrix, eta: usize, k: usize, kappa: f64) -> Result<AntisymmetricMatrix> {
    let n = u_eff.rows();
    if !u_eff.is_square() || k > eta || eta > n {
        return Err(Error::DimensionMismatch(format!("A(kappa) with k={k}, eta={eta}, n={n}")));
    }
    let ut = realify(&u_eff.adjoint(), Complex64::new(1.0, 0.0));
    let d = 2 * n;
    // (Λ⊗Y) ũ
    let mut ly_u = vec![0.0; d * d];
    for i in 0..n {
        let lam = if i < k { 1.0 } else { -1.0 };
        for c in 0..d {
            // Y = [[0, -1], [1, 0]] on rows (2i, 2i+1).
            ly_u[2 * i * d + c] = -lam * ut[(2 * i + 1) * d + c];
            ly_u[(2 * i + 1) * d + c] = lam * ut[2 * i * d + c];
        }
    }
    let mut a = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let v: f64 = (0..d).map(|l| ut[l * d + r] * ly_u[l * d + c]).sum();
            a[(r, c)] = Complex64::new(-v, 0.0);
        }
    }
    for i in 0..eta {
        a[(2 * i, 2 * i + 1)] -= Complex64::new(-kappa, 0.0);
        a[(2 * i + 1, 2 * i)] -= Complex64::new(kappa, 0.0);
    }
    AntisymmetricMatrix::new(a)
}

/// `∂_κ A = −P_η ⊗ Y`.
pub fn pfaffian_generator_derivative(n: usize, eta: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..eta {
        m[(2 * i, 2 * i + 1)] = Complex64::new(1.0, 0.0);
        m[(2 * i + 1, 2 * i)] = Complex64::new(-1.0, 0.0);
    }
    m
}

/// Reusable fast estimator for fixed `(n, η, k)`.
#[derive(Clone, Debug)]
pub struct FastEstimator {
    coeffs: FastCoefficients,
    /// `α_j / i^j` folded with the `(−1)^{n−k}` prefactor, for `j ≤ k`.
    weights: Vec<f64>,
}

impl FastEstimator {
    pub fn new(n: usize, eta: usize, k: usize) -> Result<Self> {
        let coeffs = alpha_coeffs(n, eta, k)?;
        let prefactor = sign_pow((n - k) as i64) as f64;
        let weights = (0..=k)
            .map(|j| (coeffs.alpha[j] / I.powu(j as u32)).re * prefactor)
            .collect();
        Ok(Self { coeffs, weights })
    }

    pub fn coefficients(&self) -> &FastCoefficients {
        &self.coeffs
    }

    /// Closed value of `Pf(A(0)) = (−1)^{n−k}`, which holds for every unitary.
    pub fn pfaffian_at_zero(&self) -> Complex64 {
        Complex64::new(sign_pow((self.coeffs.n - self.coeffs.k) as i64) as f64, 0.0)
    }

    /// `⟨[k]|U_k(g)† E U_k(g)|[k]⟩` from the `η×k` block `G = g_{[η],[k]}`.
    pub fn diagonal_term(&self, g_block: &[Complex64]) -> Result<f64> {
        let FastCoefficients { eta, k, .. } = self.coeffs;
        if k == 0 {
            return Ok(self.weights[0] * self.pfaffian_at_zero().re);
        }
        let m = gram(&majorana_block(g_block, eta, k), 2 * k, 2 * eta);
        let traces = trace_powers(&m, k)?;
        let taus = inverse_trace_sequence(&traces, k, eta)?;
        let taylor = pfaffian_taylor(self.pfaffian_at_zero(), &taus, k)?;
        // t_x = (−1)^{n−k} ∂^x Pf / (x! i^x); the i^x cancels against α.
        Ok(self
            .weights
            .iter()
            .zip(&taylor)
            .map(|(w, c)| w * c.re)
            .sum())
    }

    /// Fast single-shot estimate of `⟨D^p_q⟩`.
    pub fn estimate(&self, shadow: &ClassicalShadow, p: &OccupationVector, q: &OccupationVector) -> Result<Complex64> {
        let FastCoefficients { n, eta, k, .. } = self.coeffs;
        if shadow.n() != n || shadow.eta() != eta || p.len() != k || p.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "shadow ({}, {}) and legs of size {} for fast estimator ({n}, {eta}, {k})",
                shadow.n(),
                shadow.eta(),
                p.len()
            )));
        }
        let dec = decompose_rdm(p, q)?;
        let rows: Vec<usize> = shadow.z.modes().iter().map(|m| m - 1).collect();
        let mut g_block = vec![ZERO; eta * k];
        let mut total = ZERO;
        for term in dec.terms() {
            for (j, &r) in rows.iter().enumerate() {
                for (a, col) in term.frame.iter().enumerate() {
                    g_block[j * k + a] = col.iter().map(|&(l, w)| shadow.u[(r, l)] * w).sum();
                }
            }
            total += term.coefficient * self.diagonal_term(&g_block)?;
        }
        Ok(total)
    }
}

/// Fast single-shot estimate of `⟨D^p_q⟩`.
pub fn fast_estimate_rdm(
    shadow: &ClassicalShadow,
    eta: usize,
    k: usize,
    p: &OccupationVector,
    q: &OccupationVector,
) -> Result<Complex64> {
    FastEstimator::new(shadow.n(), eta, k)?.estimate(shadow, p, q)
}

/// Number of decomposition terms for legs sharing `shared` of `k` modes.
pub fn decomposition_size(k: usize, shared: usize) -> usize {
    if shared == k {
        1
    } else {
        2 * (k - shared) + 2
    }
}

/// Decomposition size for a concrete pair.
pub fn decomposition_size_for(p: &OccupationVector, q: &OccupationVector) -> usize {
    decomposition_size(p.len(), overlap_count(p, q))
}

/// Count of `(p, q)` pairs in `S_{n,k}²`, used by benchmarks.
pub fn pair_count(n: usize, k: usize) -> usize {
    choose(n, k).pow(2)
}
