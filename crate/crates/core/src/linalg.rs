//! Dense complex matrix kernels: Haar sampling, minors, compound matrices,
//! eigenvalues and Pfaffians.

use std::ops::{Add, Deref, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::combinat::{choose, OccupationVector, PermutationMatrix};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// The matrix `v` with `v e_j = e_{image(j)}`.
    pub fn from_permutation(p: &PermutationMatrix) -> Self {
        let n = p.n();
        let mut m = Self::zeros(n, n);
        for j in 1..=n {
            m[(p.apply(j) - 1, j - 1)] = ONE;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, other.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> ComplexMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Submatrix on the given 0-based row and column indices.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ComplexMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Determinant by LU with partial pivoting. The empty matrix has determinant 1.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        lu_det(self.data.clone(), self.rows)
    }

    /// Inverse by Gauss-Jordan elimination, or `None` if singular.
    pub fn inverse(&self) -> Option<ComplexMatrix> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))?;
            if a[(piv, col)].norm() == 0.0 {
                return None;
            }
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let d = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= d;
                inv[(col, j)] *= d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * ac;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
        Some(inv)
    }

    /// `max |(M M† − I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.matmul(&self.adjoint()).max_abs_diff(&Self::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

fn lu_det(mut a: Vec<Complex64>, n: usize) -> Complex64 {
    let mut det = ONE;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in col + 1..n {
            let v = a[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        let dinv = d.inv();
        for r in col + 1..n {
            let f = a[r * n + col] * dinv;
            if f == ZERO {
                continue;
            }
            for j in col + 1..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
        }
    }
    det
}

/// Square matrix with `U U† = I` checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.unitarity_defect();
        if defect > Self::TOLERANCE {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self(m))
    }

    /// Wrap a matrix known to be unitary up to rounding, skipping the check.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn from_permutation(p: &PermutationMatrix) -> Self {
        Self(ComplexMatrix::from_permutation(p))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self(self.0.adjoint())
    }

    /// Product of two unitaries, which is unitary up to rounding.
    pub fn compose(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        Self(self.0.matmul(&other.0))
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Even-dimensional matrix with `A = −Aᵀ` checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricMatrix(ComplexMatrix);

impl AntisymmetricMatrix {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || m.rows % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "antisymmetric matrix must be square of even size, got {}x{}",
                m.rows, m.cols
            )));
        }
        let defect = (&m + &m.transpose()).max_abs();
        if defect > Self::TOLERANCE * m.max_abs().max(1.0) {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl Deref for AntisymmetricMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Draw an `n×n` unitary from the Haar measure.
///
/// A complex Ginibre matrix is QR-factorized with Householder reflections and
/// the columns of `Q` are multiplied by the phases of `diag(R)`, which makes the
/// factorization unique with a positive diagonal of `R`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::OutOfRange("Haar unitary needs n >= 1".into()));
    }
    for _ in 0..2 {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        if let Some(q) = householder_q_with_phases(g) {
            return Ok(UnitaryMatrix(q));
        }
    }
    Err(Error::SingularSample)
}

/// Q factor of `a = QR` with the gauge fixed so that `diag(R) > 0`.
/// Returns `None` if a column is numerically dependent on the previous ones.
fn householder_q_with_phases(mut a: ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.rows;
    let scale = a.max_abs();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for j in 0..n {
        let x: Vec<Complex64> = (j..n).map(|i| a[(i, j)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-13 * scale) || !norm.is_finite() {
            return None;
        }
        let x0_phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        // Reflect x onto alpha e_1 with alpha = -phase(x0) |x|.
        let alpha = -x0_phase * norm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for z in v.iter_mut() {
                *z /= vnorm;
            }
            for c in j..n {
                let dot: Complex64 = (j..n).map(|i| v[i - j].conj() * a[(i, c)]).sum();
                for i in j..n {
                    a[(i, c)] -= 2.0 * v[i - j] * dot;
                }
            }
        }
        phases.push(alpha / alpha.norm());
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1}, accumulated right to left on the identity.
    let mut q = ComplexMatrix::identity(n);
    for j in (0..n).rev() {
        let v = &reflectors[j];
        for c in 0..n {
            let dot: Complex64 = (j..n).map(|i| v[i - j].conj() * q[(i, c)]).sum();
            for i in j..n {
                q[(i, c)] -= 2.0 * v[i - j] * dot;
            }
        }
    }
    for (j, ph) in phases.iter().enumerate() {
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    Some(q)
}

/// Determinant of the minor on the given 1-based rows and columns.
pub fn minor_det(u: &ComplexMatrix, rows: &OccupationVector, cols: &OccupationVector) -> Complex64 {
    assert_eq!(rows.len(), cols.len(), "minor must be square");
    let r: Vec<usize> = rows.modes().iter().map(|m| m - 1).collect();
    let c: Vec<usize> = cols.modes().iter().map(|m| m - 1).collect();
    minor_det_indices(u, &r, &c)
}

/// Determinant of the minor on 0-based row and column indices.
pub fn minor_det_indices(u: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> Complex64 {
    let d = rows.len();
    match d {
        0 => ONE,
        1 => u[(rows[0], cols[0])],
        2 => {
            u[(rows[0], cols[0])] * u[(rows[1], cols[1])]
                - u[(rows[0], cols[1])] * u[(rows[1], cols[0])]
        }
        _ => {
            let mut data = Vec::with_capacity(d * d);
            for &i in rows {
                for &j in cols {
                    data.push(u[(i, j)]);
                }
            }
            lu_det(data, d)
        }
    }
}

/// The `k`-th compound matrix: entry `[p', p] = det u_{p', p}` with rows and
/// columns indexed by colex rank.
pub fn compound_matrix(u: &ComplexMatrix, k: usize) -> ComplexMatrix {
    assert!(u.is_square() && k <= u.rows, "compound order {k} invalid");
    let n = u.rows;
    let subsets: Vec<Vec<usize>> = OccupationVector::all(n, k)
        .map(|s| s.modes().iter().map(|m| m - 1).collect())
        .collect();
    let dim = choose(n, k);
    ComplexMatrix::from_fn(dim, dim, |a, b| minor_det_indices(u, &subsets[a], &subsets[b]))
}

/// Selected columns of the compound matrix, each of length `C(n, k)`.
pub fn compound_columns(u: &ComplexMatrix, cols: &[&OccupationVector]) -> Vec<Vec<Complex64>> {
    let n = u.rows;
    let k = cols.first().map_or(0, |c| c.len());
    let rows: Vec<Vec<usize>> = OccupationVector::all(n, k)
        .map(|s| s.modes().iter().map(|m| m - 1).collect())
        .collect();
    cols.iter()
        .map(|c| {
            let ci: Vec<usize> = c.modes().iter().map(|m| m - 1).collect();
            rows.iter().map(|r| minor_det_indices(u, r, &ci)).collect()
        })
        .collect()
}

/// Pfaffian by Parlett–Reid skew tridiagonalization with partial pivoting.
pub fn pfaffian(a: &AntisymmetricMatrix) -> Complex64 {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut pf = ONE;
    let mut k = 0;
    while k + 1 < n {
        // Pivot the largest entry of column k below the diagonal into row k+1.
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].norm();
        for i in k + 2..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            for i in 0..n {
                m.data.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        if best == 0.0 {
            return ZERO;
        }
        let pivot = m[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// All eigenvalues of a square complex matrix, with multiplicity.
///
/// Householder reduction to Hessenberg form followed by Wilkinson-shifted QR
/// sweeps with Givens rotations and deflation.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m.clone());
    let max_iter = 100 * n.max(10);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let sub = h[(l, l - 1)].norm();
            if sub <= f64::EPSILON * s || sub <= 1e-300 * norm || sub < f64::EPSILON * 1e-3 * norm {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NoConvergence(total));
        }
        let mu = if since_deflation % 11 == 10 {
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_sweep(&mut h, l, hi, mu);
    }
    Ok((0..n).map(|i| h[(i, i)]).collect())
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// One shifted QR step on the active block `l..=hi` of a Hessenberg matrix.
fn qr_sweep(h: &mut ComplexMatrix, l: usize, hi: usize, mu: Complex64) {
    for i in l..=hi {
        h[(i, i)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - l);
    for i in l..hi {
        let x = h[(i, i)];
        let y = h[(i + 1, i)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
        for j in i..=hi {
            let (a, b) = (h[(i, j)], h[(i + 1, j)]);
            h[(i, j)] = c.conj() * a + s.conj() * b;
            h[(i + 1, j)] = -s * a + c * b;
        }
        rotations.push((c, s));
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let i = l + idx;
        for r in l..=(i + 2).min(hi) {
            let (a, b) = (h[(r, i)], h[(r, i + 1)]);
            h[(r, i)] = a * c + b * s;
            h[(r, i + 1)] = -a * s.conj() + b * c.conj();
        }
    }
    for i in l..=hi {
        h[(i, i)] += mu;
    }
}

fn hessenberg(mut a: ComplexMatrix) -> ComplexMatrix {
    let n = a.rows;
    for j in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (j + 1..n).map(|i| a[(i, j)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let mut v = x;
        v[0] += phase * norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A ← H A H with H = I − 2 v v†, acting on indices j+1..n.
        for c in 0..n {
            let dot: Complex64 = (j + 1..n).map(|i| v[i - j - 1].conj() * a[(i, c)]).sum();
            for i in j + 1..n {
                a[(i, c)] -= 2.0 * v[i - j - 1] * dot;
            }
        }
        for r in 0..n {
            let dot: Complex64 = (j + 1..n).map(|i| a[(r, i)] * v[i - j - 1]).sum();
            for i in j + 1..n {
                a[(r, i)] -= 2.0 * dot * v[i - j - 1].conj();
            }
        }
        for i in j + 2..n {
            a[(i, j)] = ZERO;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> AntisymmetricMatrix {
        let g = random_matrix(n, rng);
        AntisymmetricMatrix::new(&g - &g.transpose()).unwrap()
    }

    fn ov(n: usize, m: &[usize]) -> OccupationVector {
        OccupationVector::new(n, m.to_vec()).unwrap()
    }

    #[test]
    fn minor_examples() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(minor_det(&id, &ov(3, &[1, 3]), &ov(3, &[1, 3])), ONE);
        assert_eq!(minor_det(&id, &ov(3, &[1, 2]), &ov(3, &[1, 3])), ZERO);
        let swap = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(minor_det(&swap, &ov(2, &[1, 2]), &ov(2, &[1, 2])), -ONE);
    }

    #[test]
    fn lu_det_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(3, &mut rng);
        let cof = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
            - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
            + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
        assert!((a.det() - cof).norm() < 1e-14);
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(5, &mut rng);
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&ComplexMatrix::identity(5)) < 1e-10);
        assert!(ComplexMatrix::zeros(2, 2).inverse().is_none());
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u1 = haar_unitary(1, &mut rng).unwrap();
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);
        for n in [2, 5, 17, 64] {
            let u = haar_unitary(n, &mut rng).unwrap();
            assert!(u.unitarity_defect() < 1e-13, "n={n}");
        }
        assert!(haar_unitary(0, &mut rng).is_err());
    }

    #[test]
    fn haar_moments_n2() {
        // E|u11|^2 = 1/n and E|u11|^4 = 2/(n(n+1)) for n = 2.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples = 1_000_000;
        let (mut s2, mut s2sq, mut s4, mut s4sq) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..samples {
            let u = haar_unitary(2, &mut rng).unwrap();
            let a = u[(0, 0)].norm_sqr();
            s2 += a;
            s2sq += a * a;
            s4 += a * a;
            s4sq += a.powi(4);
        }
        let n = samples as f64;
        let check = |sum: f64, sumsq: f64, expect: f64| {
            let mean = sum / n;
            let se = ((sumsq / n - mean * mean) / n).sqrt();
            assert!((mean - expect).abs() < 5.0 * se, "mean {mean} expect {expect} se {se}");
        };
        check(s2, s2sq, 0.5);
        check(s4, s4sq, 1.0 / 3.0);
    }

    #[test]
    fn haar_phase_distribution_is_uniform() {
        // For Haar u the diagonal entry u11 has a uniformly random phase, so
        // E[u11^2] = 0; the uncorrected QR gauge biases this.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let samples = 200_000;
        let mut acc = ZERO;
        for _ in 0..samples {
            let u = haar_unitary(3, &mut rng).unwrap();
            acc += u[(0, 0)] * u[(0, 0)];
        }
        assert!((acc / samples as f64).norm() < 0.01);
    }

    #[test]
    fn compound_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(4, &mut rng).unwrap();
        assert!(compound_matrix(&u, 1).max_abs_diff(&u) < 1e-15);
        let full = compound_matrix(&u, 4);
        assert_eq!((full.rows(), full.cols()), (1, 1));
        assert!((full[(0, 0)] - u.det()).norm() < 1e-12);
        for k in 0..=4 {
            let id = compound_matrix(&ComplexMatrix::identity(4), k);
            assert_eq!(id, ComplexMatrix::identity(choose(4, k)));
            assert!(compound_matrix(&u, k).unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn compound_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..=6 {
            let u = haar_unitary(n, &mut rng).unwrap();
            let v = haar_unitary(n, &mut rng).unwrap();
            let vu = v.matmul(&u);
            for k in 0..=n {
                let lhs = compound_matrix(&v, k).matmul(&compound_matrix(&u, k));
                assert!(lhs.max_abs_diff(&compound_matrix(&vu, k)) < 1e-9);
            }
        }
    }

    #[test]
    fn pfaffian_examples() {
        let a = c(0.3, -1.2);
        let m = AntisymmetricMatrix::new(ComplexMatrix::from_vec(2, 2, vec![ZERO, a, -a, ZERO]).unwrap())
            .unwrap();
        assert!((pfaffian(&m) - a).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_antisymmetric(4, &mut rng);
        let expect = g[(0, 1)] * g[(2, 3)] - g[(0, 2)] * g[(1, 3)] + g[(0, 3)] * g[(1, 2)];
        assert!((pfaffian(&g) - expect).norm() < 1e-14);

        let j = ComplexMatrix::identity(3).kron(
            &ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap(),
        );
        assert!((pfaffian(&AntisymmetricMatrix::new(j).unwrap()) - ONE).norm() < 1e-15);
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 1..=10 {
            let a = random_antisymmetric(2 * m, &mut rng);
            let pf = pfaffian(&a);
            let det = a.det();
            assert!((pf * pf - det).norm() <= 1e-8 * det.norm().max(1e-300), "dim {}", 2 * m);
        }
    }

    #[test]
    fn antisymmetric_rejects_bad_input() {
        assert!(AntisymmetricMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(AntisymmetricMatrix::new(ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-2.0, 1.0), c(3.5, 0.0)]);
        let mut ev = eigenvalues(&d).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 1.0)).norm() < 1e-14);
        assert!((ev[2] - c(3.5, 0.0)).norm() < 1e-14);

        let rot = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        let mut ev = eigenvalues(&rot).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);

        let nil = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        for e in eigenvalues(&nil).unwrap() {
            assert!(e.norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_unitary_lie_on_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = haar_unitary(12, &mut rng).unwrap();
        let ev = eigenvalues(&u).unwrap();
        assert_eq!(ev.len(), 12);
        for e in &ev {
            assert!((e.norm() - 1.0).abs() < 1e-10);
        }
        let det: Complex64 = ev.iter().product();
        assert!((det - u.det()).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn eigenvalue_sum_is_trace(seed in any::<u64>(), n in 1usize..16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(n, &mut rng);
            let ev = eigenvalues(&m).unwrap();
            let sum: Complex64 = ev.iter().sum();
            prop_assert!((sum - m.trace()).norm() <= 1e-8 * m.frobenius_norm().max(1.0));
            let sq: Complex64 = ev.iter().map(|e| e * e).sum();
            prop_assert!((sq - m.matmul(&m).trace()).norm() <= 1e-8 * m.frobenius_norm().powi(2).max(1.0));
        }

        #[test]
        fn pfaffian_squares_to_det(seed in any::<u64>(), m in 1usize..=10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_antisymmetric(2 * m, &mut rng);
            let pf = pfaffian(&a);
            let det = a.det();
            prop_assert!((pf * pf - det).norm() <= 1e-8 * det.norm().max(1e-12));
        }
    }
}
