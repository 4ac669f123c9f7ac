//! Exact combinatorics and the subset index algebra.
//!
//! Modes are 1-based throughout the public API. Subsets of a fixed size are
//! ranked colexicographically, so the rank of a subset does not depend on the
//! total mode count `n`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Binomial coefficient `C(a, b)` for arbitrary integers.
///
/// Returns 0 for `b < 0` and for `b > a ≥ 0`. For negative `a` the
/// generalized value `a(a-1)...(a-b+1)/b!` is returned.
pub fn binom(a: i64, b: i64) -> BigInt {
    if b < 0 || (a >= 0 && b > a) {
        return BigInt::zero();
    }
    let b = if a >= 0 && b > a - b { a - b } else { b };
    let mut acc = BigInt::one();
    for i in 0..b {
        acc *= BigInt::from(a - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

/// `C(n, k)` as a machine integer. Panics if the value overflows `usize`.
pub fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

/// `C(n, k)` as a float, for statistics where exactness is not needed.
pub fn choose_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `n!` as an arbitrary-precision integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Factorial of a signed argument; panics on negative input.
pub(crate) fn fact(n: i64) -> BigInt {
    assert!(n >= 0, "factorial of negative number {n}");
    factorial(n as u64)
}

/// Exact rational from an integer.
pub fn rat(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// Exact rational `num / den`.
pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `(-1)^e` as a signed integer.
pub fn sign_pow(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Lossy conversion of an exact rational to `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Scale numerator and denominator down to a common bit length first.
    let numer = r.numer();
    let denom = r.denom();
    let shift = numer.bits().max(denom.bits()).saturating_sub(1000);
    let n = (numer >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (denom >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Render a rational as `p/q`, or `p` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse a rational written as `p/q` or `p`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse(n)?, d))
        }
        None => Ok(rat(parse(s)?)),
    }
}

/// Sign of the permutation that sorts a sequence of distinct values.
pub fn sort_sign(values: &[usize]) -> i64 {
    let mut inversions = 0usize;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if values[i] > values[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A sorted subset of the modes `1..=n`, labelling a Fock basis state or an
/// RDM leg.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "OccupationRecord", into = "OccupationRecord")]
pub struct OccupationVector {
    n: usize,
    modes: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct OccupationRecord {
    n: usize,
    modes: Vec<usize>,
}

impl TryFrom<OccupationRecord> for OccupationVector {
    type Error = Error;
    fn try_from(r: OccupationRecord) -> Result<Self> {
        OccupationVector::new(r.n, r.modes)
    }
}

impl From<OccupationVector> for OccupationRecord {
    fn from(v: OccupationVector) -> Self {
        OccupationRecord {
            n: v.n,
            modes: v.modes,
        }
    }
}

impl OccupationVector {
    /// Build from strictly increasing 1-based modes.
    pub fn new(n: usize, modes: Vec<usize>) -> Result<Self> {
        if modes.len() > n {
            return Err(Error::InvalidOccupation(format!(
                "{} modes exceed n = {n}",
                modes.len()
            )));
        }
        for (i, &m) in modes.iter().enumerate() {
            if m < 1 || m > n {
                return Err(Error::InvalidOccupation(format!(
                    "mode {m} outside 1..={n}"
                )));
            }
            if i > 0 && modes[i - 1] >= m {
                return Err(Error::InvalidOccupation(format!(
                    "modes {modes:?} are not strictly increasing"
                )));
            }
        }
        Ok(Self { n, modes })
    }

    /// Build from modes in any order, sorting them first.
    pub fn from_unsorted(n: usize, mut modes: Vec<usize>) -> Result<Self> {
        modes.sort_unstable();
        Self::new(n, modes)
    }

    /// The leading subset `(1, ..., d)`.
    pub fn leading(n: usize, d: usize) -> Self {
        assert!(d <= n, "leading subset of size {d} exceeds n = {n}");
        Self {
            n,
            modes: (1..=d).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.modes.binary_search(&mode).is_ok()
    }

    /// Same modes regarded as a subset of a larger mode set.
    pub fn embed(&self, n: usize) -> Result<Self> {
        Self::new(n, self.modes.clone())
    }

    /// The modes of `1..=n` not in this subset, in increasing order.
    pub fn complement(&self) -> Self {
        let modes = (1..=self.n).filter(|m| !self.contains(*m)).collect();
        Self { n: self.n, modes }
    }

    /// Colexicographic rank in `0..C(n, d)`.
    pub fn rank(&self) -> usize {
        self.modes
            .iter()
            .enumerate()
            .map(|(i, &m)| choose(m - 1, i + 1))
            .sum()
    }

    /// Inverse of [`OccupationVector::rank`].
    pub fn unrank(rank: usize, n: usize, d: usize) -> Result<Self> {
        if d > n || rank >= choose(n, d) {
            return Err(Error::RankOutOfRange { rank, n, d });
        }
        let mut modes = vec![0; d];
        let mut r = rank;
        let mut c = n;
        for i in (1..=d).rev() {
            // Largest c with C(c, i) <= r.
            while choose(c, i) > r {
                c -= 1;
            }
            modes[i - 1] = c + 1;
            r -= choose(c, i);
        }
        Ok(Self { n, modes })
    }

    /// All subsets of size `d` in rank order.
    pub fn all(n: usize, d: usize) -> Subsets {
        Subsets {
            n,
            current: (d <= n).then(|| (1..=d).collect()),
        }
    }

    /// Bit mask with bit `m - 1` set for each mode `m`. Requires `n <= 64`.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.modes.iter().fold(0u64, |acc, &m| acc | (1u64 << (m - 1)))
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.modes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

/// Colex-ordered iterator over the subsets of a fixed size.
pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = OccupationVector;

    fn next(&mut self) -> Option<OccupationVector> {
        let cur = self.current.take()?;
        let out = OccupationVector {
            n: self.n,
            modes: cur.clone(),
        };
        let d = cur.len();
        let mut next = cur;
        let mut advanced = false;
        for i in 0..d {
            let limit = if i + 1 < d { next[i + 1] } else { self.n + 1 };
            if next[i] + 1 < limit {
                next[i] += 1;
                for (j, slot) in next.iter_mut().enumerate().take(i) {
                    *slot = j + 1;
                }
                advanced = true;
                break;
            }
        }
        if advanced {
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Number of common modes of two subsets, by a linear merge.
pub fn overlap_count(p: &OccupationVector, q: &OccupationVector) -> usize {
    let (a, b) = (p.modes(), q.modes());
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// A permutation of `1..=n` stored by its image array: `j ↦ image[j - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationMatrix {
    image: Vec<usize>,
}

impl PermutationMatrix {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v < 1 || v > n || seen[v - 1] {
                return Err(Error::InvalidOccupation(format!(
                    "{image:?} is not a permutation of 1..={n}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (1..=n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Image of the 1-based mode `j`.
    pub fn apply(&self, j: usize) -> usize {
        self.image[j - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (j, &v) in self.image.iter().enumerate() {
            inv[v - 1] = j + 1;
        }
        Self { image: inv }
    }
}

/// The permutation sending `j ↦ z_j` for `j ≤ d` and the remaining positions
/// to the complement of `z` in increasing order.
pub fn canonical_permutation(z: &OccupationVector) -> PermutationMatrix {
    let mut image = z.modes().to_vec();
    image.extend(z.complement().modes());
    PermutationMatrix { image }
}

/// Whether `v` maps the leading `d` modes onto `z` as a set.
pub fn maps_leading_onto(v: &PermutationMatrix, z: &OccupationVector) -> bool {
    let mut head: Vec<usize> = v.image[..z.len()].to_vec();
    head.sort_unstable();
    head == z.modes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ov(n: usize, m: &[usize]) -> OccupationVector {
        OccupationVector::new(n, m.to_vec()).unwrap()
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(3, 5), BigInt::zero());
        assert_eq!(binom(0, 0), BigInt::one());
        assert_eq!(binom(4, -1), BigInt::zero());
        assert_eq!(binom(-1, 3), BigInt::from(-1));
        assert_eq!(binom(-2, 2), BigInt::from(3));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(ov(4, &[1, 2]).rank(), 0);
        assert_eq!(ov(4, &[3, 4]).rank(), 5);
        assert_eq!(ov(3, &[2]).rank(), 1);
        assert_eq!(OccupationVector::unrank(0, 4, 2).unwrap(), ov(4, &[1, 2]));
        assert_eq!(OccupationVector::unrank(5, 4, 2).unwrap(), ov(4, &[3, 4]));
        assert_eq!(OccupationVector::unrank(1, 3, 1).unwrap(), ov(3, &[2]));
        assert!(OccupationVector::unrank(6, 4, 2).is_err());
    }

    #[test]
    fn colex_order_by_enumeration() {
        // Colex: compare largest elements first.
        let mut all: Vec<Vec<usize>> = Vec::new();
        for a in 1..=4 {
            for b in a + 1..=4 {
                all.push(vec![a, b]);
            }
        }
        all.sort_by(|x, y| x.iter().rev().cmp(y.iter().rev()));
        for (r, modes) in all.iter().enumerate() {
            assert_eq!(ov(4, modes).rank(), r);
        }
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_count(&ov(3, &[1, 2, 3]), &ov(3, &[1, 2, 3])), 3);
        assert_eq!(overlap_count(&ov(4, &[1, 2]), &ov(4, &[3, 4])), 0);
        assert_eq!(overlap_count(&ov(5, &[1, 3, 5]), &ov(5, &[2, 3, 5])), 2);
    }

    #[test]
    fn canonical_permutation_examples() {
        assert_eq!(canonical_permutation(&ov(3, &[2, 3])).image(), &[2, 3, 1]);
        assert_eq!(canonical_permutation(&ov(3, &[1, 2])).image(), &[1, 2, 3]);
        assert_eq!(canonical_permutation(&ov(4, &[4])).image(), &[4, 1, 2, 3]);
    }

    #[test]
    fn invalid_occupations_rejected() {
        assert!(OccupationVector::new(3, vec![0]).is_err());
        assert!(OccupationVector::new(3, vec![4]).is_err());
        assert!(OccupationVector::new(3, vec![2, 2]).is_err());
        assert!(OccupationVector::new(3, vec![2, 1]).is_err());
        assert!(PermutationMatrix::new(vec![1, 1]).is_err());
    }

    #[test]
    fn rank_unrank_round_trip_exhaustive() {
        for n in 0..=8 {
            for d in 0..=n {
                let subsets: Vec<_> = OccupationVector::all(n, d).collect();
                assert_eq!(subsets.len(), choose(n, d));
                for (r, s) in subsets.iter().enumerate() {
                    assert_eq!(s.rank(), r);
                    assert_eq!(&OccupationVector::unrank(r, n, d).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn pascal_rule() {
        for a in 1..=30i64 {
            for b in 0..=a {
                assert_eq!(binom(a, b), binom(a - 1, b) + binom(a - 1, b - 1));
            }
        }
    }

    #[test]
    fn rational_format_round_trip() {
        let r = ratio(-6, 4);
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(parse_rational("-3/2").unwrap(), r);
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn sort_sign_examples() {
        assert_eq!(sort_sign(&[1, 2, 3]), 1);
        assert_eq!(sort_sign(&[2, 1, 3]), -1);
        assert_eq!(sort_sign(&[3, 1, 2]), 1);
    }

    proptest! {
        #[test]
        fn canonical_permutation_is_bijection_onto_z(
            n in 1usize..10, seed in any::<u64>()
        ) {
            let d = (seed as usize) % (n + 1);
            let r = (seed as usize / 11) % choose(n, d);
            let z = OccupationVector::unrank(r, n, d).unwrap();
            let v = canonical_permutation(&z);
            prop_assert!(PermutationMatrix::new(v.image().to_vec()).is_ok());
            prop_assert!(maps_leading_onto(&v, &z));
            prop_assert_eq!(v.inverse().inverse(), v);
        }

        #[test]
        fn choose_matches_binom(n in 0usize..60, k in 0usize..60) {
            prop_assert_eq!(BigInt::from(choose(n, k)), binom(n as i64, k as i64));
        }
    }
}
