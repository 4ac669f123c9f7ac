//! Exact brute-force evaluations of the closed-form sums behind the channel
//! inverse and the estimation matrix.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::channel::{a_coeff, structure_factor, symmetrized_difference};
use crate::combinat::{binom, fact, format_rational, rat, ratio, sign_pow, Rational};
use crate::error::{Error, Result};
use crate::shadows::estimation_entry;

fn rational_string<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn parse_rational_field<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    crate::combinat::parse_rational(&s).map_err(serde::de::Error::custom)
}

/// One brute-force vs closed-form comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub label: String,
    pub n: usize,
    pub eta: usize,
    /// `d` for the `ñ_d` sums, `k` for `t_{n,η,k,s}`.
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<usize>,
    #[serde(serialize_with = "rational_string", deserialize_with = "parse_rational_field")]
    pub brute_value: Rational,
    #[serde(serialize_with = "rational_string", deserialize_with = "parse_rational_field")]
    pub closed_value: Rational,
    pub agree: bool,
}

impl SumReport {
    fn new(label: &str, n: usize, eta: usize, index: usize, s: Option<usize>, brute: Rational, closed: Rational) -> Self {
        let agree = brute == closed;
        Self {
            label: label.to_string(),
            n,
            eta,
            index,
            s,
            brute_value: brute,
            closed_value: closed,
            agree,
        }
    }
}

fn check_nd(n: usize, eta: usize, d: usize) -> Result<()> {
    if eta > n || d > eta.min(n - eta) {
        return Err(Error::OutOfRange(format!(
            "need d <= min(eta, n - eta), got n={n}, eta={eta}, d={d}"
        )));
    }
    Ok(())
}

/// Closed form of `Tr[ñ_d²]`.
pub fn trace_nd_squared_closed(n: usize, eta: usize, d: usize) -> Result<Rational> {
    check_nd(n, eta, d)?;
    let (n, eta, d) = (n as i64, eta as i64, d as i64);
    let num = fact(eta) * fact(n - d + 1) * fact(n - eta);
    let den = fact(d) * BigInt::from(n - 2 * d + 1) * fact(n - eta - d).pow(2) * fact(eta - d).pow(2);
    Ok(ratio(num, den))
}

/// `Tr[ñ_d²]` by the squared class sum, against its closed form.
pub fn trace_nd_squared(n: usize, eta: usize, d: usize) -> Result<SumReport> {
    let closed = trace_nd_squared_closed(n, eta, d)?;
    let (ni, ei, di) = (n as i64, eta as i64, d as i64);
    let mut total = BigInt::zero();
    for s in 0..=ei.min(ni - ei) {
        let mut inner = BigInt::zero();
        for j in 0..=di {
            let c = binom(s, j) * binom(ei - s, di - j);
            if c.is_zero() {
                continue;
            }
            inner += BigInt::from(sign_pow(j)) * fact(ei - di + j) * fact(ni - ei - j) * c;
        }
        total += binom(ei, ei - s) * binom(ni - ei, s) * inner.pow(2);
    }
    let brute = ratio(total, (fact(ei - di) * fact(ni - ei - di)).pow(2));
    Ok(SumReport::new("trace_nd_squared", n, eta, d, None, brute, closed))
}

/// `Tr[ñ_d²]` read off the diagonal of the dense operator, against the closed form.
pub fn trace_nd_squared_dense(n: usize, eta: usize, d: usize) -> Result<SumReport> {
    let closed = trace_nd_squared_closed(n, eta, d)?;
    let op = symmetrized_difference(n, eta, d)?;
    let dense = op.values().iter().fold(Rational::zero(), |acc, v| acc + v * v);
    Ok(SumReport::new("trace_nd_squared_dense", n, eta, d, None, dense, closed))
}

/// Closed form `(−1)^s C(η−k+s, s) C(n−η+k−s, k−s) / C(k, s)`.
pub fn t_sum_closed(n: usize, eta: usize, k: usize, s: usize) -> Rational {
    let (n, eta, k, s) = (n as i64, eta as i64, k as i64, s as i64);
    ratio(
        BigInt::from(sign_pow(s)) * binom(eta - k + s, s) * binom(n - eta + k - s, k - s),
        binom(k, s),
    )
}

/// `t_{n,η,k,s}` by the literal quadruple sum over `(d, d′, x″, y″)`.
///
/// Defined for `s ≤ k ≤ η ≤ n` and `s ≤ n − η`. Beyond the last bound the
/// class the value belongs to is empty and the sum carries no meaning.
pub fn t_sum(n: usize, eta: usize, k: usize, s: usize) -> Result<SumReport> {
    if s > k || k > eta || eta > n || s > n - eta {
        return Err(Error::OutOfRange(format!(
            "t_sum needs s <= k <= eta <= n and s <= n - eta, got n={n}, eta={eta}, k={k}, s={s}"
        )));
    }
    let (ni, ei, ki, si) = (n as i64, eta as i64, k as i64, s as i64);
    let mut total = Rational::zero();
    for d in 0..=eta.min(n - eta) {
        let di = d as i64;
        let weight = a_coeff(n, eta, d)? * rat(binom(ni + 1, di));
        for dp in 0..=di {
            let mut inner = BigInt::zero();
            for x in 0..=(ki - si) {
                for y in 0..=si {
                    inner += binom(ki - si, x)
                        * binom(ei - ki + si, dp - x)
                        * binom(si, y)
                        * binom(ni - ei - si, di - dp - y)
                        * binom(ni - (di + ki - x - y), ni - ei);
                }
            }
            if inner.is_zero() {
                continue;
            }
            let falling = fact(ei - dp) / fact(ei - di) * fact(ni - ei - di + dp) / fact(ni - ei - di);
            total += &weight * rat(BigInt::from(sign_pow(di - dp)) * falling * inner);
        }
    }
    Ok(SumReport::new("t_sum", n, eta, k, Some(s), total, t_sum_closed(n, eta, k, s)))
}

/// `t_{n,η,k,s}` closed form against `E_{η,k}` on the class `s′ = k − s`.
pub fn t_sum_vs_estimation_entry(n: usize, eta: usize, k: usize, s: usize) -> SumReport {
    SumReport::new(
        "t_sum_estimation_entry",
        n,
        eta,
        k,
        Some(s),
        t_sum_closed(n, eta, k, s),
        estimation_entry(n, eta, k, k - s),
    )
}

/// `Ξ_{n,η} = 1/((η!)² C(n,η) C(n+1,η))`.
pub fn weingarten_xi(n: usize, eta: usize) -> Rational {
    let (n, eta) = (n as i64, eta as i64);
    ratio(1, fact(eta).pow(2) * binom(n, eta) * binom(n + 1, eta))
}

/// `g_η(k) = (η!)²(η+1)/(η+1−k)`.
pub fn weingarten_g(eta: usize, k: usize) -> Rational {
    let (eta, k) = (eta as i64, k as i64);
    ratio(fact(eta).pow(2) * (eta + 1), eta + 1 - k)
}

/// `g_η(k)·Ξ_{n,η} = f(k)` for all `k ≤ η ≤ n ≤ n_max`.
pub fn weingarten_consistent(n_max: usize) -> bool {
    (0..=n_max).all(|n| {
        (0..=n).all(|eta| {
            (0..=eta).all(|k| {
                structure_factor(n, eta, k).is_ok_and(|f| weingarten_g(eta, k) * weingarten_xi(n, eta) == f)
            })
        })
    })
}

/// `A(η,k) = Σ_j k!(η−j)!/(η!(k−j)!)`.
pub fn a_sum(eta: usize, k: usize) -> Rational {
    let (eta, k) = (eta as i64, k as i64);
    (0..=k).fold(Rational::zero(), |acc, j| {
        acc + ratio(fact(k) * fact(eta - j), fact(eta) * fact(k - j))
    })
}

/// Exhaustive check of the binomial identities used in the twirl evaluation.
pub fn chu_vandermonde_checks(limit: usize) -> bool {
    let l = limit as i64;
    let vandermonde = (0..=l).all(|n| {
        (0..=n).all(|m| (0..=n).all(|k| (0..=k).map(|j| binom(m, j) * binom(n - m, k - j)).sum::<BigInt>() == binom(n, k)))
    });
    let a_closed = (0..=limit).all(|eta| (0..=eta).all(|k| a_sum(eta, k) == ratio(eta as i64 + 1, (eta - k) as i64 + 1)));
    let alternating = (0..=l).all(|eta| {
        (0..=eta).all(|j| {
            let lhs = (0..=j).fold(Rational::zero(), |acc, k| {
                acc + ratio(BigInt::from(sign_pow(j + k)) * (1 + eta) * binom(j, k), 1 + eta - k)
            });
            lhs == ratio(1, binom(eta, j))
        })
    });
    vandermonde && a_closed && alternating
}

/// JSON-ready sweep result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_max: usize,
    pub reports: Vec<SumReport>,
    pub chu_vandermonde: bool,
    pub weingarten_consistent: bool,
    pub failures: usize,
    pub passed: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Every appendix identity for `n ≤ n_max`, in parameter order.
pub fn appendix_sweep(n_max: usize) -> Result<ValidationReport> {
    let mut params = Vec::new();
    for n in 0..=n_max {
        for eta in 0..=n {
            params.push((n, eta));
        }
    }
    let chunks: Vec<Vec<SumReport>> = params
        .par_iter()
        .map(|&(n, eta)| -> Result<Vec<SumReport>> {
            let mut out = Vec::new();
            for d in 0..=eta.min(n - eta) {
                out.push(trace_nd_squared(n, eta, d)?);
                out.push(trace_nd_squared_dense(n, eta, d)?);
            }
            for k in 0..=eta {
                for s in 0..=k.min(n - eta) {
                    out.push(t_sum(n, eta, k, s)?);
                    out.push(t_sum_vs_estimation_entry(n, eta, k, s));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let reports: Vec<SumReport> = chunks.into_iter().flatten().collect();
    let limit = n_max.max(1);
    let chu_vandermonde = chu_vandermonde_checks(limit);
    let weingarten_consistent = weingarten_consistent(n_max.min(8));
    let failures = reports.iter().filter(|r| !r.agree).count();
    Ok(ValidationReport {
        n_max,
        passed: failures == 0 && chu_vandermonde && weingarten_consistent,
        reports,
        chu_vandermonde,
        weingarten_consistent,
        failures,
    })
}

/// `Σ_j C(m,j)C(n−m,k−j)` summed with zero-outside-support binomials.
pub fn vandermonde_sum(m: i64, n: i64, k: i64) -> BigInt {
    (0..=k).fold(BigInt::zero(), |acc, j| acc + binom(m, j) * binom(n - m, k - j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_nd_squared_examples() {
        let r = trace_nd_squared(2, 1, 1).unwrap();
        assert_eq!(r.closed_value, rat(2));
        assert!(r.agree);
        assert!(trace_nd_squared_dense(2, 1, 1).unwrap().agree);
        for n in 0..8 {
            for eta in 0..=n {
                let r = trace_nd_squared(n, eta, 0).unwrap();
                assert_eq!(r.closed_value, rat(binom(n as i64, eta as i64)));
                assert!(r.agree);
            }
        }
        assert!(trace_nd_squared(4, 1, 2).is_err());
    }

    #[test]
    fn t_sum_examples() {
        for n in 0..7 {
            for eta in 0..=n {
                let r = t_sum(n, eta, 0, 0).unwrap();
                assert_eq!(r.brute_value, rat(1));
                assert!(r.agree);
            }
        }
        let r = t_sum(2, 1, 1, 0).unwrap();
        assert_eq!(r.closed_value, rat(2));
        assert!(r.agree);
        let r = t_sum(2, 1, 1, 1).unwrap();
        assert_eq!(r.closed_value, rat(-1));
        assert!(r.agree);
        assert!(t_sum(3, 3, 1, 1).is_err());
    }

    #[test]
    fn weingarten_examples() {
        assert_eq!(weingarten_xi(2, 1), ratio(1, 6));
        assert_eq!(weingarten_xi(1, 1), ratio(1, 2));
        assert_eq!(weingarten_g(1, 0) * weingarten_xi(2, 1), structure_factor(2, 1, 0).unwrap());
        assert!(weingarten_consistent(8));
    }

    #[test]
    fn chu_vandermonde_examples() {
        assert_eq!(a_sum(3, 2), rat(2));
        for eta in 0..10 {
            assert_eq!(a_sum(eta, 0), rat(1));
        }
        assert_eq!(vandermonde_sum(3, 7, 4), binom(7, 4));
        assert!(chu_vandermonde_checks(15));
    }

    #[test]
    fn small_sweep_passes_and_serializes() {
        let report = appendix_sweep(6).unwrap();
        assert!(report.passed, "{} failures", report.failures);
        let json = report.to_json().unwrap();
        let back: ValidationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
