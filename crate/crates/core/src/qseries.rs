//! Exact arithmetic core: Bernoulli numbers, divisor power sums, and dense
//! truncated power series over big rationals.
//!
//! All operations are exact. Binary operations between two series truncate
//! to the minimum of the two truncation orders; nothing is ever extended
//! with silent zeros.

use std::sync::Mutex;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

static BERNOULLI_MEMO: Mutex<Vec<Option<BigRational>>> = Mutex::new(Vec::new());

fn bernoulli_any(k: u64, memo: &mut Vec<Option<BigRational>>) -> BigRational {
    if let Some(Some(b)) = memo.get(k as usize) {
        return b.clone();
    }
    if memo.len() <= k as usize {
        memo.resize(k as usize + 1, None);
    }
    let value = if k == 0 {
        BigRational::one()
    } else if k == 1 {
        BigRational::new(BigInt::from(-1), BigInt::from(2))
    } else if k % 2 == 1 {
        BigRational::zero()
    } else {
        // sum_{j=0..k} C(k+1, j) B_j = 0, solved for B_k
        let mut acc = BigRational::zero();
        for j in 0..k {
            let b_j = bernoulli_any(j, memo);
            if !b_j.is_zero() {
                acc += BigRational::from(binomial(k + 1, j)) * b_j;
            }
        }
        -acc / BigRational::from(BigInt::from(k + 1))
    };
    memo[k as usize] = Some(value.clone());
    value
}

/// k-th Bernoulli number in the convention with B_2 = 1/6 and B_6 = 1/42.
///
/// Only even k is admitted; odd k is a domain error rather than the
/// trivial zero, since no caller in this crate ever wants an odd index.
pub fn bernoulli(k: u64) -> Result<BigRational> {
    if k % 2 != 0 {
        return Err(Error::BadIndex {
            what: "bernoulli requires even k",
        });
    }
    let mut memo = BERNOULLI_MEMO.lock().unwrap();
    Ok(bernoulli_any(k, &mut memo))
}

/// Divisor power sum sigma_ell(n) = sum of d^ell over divisors d of n.
pub fn sigma(ell: u32, n: u64) -> Result<BigInt> {
    if ell == 0 {
        return Err(Error::BadIndex { what: "sigma requires ell >= 1" });
    }
    if n == 0 {
        return Err(Error::BadIndex { what: "sigma requires n >= 1" });
    }
    let mut acc = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            acc += BigInt::from(d).pow(ell);
            let e = n / d;
            if e != d {
                acc += BigInt::from(e).pow(ell);
            }
        }
        d += 1;
    }
    Ok(acc)
}

/// Table of sigma_ell(n) for n = 1..=n_max via a divisor sieve.
/// Index 0 holds zero so that `table[n]` is sigma_ell(n).
pub fn sigma_table(ell: u32, n_max: usize) -> Vec<BigInt> {
    let mut table = vec![BigInt::zero(); n_max + 1];
    for d in 1..=n_max {
        let dp = BigInt::from(d).pow(ell);
        let mut m = d;
        while m <= n_max {
            table[m] += &dp;
            m += d;
        }
    }
    table
}

/// Dense truncated power series with exact rational coefficients.
///
/// `coeffs[n]` is the coefficient of q^n; the truncation order is
/// `coeffs.len() - 1` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    /// Build a series from its coefficient list (must be non-empty).
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        RationalSeries { coeffs }
    }

    /// Constant series c + 0·q + ... through the given order.
    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        coeffs[0] = c;
        RationalSeries { coeffs }
    }

    /// The constant series 1 through the given order.
    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Cauchy product, truncated to the minimum of the two orders.
    pub fn multiply(&self, other: &RationalSeries) -> RationalSeries {
        let order = self.truncation_order().min(other.truncation_order());
        let mut coeffs = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        RationalSeries { coeffs }
    }

    /// Multiplicative inverse: r with self·r = 1 through the truncation order.
    ///
    /// Uses the convolution recurrence
    /// r(n) = -(1/s(0)) · sum_{j=1..n} s(j) r(n-j).
    pub fn reciprocal(&self) -> Result<RationalSeries> {
        let s0 = &self.coeffs[0];
        if s0.is_zero() {
            return Err(Error::NonInvertible);
        }
        let order = self.truncation_order();
        let mut r: Vec<BigRational> = Vec::with_capacity(order + 1);
        r.push(s0.recip());
        for n in 1..=order {
            let mut acc = BigRational::zero();
            for j in 1..=n {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &r[n - j];
                }
            }
            r.push(-acc / s0);
        }
        Ok(RationalSeries { coeffs: r })
    }

    /// m-th power by binary exponentiation; m = 0 yields the constant 1.
    pub fn power(&self, m: u32) -> RationalSeries {
        let order = self.truncation_order();
        let mut result = RationalSeries::one(order);
        let mut base = self.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = result.multiply(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base);
            }
        }
        result
    }

    /// Ramanujan Θ-operator q·d/dq: coefficient n maps to n·coefficient(n).
    pub fn theta(&self) -> RationalSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * BigRational::from(BigInt::from(n)))
            .collect();
        RationalSeries { coeffs }
    }

    pub fn add(&self, other: &RationalSeries) -> RationalSeries {
        let order = self.truncation_order().min(other.truncation_order());
        let coeffs = (0..=order)
            .map(|n| &self.coeffs[n] + &other.coeffs[n])
            .collect();
        RationalSeries { coeffs }
    }

    pub fn sub(&self, other: &RationalSeries) -> RationalSeries {
        let order = self.truncation_order().min(other.truncation_order());
        let coeffs = (0..=order)
            .map(|n| &self.coeffs[n] - &other.coeffs[n])
            .collect();
        RationalSeries { coeffs }
    }

    pub fn scale(&self, c: &BigRational) -> RationalSeries {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        RationalSeries { coeffs }
    }

    /// First index where the two series differ (through the common order),
    /// or None if they agree exactly.
    pub fn first_mismatch(&self, other: &RationalSeries) -> Option<usize> {
        let order = self.truncation_order().min(other.truncation_order());
        (0..=order).find(|&n| self.coeffs[n] != other.coeffs[n])
    }
}

/// Render a rational as "p/q" with explicit denominator and decimal digits.
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse "p/q" or a bare integer "p".
pub fn rational_from_string(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Config(format!("invalid integer literal: {t:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Config("zero denominator".into()));
            }
            Ok(BigRational::new(parse_int(p)?, den))
        }
        None => Ok(BigRational::from(parse_int(s)?)),
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    truncation_order: usize,
    coeffs: Vec<String>,
}

impl Serialize for RationalSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            truncation_order: self.truncation_order(),
            coeffs: self.coeffs.iter().map(rational_to_string).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.truncation_order + 1 {
            return Err(serde::de::Error::custom("coeffs length must be truncation_order + 1"));
        }
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| rational_from_string(s).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(RationalSeries::new(coeffs))
    }
}

/// sigma_ell(n) < (ell/(ell-1))·n^ell for ell >= 2, checked exactly.
pub fn sigma_bound_holds(ell: u32, n: u64) -> Result<bool> {
    if ell < 2 {
        return Err(Error::BadIndex { what: "sigma bound needs ell >= 2" });
    }
    let s = sigma(ell, n)?;
    // sigma < ell/(ell-1) * n^ell  <=>  (ell-1)*sigma < ell * n^ell
    let lhs = BigInt::from(ell - 1) * s;
    let rhs = BigInt::from(ell) * BigInt::from(n).pow(ell);
    Ok(lhs < rhs)
}

/// Convenience: rational n/1.
pub fn int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Sign of a rational as -1, 0, or 1.
pub fn sign_of(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from_i64(v: &[i64]) -> RationalSeries {
        RationalSeries::new(v.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn bernoulli_base_cases() {
        assert_eq!(bernoulli(0).unwrap(), int(1));
        assert_eq!(bernoulli(2).unwrap(), BigRational::new(1.into(), 6.into()));
        assert_eq!(bernoulli(6).unwrap(), BigRational::new(1.into(), 42.into()));
        assert_eq!(
            bernoulli(12).unwrap(),
            BigRational::new((-691).into(), 2730.into())
        );
        assert!(bernoulli(7).is_err());
    }

    #[test]
    fn bernoulli_defining_recurrence() {
        // sum_{j=0..k} C(k+1,j) B_j = 0 for k >= 1 (odd B_j vanish for j >= 3)
        let mut memo = Vec::new();
        for k in 1..=60u64 {
            let mut acc = BigRational::zero();
            for j in 0..=k {
                acc += BigRational::from(binomial(k + 1, j)) * bernoulli_any(j, &mut memo);
            }
            assert!(acc.is_zero(), "recurrence fails at k={k}");
        }
    }

    #[test]
    fn sigma_small_values() {
        assert_eq!(sigma(1, 1).unwrap(), BigInt::from(1));
        assert_eq!(sigma(3, 2).unwrap(), BigInt::from(9));
        assert_eq!(sigma(5, 3).unwrap(), BigInt::from(244));
        // a_6 numerator/denominator from sigma_5
        assert_eq!(sigma(5, 2).unwrap(), BigInt::from(33));
        assert!(sigma(1, 0).is_err());
        assert!(sigma(0, 5).is_err());
    }

    /// Brute-force divisor enumeration, kept independent of `sigma`.
    fn sigma_brute(ell: u32, n: u64) -> BigInt {
        (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| BigInt::from(d).pow(ell))
            .sum()
    }

    #[test]
    fn sigma_matches_brute_force_and_sieve() {
        for ell in [1u32, 2, 3, 5, 9] {
            let table = sigma_table(ell, 60);
            for n in 1..=60u64 {
                let s = sigma(ell, n).unwrap();
                assert_eq!(s, sigma_brute(ell, n));
                assert_eq!(s, table[n as usize]);
            }
        }
    }

    #[test]
    fn sigma_multiplicative_on_coprime_pairs() {
        for ell in [1u32, 3, 5] {
            for (m, n) in [(3u64, 4u64), (5, 8), (9, 25), (7, 11), (4, 27)] {
                let lhs = sigma(ell, m * n).unwrap();
                let rhs = sigma(ell, m).unwrap() * sigma(ell, n).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn sigma_lemma_bound() {
        for ell in 2..=8u32 {
            for n in 1..=200u64 {
                assert!(sigma_bound_holds(ell, n).unwrap(), "ell={ell} n={n}");
            }
        }
    }

    #[test]
    fn reciprocal_of_one_is_one() {
        let one = RationalSeries::one(5);
        assert_eq!(one.reciprocal().unwrap(), one);
    }

    #[test]
    fn reciprocal_rejects_zero_constant() {
        let s = series_from_i64(&[0, 1, 2]);
        assert_eq!(s.reciprocal().unwrap_err(), Error::NonInvertible);
    }

    #[test]
    fn reciprocal_small_eisenstein_values() {
        // E_6 through order 2 is (1, -504, -16632); 1/E_6 = (1, 504, 270648)
        let e6 = series_from_i64(&[1, -504, -16632]);
        assert_eq!(e6.reciprocal().unwrap(), series_from_i64(&[1, 504, 270648]));
        // E_4 through order 2 is (1, 240, 2160); 1/E_4 = (1, -240, 55440),
        // and 240^2 - 2160 = 55440 by direct division.
        let e4 = series_from_i64(&[1, 240, 2160]);
        assert_eq!(e4.reciprocal().unwrap(), series_from_i64(&[1, -240, 55440]));
        assert_eq!(240i64 * 240 - 2160, 55440);
    }

    #[test]
    fn multiply_unit_and_inverse() {
        let s = series_from_i64(&[3, 1, 4, 1, 5]);
        assert_eq!(s.multiply(&RationalSeries::one(4)), s);
        let prod = s.multiply(&s.reciprocal().unwrap());
        assert_eq!(prod, RationalSeries::one(4).scale(&int(1)));
    }

    #[test]
    fn multiply_truncates_to_min_order() {
        let a = series_from_i64(&[1, 2, 3, 4]);
        let b = series_from_i64(&[1, 1]);
        assert_eq!(a.multiply(&b).truncation_order(), 1);
    }

    #[test]
    fn power_basics() {
        let s = series_from_i64(&[1, -240, 55440, -12288000]);
        assert_eq!(s.power(1), s);
        assert_eq!(s.power(0), RationalSeries::one(3));
        // square by explicit convolution
        let sq = s.multiply(&s);
        assert_eq!(s.power(2), sq);
        assert_eq!(*sq.coeff(1), int(-480));
    }

    #[test]
    fn theta_kills_constants_and_scales() {
        let one = RationalSeries::one(4);
        assert_eq!(one.theta(), RationalSeries::constant(BigRational::zero(), 4));
        let s = series_from_i64(&[7, 1, 1, 1]);
        assert_eq!(s.theta(), series_from_i64(&[0, 1, 2, 3]));
    }

    #[test]
    fn series_json_round_trip() {
        let s = RationalSeries::new(vec![int(1), BigRational::new(3.into(), 7.into()), int(-5)]);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"truncation_order\":2"));
        assert!(json.contains("\"3/7\""));
        let back: RationalSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_rational() -> impl Strategy<Value = BigRational> {
            (-20i64..=20, 1i64..=9)
                .prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
        }

        fn small_series(max_len: usize) -> impl Strategy<Value = RationalSeries> {
            proptest::collection::vec(small_rational(), 1..=max_len).prop_map(RationalSeries::new)
        }

        fn invertible_series(max_len: usize) -> impl Strategy<Value = RationalSeries> {
            small_series(max_len).prop_filter("constant term nonzero", |s| !s.coeff(0).is_zero())
        }

        proptest! {
            #[test]
            fn reciprocal_is_two_sided_inverse(s in invertible_series(8)) {
                let r = s.reciprocal().unwrap();
                let prod = s.multiply(&r);
                prop_assert_eq!(prod.coeff(0), &BigRational::one());
                for n in 1..=prod.truncation_order() {
                    prop_assert!(prod.coeff(n).is_zero());
                }
            }

            #[test]
            fn theta_is_a_derivation(a in small_series(7), b in small_series(7)) {
                let lhs = a.multiply(&b).theta();
                let rhs = a.theta().multiply(&b).add(&a.multiply(&b.theta()));
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn power_matches_multiply_chain(s in small_series(6), m in 1u32..=4) {
                let mut chain = s.clone();
                for _ in 1..m {
                    chain = chain.multiply(&s);
                }
                prop_assert_eq!(s.power(m), chain);
            }
        }
    }
}
