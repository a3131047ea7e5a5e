//! Construction of the weight-k Eisenstein q-expansions E_k and the
//! coefficient sequence epsilon_k(n), plus the exact small-weight
//! multiplicative identities.

use num::bigint::BigInt;
use num::rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qseries::{bernoulli, sigma, sigma_table, RationalSeries};

/// A positive even weight. k = 2 is admitted but flagged quasi-modular:
/// series construction and the two-term bounds accept it, zero location
/// does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Weight(u32);

impl Weight {
    pub fn new(k: u32) -> Result<Weight> {
        if k < 2 || k % 2 != 0 {
            return Err(Error::BadWeight {
                k: k as i64,
                reason: "weight must be even and >= 2",
            });
        }
        Ok(Weight(k))
    }

    pub fn k(self) -> u32 {
        self.0
    }

    pub fn is_quasi_modular(self) -> bool {
        self.0 == 2
    }

    /// k mod 4 residue class, 0 or 2.
    pub fn mod4(self) -> u32 {
        self.0 % 4
    }

    /// Decomposition k = 12N + s with s in {0, 4, 6, 8, 10, 14}, unique for
    /// even k >= 4. Residue 2 mod 12 maps to s = 14 with N reduced by one.
    pub fn decompose(self) -> Result<(u32, u32)> {
        if self.0 < 4 {
            return Err(Error::BadWeight {
                k: self.0 as i64,
                reason: "decomposition k = 12N + s needs k >= 4",
            });
        }
        let s = match self.0 % 12 {
            2 => 14,
            r => r,
        };
        Ok(((self.0 - s) / 12, s))
    }
}

/// 2k/B_k, the scale factor in E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n.
pub fn eisenstein_factor(k: Weight) -> BigRational {
    let b = bernoulli(k.k() as u64).expect("even weight");
    BigRational::from(BigInt::from(2 * k.k())) / b
}

/// epsilon_k(n) = (2k/B_k)·sigma_{k-1}(n), so that E_k = 1 - sum epsilon_k(n) q^n.
pub fn epsilon(k: Weight, n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::BadIndex { what: "epsilon requires n >= 1" });
    }
    Ok(eisenstein_factor(k) * BigRational::from(sigma(k.k() - 1, n)?))
}

/// Exact q-expansion of E_k through order n_max.
pub fn eisenstein_series(k: Weight, n_max: usize) -> RationalSeries {
    let factor = eisenstein_factor(k);
    let sig = sigma_table(k.k() - 1, n_max);
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(BigRational::from(BigInt::from(1)));
    for n in 1..=n_max {
        coeffs.push(-(&factor * BigRational::from(sig[n].clone())));
    }
    RationalSeries::new(coeffs)
}

/// Exact q-expansion of Θ(E_k) through order n_max.
pub fn theta_eisenstein_series(k: Weight, n_max: usize) -> RationalSeries {
    eisenstein_series(k, n_max).theta()
}

/// Outcome of one coefficientwise identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub order: usize,
    pub pass: bool,
    /// First coefficient index where the two sides differ, if any.
    pub first_mismatch: Option<usize>,
}

impl IdentityCheck {
    fn of(name: &'static str, lhs: &RationalSeries, rhs: &RationalSeries) -> IdentityCheck {
        let first_mismatch = lhs.first_mismatch(rhs);
        IdentityCheck {
            name,
            order: lhs.truncation_order().min(rhs.truncation_order()),
            pass: first_mismatch.is_none(),
            first_mismatch,
        }
    }
}

/// Report for the multiplicative and Θ identities.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub order: usize,
    pub checks: Vec<IdentityCheck>,
    pub all_pass: bool,
}

fn weight(k: u32) -> Weight {
    Weight::new(k).expect("fixed even weight")
}

/// Check E_8 = E_4^2, E_10 = E_4·E_6, E_14 = E_4^2·E_6 exactly through
/// the given order.
pub fn verify_identities(n_max: usize) -> IdentityReport {
    let e4 = eisenstein_series(weight(4), n_max);
    let e6 = eisenstein_series(weight(6), n_max);
    let e8 = eisenstein_series(weight(8), n_max);
    let e10 = eisenstein_series(weight(10), n_max);
    let e14 = eisenstein_series(weight(14), n_max);
    let e4_sq = e4.power(2);
    let checks = vec![
        IdentityCheck::of("E8 = E4^2", &e8, &e4_sq),
        IdentityCheck::of("E10 = E4*E6", &e10, &e4.multiply(&e6)),
        IdentityCheck::of("E14 = E4^2*E6", &e14, &e4_sq.multiply(&e6)),
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    IdentityReport { order: n_max, checks, all_pass }
}

/// Check Θ(E_4) = (E_4·E_2 - E_6)/3 and Θ(E_6) = (E_6·E_2 - E_8)/2 exactly.
pub fn verify_theta_identities(n_max: usize) -> IdentityReport {
    let e2 = eisenstein_series(weight(2), n_max);
    let e4 = eisenstein_series(weight(4), n_max);
    let e6 = eisenstein_series(weight(6), n_max);
    let e8 = eisenstein_series(weight(8), n_max);
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let rhs4 = e4.multiply(&e2).sub(&e6).scale(&third);
    let rhs6 = e6.multiply(&e2).sub(&e8).scale(&half);
    let checks = vec![
        IdentityCheck::of("theta(E4) = (E4*E2 - E6)/3", &e4.theta(), &rhs4),
        IdentityCheck::of("theta(E6) = (E6*E2 - E8)/2", &e6.theta(), &rhs6),
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    IdentityReport { order: n_max, checks, all_pass }
}

/// Sign of the nonconstant coefficients of E_k: +1 for k ≡ 0 (mod 4)
/// (where B_k < 0), -1 for k ≡ 2 (mod 4).
pub fn coefficient_sign(k: Weight) -> i8 {
    if k.mod4() == 0 {
        1
    } else {
        -1
    }
}
