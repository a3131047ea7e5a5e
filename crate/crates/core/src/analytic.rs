//! Certified evaluation of the E_k and Θ(E_k) q-expansions at points inside
//! the unit disc.
//!
//! The truncation order is chosen automatically from the divisor-sum bound
//! sigma_ell(n) < (ell/(ell-1)) n^ell, which turns the discarded tail into
//! an explicit geometric-style majorant. Working precision is raised until
//! the propagated rounding error also meets the requested target, so the
//! returned err is a genuine bound on the total evaluation error.

use num::rational::BigRational;
use num::traits::Signed;
use serde::{Deserialize, Serialize};

use crate::bigfloat::{exp, pi, rational_mag_upper, BigComplex, BigReal, ErrMag};
use crate::eisenstein::{eisenstein_factor, Weight};
use crate::error::{Error, Result};
use crate::format::parse_decimal;
use crate::qseries::sigma_table;

/// Which series to evaluate at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// E_k itself.
    E,
    /// Θ(E_k) = q·d/dq of E_k.
    ThetaE,
}

/// The two distinguished real q-points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialPoint {
    /// q_i = e^{-2π}, the image of z = i.
    Qi,
    /// q_ρ = -e^{-π√3}, the image of the corner ρ.
    Qrho,
}

/// Upper bound on the discarded tail |sum_{n>N} c_n q^n| where c_n is the
/// coefficient of E_k (ell = k-1) or Θ(E_k) (ell = k).
fn tail_bound(k: Weight, kind: SeriesKind, q_mag: ErrMag, n_trunc: usize) -> Option<ErrMag> {
    let factor = rational_mag_upper(&eisenstein_factor(k));
    let ell = match kind {
        SeriesKind::E => k.k() - 1,
        SeriesKind::ThetaE => k.k(),
    };
    let n1 = (n_trunc + 1) as f64;
    let n2 = (n_trunc + 2) as f64;
    // per-term growth ratio bound; require it to stay below 1/2
    let ratio = ErrMag::from_f64((n2 / n1).powi(ell as i32 + 1)).mul(q_mag);
    if ratio.cmp_mag(&ErrMag::pow2(-1)) == std::cmp::Ordering::Greater {
        return None;
    }
    // coefficient majorant at n = N+1
    let lead = if ell >= 2 {
        ErrMag::from_f64(ell as f64 / (ell as f64 - 1.0))
            .mul(ErrMag::from_f64(n1).powi(ell as u64))
    } else {
        // ell = 1 (E_2): sigma_1(n) <= (1 + ln n) n
        ErrMag::from_f64((1.0 + n1.ln()) * n1)
    };
    let tail = factor
        .mul(lead)
        .mul(q_mag.powi(n_trunc as u64 + 1))
        .scale_pow2(1); // geometric sum 1/(1 - ratio) <= 2
    Some(tail)
}

/// Reusable evaluator: fixed weight, series kind, truncation order, and
/// working precision. Horner evaluation for any |q| below the magnitude
/// the evaluator was built for.
pub struct SeriesEvaluator {
    k: Weight,
    kind: SeriesKind,
    coeffs: Vec<BigReal>,
    q_mag: ErrMag,
    tail: ErrMag,
    prec: u32,
}

impl SeriesEvaluator {
    /// Build an evaluator valid for all points with |q| <= q_mag, with the
    /// truncation tail below `tail_target`.
    pub fn build(
        k: Weight,
        kind: SeriesKind,
        q_mag: ErrMag,
        tail_target: ErrMag,
        prec: u32,
    ) -> Result<SeriesEvaluator> {
        if q_mag.cmp_mag(&ErrMag::pow2(0)) != std::cmp::Ordering::Less {
            return Err(Error::Divergence);
        }
        let mut n_trunc = 64usize;
        loop {
            if let Some(tail) = tail_bound(k, kind, q_mag, n_trunc) {
                if tail.cmp_mag(&tail_target) != std::cmp::Ordering::Greater {
                    break;
                }
            }
            n_trunc *= 2;
            if n_trunc > (1 << 22) {
                return Err(Error::Precision(
                    "truncation order exceeds limit; point too close to the unit circle".into(),
                ));
            }
        }
        let tail = tail_bound(k, kind, q_mag, n_trunc).expect("bound exists after search");
        let factor = eisenstein_factor(k);
        let sig = sigma_table(k.k() - 1, n_trunc);
        let mut coeffs = Vec::with_capacity(n_trunc + 1);
        coeffs.push(match kind {
            SeriesKind::E => BigReal::from_int(1, prec),
            SeriesKind::ThetaE => BigReal::zero(prec),
        });
        for n in 1..=n_trunc {
            let mut c = -(&factor * BigRational::from(sig[n].clone()));
            if kind == SeriesKind::ThetaE {
                c *= BigRational::from(num::BigInt::from(n));
            }
            coeffs.push(BigReal::from_rational(&c, prec));
        }
        Ok(SeriesEvaluator { k, kind, coeffs, q_mag, tail, prec })
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Evaluate at q; |q| must not exceed the magnitude given at build time.
    pub fn eval(&self, q: &BigComplex) -> Result<BigComplex> {
        if q.mag_upper().cmp_mag(&self.q_mag.scale_pow2(1)) == std::cmp::Ordering::Greater {
            return Err(Error::Precision(
                "evaluation point outside the evaluator's magnitude bound".into(),
            ));
        }
        let n = self.coeffs.len() - 1;
        let mut v = BigComplex::from_real(self.coeffs[n].clone());
        for idx in (0..n).rev() {
            v = v.mul(q);
            v.re = v.re.add(&self.coeffs[idx]);
        }
        v.re = v.re.add_err(self.tail);
        v.im = v.im.add_err(self.tail);
        Ok(v)
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn weight(&self) -> Weight {
        self.k
    }
}

fn target_bits(target: ErrMag) -> u32 {
    let b = -target.log2_approx();
    if b <= 0.0 {
        64
    } else {
        (b.ceil() as u32).max(64)
    }
}

/// Evaluate E_k or Θ(E_k) at q with total certified error at most `target`.
///
/// The truncation order and working precision are chosen automatically;
/// the call fails if |q| is not strictly inside the unit disc or if the
/// target cannot be met.
pub fn eval_series(
    k: Weight,
    kind: SeriesKind,
    q: &BigComplex,
    target: ErrMag,
) -> Result<BigComplex> {
    if target.is_zero() {
        return Err(Error::Precision("target error must be positive".into()));
    }
    let q_mag = q.mag_upper();
    if q_mag.cmp_mag(&ErrMag::pow2(0)) != std::cmp::Ordering::Less {
        return Err(Error::Divergence);
    }
    let mut prec = target_bits(target) + 64;
    for _ in 0..4 {
        let eval = SeriesEvaluator::build(k, kind, q_mag, target.scale_pow2(-2), prec)?;
        let q_p = BigComplex::new(q.re.clone().with_prec(prec), q.im.clone().with_prec(prec));
        let v = eval.eval(&q_p)?;
        let total = v.re.err().add(v.im.err());
        if total.cmp_mag(&target) != std::cmp::Ordering::Greater {
            return Ok(v);
        }
        prec += prec / 2 + 64;
    }
    Err(Error::Precision(format!(
        "could not certify target error 2^{:.0} for weight-{} evaluation",
        target.log2_approx(),
        k.k()
    )))
}

/// Certified value of q_i = e^{-2π} or q_ρ = -e^{-π√3}.
pub fn special_point(which: SpecialPoint, prec: u32) -> BigComplex {
    let w = prec + 32;
    let p = pi(w);
    let v = match which {
        SpecialPoint::Qi => exp(&p.mul_int(-2)).expect("small argument"),
        SpecialPoint::Qrho => {
            let sqrt3 = BigReal::from_int(3, w).sqrt().expect("positive");
            exp(&p.mul(&sqrt3).neg()).expect("small argument").neg()
        }
    };
    BigComplex::from_real(v.with_prec(prec))
}

/// Θ(E_k) at a point together with the residue-style quotient q0/Θ(E_k)(q0).
pub struct ThetaAtPole {
    pub theta_value: BigComplex,
    pub residue: BigComplex,
}

/// Evaluate Θ(E_k)(q0) and the induced residue q0/Θ(E_k)(q0).
pub fn theta_at_pole(k: Weight, q0: &BigComplex, target: ErrMag) -> Result<ThetaAtPole> {
    let theta_value = eval_series(k, SeriesKind::ThetaE, q0, target)?;
    let residue = q0.div(&theta_value)?;
    Ok(ThetaAtPole { theta_value, residue })
}

/// Configuration for the analytic module: working precision and the
/// externally supplied Γ(1/4) constant with its stated error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticConfig {
    pub precision_bits: u32,
    pub gamma_quarter: String,
    pub gamma_quarter_err: String,
}

impl Default for AnalyticConfig {
    fn default() -> Self {
        AnalyticConfig {
            precision_bits: 192,
            gamma_quarter:
                "3.62560990822190831193068515586767200299516768288006546743337799956991924353872912161836013672338430036147175"
                    .into(),
            gamma_quarter_err: "1e-100".into(),
        }
    }
}

impl AnalyticConfig {
    pub fn from_json(text: &str) -> Result<AnalyticConfig> {
        let cfg: AnalyticConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.precision_bits < 64 {
            return Err(Error::Config("precision_bits must be at least 64".into()));
        }
        Ok(cfg)
    }

    /// The Γ(1/4) constant as a certified value at the given precision.
    pub fn gamma_quarter_value(&self, prec: u32) -> Result<BigReal> {
        let v = parse_decimal(&self.gamma_quarter, prec)?;
        let declared = parse_decimal(&self.gamma_quarter_err, 64)?;
        if declared.mant().is_negative() {
            return Err(Error::Config("gamma_quarter_err must be nonnegative".into()));
        }
        Ok(v.add_err(declared.mag_upper()))
    }
}

/// Comparison of the series value E_4(q_i) against 3·Γ(1/4)^8/(2π)^6.
#[derive(Debug, Clone, Serialize)]
pub struct GammaQuarterReport {
    pub precision_bits: u32,
    pub series_value: String,
    pub gamma_formula_value: String,
    /// Certified decimal digits of agreement.
    pub agree_digits: i64,
}

/// Compare eval_series(4, E, q_i) with 3Γ(1/4)^8/(2π)^6 at the requested
/// precision, reporting the certified number of agreeing decimal digits.
pub fn gamma_quarter_check(config: &AnalyticConfig, prec: u32) -> Result<GammaQuarterReport> {
    let w = prec + 32;
    let qi = special_point(SpecialPoint::Qi, w);
    let series = eval_series(Weight::new(4)?, SeriesKind::E, &qi, ErrMag::pow2(-(w as i64)))?;
    let gamma = config.gamma_quarter_value(w)?;
    let two_pi = pi(w).mul_pow2(1);
    let formula = gamma.powi(8).mul_int(3).div(&two_pi.powi(6))?;
    let diff = series.re.sub(&formula);
    let gap = diff.mag_upper();
    let agree_digits = if gap.is_zero() {
        i64::MAX
    } else {
        (-(gap.log2_approx() * std::f64::consts::LOG10_2)).floor() as i64
    };
    Ok(GammaQuarterReport {
        precision_bits: prec,
        series_value: crate::format::bigreal_to_decimal(&series.re, 40),
        gamma_formula_value: crate::format::bigreal_to_decimal(&formula, 40),
        agree_digits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(k: u32) -> Weight {
        Weight::new(k).unwrap()
    }

    fn zeroish(x: &BigReal) -> bool {
        matches!(x.sign_certain(), None | Some(0))
    }

    #[test]
    fn constant_term_at_zero() {
        let q = BigComplex::zero(128);
        let v = eval_series(w(4), SeriesKind::E, &q, ErrMag::pow2(-100)).unwrap();
        assert!(zeroish(&v.re.sub(&BigReal::from_int(1, 128))));
        let t = eval_series(w(4), SeriesKind::ThetaE, &q, ErrMag::pow2(-100)).unwrap();
        assert!(zeroish(&t.re));
    }

    #[test]
    fn rejects_points_outside_disc() {
        let q = BigComplex::from_real(BigReal::from_int(1, 64));
        assert!(matches!(
            eval_series(w(4), SeriesKind::E, &q, ErrMag::pow2(-30)),
            Err(Error::Divergence)
        ));
    }

    #[test]
    fn special_point_values() {
        let qi = special_point(SpecialPoint::Qi, 128);
        // e^{-2 pi} = 1.86744e-3 to six significant digits
        let s = crate::format::bigreal_to_decimal(&qi.re, 6);
        assert_eq!(s, "0.00186744");
        let qrho = special_point(SpecialPoint::Qrho, 128);
        let s = crate::format::bigreal_to_decimal(&qrho.re, 6);
        assert_eq!(s, "-0.00433342");
        // |q_rho| = e^{-pi sqrt 3} exceeds q_i = e^{-2 pi} since pi sqrt3 < 2 pi
        assert!(qrho.re.neg().gt_certain(&qi.re));
    }

    #[test]
    fn eisenstein_zero_confirmation_at_special_points() {
        // E_6(q_i) = 0 and E_4(q_rho) = 0, within the certified error
        let target = ErrMag::pow2(-120);
        let qi = special_point(SpecialPoint::Qi, 192);
        let v6 = eval_series(w(6), SeriesKind::E, &qi, target).unwrap();
        assert!(zeroish(&v6.re), "E_6(q_i) = {}", v6.re.to_f64());
        let qrho = special_point(SpecialPoint::Qrho, 192);
        let v4 = eval_series(w(4), SeriesKind::E, &qrho, target).unwrap();
        assert!(zeroish(&v4.re), "E_4(q_rho) = {}", v4.re.to_f64());
        // the requested target is honored by the reported bound
        assert!(v6.re.err().log2_approx() <= -100.0);
    }

    #[test]
    fn e4_at_qi_reference_digits() {
        // first 28 digits of E_4(q_i)
        let qi = special_point(SpecialPoint::Qi, 256);
        let v = eval_series(w(4), SeriesKind::E, &qi, ErrMag::pow2(-150)).unwrap();
        let s = crate::format::bigreal_to_decimal(&v.re, 28);
        assert_eq!(s, "1.455762892268709322462422004");
    }

    #[test]
    fn tail_certification_against_larger_truncation() {
        // re-evaluating with a deeper truncation moves the value by less
        // than the reported error bound
        let prec = 160;
        let qi = special_point(SpecialPoint::Qi, prec);
        for kind in [SeriesKind::E, SeriesKind::ThetaE] {
            let e1 = SeriesEvaluator::build(w(6), kind, qi.mag_upper(), ErrMag::pow2(-140), prec)
                .unwrap();
            let n2 = e1.truncation_order() + 50;
            let factor = eisenstein_factor(w(6));
            let sig = sigma_table(5, n2);
            // direct deeper sum
            let mut acc = BigComplex::from_real(match kind {
                SeriesKind::E => BigReal::from_int(1, prec),
                SeriesKind::ThetaE => BigReal::zero(prec),
            });
            let mut qn = BigComplex::from_real(BigReal::from_int(1, prec));
            for n in 1..=n2 {
                qn = qn.mul(&qi);
                let mut c = -(&factor * BigRational::from(sig[n].clone()));
                if kind == SeriesKind::ThetaE {
                    c *= BigRational::from(num::BigInt::from(n));
                }
                acc = acc.add(&qn.mul_real(&BigReal::from_rational(&c, prec)));
            }
            let v1 = e1.eval(&qi).unwrap();
            let diff = v1.re.sub(&acc.re).abs();
            assert!(
                diff.value_mag_upper().cmp_mag(&v1.re.err()) != std::cmp::Ordering::Greater
                    || diff.sign_certain().is_none(),
                "tail bound violated for {kind:?}"
            );
        }
    }

    #[test]
    fn theta_consistency_between_routes() {
        // theta_at_pole agrees with the identity route (E_k·E_2 - E_{k+2})·(k/12)
        // for k = 4, 6
        let target = ErrMag::pow2(-130);
        let prec = 192;
        for (k, kp2) in [(4u32, 6u32), (6, 8)] {
            let q = special_point(SpecialPoint::Qi, prec);
            let direct = theta_at_pole(w(k), &q, target).unwrap().theta_value;
            let e_k = eval_series(w(k), SeriesKind::E, &q, target).unwrap();
            let e_2 = eval_series(w(2), SeriesKind::E, &q, target).unwrap();
            let e_kp2 = eval_series(w(kp2), SeriesKind::E, &q, target).unwrap();
            let route = e_k.mul(&e_2).sub(&e_kp2).mul_real(&BigReal::from_rational(
                &BigRational::new(k.into(), 12.into()),
                prec,
            ));
            assert!(zeroish(&direct.re.sub(&route.re)), "k={k}");
            assert!(zeroish(&direct.im.sub(&route.im)), "k={k}");
        }
    }

    #[test]
    fn theta_pole_identities() {
        let target = ErrMag::pow2(-140);
        let prec = 220;
        let qi = special_point(SpecialPoint::Qi, prec);
        let qrho = special_point(SpecialPoint::Qrho, prec);
        let e4_qi = eval_series(w(4), SeriesKind::E, &qi, target).unwrap().re;
        // theta(E_6)(q_i) = -(1/2) E_4(q_i)^2
        let t6 = theta_at_pole(w(6), &qi, target).unwrap().theta_value.re;
        assert!(zeroish(&t6.add(&e4_qi.powi(2).mul_pow2(-1))));
        // theta(E_10)(q_i) = -(1/2) E_4(q_i)^3
        let t10 = theta_at_pole(w(10), &qi, target).unwrap().theta_value.re;
        assert!(zeroish(&t10.add(&e4_qi.powi(3).mul_pow2(-1))));
        // theta(E_4)(q_rho) = -E_6(q_rho)/3
        let t4 = theta_at_pole(w(4), &qrho, target).unwrap().theta_value.re;
        let e6_qrho = eval_series(w(6), SeriesKind::E, &qrho, target).unwrap().re;
        let third = BigReal::from_int(1, prec).div(&BigReal::from_int(3, prec)).unwrap();
        assert!(zeroish(&t4.add(&e6_qrho.mul(&third))));
        // theta(E_6)(q_i) = -E_8(q_i)/2
        let e8_qi = eval_series(w(8), SeriesKind::E, &qi, target).unwrap().re;
        assert!(zeroish(&t6.add(&e8_qi.mul_pow2(-1))));
    }

    #[test]
    fn gamma_quarter_agreement_and_negative_control() {
        let config = AnalyticConfig::default();
        let report = gamma_quarter_check(&config, 100).unwrap();
        assert!(report.agree_digits >= 25, "digits = {}", report.agree_digits);
        let low = gamma_quarter_check(&config, 16).unwrap();
        assert!(low.agree_digits >= 2);

        // negative control: corrupt the 5th digit
        let mut bad = config.clone();
        bad.gamma_quarter = bad.gamma_quarter.replacen("3.6256", "3.6257", 1);
        let report = gamma_quarter_check(&bad, 100).unwrap();
        assert!(report.agree_digits < 5, "digits = {}", report.agree_digits);
    }

    #[test]
    fn config_parsing_and_validation() {
        let cfg = AnalyticConfig::from_json(
            r#"{"precision_bits": 128, "gamma_quarter": "3.0", "gamma_quarter_err": "1e-2"}"#,
        )
        .unwrap();
        assert_eq!(cfg.precision_bits, 128);
        assert!(AnalyticConfig::from_json(
            r#"{"precision_bits": 32, "gamma_quarter": "3", "gamma_quarter_err": "0"}"#
        )
        .is_err());
        assert!(AnalyticConfig::from_json("not json").is_err());
    }
}
