//! Zeros of E_k on the unit-circle boundary arc of the fundamental domain.
//!
//! All zeros of E_k lie on |z| = 1 inside the fundamental domain. The
//! restriction θ ↦ e^{ikθ/2} E_k(e^{iθ}) is real-valued for θ in
//! [π/2, 2π/3], so interior zeros are bracketed by certified sign changes
//! on that arc and then enclosed by bisection. The corner zeros at i and ρ
//! are pinned by the weight census (k = 12N + s) rather than searched:
//! double zeros produce no sign change, and the corners are exact.
//!
//! Search runs on the Re(z) <= 0 half of the arc; results are reported
//! reflected into the fundamental domain via z ↦ -conj(z), so records
//! carry 0 <= Re(z) <= 1/2 and arg(z) in [π/3, π/2].

use serde::Serialize;

use crate::analytic::{SeriesEvaluator, SeriesKind};
use crate::bigfloat::{exp, pi, sincos, BigComplex, BigReal, ErrMag};
use crate::eisenstein::Weight;
use crate::error::{Error, Result};
use crate::format::bigreal_to_decimal;

/// A zero of E_k on the arc, in fundamental-domain coordinates.
#[derive(Debug, Clone)]
pub struct ZeroRecord {
    pub k: u32,
    /// arg(z) in radians, in [π/3, π/2].
    pub theta: BigReal,
    pub x: BigReal,
    pub y: BigReal,
    pub multiplicity: u8,
    /// q = e^{2πiz}.
    pub q_point: BigComplex,
    /// Θ(E_k) evaluated at q.
    pub theta_ek_at_q: BigComplex,
}

/// JSON form of a ZeroRecord with decimal-string fields.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroRecordJson {
    pub k: u32,
    pub theta: String,
    pub x: String,
    pub y: String,
    pub multiplicity: u8,
    pub q_re: String,
    pub q_im: String,
    pub theta_ek_re: String,
    pub theta_ek_im: String,
}

impl ZeroRecord {
    pub fn to_json(&self, digits: u32) -> ZeroRecordJson {
        ZeroRecordJson {
            k: self.k,
            theta: bigreal_to_decimal(&self.theta, digits),
            x: bigreal_to_decimal(&self.x, digits),
            y: bigreal_to_decimal(&self.y, digits),
            multiplicity: self.multiplicity,
            q_re: bigreal_to_decimal(&self.q_point.re, digits),
            q_im: bigreal_to_decimal(&self.q_point.im, digits),
            theta_ek_re: bigreal_to_decimal(&self.theta_ek_at_q.re, digits),
            theta_ek_im: bigreal_to_decimal(&self.theta_ek_at_q.im, digits),
        }
    }
}

/// Expected arc-zero structure for even k >= 4: interior count N and the
/// multiplicities at i and ρ, from k = 12N + s.
pub fn census_counts(k: Weight) -> Result<(u32, u8, u8)> {
    let (n, s) = k.decompose()?;
    let (mult_i, mult_rho) = match s {
        0 => (0, 0),
        4 => (0, 1),
        6 => (1, 0),
        8 => (0, 2),
        10 => (1, 1),
        14 => (1, 2),
        _ => unreachable!("decompose returns s in the allowed set"),
    };
    Ok((n, mult_i, mult_rho))
}

/// Shared per-weight evaluation state for arc work at a fixed precision.
///
/// Internal evaluation runs 64 bits above the requested precision so that
/// signs remain certifiable down to enclosure widths of 2^-prec.
pub struct ArcContext {
    k: Weight,
    prec: u32,
    work: u32,
    pi: BigReal,
    evaluator: SeriesEvaluator,
}

impl ArcContext {
    pub fn new(k: Weight, prec: u32) -> Result<ArcContext> {
        if k.k() < 4 {
            return Err(Error::BadWeight {
                k: k.k() as i64,
                reason: "zero location requires k >= 4",
            });
        }
        let work = prec + 64;
        let p = pi(work + 32);
        // sup of |q| on the arc is e^{-π√3}, attained at the corner ρ;
        // build with a factor-2 cushion
        let sqrt3 = BigReal::from_int(3, work + 32).sqrt()?;
        let q_sup = exp(&p.mul(&sqrt3).neg())?.mag_upper().scale_pow2(1);
        let evaluator = SeriesEvaluator::build(
            k,
            SeriesKind::E,
            q_sup,
            ErrMag::pow2(-(work as i64) - 16),
            work,
        )?;
        Ok(ArcContext { k, prec, work, pi: p.with_prec(work), evaluator })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn pi_value(&self) -> &BigReal {
        &self.pi
    }

    /// q(θ) = e^{2πi e^{iθ}} on the search arc, as (q, sin θ, cos θ).
    fn q_of_theta(&self, theta: &BigReal) -> Result<(BigComplex, BigReal, BigReal)> {
        let (sin_t, cos_t) = sincos(theta)?;
        let two_pi = self.pi.mul_pow2(1);
        let radius = exp(&two_pi.mul(&sin_t).neg())?;
        let (sin_a, cos_a) = sincos(&two_pi.mul(&cos_t))?;
        let q = BigComplex::new(radius.mul(&cos_a), radius.mul(&sin_a));
        Ok((q, sin_t, cos_t))
    }

    /// Real and imaginary part of e^{ikθ/2} E_k(e^{iθ}); the imaginary part
    /// must vanish within its error bound on the arc.
    pub fn value(&self, theta: &BigReal) -> Result<(BigReal, BigReal)> {
        let (q, _, _) = self.q_of_theta(theta)?;
        let e = self.evaluator.eval(&q)?;
        let half_arg = theta.mul_int(self.k.k() as i64).mul_pow2(-1);
        let (sin_p, cos_p) = sincos(&half_arg)?;
        let f = BigComplex::new(cos_p, sin_p).mul(&e);
        Ok((f.re, f.im))
    }

    fn sign_at(&self, theta: &BigReal) -> Result<Option<i8>> {
        Ok(self.value(theta)?.0.sign_certain())
    }
}

/// Real-valued arc restriction Re(e^{ikθ/2} E_k(e^{iθ})) at a single θ in
/// [π/2, 2π/3], together with the (vanishing) imaginary part.
pub fn arc_function(k: Weight, theta: &BigReal, prec: u32) -> Result<(BigReal, BigReal)> {
    ArcContext::new(k, prec)?.value(theta)
}

struct Bracket {
    lo: BigReal,
    hi: BigReal,
    sign_lo: i8,
}

/// Scan the open arc with a midpoint grid and collect certified
/// sign-change brackets. Doubles the grid until the census count is met.
fn scan_interior(ctx: &ArcContext, expected: u32, scan_prec: u32) -> Result<Vec<Bracket>> {
    if expected == 0 {
        return Ok(Vec::new());
    }
    let mut m = 64usize.max(8 * ctx.k.k() as usize);
    for _ in 0..6 {
        let p = pi(scan_prec);
        let lo_end = p.mul_pow2(-1); // π/2
        let span = p.div_int(6); // 2π/3 - π/2 = π/6
        let mut brackets = Vec::new();
        let mut prev: Option<(BigReal, i8)> = None;
        for j in 0..m {
            let frac = BigReal::from_int(2 * j as i64 + 1, scan_prec).div_int(2 * m as u64);
            // exact dyadic sample angle; certified signs at exact points
            // carry the bracket property on their own
            let theta = lo_end.add(&span.mul(&frac)).strip_err();
            let sign = match ctx.sign_at(&theta)? {
                Some(s) if s != 0 => s,
                _ => continue, // undecidable or exactly-zero sample: skip
            };
            if let Some((prev_theta, prev_sign)) = &prev {
                if *prev_sign != sign {
                    brackets.push(Bracket {
                        lo: prev_theta.clone(),
                        hi: theta.clone(),
                        sign_lo: *prev_sign,
                    });
                }
            }
            prev = Some((theta, sign));
        }
        if brackets.len() as u32 == expected {
            return Ok(brackets);
        }
        if brackets.len() as u32 > expected {
            return Err(Error::Integrity(format!(
                "weight {}: found {} interior sign changes, census allows {}",
                ctx.k.k(),
                brackets.len(),
                expected
            )));
        }
        m *= 2;
    }
    Err(Error::Integrity(format!(
        "weight {}: census count {} not reached after maximal grid refinement",
        ctx.k.k(),
        expected
    )))
}

/// Shrink a bracket to width below 2^-width_bits by certified bisection.
fn bisect(ctx: &ArcContext, bracket: Bracket, width_bits: i64) -> Result<(BigReal, BigReal)> {
    // midpoints must stay representable well below the target width
    let mut lo = bracket.lo.with_prec(ctx.work).strip_err();
    let mut hi = bracket.hi.with_prec(ctx.work).strip_err();
    let sign_lo = bracket.sign_lo;
    let width_target = ErrMag::pow2(-width_bits);
    loop {
        let width = hi.sub(&lo);
        if width.value_mag_upper().cmp_mag(&width_target) != std::cmp::Ordering::Greater {
            return Ok((lo, hi));
        }
        // midpoint first, then asymmetric probes if the sign is undecidable
        let mut placed = false;
        for (num, den) in [(1i64, 2u64), (7, 16), (9, 16)] {
            let mid = lo.add(&width.mul_int(num).div_int(den)).strip_err();
            match ctx.sign_at(&mid)? {
                Some(s) if s == sign_lo => {
                    lo = mid;
                    placed = true;
                    break;
                }
                Some(s) if s == -sign_lo => {
                    hi = mid;
                    placed = true;
                    break;
                }
                _ => continue,
            }
        }
        if !placed {
            return Err(Error::Precision(format!(
                "bisection stalled at width 2^{:.0}; raise the working precision",
                width.value_mag_upper().log2_approx()
            )));
        }
    }
}

/// Certify that the enclosed crossing is simple: the secant slope over the
/// final enclosure is bounded away from zero.
fn certify_simple(ctx: &ArcContext, lo: &BigReal, hi: &BigReal) -> Result<()> {
    let f_lo = ctx.value(lo)?.0;
    let f_hi = ctx.value(hi)?.0;
    let slope = f_hi.sub(&f_lo).div(&hi.sub(lo))?;
    if slope.sign_certain().is_none() {
        return Err(Error::Precision(
            "could not certify a nonzero slope at the enclosed zero".into(),
        ));
    }
    Ok(())
}

impl ArcContext {
    /// Build the fundamental-domain record for a search-arc angle θ* given
    /// as an enclosure midpoint whose radius is folded into its err.
    fn record_from_search_theta(
        &self,
        theta_search: &BigReal,
        multiplicity: u8,
    ) -> Result<ZeroRecord> {
        let (q_search, sin_t, cos_t) = self.q_of_theta(theta_search)?;
        // reflection z -> -conj(z): x = -cos θ*, y = sin θ*, q -> conj(q)
        let x = cos_t.neg();
        let y = sin_t;
        let q_point = q_search.conj();
        let theta_f = self.pi.sub(theta_search);
        let theta_ek = SeriesEvaluator::build(
            self.k,
            SeriesKind::ThetaE,
            q_point.mag_upper().scale_pow2(1),
            ErrMag::pow2(-(self.work as i64) - 16),
            self.work,
        )?
        .eval(&q_point)?;
        Ok(ZeroRecord {
            k: self.k.k(),
            theta: theta_f,
            x,
            y,
            multiplicity,
            q_point,
            theta_ek_at_q: theta_ek,
        })
    }

    /// Record for the corner z = i (θ_F = π/2).
    fn record_at_i(&self) -> Result<ZeroRecord> {
        self.corner_record(self.pi.mul_pow2(-1), 1, true)
    }

    /// Record for the corner z = ρ (θ_F = π/3).
    fn record_at_rho(&self, multiplicity: u8) -> Result<ZeroRecord> {
        self.corner_record(self.pi.div_int(3), multiplicity, false)
    }

    fn corner_record(&self, theta_f: BigReal, multiplicity: u8, at_i: bool) -> Result<ZeroRecord> {
        let prec = self.work;
        let (x, y, q_point) = if at_i {
            let q = crate::analytic::special_point(crate::analytic::SpecialPoint::Qi, prec);
            (BigReal::zero(prec), BigReal::from_int(1, prec), q)
        } else {
            let q = crate::analytic::special_point(crate::analytic::SpecialPoint::Qrho, prec);
            let half = BigReal::from_int(1, prec).mul_pow2(-1);
            let y = BigReal::from_int(3, prec).sqrt()?.mul_pow2(-1);
            (half, y, q)
        };
        // confirm the zero numerically
        let e_val = self.evaluator.eval(&q_point)?;
        if e_val.re.sign_certain().is_some_and(|s| s != 0)
            || e_val.im.sign_certain().is_some_and(|s| s != 0)
        {
            return Err(Error::Integrity(format!(
                "E_{} does not vanish at the census corner",
                self.k.k()
            )));
        }
        let theta_ek = SeriesEvaluator::build(
            self.k,
            SeriesKind::ThetaE,
            q_point.mag_upper().scale_pow2(1),
            ErrMag::pow2(-(prec as i64) - 16),
            prec,
        )?
        .eval(&q_point)?;
        Ok(ZeroRecord {
            k: self.k.k(),
            theta: theta_f,
            x,
            y,
            multiplicity,
            q_point,
            theta_ek_at_q: theta_ek,
        })
    }
}

fn enclosure_midpoint(lo: &BigReal, hi: &BigReal) -> BigReal {
    let mid = lo.add(hi).mul_pow2(-1);
    let radius = hi.sub(lo).mul_pow2(-1);
    mid.add_err(radius.mag_upper())
}

/// Locate all zeros of E_k on the closed arc, with certified enclosures
/// for the interior ones and census-pinned corner records. Results are
/// ordered by decreasing imaginary part.
pub fn find_arc_zeros(k: Weight, prec: u32) -> Result<Vec<ZeroRecord>> {
    let (n_int, mult_i, mult_rho) = census_counts(k)?;
    let ctx = ArcContext::new(k, prec)?;
    let scan_prec = 128.min(prec);
    let brackets = scan_interior(&ctx, n_int, scan_prec)?;
    let mut records = Vec::new();
    if mult_i > 0 {
        records.push(ctx.record_at_i()?);
    }
    for bracket in brackets {
        let (lo, hi) = bisect(&ctx, bracket, prec as i64)?;
        certify_simple(&ctx, &lo, &hi)?;
        let theta_star = enclosure_midpoint(&lo, &hi);
        records.push(ctx.record_from_search_theta(&theta_star, 1)?);
    }
    if mult_rho > 0 {
        records.push(ctx.record_at_rho(mult_rho)?);
    }
    Ok(records)
}

/// The zero of E_k with the largest imaginary part: i for k ≡ 2 (mod 4),
/// ρ for k = 4 and 8, otherwise the interior-arc zero closest to i.
pub fn largest_imag_zero(k: Weight, prec: u32) -> Result<ZeroRecord> {
    if k.k() < 4 {
        return Err(Error::BadWeight {
            k: k.k() as i64,
            reason: "zero location requires k >= 4",
        });
    }
    if k.mod4() == 2 {
        return ArcContext::new(k, prec)?.record_at_i();
    }
    if k.k() == 4 {
        return ArcContext::new(k, prec)?.record_at_rho(1);
    }
    if k.k() == 8 {
        return ArcContext::new(k, prec)?.record_at_rho(2);
    }
    let (n_int, _, _) = census_counts(k)?;
    debug_assert!(n_int >= 1);
    let ctx = ArcContext::new(k, prec)?;
    let scan_prec = 128.min(prec);
    let mut brackets = scan_interior(&ctx, n_int, scan_prec)?;
    // smallest search-θ zero has the largest imaginary part
    let bracket = brackets.remove(0);
    let (lo, hi) = bisect(&ctx, bracket, prec as i64)?;
    certify_simple(&ctx, &lo, &hi)?;
    let theta_star = enclosure_midpoint(&lo, &hi);
    ctx.record_from_search_theta(&theta_star, 1)
}

/// Result of the φ-interval membership check for z_k = e^{(1/2)πiφ}.
#[derive(Debug, Clone, Serialize)]
pub struct PhiReport {
    pub k: u32,
    pub n: u32,
    pub phi: String,
    pub lower_bound: String,
    pub pass: bool,
}

/// For k ≡ 0 (mod 4), k >= 12: certify φ = (2/π)·arg(z_k) ∈ ((N-1)/N, 1).
pub fn phi_interval_check(k: Weight, prec: u32) -> Result<PhiReport> {
    if k.k() < 12 || k.mod4() != 0 {
        return Err(Error::BadWeight {
            k: k.k() as i64,
            reason: "phi interval applies to k ≡ 0 (mod 4), k >= 12",
        });
    }
    let (n, _s) = k.decompose()?;
    let record = largest_imag_zero(k, prec)?;
    let phi = record.theta.mul_pow2(1).div(&pi(prec))?;
    let lower = BigReal::from_int(n as i64 - 1, prec).div(&BigReal::from_int(n as i64, prec))?;
    let one = BigReal::from_int(1, prec);
    let pass = phi.gt_certain(&lower) && phi.lt_certain(&one);
    Ok(PhiReport {
        k: k.k(),
        n,
        phi: bigreal_to_decimal(&phi, 12),
        lower_bound: format!("{}/{}", n - 1, n),
        pass,
    })
}
