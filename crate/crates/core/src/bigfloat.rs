//! Arbitrary-precision real and complex values carrying certified absolute
//! error bounds.
//!
//! A [`BigReal`] stores an exactly-represented dyadic number `mant * 2^exp`
//! together with a machine-size upper bound `err` on the distance to the
//! mathematical value it stands for. Every operation propagates `err`
//! conservatively (always rounding the bound up), so a comparison or a sign
//! is only reported when the gap exceeds the combined bounds. This is
//! forward error propagation, not interval arithmetic: all quantities in
//! scope are well separated from the decision thresholds.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    debug_assert!(x > 0.0 && x.is_finite());
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    f64::from_bits(x.to_bits() - 1)
}

/// Nonnegative magnitude `mant * 2^exp2` with a wide exponent range,
/// used for error bounds and coarse magnitude estimates. `mant` is kept
/// in [1, 2) unless the magnitude is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrMag {
    mant: f64,
    exp2: i64,
}

impl ErrMag {
    pub const ZERO: ErrMag = ErrMag { mant: 0.0, exp2: 0 };

    pub fn pow2(exp2: i64) -> ErrMag {
        ErrMag { mant: 1.0, exp2 }
    }

    fn normalized(mut mant: f64, mut exp2: i64) -> ErrMag {
        if mant == 0.0 {
            return ErrMag::ZERO;
        }
        debug_assert!(mant > 0.0 && mant.is_finite());
        while mant >= 2.0 {
            mant /= 2.0;
            exp2 += 1;
        }
        while mant < 1.0 {
            mant *= 2.0;
            exp2 -= 1;
        }
        ErrMag { mant, exp2 }
    }

    /// Upper bound on |x| as an ErrMag.
    pub fn from_f64(x: f64) -> ErrMag {
        let a = x.abs();
        if a == 0.0 {
            return ErrMag::ZERO;
        }
        assert!(a.is_finite(), "ErrMag::from_f64 needs a finite value");
        let bits = a.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        if raw_exp == 0 {
            // subnormal: conservative upper bound
            return ErrMag::pow2(-1021);
        }
        let mant = f64::from_bits((bits & ((1u64 << 52) - 1)) | (1023u64 << 52));
        ErrMag::normalized(next_up(mant), raw_exp - 1023)
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    fn bump(self) -> ErrMag {
        if self.is_zero() {
            self
        } else {
            ErrMag::normalized(next_up(next_up(self.mant)), self.exp2)
        }
    }

    pub fn add(self, other: ErrMag) -> ErrMag {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if (self.exp2, self.mant) >= (other.exp2, other.mant) {
            (self, other)
        } else {
            (other, self)
        };
        let gap = hi.exp2 - lo.exp2;
        if gap > 80 {
            return hi.bump();
        }
        ErrMag::normalized(hi.mant + lo.mant / (gap as f64).exp2(), hi.exp2).bump()
    }

    pub fn mul(self, other: ErrMag) -> ErrMag {
        if self.is_zero() || other.is_zero() {
            return ErrMag::ZERO;
        }
        let exp2 = self
            .exp2
            .checked_add(other.exp2)
            .expect("ErrMag exponent overflow");
        ErrMag::normalized(self.mant * other.mant, exp2).bump()
    }

    pub fn max(self, other: ErrMag) -> ErrMag {
        if self.cmp_mag(&other) == std::cmp::Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn scale_pow2(self, e: i64) -> ErrMag {
        if self.is_zero() {
            self
        } else {
            ErrMag { mant: self.mant, exp2: self.exp2 + e }
        }
    }

    /// Upper bound on 1/x given a lower bound x on the true magnitude.
    pub fn recip_of_lower(lower: ErrMag) -> ErrMag {
        assert!(!lower.is_zero(), "reciprocal of zero magnitude");
        ErrMag::normalized(next_up(1.0 / next_down(lower.mant)), -lower.exp2).bump()
    }

    /// Lower bound on sqrt(x) given a lower bound x.
    fn sqrt_lower(self) -> ErrMag {
        if self.is_zero() {
            return ErrMag::ZERO;
        }
        let (m, e) = if self.exp2 % 2 == 0 {
            (self.mant, self.exp2)
        } else {
            (self.mant / 2.0, self.exp2 + 1)
        };
        ErrMag::normalized(next_down(next_down(m.sqrt())), e / 2)
    }

    pub fn cmp_mag(&self, other: &ErrMag) -> std::cmp::Ordering {
        if self.is_zero() || other.is_zero() {
            return self
                .mant
                .partial_cmp(&other.mant)
                .expect("finite mantissas");
        }
        (self.exp2, self.mant)
            .partial_cmp(&(other.exp2, other.mant))
            .expect("finite mantissas")
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.exp2 > 1023 {
            return f64::INFINITY;
        }
        if self.exp2 < -1020 {
            return 0.0;
        }
        self.mant * (self.exp2 as f64).exp2()
    }

    /// log2 of the magnitude, approximately; -inf for zero.
    pub fn log2_approx(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.exp2 as f64 + self.mant.log2()
        }
    }

    /// Upper bound on self^n by binary exponentiation.
    pub fn powi(self, n: u64) -> ErrMag {
        let mut result = ErrMag::pow2(0);
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        result
    }
}

/// Upper bound on |r| for a big rational.
pub fn rational_mag_upper(r: &BigRational) -> ErrMag {
    if r.is_zero() {
        return ErrMag::ZERO;
    }
    dyadic_mag_upper(r.numer(), 0).mul(ErrMag::recip_of_lower(dyadic_mag_lower(r.denom(), 0)))
}

fn bigint_bits(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// Upper bound on |mant·2^exp| as an ErrMag.
fn dyadic_mag_upper(mant: &BigInt, exp: i64) -> ErrMag {
    if mant.is_zero() {
        return ErrMag::ZERO;
    }
    let bits = bigint_bits(mant);
    let top = if bits <= 53 {
        mant.abs().to_f64().expect("small magnitude") // exact
    } else {
        let reduced: BigInt = mant.abs() >> (bits - 53) as u64;
        next_up(next_up(reduced.to_f64().expect("53-bit value") + 1.0))
    };
    let shift = if bits <= 53 { 0 } else { bits - 53 };
    ErrMag::normalized(top, 0).scale_pow2(exp + shift).bump()
}

/// Lower bound on |mant·2^exp| as an ErrMag (zero mantissa gives zero).
fn dyadic_mag_lower(mant: &BigInt, exp: i64) -> ErrMag {
    if mant.is_zero() {
        return ErrMag::ZERO;
    }
    let bits = bigint_bits(mant);
    let (top, shift) = if bits <= 53 {
        (mant.abs().to_f64().expect("small magnitude"), 0)
    } else {
        let reduced: BigInt = mant.abs() >> (bits - 53) as u64;
        (reduced.to_f64().expect("53-bit value"), bits - 53)
    };
    let m = ErrMag::normalized(next_down(next_down(top)), 0);
    m.scale_pow2(exp + shift)
}

/// Arbitrary-precision real number: exact dyadic value plus certified
/// absolute error bound and a working precision in bits.
#[derive(Debug, Clone)]
pub struct BigReal {
    mant: BigInt,
    exp: i64,
    prec: u32,
    err: ErrMag,
}

impl BigReal {
    pub fn zero(prec: u32) -> BigReal {
        BigReal { mant: BigInt::zero(), exp: 0, prec, err: ErrMag::ZERO }
    }

    pub fn from_int(v: i64, prec: u32) -> BigReal {
        BigReal { mant: BigInt::from(v), exp: 0, prec, err: ErrMag::ZERO }.rounded()
    }

    pub fn from_bigint(v: BigInt, prec: u32) -> BigReal {
        BigReal { mant: v, exp: 0, prec, err: ErrMag::ZERO }.rounded()
    }

    /// Exact conversion; f64 inputs are dyadic already.
    pub fn from_f64(v: f64, prec: u32) -> BigReal {
        assert!(v.is_finite());
        if v == 0.0 {
            return BigReal::zero(prec);
        }
        let bits = v.abs().to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        assert!(raw_exp != 0, "subnormal f64 input");
        let frac = bits & ((1u64 << 52) - 1);
        let mant_u = (1u64 << 52) | frac;
        let mant = if v < 0.0 {
            -BigInt::from(mant_u)
        } else {
            BigInt::from(mant_u)
        };
        BigReal { mant, exp: raw_exp - 1023 - 52, prec, err: ErrMag::ZERO }.rounded()
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> BigReal {
        if r.is_zero() {
            return BigReal::zero(prec);
        }
        let num = r.numer().clone();
        let den = r.denom().clone();
        let shift = (prec as i64 + 2 + bigint_bits(&den) - bigint_bits(&num)).max(0);
        let q = (num << shift as u64) / &den;
        let exp = -shift;
        BigReal { mant: q, exp, prec, err: ErrMag::pow2(exp) }.rounded()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn err(&self) -> ErrMag {
        self.err
    }

    pub fn with_err(mut self, err: ErrMag) -> BigReal {
        self.err = err;
        self
    }

    pub fn add_err(mut self, extra: ErrMag) -> BigReal {
        self.err = self.err.add(extra);
        self
    }

    /// Reinterpret the stored dyadic number as the exact quantity of
    /// interest, discarding the error bound. Used when a value serves as
    /// an exact sample point (e.g. a bisection grid angle) rather than as
    /// an approximation of something else.
    pub fn strip_err(mut self) -> BigReal {
        self.err = ErrMag::ZERO;
        self
    }

    pub fn with_prec(mut self, prec: u32) -> BigReal {
        self.prec = prec;
        self.rounded()
    }

    fn rounded(mut self) -> BigReal {
        let bits = bigint_bits(&self.mant);
        if bits > self.prec as i64 {
            let shift = (bits - self.prec as i64) as u64;
            self.mant >>= shift; // floor shift: at most one ulp of the new lsb
            self.exp += shift as i64;
            self.err = self.err.add(ErrMag::pow2(self.exp));
        }
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        if let Some(tz) = self.mant.trailing_zeros() {
            if tz >= 64 {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
        }
        self
    }

    pub fn is_exact_zero(&self) -> bool {
        self.mant.is_zero() && self.err.is_zero()
    }

    pub fn neg(&self) -> BigReal {
        BigReal { mant: -self.mant.clone(), exp: self.exp, prec: self.prec, err: self.err }
    }

    pub fn abs(&self) -> BigReal {
        BigReal { mant: self.mant.abs(), exp: self.exp, prec: self.prec, err: self.err }
    }

    /// Exact scaling by a power of two.
    pub fn mul_pow2(&self, e: i64) -> BigReal {
        BigReal {
            mant: self.mant.clone(),
            exp: self.exp + e,
            prec: self.prec,
            err: self.err.scale_pow2(e),
        }
    }

    /// Upper bound on the magnitude of the stored dyadic value.
    pub fn value_mag_upper(&self) -> ErrMag {
        dyadic_mag_upper(&self.mant, self.exp)
    }

    /// Lower bound on the magnitude of the stored dyadic value.
    pub fn value_mag_lower(&self) -> ErrMag {
        dyadic_mag_lower(&self.mant, self.exp)
    }

    /// Upper bound on the magnitude of the mathematical value.
    pub fn mag_upper(&self) -> ErrMag {
        self.value_mag_upper().add(self.err)
    }

    pub fn add(&self, other: &BigReal) -> BigReal {
        let prec = self.prec.min(other.prec);
        let err = self.err.add(other.err);
        if self.mant.is_zero() {
            return BigReal { mant: other.mant.clone(), exp: other.exp, prec, err }.rounded();
        }
        if other.mant.is_zero() {
            return BigReal { mant: self.mant.clone(), exp: self.exp, prec, err }.rounded();
        }
        // Drop an operand entirely below the other's rounding floor.
        let top_a = self.exp + bigint_bits(&self.mant);
        let top_b = other.exp + bigint_bits(&other.mant);
        let floor_gap = prec as i64 + 64;
        if top_a < other.exp - floor_gap {
            let err = err.add(self.value_mag_upper());
            return BigReal { mant: other.mant.clone(), exp: other.exp, prec, err }.rounded();
        }
        if top_b < self.exp - floor_gap {
            let err = err.add(other.value_mag_upper());
            return BigReal { mant: self.mant.clone(), exp: self.exp, prec, err }.rounded();
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        BigReal { mant: a + b, exp, prec, err }.rounded()
    }

    pub fn sub(&self, other: &BigReal) -> BigReal {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &BigReal) -> BigReal {
        let prec = self.prec.min(other.prec);
        let err = self
            .err
            .mul(dyadic_mag_upper(&other.mant, other.exp))
            .add(other.err.mul(dyadic_mag_upper(&self.mant, self.exp)))
            .add(self.err.mul(other.err));
        BigReal {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
            prec,
            err,
        }
        .rounded()
    }

    /// Multiply by an exact machine integer.
    pub fn mul_int(&self, c: i64) -> BigReal {
        BigReal {
            mant: &self.mant * BigInt::from(c),
            exp: self.exp,
            prec: self.prec,
            err: self.err.mul(ErrMag::from_f64(c as f64)),
        }
        .rounded()
    }

    /// Divide by an exact positive machine integer.
    pub fn div_int(&self, d: u64) -> BigReal {
        assert!(d > 0);
        let bits = bigint_bits(&self.mant);
        let shift = (self.prec as i64 + 32 - bits).max(0) as u64;
        let mant = (&self.mant << shift) / BigInt::from(d);
        let exp = self.exp - shift as i64;
        // existing error divided by d only shrinks; keep it as is
        BigReal { mant, exp, prec: self.prec, err: self.err.add(ErrMag::pow2(exp)) }.rounded()
    }

    /// Certified division; fails if the divisor is not certainly nonzero.
    pub fn div(&self, other: &BigReal) -> Result<BigReal> {
        let b_low = other.value_mag_lower();
        if b_low.cmp_mag(&other.err.scale_pow2(1)) != std::cmp::Ordering::Greater {
            return Err(Error::Precision(
                "division by a value not certainly nonzero".into(),
            ));
        }
        let prec = self.prec.min(other.prec);
        if self.mant.is_zero() {
            let err = self
                .err
                .mul(ErrMag::recip_of_lower(b_low))
                .scale_pow2(1);
            return Ok(BigReal { mant: BigInt::zero(), exp: 0, prec, err });
        }
        let shift =
            (prec as i64 + 2 + bigint_bits(&other.mant) - bigint_bits(&self.mant)).max(0) as u64;
        let mant = (&self.mant << shift) / &other.mant;
        let exp = self.exp - other.exp - shift as i64;
        let q_mag = dyadic_mag_upper(&mant, exp);
        // |a/b - q| <= (err_a + |q| err_b) / |b_true| with |b_true| >= b_low/2
        let err = self
            .err
            .add(q_mag.mul(other.err))
            .mul(ErrMag::recip_of_lower(b_low))
            .scale_pow2(1)
            .add(ErrMag::pow2(exp));
        Ok(BigReal { mant, exp, prec, err }.rounded())
    }

    /// Certified square root; the argument must be certainly positive.
    pub fn sqrt(&self) -> Result<BigReal> {
        let low = self.value_mag_lower();
        if self.mant.is_negative()
            || low.cmp_mag(&self.err.scale_pow2(1)) != std::cmp::Ordering::Greater
        {
            return Err(Error::Precision(
                "square root needs a certainly positive argument".into(),
            ));
        }
        let bits = bigint_bits(&self.mant);
        let mut shift = (2 * self.prec as i64 + 4 - bits).max(0);
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let m2: BigInt = &self.mant << shift as u64;
        let root = m2.sqrt();
        let exp = (self.exp - shift) / 2;
        // sqrt(x_true) lower bound: x_true >= low/2
        let s_low = low.scale_pow2(-1).sqrt_lower();
        let err = self
            .err
            .mul(ErrMag::recip_of_lower(s_low))
            .add(ErrMag::pow2(exp));
        Ok(BigReal { mant: root, exp, prec: self.prec, err }.rounded())
    }

    /// Sign with certainty: None when |value| does not exceed err.
    pub fn sign_certain(&self) -> Option<i8> {
        if self.mant.is_zero() {
            return if self.err.is_zero() { Some(0) } else { None };
        }
        if self.value_mag_lower().cmp_mag(&self.err) == std::cmp::Ordering::Greater {
            Some(if self.mant.is_negative() { -1 } else { 1 })
        } else {
            None
        }
    }

    /// True when self > other by more than the combined error bounds.
    pub fn gt_certain(&self, other: &BigReal) -> bool {
        self.sub(other).sign_certain() == Some(1)
    }

    /// True when self < other by more than the combined error bounds.
    pub fn lt_certain(&self, other: &BigReal) -> bool {
        self.sub(other).sign_certain() == Some(-1)
    }

    /// Nearest integer to the stored value.
    pub fn round_to_bigint(&self) -> BigInt {
        if self.exp >= 0 {
            return &self.mant << self.exp as u64;
        }
        let s = (-self.exp) as u64;
        let base: BigInt = &self.mant >> s;
        let frac = &self.mant - (&base << s);
        if frac << 1u8 >= BigInt::from(1) << s {
            base + 1
        } else {
            base
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = bigint_bits(&self.mant);
        let (top, shift) = if bits <= 53 {
            (self.mant.abs().to_f64().expect("small magnitude"), 0)
        } else {
            let reduced: BigInt = self.mant.abs() >> (bits - 53) as u64;
            (reduced.to_f64().expect("53-bit value"), bits - 53)
        };
        let e = self.exp + shift;
        let v = if e.unsigned_abs() > 1000 {
            if e > 0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            top * (e as f64).exp2()
        };
        if self.mant.is_negative() {
            -v
        } else {
            v
        }
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    /// Integer power by binary exponentiation.
    pub fn powi(&self, n: u64) -> BigReal {
        let mut result = BigReal::from_int(1, self.prec);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }
}

/// Complex value with certified componentwise error bounds.
#[derive(Debug, Clone)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> BigComplex {
        BigComplex { re, im }
    }

    pub fn zero(prec: u32) -> BigComplex {
        BigComplex { re: BigReal::zero(prec), im: BigReal::zero(prec) }
    }

    pub fn from_real(re: BigReal) -> BigComplex {
        let prec = re.prec();
        BigComplex { re, im: BigReal::zero(prec) }
    }

    pub fn conj(&self) -> BigComplex {
        BigComplex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn neg(&self) -> BigComplex {
        BigComplex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn add(&self, other: &BigComplex) -> BigComplex {
        BigComplex { re: self.re.add(&other.re), im: self.im.add(&other.im) }
    }

    pub fn sub(&self, other: &BigComplex) -> BigComplex {
        BigComplex { re: self.re.sub(&other.re), im: self.im.sub(&other.im) }
    }

    pub fn mul(&self, other: &BigComplex) -> BigComplex {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        BigComplex { re, im }
    }

    pub fn mul_real(&self, c: &BigReal) -> BigComplex {
        BigComplex { re: self.re.mul(c), im: self.im.mul(c) }
    }

    pub fn norm2(&self) -> BigReal {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    /// |z| with certified error.
    pub fn abs(&self) -> Result<BigReal> {
        let n2 = self.norm2();
        if n2.sign_certain() == Some(0) || n2.mant().is_zero() {
            // exactly zero value; error is the combined component bound
            let prec = self.re.prec().min(self.im.prec());
            return Ok(BigReal::zero(prec).with_err(self.re.err().add(self.im.err())));
        }
        n2.sqrt()
    }

    pub fn div(&self, other: &BigComplex) -> Result<BigComplex> {
        let n2 = other.norm2();
        let num = self.mul(&other.conj());
        Ok(BigComplex { re: num.re.div(&n2)?, im: num.im.div(&n2)? })
    }

    pub fn powi(&self, n: u64) -> BigComplex {
        let prec = self.re.prec().min(self.im.prec());
        let mut result = BigComplex::from_real(BigReal::from_int(1, prec));
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Upper bound on |z| via |re| + |im|.
    pub fn mag_upper(&self) -> ErrMag {
        self.re.mag_upper().add(self.im.mag_upper())
    }
}

static PI_CACHE: Mutex<BTreeMap<u32, (BigInt, i64, ErrMag)>> = Mutex::new(BTreeMap::new());

/// atan(1/x) scaled by 2^w, with the error bound in units of 2^-w.
fn atan_inv_fixed(x: u64, w: u32) -> (BigInt, u64) {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut power = (BigInt::from(1) << w) / BigInt::from(x);
    let mut acc = BigInt::zero();
    let mut j = 0u64;
    let mut terms = 0u64;
    loop {
        let term = &power / BigInt::from(2 * j + 1);
        if term.is_zero() {
            break;
        }
        if j % 2 == 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
        power = power / &x2;
        j += 1;
        terms += 1;
    }
    // each term carries <= 3 units (power truncations stay bounded by the
    // geometric x^2 shrink), plus one unit for the alternating tail
    (acc, 3 * terms + 4)
}

/// The constant pi at the given precision.
pub fn pi(prec: u32) -> BigReal {
    let bucket = ((prec + 64 + 255) / 256) * 256;
    {
        let cache = PI_CACHE.lock().unwrap();
        if let Some((mant, exp, err)) = cache.get(&bucket) {
            return BigReal {
                mant: mant.clone(),
                exp: *exp,
                prec: bucket,
                err: *err,
            }
            .with_prec(prec);
        }
    }
    let w = bucket;
    let (a5, u5) = atan_inv_fixed(5, w);
    let (a239, u239) = atan_inv_fixed(239, w);
    let mant = (a5 << 4u8) - (a239 << 2u8);
    let units = 16 * u5 + 4 * u239;
    let err = ErrMag::from_f64(units as f64).scale_pow2(-(w as i64));
    let value = BigReal { mant, exp: -(w as i64), prec: bucket, err };
    PI_CACHE
        .lock()
        .unwrap()
        .insert(bucket, (value.mant.clone(), value.exp, value.err));
    value.with_prec(prec)
}

/// e^x with certified error. The argument magnitude must stay below 2^24.
pub fn exp(x: &BigReal) -> Result<BigReal> {
    let prec = x.prec();
    let mag = x.mag_upper();
    let log2_mag = mag.log2_approx();
    if log2_mag > 24.0 {
        return Err(Error::Precision("exp argument too large".into()));
    }
    // scale so the Taylor argument is below 1/4 in magnitude
    let s = if log2_mag < -2.0 { 0 } else { (log2_mag + 2.5).ceil() as i64 };
    let w = prec + 2 * s as u32 + 64;
    let y = x.clone().with_prec(w).mul_pow2(-s);
    let one = BigReal::from_int(1, w);
    let mut term = one.clone();
    let mut acc = one;
    let mut j = 1u64;
    let cutoff = ErrMag::pow2(-(w as i64) - 2);
    loop {
        term = term.mul(&y).div_int(j);
        acc = acc.add(&term);
        if term.mag_upper().cmp_mag(&cutoff) != std::cmp::Ordering::Greater {
            break;
        }
        j += 1;
        if j > 4 * w as u64 {
            return Err(Error::Precision("exp series failed to converge".into()));
        }
    }
    // remaining tail is below |last term| for |y| <= 1/4
    acc = acc.add_err(term.mag_upper());
    for _ in 0..s {
        acc = acc.mul(&acc);
    }
    Ok(acc.with_prec(prec))
}

/// (sin x, cos x) with certified error.
pub fn sincos(x: &BigReal) -> Result<(BigReal, BigReal)> {
    let prec = x.prec();
    if x.mag_upper().log2_approx() > 24.0 {
        return Err(Error::Precision("trig argument too large".into()));
    }
    let w = prec + 96;
    let x_w = x.clone().with_prec(w);
    let two_pi = pi(w).mul_pow2(1);
    let m = x_w.div(&two_pi)?.round_to_bigint();
    let r = x_w.sub(&two_pi.mul(&BigReal::from_bigint(m, w)));
    // |r| <= pi + slack; five halvings bring it under 1/4
    let s = 5;
    let t = r.mul_pow2(-s);
    let minus_t2 = t.mul(&t).neg();
    let cutoff = ErrMag::pow2(-(w as i64) - 2);

    let mut sin_acc = t.clone();
    let mut term = t.clone();
    let mut j = 1u64;
    loop {
        term = term.mul(&minus_t2).div_int((2 * j) * (2 * j + 1));
        sin_acc = sin_acc.add(&term);
        if term.mag_upper().cmp_mag(&cutoff) != std::cmp::Ordering::Greater {
            break;
        }
        j += 1;
    }
    sin_acc = sin_acc.add_err(term.mag_upper());

    let one = BigReal::from_int(1, w);
    let mut cos_acc = one.clone();
    let mut term = one;
    let mut j = 1u64;
    loop {
        term = term.mul(&minus_t2).div_int((2 * j - 1) * (2 * j));
        cos_acc = cos_acc.add(&term);
        if term.mag_upper().cmp_mag(&cutoff) != std::cmp::Ordering::Greater {
            break;
        }
        j += 1;
    }
    cos_acc = cos_acc.add_err(term.mag_upper());

    let two = BigReal::from_int(2, w);
    for _ in 0..s {
        let new_sin = two.mul(&sin_acc).mul(&cos_acc);
        let new_cos = BigReal::from_int(1, w).sub(&two.mul(&sin_acc).mul(&sin_acc));
        sin_acc = new_sin;
        cos_acc = new_cos;
    }
    Ok((sin_acc.with_prec(prec), cos_acc.with_prec(prec)))
}

/// e^{i t} = (cos t, sin t) as a complex value.
pub fn unit_circle_point(t: &BigReal) -> Result<BigComplex> {
    let (s, c) = sincos(t)?;
    Ok(BigComplex::new(c, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::traits::One;

    const PI_DIGITS: &str = "3.1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679821480865";

    fn parse_decimal(s: &str, prec: u32) -> BigReal {
        crate::format::parse_decimal(s, prec).unwrap()
    }

    #[test]
    fn pi_matches_reference_digits() {
        for prec in [64u32, 128, 320] {
            let p = pi(prec);
            let reference = parse_decimal(PI_DIGITS, 400);
            let diff = p.sub(&reference).abs();
            // difference must be within pi's own certified bound (reference
            // error at 400 bits is negligible here)
            let bound = p.err().add(ErrMag::pow2(-360)).scale_pow2(2);
            assert!(
                diff.value_mag_upper().cmp_mag(&bound) != std::cmp::Ordering::Greater,
                "pi at prec {prec} off by {}",
                diff.to_f64()
            );
            assert!(p.err().log2_approx() < -(prec as f64) + 8.0);
        }
    }

    /// Exact rational enclosure of e^x for rational x, independent of the
    /// BigReal code paths: scaled Taylor with an explicit tail bound.
    fn exp_bounds_rational(x: &BigRational, terms: u32) -> (BigRational, BigRational) {
        use num::traits::Zero;
        let neg = x < &BigRational::zero();
        let a = if neg { -x.clone() } else { x.clone() };
        // scale a into [0, 1/2]
        let mut s = 0u32;
        let half = BigRational::new(1.into(), 2.into());
        let mut y = a.clone();
        while y > half {
            y /= BigRational::from(BigInt::from(2));
            s += 1;
        }
        let mut term = BigRational::one();
        let mut sum = BigRational::one();
        for j in 1..=terms {
            term = term * &y / BigRational::from(BigInt::from(j));
            sum += &term;
        }
        // tail <= 2 * next term for y <= 1/2
        let tail = term * &y * BigRational::from(BigInt::from(2));
        let (mut lo, mut hi) = (sum.clone(), sum + tail);
        for _ in 0..s {
            lo = &lo * &lo;
            hi = &hi * &hi;
        }
        if neg {
            (hi.recip(), lo.recip())
        } else {
            (lo, hi)
        }
    }

    fn assert_within_oracle(value: &BigReal, lo: &BigRational, hi: &BigRational) {
        let prec = value.prec();
        let lo_r = BigReal::from_rational(lo, prec + 64);
        let hi_r = BigReal::from_rational(hi, prec + 64);
        // value - err <= hi and value + err >= lo
        let err_real = {
            let e = value.err();
            // coarse conversion of the bound into a dyadic value
            BigReal::from_f64(2.0, prec).mul_pow2(e.exp2).mul(&BigReal::from_f64(
                if e.is_zero() { 0.0 } else { e.mant },
                prec,
            ))
        };
        assert!(
            !value.sub(&err_real).gt_certain(&hi_r),
            "value exceeds oracle upper bound"
        );
        assert!(
            !value.add(&err_real).lt_certain(&lo_r),
            "value below oracle lower bound"
        );
    }

    #[test]
    fn exp_matches_rational_oracle() {
        for (num, den) in [(1i64, 1i64), (-1, 1), (3, 2), (-22, 7), (10, 1), (-13, 3)] {
            let x = BigRational::new(num.into(), den.into());
            let v = exp(&BigReal::from_rational(&x, 192)).unwrap();
            let (lo, hi) = exp_bounds_rational(&x, 120);
            assert_within_oracle(&v, &lo, &hi);
        }
    }

    #[test]
    fn exp_of_large_argument() {
        // e^{2 pi * 20}: magnitude ~ e^{125.6}; check against the rational
        // oracle applied to a rational enclosure of 2 pi * 20
        let p = pi(256);
        let x = p.mul_int(40);
        let v = exp(&x).unwrap();
        assert!(v.sign_certain() == Some(1));
        // log check: value should be huge but finite in magnitude bound terms
        let log2v = v.value_mag_upper().log2_approx();
        let expected = 40.0 * std::f64::consts::PI / std::f64::consts::LN_2;
        assert!((log2v - expected).abs() < 0.01, "log2 = {log2v}");
    }

    /// Alternating-series enclosures of sin/cos at rational arguments.
    fn sincos_bounds_rational(x: &BigRational, terms: u32) -> ((BigRational, BigRational), (BigRational, BigRational)) {
        // |x| must be <= 1 so the alternating tail bound applies cleanly
        let mut sin_sum = x.clone();
        let mut term = x.clone();
        let x2 = x * x;
        for j in 1..=terms {
            term = -term * &x2 / BigRational::from(BigInt::from((2 * j) * (2 * j + 1)));
            sin_sum += &term;
        }
        let sin_tail = term.abs();
        let mut cos_sum = BigRational::one();
        let mut term = BigRational::one();
        for j in 1..=terms {
            term = -term * &x2 / BigRational::from(BigInt::from((2 * j - 1) * (2 * j)));
            cos_sum += &term;
        }
        let cos_tail = term.abs();
        (
            (sin_sum.clone() - &sin_tail, sin_sum + &sin_tail),
            (cos_sum.clone() - &cos_tail, cos_sum + &cos_tail),
        )
    }

    #[test]
    fn sincos_matches_rational_oracle() {
        for (num, den) in [(1i64, 1i64), (-1, 2), (1, 3), (99, 100)] {
            let x = BigRational::new(num.into(), den.into());
            let (s, c) = sincos(&BigReal::from_rational(&x, 192)).unwrap();
            let ((slo, shi), (clo, chi)) = sincos_bounds_rational(&x, 60);
            assert_within_oracle(&s, &slo, &shi);
            assert_within_oracle(&c, &clo, &chi);
        }
    }

    #[test]
    fn sincos_special_angles() {
        let prec = 256;
        let p = pi(prec);
        let (s, c) = sincos(&p).unwrap();
        assert!(s.sign_certain().is_none(), "sin(pi) must be zero within err");
        assert!(c.add(&BigReal::from_int(1, prec)).sign_certain().is_none());
        let half_pi = p.mul_pow2(-1);
        let (s2, c2) = sincos(&half_pi).unwrap();
        assert!(s2.sub(&BigReal::from_int(1, prec)).sign_certain().is_none());
        assert!(c2.sign_certain().is_none());
        // reduction of a large argument: sin(x + 40 pi) = sin(x)
        let x = BigReal::from_rational(&BigRational::new(1.into(), 3.into()), prec);
        let shifted = x.add(&p.mul_int(40));
        let (s3, _) = sincos(&shifted).unwrap();
        let (s4, _) = sincos(&x).unwrap();
        assert!(s3.sub(&s4).sign_certain().is_none());
    }

    #[test]
    fn sqrt_and_division_certified() {
        let prec = 192;
        let two = BigReal::from_int(2, prec);
        let r = two.sqrt().unwrap();
        let back = r.mul(&r).sub(&two);
        assert!(back.sign_certain().is_none(), "sqrt(2)^2 != 2 within err");
        let third = BigReal::from_int(1, prec).div(&BigReal::from_int(3, prec)).unwrap();
        let x = third.mul_int(3).sub(&BigReal::from_int(1, prec));
        assert!(x.sign_certain().is_none());
        // division by an uncertain zero must fail
        let tiny = BigReal::zero(prec).with_err(ErrMag::pow2(-10));
        assert!(BigReal::from_int(1, prec).div(&tiny).is_err());
    }

    #[test]
    fn sign_certainty_thresholds() {
        let prec = 64;
        let v = BigReal::from_int(1, prec).mul_pow2(-100).with_err(ErrMag::pow2(-90));
        assert_eq!(v.sign_certain(), None);
        let w = BigReal::from_int(1, prec).mul_pow2(-80).with_err(ErrMag::pow2(-90));
        assert_eq!(w.sign_certain(), Some(1));
        assert_eq!(w.neg().sign_certain(), Some(-1));
        assert_eq!(BigReal::zero(prec).sign_certain(), Some(0));
    }

    fn zeroish(x: &BigReal) -> bool {
        matches!(x.sign_certain(), None | Some(0))
    }

    #[test]
    fn complex_multiplication_and_abs() {
        let prec = 128;
        let z = BigComplex::new(BigReal::from_int(3, prec), BigReal::from_int(4, prec));
        let a = z.abs().unwrap();
        assert!(zeroish(&a.sub(&BigReal::from_int(5, prec))));
        let w = z.mul(&z.conj());
        assert!(zeroish(&w.re.sub(&BigReal::from_int(25, prec))));
        assert!(zeroish(&w.im));
        let q = z.div(&z).unwrap();
        assert!(zeroish(&q.re.sub(&BigReal::from_int(1, prec))));
        assert!(zeroish(&q.im));
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let prec = 128;
        let x = BigReal::from_rational(&BigRational::new(7.into(), 5.into()), prec);
        let mut acc = BigReal::from_int(1, prec);
        for _ in 0..11 {
            acc = acc.mul(&x);
        }
        assert!(x.powi(11).sub(&acc).sign_certain().is_none());
    }

    #[test]
    fn rounding_tracks_error() {
        let prec = 32;
        let big = BigInt::from(1u64 << 60) + BigInt::from(12345u64);
        let v = BigReal::from_bigint(big.clone(), prec);
        // value was rounded; the error bound must cover the dropped bits
        let exact = BigReal::from_bigint(big, 128);
        assert!(v.sub(&exact).sign_certain().is_none());
        assert!(!v.err().is_zero());
    }
}
