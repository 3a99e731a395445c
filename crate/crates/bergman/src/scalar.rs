//! Arbitrary-precision coefficient arithmetic.
//!
//! Two modes are supported: exact rationals (the default for all recursion
//! work, so every identity check is exact equality) and big floats with a
//! fixed precision recorded per value. The two modes never mix silently;
//! higher layers reject mode mismatches up front.

use crate::error::{Error, Result};
use rug::ops::CompleteRound;
use rug::{Complete, Float, Rational};
use std::fmt;

/// Coefficient mode for a computation session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    ExactRational,
    BigFloat(u32),
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::ExactRational => write!(f, "rational"),
            ScalarMode::BigFloat(bits) => write!(f, "bigfloat:{bits}"),
        }
    }
}

impl ScalarMode {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "rational" {
            return Ok(ScalarMode::ExactRational);
        }
        if let Some(bits) = s.strip_prefix("bigfloat:") {
            let bits: u32 = bits
                .parse()
                .map_err(|_| Error::Parse(format!("bad precision in scalar mode `{s}`")))?;
            if bits < 32 {
                return Err(Error::Parse("bigfloat precision must be >= 32 bits".into()));
            }
            return Ok(ScalarMode::BigFloat(bits));
        }
        Err(Error::Parse(format!("unknown scalar mode `{s}`")))
    }
}

/// A real number in either exact-rational or big-float representation.
///
/// Rationals are kept in lowest terms with positive denominator (rug
/// canonicalizes on construction).
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(Rational),
    BigFloat(Float),
}

impl Scalar {
    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Rational(_) => ScalarMode::ExactRational,
            Scalar::BigFloat(f) => ScalarMode::BigFloat(f.prec()),
        }
    }

    pub fn zero(mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::ExactRational => Scalar::Rational(Rational::new()),
            ScalarMode::BigFloat(p) => Scalar::BigFloat(Float::new(p)),
        }
    }

    pub fn one(mode: ScalarMode) -> Self {
        Scalar::from_i64(1, mode)
    }

    pub fn from_i64(v: i64, mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::ExactRational => Scalar::Rational(Rational::from(v)),
            ScalarMode::BigFloat(p) => Scalar::BigFloat(Float::with_val(p, v)),
        }
    }

    pub fn from_ratio(num: i64, den: i64, mode: ScalarMode) -> Self {
        assert!(den != 0);
        match mode {
            ScalarMode::ExactRational => Scalar::Rational(Rational::from((num, den))),
            ScalarMode::BigFloat(p) => {
                Scalar::BigFloat(Float::with_val(p, Rational::from((num, den))))
            }
        }
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        Scalar::BigFloat(Float::with_val(prec, v))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => *r == 0,
            Scalar::BigFloat(f) => f.is_zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => r.to_f64(),
            Scalar::BigFloat(f) => f.to_f64(),
        }
    }

    /// Lossless conversion to a big float of the given precision
    /// (lossy only if `prec` is below the rational's bit size).
    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Scalar::Rational(r) => Float::with_val(prec, r),
            Scalar::BigFloat(f) => Float::with_val(prec, f),
        }
    }

    fn check_same_mode(&self, other: &Scalar) -> Result<()> {
        if self.mode() != other.mode() {
            return Err(Error::ScalarModeMismatch(format!(
                "{} vs {}",
                self.mode(),
                other.mode()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        debug_assert!(self.check_same_mode(other).is_ok());
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational((a + b).into()),
            (Scalar::BigFloat(a), Scalar::BigFloat(b)) => {
                Scalar::BigFloat((a + b).complete(a.prec()))
            }
            (a, b) => {
                let p = 64;
                Scalar::BigFloat(a.to_float(p) + b.to_float(p))
            }
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        debug_assert!(self.check_same_mode(other).is_ok());
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational((a * b).into()),
            (Scalar::BigFloat(a), Scalar::BigFloat(b)) => {
                Scalar::BigFloat((a * b).complete(a.prec()))
            }
            (a, b) => {
                let p = 64;
                Scalar::BigFloat(a.to_float(p) * b.to_float(p))
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => {
                assert!(*b != 0, "division by zero");
                Scalar::Rational((a / b).into())
            }
            (Scalar::BigFloat(a), Scalar::BigFloat(b)) => {
                Scalar::BigFloat((a / b).complete(a.prec()))
            }
            (a, b) => {
                let p = 64;
                Scalar::BigFloat(a.to_float(p) / b.to_float(p))
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational((-r).complete()),
            Scalar::BigFloat(f) => Scalar::BigFloat((-f).complete(f.prec())),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r.clone().abs()),
            Scalar::BigFloat(f) => Scalar::BigFloat(f.clone().abs()),
        }
    }

    /// Serialize as "num/den" (rational) or a decimal string (big float).
    pub fn to_serialized(&self) -> String {
        match self {
            Scalar::Rational(r) => {
                if *r.denom() == 1 {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::BigFloat(f) => f.to_string_radix(10, None),
        }
    }

    pub fn from_serialized(s: &str, mode: ScalarMode) -> Result<Scalar> {
        match mode {
            ScalarMode::ExactRational => {
                let r = s
                    .parse::<Rational>()
                    .map_err(|e| Error::Parse(format!("bad rational `{s}`: {e}")))?;
                Ok(Scalar::Rational(r))
            }
            ScalarMode::BigFloat(p) => {
                // Accept rational-style strings in float mode too.
                if let Ok(r) = s.parse::<Rational>() {
                    return Ok(Scalar::BigFloat(Float::with_val(p, r)));
                }
                let v = Float::parse(s).map_err(|e| Error::Parse(format!("bad float `{s}`: {e}")))?;
                Ok(Scalar::BigFloat(Float::with_val(p, v)))
            }
        }
    }
}

/// A complex number whose real and imaginary parts share a `Scalar` mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalar {
    pub re: Scalar,
    pub im: Scalar,
}

impl ComplexScalar {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        assert_eq!(re.mode(), im.mode(), "re/im must share a scalar mode");
        ComplexScalar { re, im }
    }

    pub fn mode(&self) -> ScalarMode {
        self.re.mode()
    }

    pub fn zero(mode: ScalarMode) -> Self {
        ComplexScalar {
            re: Scalar::zero(mode),
            im: Scalar::zero(mode),
        }
    }

    pub fn one(mode: ScalarMode) -> Self {
        ComplexScalar {
            re: Scalar::one(mode),
            im: Scalar::zero(mode),
        }
    }

    pub fn from_real(re: Scalar) -> Self {
        let mode = re.mode();
        ComplexScalar {
            re,
            im: Scalar::zero(mode),
        }
    }

    pub fn from_i64(v: i64, mode: ScalarMode) -> Self {
        ComplexScalar::from_real(Scalar::from_i64(v, mode))
    }

    pub fn from_ratio(num: i64, den: i64, mode: ScalarMode) -> Self {
        ComplexScalar::from_real(Scalar::from_ratio(num, den, mode))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, other: &ComplexScalar) -> ComplexScalar {
        ComplexScalar {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn sub(&self, other: &ComplexScalar) -> ComplexScalar {
        ComplexScalar {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }

    pub fn mul(&self, other: &ComplexScalar) -> ComplexScalar {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        ComplexScalar { re, im }
    }

    pub fn neg(&self) -> ComplexScalar {
        ComplexScalar {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> ComplexScalar {
        ComplexScalar {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    /// |self|^2 as a real scalar.
    pub fn norm_sq(&self) -> Scalar {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn reciprocal(&self) -> ComplexScalar {
        let n = self.norm_sq();
        assert!(!n.is_zero(), "reciprocal of zero");
        ComplexScalar {
            re: self.re.div(&n),
            im: self.im.neg().div(&n),
        }
    }

    pub fn div(&self, other: &ComplexScalar) -> ComplexScalar {
        self.mul(&other.reciprocal())
    }

    pub fn scale(&self, s: &Scalar) -> ComplexScalar {
        ComplexScalar {
            re: self.re.mul(s),
            im: self.im.mul(s),
        }
    }

    pub fn to_rug_complex(&self, prec: u32) -> rug::Complex {
        rug::Complex::with_val(prec, (self.re.to_float(prec), self.im.to_float(prec)))
    }
}
