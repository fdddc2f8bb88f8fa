//! Coefficient scalars for series, polynomials and matrices.
//!
//! Everything numeric in this crate is generic over [`Coeff`]. Three exact
//! scalars implement it: `i128` (fast, overflow is reported rather than
//! wrapped), [`BigInt`] and [`BigRational`].

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Raised by the checked arithmetic of fixed-width scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("coefficient overflow in fixed-width arithmetic")]
pub struct Overflow;

/// An exact commutative ring scalar.
///
/// The `try_*` methods are the primitive operations; the infallible helpers
/// panic on overflow, which can only happen for fixed-width types.
pub trait Coeff: Clone + Debug + Display + PartialEq + Send + Sync + Zero + One + 'static {
    fn from_i64(v: i64) -> Self;

    fn try_add_assign(&mut self, rhs: &Self) -> Result<(), Overflow>;

    fn try_sub_assign(&mut self, rhs: &Self) -> Result<(), Overflow>;

    fn try_mul(&self, rhs: &Self) -> Result<Self, Overflow>;

    /// `self += a * b`
    fn try_mul_add(&mut self, a: &Self, b: &Self) -> Result<(), Overflow> {
        let p = a.try_mul(b)?;
        self.try_add_assign(&p)
    }

    fn negated(&self) -> Self;

    /// Multiplicative inverse, if it exists in this ring.
    fn inverse(&self) -> Option<Self>;

    fn to_rational(&self) -> BigRational;

    /// Exact conversion from a rational; `None` when the value is not
    /// representable (non-integral for integer types, or too large).
    fn from_rational(r: &BigRational) -> Option<Self>;

    fn add_ref(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.try_add_assign(rhs).expect("coefficient overflow");
        out
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.try_sub_assign(rhs).expect("coefficient overflow");
        out
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("coefficient overflow")
    }

    fn is_unit(&self) -> bool {
        self.inverse().is_some()
    }
}

/// A scalar in which every nonzero element is invertible.
pub trait FieldCoeff: Coeff {
    fn div_ref(&self, rhs: &Self) -> Self {
        self.mul_ref(&rhs.inverse().expect("division by zero"))
    }
}

impl Coeff for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }

    #[inline]
    fn try_add_assign(&mut self, rhs: &Self) -> Result<(), Overflow> {
        *self = self.checked_add(*rhs).ok_or(Overflow)?;
        Ok(())
    }

    #[inline]
    fn try_sub_assign(&mut self, rhs: &Self) -> Result<(), Overflow> {
        *self = self.checked_sub(*rhs).ok_or(Overflow)?;
        Ok(())
    }

    #[inline]
    fn try_mul(&self, rhs: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*rhs).ok_or(Overflow)
    }

    #[inline]
    fn try_mul_add(&mut self, a: &Self, b: &Self) -> Result<(), Overflow> {
        let p = a.checked_mul(*b).ok_or(Overflow)?;
        *self = self.checked_add(p).ok_or(Overflow)?;
        Ok(())
    }

    fn negated(&self) -> Self {
        self.checked_neg().expect("coefficient overflow")
    }

    fn inverse(&self) -> Option<Self> {
        match *self {
            1 => Some(1),
            -1 => Some(-1),
            _ => None,
        }
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }

    fn from_rational(r: &BigRational) -> Option<Self> {
        if r.is_integer() {
            r.to_integer().to_i128()
        } else {
            None
        }
    }
}

impl Coeff for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    #[inline]
    fn try_add_assign(&mut self, rhs: &Self) -> Result<(), Overflow> {
        *self += rhs;
        Ok(())
    }

    #[inline]
    fn try_sub_assign(&mut self, rhs: &Self) -> Result<(), Overflow> {
        *self -= rhs;
        Ok(())
    }

    #[inline]
    fn try_mul(&self, rhs: &Self) -> Result<Self, Overflow> {
        Ok(self * rhs)
    }

    fn negated(&self) -> Self {
        -self
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_one() || (-self).is_one() {
            Some(self.clone())
        } else {
            None
        }
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }

    fn from_rational(r: &BigRational) -> Option<Self> {
        r.is_integer().then(|| r.to_integer())
    }
}

impl Coeff for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    #[inline]
    fn try_add_assign(&mut self, rhs: &Self) -> Result<(), Overflow> {
        *self += rhs;
        Ok(())
    }

    #[inline]
    fn try_sub_assign(&mut self, rhs: &Self) -> Result<(), Overflow> {
        *self -= rhs;
        Ok(())
    }

    #[inline]
    fn try_mul(&self, rhs: &Self) -> Result<Self, Overflow> {
        Ok(self * rhs)
    }

    fn negated(&self) -> Self {
        -self
    }

    fn inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
}

impl FieldCoeff for BigRational {}

/// Parses `a` or `a/b` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
    }
}

/// `num/den` with the denominator always written, as used by the series text format.
pub fn rational_fraction_text(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
