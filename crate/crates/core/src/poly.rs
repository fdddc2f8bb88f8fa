//! Laurent polynomials in `u = q^(1/2)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use crate::qseries::{push_term, qpow_text, Series};
use crate::scalar::{Coeff, FieldCoeff};

/// `sum_i coeffs[i] u^(val + i)`; both the first and last stored
/// coefficients are nonzero unless the polynomial is zero (empty, `val == 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPoly<C> {
    val: i64,
    coeffs: Vec<C>,
}

impl<C: Coeff> UPoly<C> {
    pub fn new(val: i64, coeffs: Vec<C>) -> Self {
        let mut p = UPoly { val, coeffs };
        p.normalize();
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, C)>>(terms: I) -> Self {
        let terms: Vec<(i64, C)> = terms.into_iter().collect();
        let (Some(lo), Some(hi)) = (
            terms.iter().map(|t| t.0).min(),
            terms.iter().map(|t| t.0).max(),
        ) else {
            return Self::zero();
        };
        let mut coeffs = vec![C::zero(); (hi - lo + 1) as usize];
        for (e, c) in terms {
            let slot = &mut coeffs[(e - lo) as usize];
            *slot = slot.add_ref(&c);
        }
        Self::new(lo, coeffs)
    }

    pub fn zero() -> Self {
        UPoly {
            val: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        Self::new(0, vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn monomial(c: C, exp: i64) -> Self {
        Self::new(exp, vec![c])
    }

    /// `u^exp`
    pub fn u_pow(exp: i64) -> Self {
        Self::monomial(C::one(), exp)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(p) => {
                self.coeffs.drain(..p);
                self.val += p as i64;
            }
            None => {
                self.val = 0;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn low(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.val)
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn high(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.val + self.coeffs.len() as i64 - 1)
    }

    /// `high - low`, the degree once the lowest power of `u` is factored out.
    pub fn span(&self) -> i64 {
        (self.coeffs.len() as i64 - 1).max(0)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: i64) -> C {
        if exp < self.val || exp >= self.val + self.coeffs.len() as i64 {
            C::zero()
        } else {
            self.coeffs[(exp - self.val) as usize].clone()
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.val + i as i64, c))
    }

    pub fn leading_coeff(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn trailing_coeff(&self) -> Option<&C> {
        self.coeffs.first()
    }

    /// Multiplies by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        UPoly {
            val: self.val + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.val, self.coeffs.iter().map(|x| x.mul_ref(c)).collect())
    }

    /// `p(u^-1)`
    pub fn invert_variable(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        match self.high() {
            Some(h) => Self::new(-h, coeffs),
            None => Self::zero(),
        }
    }

    /// `p(u^k)` for `k != 0`.
    pub fn substitute_power(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| (e * k, c.clone())))
    }

    /// Value at `u = 1`.
    pub fn at_one(&self) -> C {
        self.coeffs.iter().fold(C::zero(), |acc, c| acc.add_ref(c))
    }

    /// The exact series of this polynomial, known to `O(u^trunc)`.
    pub fn to_series(&self, trunc: i64) -> Series<C> {
        if self.is_zero() {
            return Series::zero(trunc);
        }
        Series::from_coeffs(self.val, self.coeffs.clone(), trunc)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> UPoly<D> {
        UPoly::new(self.val, self.coeffs.iter().map(f).collect())
    }

    pub fn to_rational(&self) -> UPoly<BigRational> {
        self.map_coeffs(|c| c.to_rational())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Text in powers of `q`, ascending in `u`, e.g. `2 - q^(1/2) + q^3`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (e, c) in self.terms() {
            push_term(&mut out, &c.to_rational(), &qpow_text(e));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl<C: FieldCoeff> UPoly<C> {
    /// Scales so that the highest coefficient is one.
    pub fn monic(&self) -> Self {
        match self.leading_coeff() {
            Some(lc) => self.scale(&lc.inverse().expect("nonzero")),
            None => self.clone(),
        }
    }

    /// Euclidean division of ordinary polynomials (`low() >= 0` is not
    /// required; exponents are taken relative to zero).
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dh = d.high().unwrap();
        let dl = d.leading_coeff().unwrap().inverse().unwrap();
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some(rh) = rem.high() {
            if rh < dh {
                break;
            }
            let c = rem.leading_coeff().unwrap().mul_ref(&dl);
            let t = Self::monomial(c.clone(), rh - dh);
            rem = &rem - &(&t * d);
            quot.push((rh - dh, c));
        }
        (Self::from_terms(quot), rem)
    }

    /// Monic gcd of two polynomials with nonnegative exponents.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }
}

impl<C: Coeff> Add for &UPoly<C> {
    type Output = UPoly<C>;
    fn add(self, rhs: Self) -> UPoly<C> {
        UPoly::from_terms(self.terms().chain(rhs.terms()).map(|(e, c)| (e, c.clone())))
    }
}

impl<C: Coeff> Neg for &UPoly<C> {
    type Output = UPoly<C>;
    fn neg(self) -> UPoly<C> {
        UPoly::new(self.val, self.coeffs.iter().map(|c| c.negated()).collect())
    }
}

impl<C: Coeff> Sub for &UPoly<C> {
    type Output = UPoly<C>;
    fn sub(self, rhs: Self) -> UPoly<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Mul for &UPoly<C> {
    type Output = UPoly<C>;
    fn mul(self, rhs: Self) -> UPoly<C> {
        if self.is_zero() || rhs.is_zero() {
            return UPoly::zero();
        }
        let mut coeffs = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j]
                    .try_mul_add(a, b)
                    .expect("coefficient overflow");
            }
        }
        UPoly::new(self.val + rhs.val, coeffs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Coeff> $tr for UPoly<C> {
            type Output = UPoly<C>;
            fn $m(self, rhs: Self) -> UPoly<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coeff> Neg for UPoly<C> {
    type Output = UPoly<C>;
    fn neg(self) -> UPoly<C> {
        -&self
    }
}

impl<C: Coeff> fmt::Display for UPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `1 - q^k`, a frequent building block.
pub fn one_minus_q<C: Coeff>(k: i64) -> UPoly<C> {
    UPoly::from_terms([(0, C::one()), (2 * k, C::one().negated())])
}
