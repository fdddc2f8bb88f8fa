//! Truncated Laurent series in `u = q^(1/2)`.
//!
//! Exponents are always counted in u-units, so `q^e` is stored at exponent
//! `2e`. A series is known modulo `O(u^trunc)`; every operation propagates
//! the tightest truncation implied by its operands.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use thiserror::Error;

use crate::scalar::{parse_rational, rational_fraction_text, Coeff, Overflow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series is zero to its truncation, no leading term to invert")]
    ZeroLeadingTerm,
    #[error("leading coefficient {0} is not a unit of the coefficient ring")]
    NonUnitLeading(String),
    #[error("series text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A Laurent series `sum_{i} coeffs[i] u^(val + i) + O(u^trunc)`.
///
/// Normal form: `coeffs.len() == trunc - val` and `coeffs[0] != 0`, or the
/// series is zero to its truncation, in which case `coeffs` is empty and
/// `val == trunc`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Series<C> {
    val: i64,
    coeffs: Vec<C>,
    trunc: i64,
}

impl<C: Coeff> Series<C> {
    /// Builds a series from coefficients listed from `u^val` upward. Entries
    /// at or beyond `trunc` are dropped, missing ones below `trunc` are zero.
    pub fn from_coeffs(val: i64, mut coeffs: Vec<C>, trunc: i64) -> Self {
        let want = (trunc - val).max(0) as usize;
        if val >= trunc {
            return Self::zero(trunc);
        }
        coeffs.resize(want, C::zero());
        let mut s = Series { val, coeffs, trunc };
        s.normalize();
        s
    }

    /// Builds a series from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I: IntoIterator<Item = (i64, C)>>(terms: I, trunc: i64) -> Self {
        let terms: Vec<(i64, C)> = terms.into_iter().filter(|(e, _)| *e < trunc).collect();
        let Some(lo) = terms.iter().map(|(e, _)| *e).min() else {
            return Self::zero(trunc);
        };
        let mut coeffs = vec![C::zero(); (trunc - lo) as usize];
        for (e, c) in terms {
            coeffs[(e - lo) as usize]
                .try_add_assign(&c)
                .expect("coefficient overflow");
        }
        Self::from_coeffs(lo, coeffs, trunc)
    }

    /// `O(u^trunc)`.
    pub fn zero(trunc: i64) -> Self {
        Series {
            val: trunc,
            coeffs: Vec::new(),
            trunc,
        }
    }

    pub fn one(trunc: i64) -> Self {
        Self::monomial(C::one(), 0, trunc)
    }

    /// `c u^exp + O(u^trunc)`.
    pub fn monomial(c: C, exp: i64, trunc: i64) -> Self {
        Self::from_coeffs(exp, vec![c], trunc)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(p) => {
                self.coeffs.drain(..p);
                self.val += p as i64;
            }
            None => {
                self.coeffs.clear();
                self.val = self.trunc;
            }
        }
    }

    /// Exponent of the leading nonzero term, or `None` if the series is zero
    /// to its truncation.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.val)
    }

    /// The stored starting exponent; equals `trunc` for a zero series.
    pub fn start(&self) -> i64 {
        self.val
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Number of known coefficients from the leading term on.
    pub fn precision(&self) -> i64 {
        self.trunc - self.val
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `u^exp`, `None` when `exp` lies beyond the truncation.
    pub fn coeff(&self, exp: i64) -> Option<C> {
        if exp >= self.trunc {
            None
        } else if exp < self.val {
            Some(C::zero())
        } else {
            Some(self.coeffs[(exp - self.val) as usize].clone())
        }
    }

    pub fn leading_coeff(&self) -> Option<&C> {
        self.coeffs.first()
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.val + i as i64, c))
    }

    /// Forgets everything at or beyond `u^trunc` (never raises the truncation).
    pub fn truncate(&self, trunc: i64) -> Self {
        if trunc >= self.trunc {
            return self.clone();
        }
        if trunc <= self.val {
            return Self::zero(trunc);
        }
        let keep = (trunc - self.val) as usize;
        Self::from_coeffs(self.val, self.coeffs[..keep].to_vec(), trunc)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        Series::from_coeffs(self.val, self.coeffs.iter().map(f).collect(), self.trunc)
    }

    pub fn to_rational(&self) -> Series<BigRational> {
        self.map_coeffs(|c| c.to_rational())
    }

    /// Converts into another scalar; fails if some coefficient is not representable.
    pub fn try_convert<D: Coeff>(&self) -> Option<Series<D>> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| D::from_rational(&c.to_rational()))
            .collect::<Option<Vec<D>>>()?;
        Some(Series::from_coeffs(self.val, coeffs, self.trunc))
    }

    pub fn scale(&self, c: &C) -> Self {
        Series::from_coeffs(
            self.val,
            self.coeffs.iter().map(|x| x.mul_ref(c)).collect(),
            self.trunc,
        )
    }

    /// Multiplies by `(-1)^sign_exponent * u^shift`. With
    /// `sign_exponent == shift == x` this is the factor `(-q^(1/2))^x`.
    pub fn monomial_shift(&self, shift: i64, sign_exponent: i64) -> Self {
        let coeffs = if sign_exponent.rem_euclid(2) == 1 {
            self.coeffs.iter().map(|c| c.negated()).collect()
        } else {
            self.coeffs.clone()
        };
        Series {
            val: self.val + shift,
            coeffs,
            trunc: self.trunc + shift,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, Overflow> {
        let trunc = self.trunc.min(other.trunc);
        let lo = self.val.min(other.val).min(trunc);
        let mut coeffs = vec![C::zero(); (trunc - lo) as usize];
        for src in [self, other] {
            for (i, c) in src.coeffs.iter().enumerate() {
                let e = src.val + i as i64;
                if e >= trunc {
                    break;
                }
                coeffs[(e - lo) as usize].try_add_assign(c)?;
            }
        }
        Ok(Self::from_coeffs(lo, coeffs, trunc))
    }

    /// Cauchy product. The result is known to
    /// `min(a.trunc + b.val, b.trunc + a.val)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self, Overflow> {
        let val = self.val + other.val;
        let trunc = (self.trunc + other.val).min(other.trunc + self.val);
        let len = (trunc - val).max(0) as usize;
        let mut coeffs = vec![C::zero(); len];
        mul_trunc_into(&mut coeffs, &self.coeffs, &other.coeffs)?;
        Ok(Self::from_coeffs(val, coeffs, trunc))
    }

    /// Multiplicative inverse. Needs a nonzero leading coefficient that is a
    /// unit of the scalar ring; the relative precision is preserved.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let lead = self.leading_coeff().ok_or(SeriesError::ZeroLeadingTerm)?;
        let inv0 = lead
            .inverse()
            .ok_or_else(|| SeriesError::NonUnitLeading(lead.to_string()))?;
        let len = self.coeffs.len();
        let mut out: Vec<C> = Vec::with_capacity(len);
        out.push(inv0.clone());
        for i in 1..len {
            let mut acc = C::zero();
            for j in 1..=i {
                acc.try_mul_add(&self.coeffs[j], &out[i - j])
                    .expect("coefficient overflow");
            }
            out.push(acc.mul_ref(&inv0).negated());
        }
        Ok(Series::from_coeffs(-self.val, out, -self.val + len as i64))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(i64::MAX / 4);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// True when the two series agree on every coefficient both of them know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    /// Lowest exponent at which the two series are known to differ.
    pub fn first_difference(&self, other: &Self) -> Option<i64> {
        (self - other).valuation()
    }
}

impl<C: Coeff> Series<C> {
    /// Text form: a `trunc <N>` header, then one `<u-exponent> <num>/<den>`
    /// line per nonzero coefficient in ascending exponent order.
    pub fn to_text(&self) -> String {
        let mut out = format!("trunc {}\n", self.trunc);
        for (e, c) in self.terms() {
            out.push_str(&format!(
                "{} {}\n",
                e,
                rational_fraction_text(&c.to_rational())
            ));
        }
        out
    }

    /// Human-readable form in powers of `q`, e.g. `1 - 8*q - 9*q^2 + O(q^8)`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for (e, c) in self.terms() {
            let r = c.to_rational();
            push_term(&mut out, &r, &qpow_text(e));
        }
        if out.is_empty() {
            out.push_str("O(");
        } else {
            out.push_str(" + O(");
        }
        let t = qpow_text(self.trunc);
        out.push_str(if t.is_empty() { "1" } else { &t });
        out.push(')');
        out
    }
}

impl Series<BigRational> {
    pub fn parse_text(text: &str) -> Result<Self, SeriesError> {
        let mut trunc = None;
        let mut terms = Vec::new();
        let mut last: Option<i64> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| SeriesError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut parts = line.split_whitespace();
            let (a, b) = (parts.next(), parts.next());
            if parts.next().is_some() {
                return Err(err("expected two fields"));
            }
            match (trunc, a, b) {
                (None, Some("trunc"), Some(n)) => {
                    trunc = Some(n.parse::<i64>().map_err(|_| err("bad truncation"))?);
                }
                (None, _, _) => return Err(err("missing `trunc <N>` header")),
                (Some(t), Some(e), Some(c)) => {
                    let e: i64 = e.parse().map_err(|_| err("bad exponent"))?;
                    if e >= t {
                        return Err(err("exponent beyond truncation"));
                    }
                    if last.is_some_and(|l| e <= l) {
                        return Err(err("exponents must be strictly increasing"));
                    }
                    last = Some(e);
                    let c = parse_rational(c).ok_or_else(|| err("bad coefficient"))?;
                    terms.push((e, c));
                }
                _ => return Err(err("expected `<exponent> <num>/<den>`")),
            }
        }
        let trunc = trunc.ok_or(SeriesError::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        Ok(Series::from_terms(terms, trunc))
    }
}

/// `q^(e/2)` written in q-units: `""`, `q`, `q^3`, `q^(-1/2)`.
pub(crate) fn qpow_text(u_exp: i64) -> String {
    match u_exp {
        0 => String::new(),
        2 => "q".to_string(),
        e if e % 2 == 0 => format!("q^{}", e / 2),
        e => format!("q^({}/2)", e),
    }
}

/// Appends ` + c*m` / ` - c*m` to a sum under construction.
pub(crate) fn push_term(out: &mut String, c: &BigRational, mono: &str) {
    use num_traits::{One, Signed};
    let neg = c.is_negative();
    let mag = c.abs();
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let mag_text = if mag.is_integer() {
        mag.numer().to_string()
    } else {
        format!("{}/{}", mag.numer(), mag.denom())
    };
    match (mag.is_one(), mono.is_empty()) {
        (_, true) => out.push_str(&mag_text),
        (true, false) => out.push_str(mono),
        (false, false) => {
            out.push_str(&mag_text);
            out.push('*');
            out.push_str(mono);
        }
    }
}

/// `acc[i] += sum_{j} a[j] b[i-j]` for every `i < acc.len()`.
pub(crate) fn mul_trunc_into<C: Coeff>(acc: &mut [C], a: &[C], b: &[C]) -> Result<(), Overflow> {
    let len = acc.len();
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            acc[i + j].try_mul_add(x, y)?;
        }
    }
    Ok(())
}

impl<C: Coeff> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl<C: Coeff> Add for &Series<C> {
    type Output = Series<C>;
    fn add(self, rhs: Self) -> Series<C> {
        self.try_add(rhs).expect("coefficient overflow")
    }
}

impl<C: Coeff> Sub for &Series<C> {
    type Output = Series<C>;
    fn sub(self, rhs: Self) -> Series<C> {
        self.try_add(&-rhs).expect("coefficient overflow")
    }
}

impl<C: Coeff> Mul for &Series<C> {
    type Output = Series<C>;
    fn mul(self, rhs: Self) -> Series<C> {
        self.try_mul(rhs).expect("coefficient overflow")
    }
}

impl<C: Coeff> Neg for &Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        Series {
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| c.negated()).collect(),
            trunc: self.trunc,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<C: Coeff> $tr for Series<C> {
            type Output = Series<C>;
            fn $m(self, rhs: Self) -> Series<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coeff> Neg for Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        -&self
    }
}

/// Sums an iterator of series (the zero of the sum is `O(u^trunc)`).
pub fn sum_series<'a, C: Coeff>(
    items: impl IntoIterator<Item = &'a Series<C>>,
    trunc: i64,
) -> Series<C> {
    items
        .into_iter()
        .fold(Series::zero(trunc), |acc, s| &acc + s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }
    use num_bigint::BigInt;

    type Q = Series<BigRational>;

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn poly(terms: &[(i64, i64)], trunc: i64) -> Q {
        Series::from_terms(terms.iter().map(|&(e, c)| (e, ri(c))), trunc)
    }

    #[test]
    fn add_cancels() {
        let a = poly(&[(0, 1), (2, -1)], 10);
        let b = poly(&[(2, 1)], 10);
        assert_eq!(&a + &b, poly(&[(0, 1)], 10));
        assert_eq!(&a + &Q::zero(10), a);
    }

    #[test]
    fn add_takes_min_trunc() {
        let a = poly(&[(-3, 1), (1, 1)], 5);
        let b = poly(&[(-3, 2)], 4);
        let s = &a + &b;
        assert_eq!(s, poly(&[(-3, 3), (1, 1)], 4));
        assert_eq!(s.trunc(), 4);
    }

    #[test]
    fn mul_examples() {
        let geom = Series::from_coeffs(0, vec![ri(1); 12], 12);
        let one_minus_u = poly(&[(0, 1), (1, -1)], 12);
        assert_eq!(&one_minus_u * &geom, Q::one(12));
        let a = poly(&[(-1, 1), (0, 1)], 20);
        let b = poly(&[(1, 1), (0, -1)], 20);
        assert_eq!(&a * &b, poly(&[(-1, -1), (1, 1)], 19));
        assert_eq!(&a * &Q::one(30), a);
    }

    #[test]
    fn mul_truncation_rule() {
        let a = poly(&[(2, 1)], 7);
        let b = poly(&[(-1, 3)], 4);
        let p = &a * &b;
        // min(7 + val(b), 4 + val(a))
        assert_eq!(p.trunc(), 6);
        assert_eq!(p.valuation(), Some(1));
    }

    #[test]
    fn invert_examples() {
        let one_minus_u = poly(&[(0, 1), (1, -1)], 8);
        assert_eq!(
            one_minus_u.invert().unwrap(),
            Series::from_coeffs(0, vec![ri(1); 8], 8)
        );
        let u2 = poly(&[(2, 1)], 40);
        assert_eq!(u2.invert().unwrap(), poly(&[(-2, 1)], -2 + 38));
        let two_plus_u = poly(&[(0, 2), (1, 1)], 5);
        let inv = two_plus_u.invert().unwrap();
        let expect: Vec<BigRational> =
            vec![rat(1, 2), rat(-1, 4), rat(1, 8), rat(-1, 16), rat(1, 32)];
        assert_eq!(inv, Series::from_coeffs(0, expect, 5));
        assert_eq!(Q::zero(5).invert(), Err(SeriesError::ZeroLeadingTerm));
    }

    #[test]
    fn invert_needs_unit_over_integers() {
        let s: Series<BigInt> = Series::from_coeffs(0, vec![2.into(), 1.into()], 4);
        assert!(matches!(s.invert(), Err(SeriesError::NonUnitLeading(_))));
        let t: Series<i128> = Series::from_coeffs(3, vec![-1, 5, 2], 6);
        let inv = t.invert().unwrap();
        assert_eq!(&t * &inv, Series::one(3));
    }

    #[test]
    fn monomial_shift_examples() {
        assert_eq!(Q::one(10).monomial_shift(3, 3), poly(&[(3, -1)], 13));
        assert_eq!(Q::one(10).monomial_shift(-2, -2), poly(&[(-2, 1)], 8));
        let a = poly(&[(0, 1), (1, 1)], 10);
        assert_eq!(a.monomial_shift(1, 1), poly(&[(1, -1), (2, -1)], 11));
    }

    #[test]
    fn zero_series_has_no_valuation() {
        let z = poly(&[(3, 0)], 6);
        assert!(z.is_zero());
        assert_eq!(z.valuation(), None);
        assert_eq!(z.start(), 6);
        assert_eq!(z.coeff(2), Some(ri(0)));
        assert_eq!(z.coeff(6), None);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let s = Series::from_terms(vec![(-3, rat(1, 2)), (4, ri(-7))], 9);
        let t = s.to_text();
        assert_eq!(t, "trunc 9\n-3 1/2\n4 -7/1\n");
        assert_eq!(Q::parse_text(&t).unwrap(), s);
        assert!(Q::parse_text("").is_err());
        assert!(Q::parse_text("trunc 3\n5 1/1\n").is_err());
        assert!(Q::parse_text("1 1/1\n").is_err());
        assert!(Q::parse_text("trunc 9\n2 1/1\n1 1/1\n").is_err());
        assert_eq!(Q::parse_text("trunc 4\n").unwrap(), Q::zero(4));
    }

    #[test]
    fn pretty_printing() {
        let s = poly(&[(-1, -1), (0, 1), (1, 1), (3, -6), (4, 2)], 8);
        assert_eq!(
            s.pretty(),
            "-q^(-1/2) + 1 + q^(1/2) - 6*q^(3/2) + 2*q^2 + O(q^4)"
        );
        assert_eq!(Q::zero(0).pretty(), "O(1)");
    }
}
