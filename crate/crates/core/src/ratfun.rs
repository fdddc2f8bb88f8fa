//! Rational functions of `u = q^(1/2)` over the rationals, and their
//! reconstruction from truncated series.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::nullspace_rational;
use crate::poly::UPoly;
use crate::qseries::Series;
use crate::scalar::Coeff;
use crate::text::{err, split_group, split_terms, Factor, TextError};

pub type QPoly = UPoly<BigRational>;
type QSer = Series<BigRational>;

/// Default number of extra coefficients a reconstruction has to match.
pub const DEFAULT_GUARD: i64 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatFunError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("no rational function with u-degrees ({num_deg}, {den_deg}) matches the series")]
    NoReconstruction { num_deg: i64, den_deg: i64 },
    #[error("series has {have} known coefficients, reconstruction needs {need}")]
    InsufficientPrecision { have: i64, need: i64 },
    #[error(transparent)]
    Text(#[from] TextError),
}

/// `num / den`, kept in a canonical form: `den` is an ordinary polynomial
/// with nonzero constant term and leading coefficient one, and
/// `gcd(num, den) = 1`. Any power of `u` lives in `num`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: QPoly,
    den: QPoly,
}

impl RatFun {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let (nl, dl) = (num.low().unwrap(), den.low().unwrap());
        let n = num.shift(-nl);
        let d = den.shift(-dl);
        let g = n.gcd(&d);
        let (n, _) = n.div_rem(&g);
        let (d, _) = d.div_rem(&g);
        let lc = d.leading_coeff().unwrap().recip();
        Ok(RatFun {
            num: n.scale(&lc).shift(nl - dl),
            den: d.scale(&lc),
        })
    }

    pub fn from_poly(p: QPoly) -> Self {
        Self::new(p, QPoly::one()).unwrap()
    }

    pub fn zero() -> Self {
        RatFun {
            num: QPoly::zero(),
            den: QPoly::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(QPoly::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(QPoly::constant(c))
    }

    /// `c * u^exp`
    pub fn monomial(c: BigRational, exp: i64) -> Self {
        Self::from_poly(QPoly::monomial(c, exp))
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True if the denominator is one.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one_poly()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
        .unwrap()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den).unwrap()
    }

    pub fn inv(&self) -> Result<Self, RatFunError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self, RatFunError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Laurent expansion around `u = 0`, known to `O(u^trunc)`.
    pub fn series_of(&self, trunc: i64) -> QSer {
        if self.num.is_zero() {
            return QSer::zero(trunc);
        }
        let nl = self.num.low().unwrap();
        let inv_den = self
            .den
            .to_series((trunc - nl).max(1))
            .invert()
            .expect("canonical denominator has a nonzero constant term");
        (&self.num.to_series(trunc) * &inv_den).truncate(trunc)
    }

    /// Substitutes `u = 1`; `None` if the denominator vanishes there.
    pub fn at_one(&self) -> Option<BigRational> {
        let d = self.den.at_one();
        (!d.is_zero()).then(|| self.num.at_one() / d)
    }

    /// `(<num>)/(<den>)` with terms in ascending powers of `u`.
    pub fn to_text(&self) -> String {
        format!("({})/({})", self.num.to_text(), self.den.to_text())
    }

    /// Like [`RatFun::to_text`] but a polynomial is written bare.
    pub fn pretty(&self) -> String {
        if self.den.is_one_poly() {
            self.num.to_text()
        } else {
            self.to_text()
        }
    }

    /// Reads `(<num>)/(<den>)`, `(<poly>)` or a bare polynomial in `q`.
    pub fn parse(text: &str) -> Result<Self, RatFunError> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t.starts_with('(') {
            if let Ok((num, den)) = split_group(&t) {
                let num = parse_qpoly(&num)?;
                let den = match den {
                    Some(d) => parse_qpoly(&d)?,
                    None => QPoly::one(),
                };
                return Self::new(num, den);
            }
        }
        Ok(Self::from_poly(parse_qpoly(&t)?))
    }
}

impl QPoly {
    fn is_one_poly(&self) -> bool {
        self.low() == Some(0) && self.high() == Some(0) && self.coeffs()[0].is_one()
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses a Laurent polynomial in `q` (half-integer exponents allowed),
/// such as `2 - q + q^(1/2)`. Parenthesised sub-expressions are expanded.
pub fn parse_qpoly(text: &str) -> Result<QPoly, TextError> {
    let mut total = QPoly::zero();
    for term in split_terms(text)? {
        let mut acc = QPoly::one();
        for f in term.factors {
            let p = match f {
                Factor::Number(c) => QPoly::constant(c),
                Factor::Var { name, exp } if name == "q" => {
                    let twice = &exp * BigRational::from_integer(2.into());
                    if !twice.is_integer() {
                        return Err(err(text, "q exponents must be multiples of 1/2"));
                    }
                    let e: i64 = twice
                        .to_integer()
                        .try_into()
                        .map_err(|_| err(text, "exponent too large"))?;
                    QPoly::u_pow(e)
                }
                Factor::Var { name, .. } if name == "u" => {
                    return Err(err(text, "write powers of q, not u"));
                }
                Factor::Var { name, .. } => {
                    return Err(err(text, format!("unknown variable `{name}`")))
                }
                Factor::Group(g) => {
                    let (inner, den) = split_group(&g)?;
                    if den.is_some() {
                        return Err(err(text, "division inside a polynomial"));
                    }
                    parse_qpoly(&inner)?
                }
            };
            acc = &acc * &p;
        }
        if term.negative {
            acc = -acc;
        }
        total = &total + &acc;
    }
    Ok(total)
}

/// Finds `f = u^v p/r` with `span(p) <= num_deg`, `deg r <= den_deg`
/// (u-units, `v` the valuation of `s`) whose expansion agrees with `s` on
/// all of its known coefficients. The linear solve uses
/// `num_deg + den_deg + 1` coefficients; at least `guard` more must be
/// available and are checked.
pub fn reconstruct(
    s: &QSer,
    num_deg: i64,
    den_deg: i64,
    guard: i64,
) -> Result<RatFun, RatFunError> {
    let Some(v) = s.valuation() else {
        return Ok(RatFun::zero());
    };
    let need = num_deg + den_deg + 1 + guard;
    if s.precision() < need {
        return Err(RatFunError::InsufficientPrecision {
            have: s.precision(),
            need,
        });
    }
    let t = s.coeffs();
    let dd = den_deg as usize;
    let dn = num_deg as usize;
    // sum_j r_j t_{i-j} = 0 for dn < i <= dn + dd
    let rows: Vec<Vec<BigRational>> = (dn + 1..=dn + dd)
        .map(|i| {
            (0..=dd)
                .map(|j| {
                    if j <= i {
                        t[i - j].clone()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let basis = nullspace_rational(&rows, dd + 1);
    let fail = RatFunError::NoReconstruction { num_deg, den_deg };
    let r = basis.into_iter().next().ok_or(fail.clone())?;
    let mut p = vec![BigRational::zero(); dn + 1];
    for (i, slot) in p.iter_mut().enumerate() {
        for j in 0..=dd.min(i) {
            *slot += &r[j] * &t[i - j];
        }
    }
    let candidate = RatFun::new(QPoly::new(v, p), QPoly::new(0, r)).map_err(|_| fail.clone())?;
    if candidate.series_of(s.trunc()) == *s {
        Ok(candidate)
    } else {
        Err(fail)
    }
}

/// Tries degree bounds `(d, d)` for `d = 0, 1, ..., max_deg` and returns the
/// first success.
pub fn reconstruct_incremental(s: &QSer, max_deg: i64, guard: i64) -> Result<RatFun, RatFunError> {
    let mut last = RatFunError::NoReconstruction {
        num_deg: max_deg,
        den_deg: max_deg,
    };
    for d in 0..=max_deg {
        match reconstruct(s, d, d, guard) {
            Ok(f) => return Ok(f),
            Err(e @ RatFunError::InsufficientPrecision { .. }) => return Err(e),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Evaluates a rational function at `x` given as a series (used when a
/// coefficient multiplies a computed series).
pub fn times_series<C: Coeff>(f: &RatFun, s: &Series<C>) -> QSer {
    let s = s.to_rational();
    if f.is_zero() {
        return QSer::zero(s.trunc());
    }
    let rel = s.precision();
    let lead = f.num.low().unwrap();
    let fs = f.series_of(lead + rel.max(0));
    &fs * &s
}
