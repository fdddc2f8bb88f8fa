//! Linear q-difference operators `sum_j P_j(x, u) σ^j`, where `x` acts as
//! `q^n` and `σ` as the shift `n -> n + 1`, with coefficients that are
//! Laurent polynomials in `x` and `u = q^(1/2)`.
//!
//! Text format: one line `sigma^j : <polynomial in x and q>` per nonzero
//! coefficient, e.g. `sigma^1 : -q^(1/2) + x*q^(5/2)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{nullspace_mod_p, rational_mod_p, rational_reconstruct};
use crate::poly::UPoly;
use crate::qseries::{qpow_text, Series};
use crate::ratfun::{times_series, QPoly, RatFun};
use crate::text::{err, split_group, split_terms, Factor, TextError};

type QSer = Series<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QDiffError {
    #[error("no recursion of order <= {order}, x-degree <= {xdeg}, u-span <= {udeg} annihilates the family")]
    NoRecursion { order: usize, xdeg: i64, udeg: i64 },
    #[error("{unknowns} unknowns need at least {needed} equations, the data gives {equations}")]
    Underdetermined {
        unknowns: usize,
        equations: usize,
        needed: usize,
    },
    #[error("the modular solution does not lift to a verified rational operator")]
    LiftFailed,
    #[error(transparent)]
    Text(#[from] TextError),
}

/// Laurent polynomial in `x` and `u`, keyed by `(x exponent, u exponent)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XUPoly {
    terms: BTreeMap<(i64, i64), BigRational>,
}

impl XUPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0, 0)
    }

    pub fn monomial(c: BigRational, xexp: i64, uexp: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(xexp, uexp, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((i64, i64), BigRational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for ((a, b), c) in terms {
            p.add_term(a, b, c);
        }
        p
    }

    fn add_term(&mut self, a: i64, b: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((a, b)).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing `(x exponent, u exponent)` order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &BigRational)> + '_ {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b, c) in other.terms() {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.terms().map(|(a, b, c)| ((a, b), -c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a1, b1, c1) in self.terms() {
            for (a2, b2, c2) in other.terms() {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_terms(self.terms().map(|(a, b, t)| ((a, b), t * c)))
    }

    /// Multiplies by `x^a u^b`.
    pub fn shift(&self, a: i64, b: i64) -> Self {
        Self::from_terms(self.terms().map(|(x, u, c)| ((x + a, u + b), c.clone())))
    }

    /// `x -> u^k x`.
    pub fn scale_x(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(a, b, c)| ((a, b + k * a), c.clone())))
    }

    /// Value at `x = u^(2n)` as a Laurent polynomial in `u`.
    pub fn at_n(&self, n: i64) -> QPoly {
        QPoly::from_terms(self.terms().map(|(a, b, c)| (2 * n * a + b, c.clone())))
    }

    /// Value at `x = u^(-2n)` with `u -> 1/u`.
    pub fn at_n_inverted(&self, n: i64) -> QPoly {
        QPoly::from_terms(self.terms().map(|(a, b, c)| (-2 * n * a - b, c.clone())))
    }

    /// `u = 1`.
    pub fn at_u_one(&self) -> Self {
        Self::from_terms(self.terms().map(|(a, _, c)| ((a, 0), c.clone())))
    }

    pub fn is_u_free(&self) -> bool {
        self.terms().all(|(_, b, _)| b == 0)
    }

    fn min_x(&self) -> Option<i64> {
        self.terms().map(|t| t.0).min()
    }

    fn min_u(&self) -> Option<i64> {
        self.terms().map(|t| t.1).min()
    }

    /// As a polynomial in `x` (the `u` exponents must all be zero).
    fn to_x_poly(&self) -> UPoly<BigRational> {
        debug_assert!(self.is_u_free());
        UPoly::from_terms(self.terms().map(|(a, _, c)| (a, c.clone())))
    }

    fn from_x_poly(p: &UPoly<BigRational>) -> Self {
        Self::from_terms(p.terms().map(|(a, c)| ((a, 0), c.clone())))
    }

    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut total = Self::zero();
        for term in split_terms(text)? {
            let mut acc = Self::one();
            for f in term.factors {
                let p = match f {
                    Factor::Number(c) => Self::monomial(c, 0, 0),
                    Factor::Var { name, exp } if name == "q" || name == "x" => {
                        let factor = if name == "q" { 2 } else { 1 };
                        let e = &exp * BigRational::from_integer(factor.into());
                        if !e.is_integer() {
                            return Err(err(
                                text,
                                "exponents of x must be integers, of q multiples of 1/2",
                            ));
                        }
                        let e: i64 = e
                            .to_integer()
                            .try_into()
                            .map_err(|_| err(text, "exponent too large"))?;
                        if name == "q" {
                            Self::monomial(BigRational::one(), 0, e)
                        } else {
                            Self::monomial(BigRational::one(), e, 0)
                        }
                    }
                    Factor::Var { name, .. } => {
                        return Err(err(text, format!("unknown variable `{name}`")))
                    }
                    Factor::Group(g) => {
                        let (inner, den) = split_group(&g)?;
                        if den.is_some() {
                            return Err(err(text, "division inside a polynomial"));
                        }
                        Self::parse(&inner)?
                    }
                };
                acc = acc.mul(&p);
            }
            if term.negative {
                acc = acc.neg();
            }
            total = total.add(&acc);
        }
        Ok(total)
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (a, b, c) in self.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            let mut factors = Vec::new();
            let unit = mag.is_one();
            if !unit || (a == 0 && b == 0) {
                factors.push(mag.to_string());
            }
            match a {
                0 => {}
                1 => factors.push("x".into()),
                _ => factors.push(format!("x^{a}")),
            }
            if b != 0 {
                factors.push(qpow_text(b));
            }
            let body = factors.join("*");
            if out.is_empty() {
                out.push_str(if neg { "-" } else { "" });
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for XUPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `sum_j P_j(x, u) σ^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QDiffOperator {
    coeffs: Vec<XUPoly>,
}

impl QDiffOperator {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<XUPoly>) -> Self {
        while coeffs.last().is_some_and(XUPoly::is_zero) {
            coeffs.pop();
        }
        QDiffOperator { coeffs }
    }

    pub fn zero() -> Self {
        QDiffOperator { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of `σ`; zero for the zero operator.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[XUPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> XUPoly {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    /// Content-free form: integer coefficients with gcd one, no common
    /// monomial factor `x^a u^b`, and a positive first coefficient in
    /// `(j, x exponent, u exponent)` order.
    pub fn canonical(&self) -> Self {
        let all = || self.coeffs.iter().flat_map(|p| p.terms());
        let Some((_, _, first)) = all().next() else {
            return Self::zero();
        };
        let lcm = all().fold(BigInt::one(), |l, (_, _, c)| l.lcm(c.denom()));
        let gcd = all().fold(BigInt::zero(), |g, (_, _, c)| {
            g.gcd(&(c.numer() * (&lcm / c.denom())))
        });
        let mut f = BigRational::new(lcm, gcd);
        if first.is_negative() {
            f = -f;
        }
        let amin = self
            .coeffs
            .iter()
            .filter_map(XUPoly::min_x)
            .min()
            .unwrap_or(0);
        let bmin = self
            .coeffs
            .iter()
            .filter_map(XUPoly::min_u)
            .min()
            .unwrap_or(0);
        Self::new(
            self.coeffs
                .iter()
                .map(|p| p.scale(&f).shift(-amin, -bmin))
                .collect(),
        )
    }

    /// Equality up to a nonzero scalar and a monomial `x^a u^b`.
    pub fn same_up_to_units(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }

    /// `u = 1` in every coefficient.
    pub fn classical_limit(&self) -> Self {
        Self::new(self.coeffs.iter().map(XUPoly::at_u_one).collect())
    }

    /// Removes the gcd of the coefficients as polynomials in `x`, for
    /// operators that do not involve `u`; `None` otherwise.
    pub fn x_primitive_part(&self) -> Option<Self> {
        if !self.coeffs.iter().all(XUPoly::is_u_free) {
            return None;
        }
        let polys: Vec<UPoly<BigRational>> = self.coeffs.iter().map(XUPoly::to_x_poly).collect();
        let g = polys.iter().fold(UPoly::zero(), |g, p| g.gcd(p));
        if g.is_zero() {
            return Some(self.clone());
        }
        Some(
            Self::new(
                polys
                    .iter()
                    .map(|p| XUPoly::from_x_poly(&p.div_rem(&g).0))
                    .collect(),
            )
            .canonical(),
        )
    }

    /// `sum_j P_j(q^n, q) f(n + j)`.
    pub fn apply_left<F: Fn(i64) -> QSer>(&self, family: F, n: i64) -> QSer {
        self.apply_with(|p| p.at_n(n), |j| family(n + j as i64))
    }

    /// `sum_j P_j(q^(-n), q^(-1)) f(n + j)`.
    pub fn apply_right<F: Fn(i64) -> QSer>(&self, family: F, n: i64) -> QSer {
        self.apply_with(|p| p.at_n_inverted(n), |j| family(n + j as i64))
    }

    fn apply_with(&self, eval: impl Fn(&XUPoly) -> QPoly, value: impl Fn(usize) -> QSer) -> QSer {
        let mut parts = Vec::new();
        for (j, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            parts.push(times_series(&RatFun::from_poly(eval(p)), &value(j)));
        }
        let trunc = parts
            .iter()
            .map(Series::trunc)
            .min()
            .unwrap_or(i64::MAX / 4);
        parts
            .iter()
            .fold(QSer::zero(trunc), |acc, s| &acc + &s.truncate(trunc))
    }

    pub fn to_text(&self) -> String {
        let mut lines = Vec::new();
        for (j, p) in self.coeffs.iter().enumerate() {
            if !p.is_zero() {
                lines.push(format!("sigma^{j} : {}", p.to_text()));
            }
        }
        if lines.is_empty() {
            "0".into()
        } else {
            lines.join("\n")
        }
    }

    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut coeffs: Vec<XUPoly> = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            if line == "0" {
                continue;
            }
            let (head, body) = line
                .split_once(':')
                .ok_or_else(|| err(line, "expected `sigma^j : ...`"))?;
            let j: usize = head
                .trim()
                .strip_prefix("sigma^")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| err(line, "expected `sigma^j` with j >= 0"))?;
            if coeffs.len() <= j {
                coeffs.resize(j + 1, XUPoly::zero());
            }
            coeffs[j] = coeffs[j].add(&XUPoly::parse(body)?);
        }
        Ok(Self::new(coeffs))
    }
}

impl fmt::Display for QDiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Upper bounds for [`guess`]. The x-exponents of the coefficients range
/// over `0..=xdeg` and the u-exponents over `0..=udeg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessBounds {
    pub order: usize,
    pub xdeg: i64,
    pub udeg: i64,
    /// Surplus of equations over unknowns required before solving.
    pub guard: usize,
}

impl GuessBounds {
    pub fn new(order: usize, xdeg: i64, udeg: i64) -> Self {
        GuessBounds {
            order,
            xdeg,
            udeg,
            guard: 30,
        }
    }
}

/// Number of indices outside the sample range on which a guessed operator
/// is checked exactly.
pub const GUESS_CHECKS: i64 = 3;

struct Samples {
    lo: i64,
    values: Vec<QSer>,
    /// `(valuation, coefficients mod p from the valuation on, trunc)`.
    reduced: Vec<(i64, Vec<u64>, i64)>,
}

impl Samples {
    fn new(lo: i64, values: Vec<QSer>) -> Option<Self> {
        let reduced = values
            .iter()
            .map(|v| {
                let start = v.valuation().unwrap_or(v.trunc());
                let coeffs = (start..v.trunc())
                    .map(|e| rational_mod_p(&v.coeff(e).unwrap_or_default()))
                    .collect::<Option<Vec<u64>>>()?;
                Some((start, coeffs, v.trunc()))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Samples {
            lo,
            values,
            reduced,
        })
    }

    fn get(&self, n: i64) -> &QSer {
        &self.values[(n - self.lo) as usize]
    }

    fn reduced(&self, n: i64) -> &(i64, Vec<u64>, i64) {
        &self.reduced[(n - self.lo) as usize]
    }
}

fn unknown_index(xd: i64, ud: i64, j: usize, a: i64, b: i64) -> usize {
    (j * (xd as usize + 1) + a as usize) * (ud as usize + 1) + b as usize
}

/// Rows mod p of the linear system for window `(ord, xd, ud)` at sample
/// `n`: one row per u-exponent where every contributing coefficient is known.
fn equations_at(s: &Samples, ord: usize, xd: i64, ud: i64, n: i64) -> Vec<Vec<u64>> {
    let ncols = (ord + 1) * (xd as usize + 1) * (ud as usize + 1);
    let shift_lo = (0..=xd).map(|a| 2 * n * a).min().unwrap();
    let lo = (0..=ord).map(|j| s.reduced(n + j as i64).0).min().unwrap();
    let hi = (0..=ord).map(|j| s.reduced(n + j as i64).2).min().unwrap() + shift_lo;
    let mut rows = Vec::new();
    for e in (lo + shift_lo)..hi {
        let mut row = vec![0u64; ncols];
        let mut any = false;
        for j in 0..=ord {
            let (start, coeffs, _) = s.reduced(n + j as i64);
            for a in 0..=xd {
                for b in 0..=ud {
                    let k = e - 2 * n * a - b - start;
                    if k < 0 || k as usize >= coeffs.len() {
                        continue;
                    }
                    let c = coeffs[k as usize];
                    if c != 0 {
                        row[unknown_index(xd, ud, j, a, b)] = c;
                        any = true;
                    }
                }
            }
        }
        if any {
            rows.push(row);
        }
    }
    rows
}

fn system(s: &Samples, range: &RangeInclusive<i64>, ord: usize, xd: i64, ud: i64) -> Vec<Vec<u64>> {
    range
        .clone()
        .flat_map(|n| equations_at(s, ord, xd, ud, n))
        .collect()
}

fn nullspace_of(
    s: &Samples,
    range: &RangeInclusive<i64>,
    ord: usize,
    xd: i64,
    ud: i64,
) -> Vec<Vec<u64>> {
    let ncols = (ord + 1) * (xd as usize + 1) * (ud as usize + 1);
    nullspace_mod_p(system(s, range, ord, xd, ud), ncols)
}

fn has_solution(s: &Samples, range: &RangeInclusive<i64>, ord: usize, xd: i64, ud: i64) -> bool {
    !nullspace_of(s, range, ord, xd, ud).is_empty()
}

fn operator_from(v: &[BigRational], ord: usize, xd: i64, ud: i64) -> QDiffOperator {
    let mut coeffs = vec![XUPoly::zero(); ord + 1];
    for (j, p) in coeffs.iter_mut().enumerate() {
        for a in 0..=xd {
            for b in 0..=ud {
                let c = &v[unknown_index(xd, ud, j, a, b)];
                if !c.is_zero() {
                    p.add_term(a, b, c.clone());
                }
            }
        }
    }
    QDiffOperator::new(coeffs)
}

/// Smallest `k` in `0..=hi` with `ok(k)`, assuming `ok` is monotone and
/// `ok(hi)` holds.
fn least(hi: i64, ok: impl Fn(i64) -> bool) -> i64 {
    let (mut lo, mut hi) = (0, hi);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Finds a q-difference operator annihilating `family` at every `n` in
/// `range` to the precision of the data, minimal in `(order, xdeg, udeg)`
/// lexicographically. The system is solved modulo a prime, lifted to the
/// rationals and then checked exactly on `range` and on the next
/// [`GUESS_CHECKS`] indices.
pub fn guess<F: Fn(i64) -> QSer>(
    family: F,
    bounds: &GuessBounds,
    range: RangeInclusive<i64>,
) -> Result<QDiffOperator, QDiffError> {
    let lo = *range.start();
    let hi = *range.end() + bounds.order as i64 + GUESS_CHECKS;
    let samples =
        Samples::new(lo, (lo..=hi).map(&family).collect()).ok_or(QDiffError::LiftFailed)?;
    let unknowns = (bounds.order + 1) * (bounds.xdeg as usize + 1) * (bounds.udeg as usize + 1);
    let equations = system(&samples, &range, bounds.order, bounds.xdeg, bounds.udeg).len();
    if equations < unknowns + bounds.guard {
        return Err(QDiffError::Underdetermined {
            unknowns,
            equations,
            needed: unknowns + bounds.guard,
        });
    }
    for ord in 1..=bounds.order {
        if !has_solution(&samples, &range, ord, bounds.xdeg, bounds.udeg) {
            continue;
        }
        let xd = least(bounds.xdeg, |xd| {
            has_solution(&samples, &range, ord, xd, bounds.udeg)
        });
        let ud = least(bounds.udeg, |ud| {
            has_solution(&samples, &range, ord, xd, ud)
        });
        let basis = nullspace_of(&samples, &range, ord, xd, ud);
        let v = basis.last().ok_or(QDiffError::LiftFailed)?;
        let lifted: Option<Vec<BigRational>> = v.iter().map(|&x| rational_reconstruct(x)).collect();
        let op = operator_from(&lifted.ok_or(QDiffError::LiftFailed)?, ord, xd, ud).canonical();
        let checks = lo..=(*range.end() + GUESS_CHECKS);
        if checks
            .clone()
            .all(|n| annihilates(&op, |m| samples.get(m).clone(), n))
        {
            return Ok(op);
        }
        return Err(QDiffError::LiftFailed);
    }
    Err(QDiffError::NoRecursion {
        order: bounds.order,
        xdeg: bounds.xdeg,
        udeg: bounds.udeg,
    })
}

fn annihilates(op: &QDiffOperator, family: impl Fn(i64) -> QSer, n: i64) -> bool {
    op.apply_left(family, n).is_zero()
}

/// `f(x)` with `a = f(x) b`, for operators whose coefficients do not
/// involve `u` (for instance classical limits); `None` if no such `f`
/// exists or if `u` occurs.
pub fn ratio_check(a: &QDiffOperator, b: &QDiffOperator) -> Option<XRatio> {
    if a.order() != b.order() || b.is_zero() {
        return None;
    }
    if !a.coeffs.iter().chain(&b.coeffs).all(XUPoly::is_u_free) {
        return None;
    }
    let j = (0..=b.order()).find(|&j| !b.coeff(j).is_zero())?;
    let ratio = XRatio::new(a.coeff(j).to_x_poly(), b.coeff(j).to_x_poly())?;
    let ok = (0..=a.order()).all(|i| {
        let lhs = &a.coeff(i).to_x_poly() * &ratio.den;
        let rhs = &b.coeff(i).to_x_poly() * &ratio.num;
        lhs == rhs
    });
    ok.then_some(ratio)
}

/// Rational function of `x` in lowest terms with a monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XRatio {
    pub num: UPoly<BigRational>,
    pub den: UPoly<BigRational>,
}

impl XRatio {
    pub fn new(num: UPoly<BigRational>, den: UPoly<BigRational>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        let shift = den.low().unwrap();
        let (num, den) = (num.shift(-shift), den.shift(-shift));
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead = den.leading_coeff().unwrap().clone();
        let inv = BigRational::one() / lead;
        Some(XRatio {
            num: num.scale(&inv),
            den: den.scale(&inv),
        })
    }

    pub fn from_xu(num: &XUPoly, den: &XUPoly) -> Option<Self> {
        Self::new(num.to_x_poly(), den.to_x_poly())
    }

    pub fn to_text(&self) -> String {
        let n = XUPoly::from_x_poly(&self.num).to_text();
        if self.den == UPoly::one() {
            n
        } else {
            format!("({n})/({})", XUPoly::from_x_poly(&self.den).to_text())
        }
    }
}

fn xu(text: &str) -> XUPoly {
    XUPoly::parse(text).expect("transcribed operator")
}

/// The operator annihilating the colored blocks and both sides of the
/// rotated index of `4_1`.
pub fn ahat_41() -> QDiffOperator {
    QDiffOperator::new(vec![
        xu("q^2*x^2*(q^3*x^2 - 1)"),
        xu("-q^(1/2)*(1 - q^2*x^2)*(1 - q*x - q*x^2 - q^3*x^2 - q^3*x^3 + q^4*x^4)"),
        xu("q^3*x^2*(-1 + q*x^2)"),
    ])
}

/// The left operator of the `4_1:O1` inserted index.
pub fn ahat_41_o1() -> QDiffOperator {
    QDiffOperator::new(vec![
        xu("q^(3/2)*x^2*(-1 + q^3*x^2)*(1 + q*x + q^3*x^2)"),
        xu("(-1 + q*x)*(1 + q*x)*(1 + x - q*x - q*x^2 - q^3*x^2 - q*x^3 - 2*q^3*x^3 - q^5*x^3 - q^3*x^4 - q^5*x^4 + q^4*x^5 - q^5*x^5 + q^6*x^6)"),
        xu("q^(7/2)*x^2*(-1 + q*x^2)*(1 + x + q*x^2)"),
    ])
}

/// The left operator of the `4_1:O2` inserted index.
pub fn ahat_41_o2() -> QDiffOperator {
    QDiffOperator::new(vec![
        xu("q^(3/2)*x^2*(-1 + q^2*x)*(1 + q^2*x)"),
        xu("(-1 + q^3*x^2)*(1 - q*x - q^2*x^2 - q^4*x^2 - q^4*x^3 + q^6*x^4)"),
        xu("q^(7/2)*x^2*(-1 + q*x)*(1 + q*x)"),
    ])
}

/// The order-3 operator of the `5_2` colored blocks as printed, with the
/// backward shifts `h_(n-j)` rewritten as forward shifts from `n - 3`.
/// The printed middle coefficients contain repeated terms that are kept
/// verbatim.
pub fn ahat_52_printed() -> QDiffOperator {
    let backward = [
        xu("-q^-2*x^2*(1 - q^-2*x)*(1 + q^-2*x)*(1 - q^-5*x^2)"),
        xu("q^(3/2)*x^-3*(1 - q^-1*x)*(1 + q^-1*x)*(1 - q^-5*x^2)*(1 - q^-1*x - q^-1*x^2 - q^-4*x^2 + q^-2*x^2 + q^-3*x^2 + q^-2*x^3 + q^-5*x^3 + q^-5*x^4 + q^-5*x^4 - q^-6*x^5)"),
        xu("q^5*x^-5*(1 - q^-2*x)*(1 + q^-2*x)*(1 - q^-1*x^2)*(1 - q^-2*x - q^-2*x - q^-2*x^2 - q^-5*x^2 + q^-4*x^3 + q^-7*x^3 - q^-5*x^3 - q^-6*x^3 + q^-7*x^4 - q^-9*x^5)"),
        xu("q^(11/2)*x^-5*(1 - q^-1*x)*(1 + q^-1*x)*(1 - q^-1*x^2)"),
    ];
    from_backward(&backward)
}

/// `sum_j P_j(q^n) h(n - j) = 0` as a forward operator acting at `n - r`.
pub fn from_backward(backward: &[XUPoly]) -> QDiffOperator {
    let r = backward.len().saturating_sub(1);
    let mut coeffs = vec![XUPoly::zero(); r + 1];
    for (j, p) in backward.iter().enumerate() {
        coeffs[r - j] = p.scale_x(2 * r as i64);
    }
    QDiffOperator::new(coeffs)
}

/// Classical-limit ratios of the inserted 4_1 operators to `Â_{4_1}` at
/// `q = 1` (`primitive = false`) or to its primitive part in `x`.
pub fn fig8_classical_ratios(primitive: bool) -> HashMap<&'static str, Option<XRatio>> {
    let mut base = ahat_41().classical_limit();
    if primitive {
        base = base.x_primitive_part().expect("u-free");
    }
    HashMap::from([
        (
            "4_1:O1",
            ratio_check(&ahat_41_o1().classical_limit(), &base),
        ),
        (
            "4_1:O2",
            ratio_check(&ahat_41_o2().classical_limit(), &base),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsum::IndexEngine;
    use crate::nzdata::builtin_reduced;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// `n -> q^(n(n+1)/2)`, annihilated by `σ - q x`.
    fn qpow_family(trunc: i64) -> impl Fn(i64) -> QSer {
        move |n| QSer::monomial(r(1), n * (n + 1), trunc)
    }

    #[test]
    fn parse_and_print() {
        let p = XUPoly::parse("-q^(1/2)*(1 - q^2*x^2) + 3/2*x^-1").unwrap();
        assert_eq!(p.to_text(), "3/2*x^-1 - q^(1/2) + x^2*q^(5/2)");
        assert_eq!(XUPoly::parse(&p.to_text()).unwrap(), p);
        let op = ahat_41();
        assert_eq!(QDiffOperator::parse(&op.to_text()).unwrap(), op);
        assert!(XUPoly::parse("y").is_err());
        assert!(XUPoly::parse("x^(1/2)").is_err());
        assert!(QDiffOperator::parse("sigma^a : 1").is_err());
    }

    #[test]
    fn trivial_operators() {
        let shift = QDiffOperator::parse("sigma^0 : -x*q\nsigma^1 : 1").unwrap();
        let fam = qpow_family(20);
        assert!(shift.apply_left(&fam, 3).is_zero());
        assert!(QDiffOperator::zero().apply_left(&fam, 0).is_zero());
        let id = QDiffOperator::new(vec![XUPoly::one()]);
        assert_eq!(id.apply_right(&fam, 2), fam(2));
        let plain = |n: i64| QSer::monomial(r(1), 2 * n, 40);
        let q_shift = QDiffOperator::parse("sigma^0 : -q\nsigma^1 : 1").unwrap();
        assert!(q_shift.apply_left(plain, -2).is_zero());
        assert!(!shift.apply_left(plain, 1).is_zero());
        assert_eq!(
            shift.classical_limit(),
            QDiffOperator::parse("sigma^0 : -x\nsigma^1 : 1").unwrap()
        );
    }

    #[test]
    fn guess_finds_the_shift() {
        let op = guess(qpow_family(60), &GuessBounds::new(2, 2, 4), 0..=6).unwrap();
        assert_eq!(
            op,
            QDiffOperator::parse("sigma^0 : -x*q\nsigma^1 : 1")
                .unwrap()
                .canonical()
        );
    }

    #[test]
    fn guess_rejects_thin_data() {
        let e = guess(qpow_family(4), &GuessBounds::new(2, 6, 10), 0..=1).unwrap_err();
        assert!(matches!(e, QDiffError::Underdetermined { .. }));
    }

    #[test]
    fn canonical_form_removes_units() {
        let op = ahat_41();
        let scaled = QDiffOperator::new(
            op.coeffs()
                .iter()
                .map(|p| {
                    p.scale(&BigRational::new((-3).into(), 7.into()))
                        .shift(2, -5)
                })
                .collect(),
        );
        assert!(scaled.same_up_to_units(&op));
        let c = op.canonical();
        assert_eq!(c.canonical(), c);
    }

    #[test]
    fn fig8_window_is_annihilated_on_both_sides() {
        let nz = builtin_reduced("4_1").unwrap();
        let eng = IndexEngine::new();
        let t = 40;
        let op = ahat_41();
        for np in 0..2 {
            let rows = |n: i64| eng.rotated_index(&nz, n, np, t).unwrap().to_rational();
            for n in -1..2 {
                assert!(op.apply_left(rows, n).is_zero(), "left n={n} n'={np}");
            }
        }
        for n in 0..2 {
            let cols = |np: i64| eng.rotated_index(&nz, n, np, t).unwrap().to_rational();
            for np in -1..2 {
                assert!(op.apply_right(cols, np).is_zero(), "right n={n} n'={np}");
            }
        }
    }

    #[test]
    fn classical_ratios() {
        let literal = fig8_classical_ratios(false);
        assert_eq!(literal["4_1:O1"].as_ref().unwrap().to_text(), "1 + x + x^2");
        assert_eq!(literal["4_1:O2"].as_ref().unwrap().to_text(), "1");
        let primitive = fig8_classical_ratios(true);
        assert_eq!(
            primitive["4_1:O1"].as_ref().unwrap().to_text(),
            "-1 - x + x^3 + x^4"
        );
        assert_eq!(primitive["4_1:O2"].as_ref().unwrap().to_text(), "-1 + x^2");
        let base = ahat_41().classical_limit().x_primitive_part().unwrap();
        let inv = ratio_check(&base, &ahat_41_o2().classical_limit()).unwrap();
        assert_eq!(inv.to_text(), "(1)/(-1 + x^2)");
        assert_eq!(ratio_check(&base, &base).unwrap().to_text(), "1");
        assert!(ratio_check(&ahat_41(), &ahat_41()).is_none());
    }

    #[test]
    fn backward_rewrite() {
        // h(n) - q^n h(n-1) = 0 becomes h(m+1) - q^(m+1) h(m) = 0
        let op = from_backward(&[XUPoly::one(), xu("-x")]);
        assert_eq!(
            op,
            QDiffOperator::parse("sigma^0 : -x*q\nsigma^1 : 1").unwrap()
        );
    }
}
