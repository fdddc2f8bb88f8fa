//! Colored holomorphic blocks of `4_1` and `5_2`, the auxiliary series
//! `E_ℓ`, `H_n`, `H^(2)_n`, and the bilinear factorization of the rotated
//! index.
//!
//! Every block is written once against an evaluation context that is either
//! `q` or `q^(-1)`. At `q^(-1)` the building blocks are rewritten into
//! series in `u` with
//! `(q^-1; q^-1)_m = (-1)^m q^(-m(m+1)/2) (q; q)_m`, `E_ℓ(q^-1) = -E_ℓ(q)`,
//! `H_m(q^-1) = -m - H_m(q)` and `H^(2)_m(q^-1) = H^(2)_m(q)`.
//! `(q^-1, q^-1)_m` is read as the Pochhammer symbol `(q^-1; q^-1)_m`.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::indexsum::{IndexEngine, IndexError};
use crate::nzdata::builtin_reduced;
use crate::poly::{one_minus_q, UPoly};
use crate::qseries::Series;
use crate::tetindex::div_one_minus_qa;

type QSer = Series<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("E_{0} is not supported (only E_1 and E_2 occur)")]
    UnsupportedEll(u32),
    #[error("unknown knot `{0}` (blocks exist for 4_1 and 5_2)")]
    UnknownKnot(String),
    #[error("block index alpha = {alpha} out of range for {knot}")]
    BadAlpha { knot: String, alpha: u32 },
    #[error("term valuations of the k-sum do not increase beyond k = {k}")]
    DivergentRewrite { k: i64 },
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKnot {
    Fig8,
    FiveTwo,
}

impl BlockKnot {
    pub fn parse(name: &str) -> Result<Self, BlockError> {
        match name {
            "4_1" => Ok(BlockKnot::Fig8),
            "5_2" => Ok(BlockKnot::FiveTwo),
            _ => Err(BlockError::UnknownKnot(name.into())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockKnot::Fig8 => "4_1",
            BlockKnot::FiveTwo => "5_2",
        }
    }

    /// Number of blocks.
    pub fn blocks(self) -> u32 {
        match self {
            BlockKnot::Fig8 => 2,
            BlockKnot::FiveTwo => 3,
        }
    }
}

impl fmt::Display for BlockKnot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `h^(alpha)_n` of a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockId {
    pub knot: BlockKnot,
    pub alpha: u32,
    pub n: i64,
}

impl BlockId {
    pub fn new(knot: BlockKnot, alpha: u32, n: i64) -> Result<Self, BlockError> {
        if alpha >= knot.blocks() {
            return Err(BlockError::BadAlpha {
                knot: knot.name().into(),
                alpha,
            });
        }
        Ok(BlockId { knot, alpha, n })
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// `E_ℓ(q) = ζ(1-ℓ)/2 + sum_(s>=1) s^(ℓ-1) q^s/(1-q^s)` for `ℓ = 1, 2`.
pub fn eisenstein(ell: u32, trunc: i64) -> Result<QSer, BlockError> {
    let constant = match ell {
        1 => frac(-1, 4),
        2 => frac(-1, 24),
        _ => return Err(BlockError::UnsupportedEll(ell)),
    };
    let len = trunc.max(0) as usize;
    let mut c = vec![BigRational::zero(); len];
    if len > 0 {
        c[0] = constant;
    }
    // the coefficient of q^m is the sum of d^(ℓ-1) over the divisors d of m
    for s in 1..=(len / 2) {
        let w = rat((s as i64).pow(ell - 1));
        let mut m = s;
        while 2 * m < len {
            c[2 * m] += &w;
            m += s;
        }
    }
    Ok(Series::from_coeffs(0, c, trunc))
}

/// `H_n = sum_(j=1..n) q^j/(1-q^j)` (`kind = 1`) or
/// `H^(2)_n = sum_(j=1..n) q^j/(1-q^j)^2` (`kind = 2`).
pub fn q_harmonic(n: u64, kind: u32, trunc: i64) -> QSer {
    assert!(kind == 1 || kind == 2, "q-harmonic kind is 1 or 2");
    let len = trunc.max(0) as usize;
    let mut c = vec![BigRational::zero(); len];
    for j in 1..=n as usize {
        // q^j/(1-q^j) = sum_(r>=1) q^(jr), q^j/(1-q^j)^2 = sum_(r>=1) r q^(jr)
        let mut r = 1;
        while 2 * j * r < len {
            c[2 * j * r] += if kind == 1 { rat(1) } else { rat(r as i64) };
            r += 1;
        }
    }
    Series::from_coeffs(0, c, trunc)
}

/// Series factors shared across terms, valid to a fixed truncation.
struct Cache {
    trunc: i64,
    inv_poch: Vec<QSer>,
    e1: QSer,
    e2: QSer,
    h: Vec<QSer>,
    h2: Vec<QSer>,
}

impl Cache {
    fn new(trunc: i64) -> Self {
        Cache {
            trunc,
            inv_poch: vec![QSer::one(trunc)],
            e1: eisenstein(1, trunc).unwrap(),
            e2: eisenstein(2, trunc).unwrap(),
            h: vec![QSer::zero(trunc).truncate(trunc)],
            h2: vec![QSer::zero(trunc).truncate(trunc)],
        }
    }

    /// `1/(q;q)_m`.
    fn inv_poch(&mut self, m: i64) -> &QSer {
        while self.inv_poch.len() <= m as usize {
            let j = self.inv_poch.len();
            let prev = self.inv_poch.last().unwrap();
            let mut c: Vec<BigRational> = (0..self.trunc.max(0))
                .map(|e| prev.coeff(e).unwrap_or_default())
                .collect();
            div_one_minus_qa(&mut c, 2 * j).expect("exact arithmetic");
            self.inv_poch.push(Series::from_coeffs(0, c, self.trunc));
        }
        &self.inv_poch[m as usize]
    }

    fn h(&mut self, m: i64) -> QSer {
        while self.h.len() <= m as usize {
            let j = self.h.len() as u64;
            let next = &self.h[j as usize - 1] + &single_harmonic(j, 1, self.trunc);
            self.h.push(next);
        }
        self.h[m as usize].clone()
    }

    fn h2(&mut self, m: i64) -> QSer {
        while self.h2.len() <= m as usize {
            let j = self.h2.len() as u64;
            let next = &self.h2[j as usize - 1] + &single_harmonic(j, 2, self.trunc);
            self.h2.push(next);
        }
        self.h2[m as usize].clone()
    }
}

fn single_harmonic(j: u64, kind: u32, trunc: i64) -> QSer {
    let upto = q_harmonic(j, kind, trunc);
    if j == 1 {
        return upto;
    }
    &upto - &q_harmonic(j - 1, kind, trunc)
}

/// Evaluation at `q` or at `q^(-1)`.
struct Ctx<'a> {
    inverse: bool,
    cache: &'a mut Cache,
}

impl Ctx<'_> {
    fn trunc(&self) -> i64 {
        self.cache.trunc
    }

    fn constant(&self, c: BigRational) -> QSer {
        QSer::monomial(c, 0, self.trunc())
    }

    fn e(&mut self, ell: u32) -> QSer {
        let s = if ell == 1 {
            self.cache.e1.clone()
        } else {
            self.cache.e2.clone()
        };
        if self.inverse {
            -s
        } else {
            s
        }
    }

    fn h(&mut self, m: i64) -> QSer {
        let s = self.cache.h(m);
        if self.inverse {
            &(-s) - &self.constant(rat(m))
        } else {
            s
        }
    }

    fn h2(&mut self, m: i64) -> QSer {
        self.cache.h2(m)
    }
}

/// `c u^uexp prod(polys) / prod((q;q)_m) * bracket`, all factors except the
/// monomial having nonnegative valuation.
struct Term {
    c: BigRational,
    uexp: i64,
    polys: Vec<UPoly<BigRational>>,
    dens: Vec<i64>,
}

impl Term {
    fn new(sign_exp: i64) -> Self {
        Term {
            c: if sign_exp.rem_euclid(2) == 0 {
                rat(1)
            } else {
                rat(-1)
            },
            uexp: 0,
            polys: Vec::new(),
            dens: Vec::new(),
        }
    }

    fn times(mut self, c: BigRational) -> Self {
        self.c *= c;
        self
    }

    fn sign(mut self, exp: i64) -> Self {
        if exp.rem_euclid(2) == 1 {
            self.c = -self.c;
        }
        self
    }

    /// `q^(e/2)` in the context.
    fn mono(mut self, inv: bool, u_exp: i64) -> Self {
        self.uexp += if inv { -u_exp } else { u_exp };
        self
    }

    /// Divides by `(q;q)_m` in the context.
    fn den_qq(mut self, inv: bool, m: i64) -> Self {
        if inv {
            self = self.sign(m);
            self.uexp += m * (m + 1);
        }
        self.dens.push(m);
        self
    }

    /// Divides by `(q^-1;q^-1)_m` in the context.
    fn den_qiqi(mut self, inv: bool, m: i64) -> Self {
        if !inv {
            self = self.sign(m);
            self.uexp += m * (m + 1);
        }
        self.dens.push(m);
        self
    }

    /// Multiplies by `(q^-1;q^-1)_m` in the context.
    fn num_qiqi(mut self, inv: bool, m: i64) -> Self {
        if !inv {
            self = self.sign(m);
            self.uexp -= m * (m + 1);
        }
        self.polys.push(poch_poly(m));
        self
    }

    /// Value to the context truncation, with `bracket` evaluated lazily.
    fn eval(self, ctx: &mut Ctx, bracket: impl FnOnce(&mut Ctx) -> QSer) -> QSer {
        let t = ctx.trunc();
        let inner_trunc = t - self.uexp;
        if inner_trunc <= 0 {
            return QSer::zero(t);
        }
        let mut s = QSer::monomial(self.c, 0, inner_trunc);
        for p in &self.polys {
            s = &s * &p.to_series(inner_trunc);
        }
        for &m in &self.dens {
            s = &s * &ctx.cache.inv_poch(m).truncate(inner_trunc);
        }
        s = &s * &bracket(ctx).truncate(inner_trunc);
        s.monomial_shift(self.uexp, 0)
    }
}

/// `(q;q)_m` as a polynomial in `u`.
fn poch_poly(m: i64) -> UPoly<BigRational> {
    (1..=m).fold(UPoly::one(), |acc, j| &acc * &one_minus_q(j))
}

/// Sums `term(k)` over `k >= 0`. `lead(k)` bounds the valuation of the
/// k-th term from below; summation stops once it reaches the truncation,
/// after checking that it keeps increasing.
fn infinite_sum(
    ctx: &mut Ctx,
    lead: impl Fn(i64) -> i64,
    mut term: impl FnMut(&mut Ctx, i64) -> QSer,
) -> Result<QSer, BlockError> {
    let t = ctx.trunc();
    let mut acc = QSer::zero(t);
    const MAX_TERMS: i64 = 1 << 20;
    for k in 0..MAX_TERMS {
        if lead(k) >= t {
            if lead(k + 1) <= lead(k) || lead(k + 2) - lead(k + 1) < lead(k + 1) - lead(k) {
                return Err(BlockError::DivergentRewrite { k });
            }
            return Ok(acc);
        }
        acc = &acc + &term(ctx, k);
    }
    Err(BlockError::DivergentRewrite { k: MAX_TERMS })
}

fn finite_sum(ctx: &mut Ctx, count: i64, mut term: impl FnMut(&mut Ctx, i64) -> QSer) -> QSer {
    let mut acc = QSer::zero(ctx.trunc());
    for k in 0..count {
        acc = &acc + &term(ctx, k);
    }
    acc
}

fn fig8_base(inv: bool, n: i64, k: i64) -> Term {
    let a = n.abs();
    Term::new(n + k)
        .mono(inv, a * (2 * a + 1) + k * (k + 1) + 2 * a * k)
        .den_qq(inv, k)
        .den_qq(inv, k + 2 * a)
}

fn fig8_block(ctx: &mut Ctx, alpha: u32, n: i64) -> Result<QSer, BlockError> {
    let a = n.abs();
    let inv = ctx.inverse;
    let lead = move |k: i64| fig8_base(inv, n, k).uexp;
    if alpha == 0 {
        return infinite_sum(ctx, lead, |ctx, k| {
            fig8_base(ctx.inverse, n, k).eval(ctx, |c| c.constant(rat(1)))
        });
    }
    // sum_(l=1..m) (1+q^l)/(1-q^l) = m + 2 H_m
    let harmonic = |c: &mut Ctx, m: i64| &c.constant(rat(m)) + &c.h(m).scale(&rat(2));
    let main = infinite_sum(ctx, lead, |ctx, k| {
        fig8_base(ctx.inverse, n, k).eval(ctx, |c| {
            let e1 = c.e(1).scale(&rat(-4));
            &(&e1 + &harmonic(c, k + 2 * a)) + &harmonic(c, k)
        })
    })?;
    let tail = finite_sum(ctx, 2 * a, |ctx, k| {
        let inv = ctx.inverse;
        Term::new(n + k)
            .times(rat(-2))
            .mono(inv, a * (2 * a - 1) + k * (k + 1) - 2 * a * k)
            .num_qiqi(inv, 2 * a - 1 - k)
            .den_qq(inv, k)
            .eval(ctx, |c| c.constant(rat(1)))
    });
    Ok(&main + &tail)
}

fn five2_base(inv: bool, n: i64, k: i64) -> Term {
    let a = n.abs();
    Term::new(n)
        .mono(inv, a + 2 * a * k)
        .den_qiqi(inv, k)
        .den_qq(inv, k + 2 * a)
        .den_qq(inv, k + a)
}

/// `k + |n| - 1/4 - 3 E_1 + H_k + H_(k+|n|) + H_(k+2|n|)`.
fn five2_c(ctx: &mut Ctx, a: i64, k: i64) -> QSer {
    let mut s = ctx.constant(rat(k + a) - frac(1, 4));
    s = &s - &ctx.e(1).scale(&rat(3));
    for m in [k, k + a, k + 2 * a] {
        s = &s + &ctx.h(m);
    }
    s
}

/// `q^(-n^2/2) (q^-1;q^-1)_(|n|-1-k) / ((q^-1;q^-1)_k (q;q)_(k+|n|))`.
fn five2_finite(inv: bool, n: i64, k: i64) -> Term {
    let a = n.abs();
    Term::new(0)
        .mono(inv, -n * n)
        .num_qiqi(inv, a - 1 - k)
        .den_qiqi(inv, k)
        .den_qq(inv, k + a)
}

fn five2_block(ctx: &mut Ctx, alpha: u32, n: i64) -> Result<QSer, BlockError> {
    let a = n.abs();
    let inv = ctx.inverse;
    let lead = move |k: i64| five2_base(inv, n, k).uexp;
    match alpha {
        0 => infinite_sum(ctx, lead, |ctx, k| {
            five2_base(ctx.inverse, n, k).eval(ctx, |c| c.constant(rat(1)))
        }),
        1 => {
            let main = infinite_sum(ctx, lead, |ctx, k| {
                five2_base(ctx.inverse, n, k)
                    .times(rat(-1))
                    .eval(ctx, |c| five2_c(c, a, k))
            })?;
            let tail = finite_sum(ctx, a, |ctx, k| {
                five2_finite(ctx.inverse, n, k).eval(ctx, |c| c.constant(rat(1)))
            });
            Ok(&main + &tail)
        }
        _ => {
            let main = infinite_sum(ctx, lead, |ctx, k| {
                five2_base(ctx.inverse, n, k).eval(ctx, |c| {
                    let mut s = &c.e(2) + &c.constant(frac(1, 8));
                    for m in [k, k + a, k + 2 * a] {
                        s = &s - &c.h2(m);
                    }
                    let ck = five2_c(c, a, k);
                    &s - &(&ck * &ck)
                })
            })?;
            let middle = finite_sum(ctx, a, |ctx, k| {
                five2_finite(ctx.inverse, n, k)
                    .times(rat(2))
                    .eval(ctx, |c| {
                        let mut s = c.constant(rat(a) - frac(3, 4));
                        s = &s - &c.e(1).scale(&rat(3));
                        for m in [k, k + a, a - k - 1] {
                            s = &s + &c.h(m);
                        }
                        s
                    })
            });
            let last = finite_sum(ctx, a, |ctx, k| {
                let inv = ctx.inverse;
                Term::new(n)
                    .times(rat(-2))
                    .mono(inv, -a - 2 * a * k)
                    .num_qiqi(inv, 2 * a - k - 1)
                    .num_qiqi(inv, a - k - 1)
                    .den_qiqi(inv, k)
                    .eval(ctx, |c| c.constant(rat(1)))
            });
            Ok(&(&main + &middle) + &last)
        }
    }
}

/// `h^(alpha)_n(q)`, or `h^(alpha)_n(q^-1)` when `at_inverse`, to `trunc`
/// (u-units).
pub fn block(id: BlockId, at_inverse: bool, trunc: i64) -> Result<QSer, BlockError> {
    // terms with negative powers need their series factors deeper than
    // `trunc`; the working truncation grows until the sum reaches it
    let mut work = trunc;
    loop {
        let mut cache = Cache::new(work);
        let mut ctx = Ctx {
            inverse: at_inverse,
            cache: &mut cache,
        };
        let s = match id.knot {
            BlockKnot::Fig8 => fig8_block(&mut ctx, id.alpha, id.n)?,
            BlockKnot::FiveTwo => five2_block(&mut ctx, id.alpha, id.n)?,
        };
        if s.trunc() >= trunc {
            return Ok(s.truncate(trunc));
        }
        work += trunc - s.trunc();
    }
}

/// Bilinear combination of blocks that reproduces the rotated index.
pub fn factorized_index(knot: BlockKnot, n: i64, np: i64, trunc: i64) -> Result<QSer, BlockError> {
    let h = |alpha: u32, m: i64, inv: bool, t: i64| block(BlockId::new(knot, alpha, m)?, inv, t);
    // h(n', q^-1) h(n, q), each side deep enough for the other's valuation
    let product = |a: u32, b: u32| -> Result<QSer, BlockError> {
        let left = h(a, np, true, trunc)?;
        let right = h(b, n, false, trunc)?;
        let vl = left.valuation().unwrap_or(0).min(0);
        let vr = right.valuation().unwrap_or(0).min(0);
        let left = if vr < 0 {
            h(a, np, true, trunc - vr)?
        } else {
            left
        };
        let right = if vl < 0 {
            h(b, n, false, trunc - vl)?
        } else {
            right
        };
        Ok((&left * &right).truncate(trunc))
    };
    let half = frac(1, 2);
    Ok(match knot {
        BlockKnot::Fig8 => (&product(0, 1)? - &product(1, 0)?).scale(&half),
        BlockKnot::FiveTwo => {
            let outer = &product(0, 2)? + &product(2, 0)?;
            -&(&outer.scale(&half) + &product(1, 1)?)
        }
    })
}

/// Comparison of the factorized and the summed rotated index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationReport {
    pub knot: BlockKnot,
    pub n: i64,
    pub np: i64,
    pub trunc: i64,
    /// Lowest u-exponent where the two sides differ.
    pub mismatch_at: Option<i64>,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.mismatch_at.is_none()
    }
}

/// Checks the block factorization of `I^rot(n, n')` to `trunc` (u-units).
pub fn factorization_check(
    engine: &IndexEngine,
    knot: BlockKnot,
    n: i64,
    np: i64,
    trunc: i64,
) -> Result<FactorizationReport, BlockError> {
    let nz = builtin_reduced(knot.name()).expect("built-in knot");
    let index = engine.rotated_index(&nz, n, np, trunc)?.to_rational();
    let blocks = factorized_index(knot, n, np, trunc)?;
    let t = trunc.min(blocks.trunc()).min(index.trunc());
    let diff = &index.truncate(t) - &blocks.truncate(t);
    Ok(FactorizationReport {
        knot,
        n,
        np,
        trunc: t,
        mismatch_at: diff.valuation(),
    })
}

/// `h^(alpha)_n(q)` for `n` in a range, as a family for operator checks.
pub fn block_family(knot: BlockKnot, alpha: u32, trunc: i64) -> impl Fn(i64) -> QSer {
    move |n| {
        block(
            BlockId::new(knot, alpha, n).expect("alpha in range"),
            false,
            trunc,
        )
        .expect("block series")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::Series;

    fn series(terms: &[(i64, BigRational)], trunc: i64) -> QSer {
        Series::from_terms(terms.iter().cloned(), trunc)
    }

    /// Direct summation of `sum_k (-1)^k q^(k(k+1)/2) / (q;q)_k^2` with
    /// plain integer arithmetic in q-units.
    fn fig8_h0_oracle(qlen: usize) -> Vec<i64> {
        let mut total = vec![0i64; qlen];
        let mut k = 0usize;
        while k * (k + 1) / 2 < qlen {
            let mut t = vec![0i64; qlen];
            t[k * (k + 1) / 2] = if k.is_multiple_of(2) { 1 } else { -1 };
            for _ in 0..2 {
                for j in 1..=k {
                    for i in j..qlen {
                        t[i] += t[i - j];
                    }
                }
            }
            for i in 0..qlen {
                total[i] += t[i];
            }
            k += 1;
        }
        total
    }

    #[test]
    fn eisenstein_and_harmonic() {
        let e1 = eisenstein(1, 10).unwrap();
        let expect: Vec<BigRational> = vec![frac(-1, 4), rat(1), rat(2), rat(2), rat(3)];
        for (i, c) in expect.iter().enumerate() {
            assert_eq!(e1.coeff(2 * i as i64).unwrap(), *c);
            assert!(e1.coeff(2 * i as i64 + 1).unwrap_or_default().is_zero());
        }
        let e2 = eisenstein(2, 10).unwrap();
        let expect = [frac(-1, 24), rat(1), rat(3), rat(4), rat(7)];
        for (i, c) in expect.iter().enumerate() {
            assert_eq!(e2.coeff(2 * i as i64).unwrap(), *c);
        }
        assert!(matches!(
            eisenstein(3, 10),
            Err(BlockError::UnsupportedEll(3))
        ));
        assert!(q_harmonic(0, 1, 10).is_zero());
        assert_eq!(
            q_harmonic(1, 1, 8),
            series(&[(2, rat(1)), (4, rat(1)), (6, rat(1))], 8)
        );
        assert_eq!(
            q_harmonic(1, 2, 8),
            series(&[(2, rat(1)), (4, rat(2)), (6, rat(3))], 8)
        );
    }

    #[test]
    fn fig8_h0_matches_direct_summation() {
        let s = block(BlockId::new(BlockKnot::Fig8, 0, 0).unwrap(), false, 40).unwrap();
        let oracle = fig8_h0_oracle(20);
        for (i, &c) in oracle.iter().enumerate() {
            assert_eq!(s.coeff(2 * i as i64).unwrap(), rat(c), "q^{i}");
        }
    }

    #[test]
    fn fig8_inversion_symmetries() {
        for n in 0..3 {
            let h0 = BlockId::new(BlockKnot::Fig8, 0, n).unwrap();
            let h1 = BlockId::new(BlockKnot::Fig8, 1, n).unwrap();
            assert_eq!(block(h0, true, 30).unwrap(), block(h0, false, 30).unwrap());
            assert_eq!(block(h1, true, 30).unwrap(), -block(h1, false, 30).unwrap());
        }
    }

    #[test]
    fn blocks_are_even_in_n() {
        for knot in [BlockKnot::Fig8, BlockKnot::FiveTwo] {
            for alpha in 0..knot.blocks() {
                for n in 1..3 {
                    for inv in [false, true] {
                        let p = block(BlockId::new(knot, alpha, n).unwrap(), inv, 24).unwrap();
                        let m = block(BlockId::new(knot, alpha, -n).unwrap(), inv, 24).unwrap();
                        // the prefactor (-1)^n is even in n as well
                        assert_eq!(p, m, "{knot} alpha={alpha} n={n} inv={inv}");
                    }
                }
            }
        }
    }

    #[test]
    fn factorization_small() {
        let eng = IndexEngine::new();
        for (knot, n, np) in [
            (BlockKnot::Fig8, 0, 0),
            (BlockKnot::Fig8, 1, 0),
            (BlockKnot::FiveTwo, 0, 0),
            (BlockKnot::FiveTwo, 1, 1),
        ] {
            let r = factorization_check(&eng, knot, n, np, 24).unwrap();
            assert!(
                r.passed(),
                "{knot} ({n},{np}) mismatch at {:?}",
                r.mismatch_at
            );
            assert!(r.trunc >= 22);
        }
    }

    #[test]
    fn bad_ids() {
        assert!(BlockId::new(BlockKnot::Fig8, 2, 0).is_err());
        assert!(BlockKnot::parse("6_1").is_err());
        assert_eq!(BlockKnot::parse("5_2").unwrap().blocks(), 3);
    }
}
