//! Property checks shared by the property tests and the acceptance target.
#![allow(dead_code)]

use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use qindex::blocks::{block_family, BlockKnot};
use qindex::indexsum::{summand, summand_valuation, LinearSummand};
use qindex::nzdata::{builtin_reduced, BUILTIN_NAMES};
use qindex::poly::UPoly;
use qindex::qdiff::{guess, GuessBounds, QDiffOperator};
use qindex::ratfun::{reconstruct, RatFun};
use qindex::{BigInt, BigRational, QSeries, ZSeries};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn zseries() -> impl Strategy<Value = ZSeries> {
    (-4i64..4, prop::collection::vec(-9i64..10, 0..12), 4i64..30).prop_map(|(v, c, len)| {
        ZSeries::from_coeffs(v, c.into_iter().map(BigInt::from).collect(), v + len)
    })
}

fn upoly(max_len: usize) -> impl Strategy<Value = UPoly<BigRational>> {
    (-3i64..4, prop::collection::vec(-5i64..6, 1..max_len)).prop_map(|(v, c)| {
        UPoly::new(
            v,
            c.into_iter()
                .map(|x| BigRational::from_integer(x.into()))
                .collect(),
        )
    })
}

/// A rational function `u^v p / r` with `r(0) = 1`, `span p < max_len`,
/// `deg r < max_len`.
fn ratfun(max_len: usize) -> impl Strategy<Value = RatFun> {
    (
        upoly(max_len),
        prop::collection::vec(-4i64..5, 0..max_len - 1),
    )
        .prop_filter_map("zero numerator", |(p, d)| {
            if p.is_zero() {
                return None;
            }
            let den = UPoly::new(
                0,
                std::iter::once(1)
                    .chain(d)
                    .map(|x| BigRational::from_integer(x.into()))
                    .collect(),
            );
            RatFun::new(p, den).ok()
        })
}

fn same(a: &ZSeries, b: &ZSeries) -> Result<(), TestCaseError> {
    prop_assert!(a.agrees_with(b), "{} vs {}", a.pretty(), b.pretty());
    Ok(())
}

/// Commutative ring axioms for truncated Laurent series, compared on the
/// coefficients both sides know, and field axioms for rational functions.
pub fn ring_axioms(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(zseries(), zseries(), zseries()), |(a, b, c)| {
            same(&(&a + &b), &(&b + &a))?;
            same(&(&a * &b), &(&b * &a))?;
            same(&(&(&a + &b) + &c), &(&a + &(&b + &c)))?;
            same(&(&(&a * &b) * &c), &(&a * &(&b * &c)))?;
            same(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)))?;
            #[allow(clippy::eq_op)]
            same(&(&a - &a), &ZSeries::zero(a.trunc()))?;
            same(&(&a * &ZSeries::one(a.trunc().max(1))), &a)?;
            prop_assert!((&a + &(-&a)).is_zero());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    runner(cases)
        .run(&(ratfun(4), ratfun(4), ratfun(4)), |(a, b, c)| {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&a.inv().unwrap()), RatFun::one());
            prop_assert_eq!(a.sub(&a), RatFun::zero());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Expanding a random rational function and reconstructing it gives it back.
pub fn reconstruct_round_trips(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&ratfun(6), |f| {
            let v = f.num().low().unwrap();
            let s: QSeries = f.series_of(v + 60);
            let g = reconstruct(&s, 8, 8, 20).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(g, f);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

const DIRECT_MAX: i64 = 16;

/// u-valuation of `I_Δ(m, e)` from its defining sum over `n`, doubling the
/// truncation until a nonzero coefficient survives.
fn direct_tet_valuation(m: i64, e: i64) -> i64 {
    let mut trunc = 16i64;
    loop {
        // u-exponent of the n-th term: n(n+1) - (2n+e)m
        let expo = |n: i64| n * (n + 1) - (2 * n + e) * m;
        let lo = (-e).max(0);
        let mut acc: HashMap<i64, i128> = HashMap::new();
        let mut n = lo;
        loop {
            let x = expo(n);
            if x >= trunc && expo(n + 1) > x {
                break;
            }
            if x < trunc {
                let len = ((trunc - x + 1) / 2) as usize;
                let inv = inverse_pochhammer_product(n, n + e, len);
                let sign = if n % 2 == 0 { 1 } else { -1 };
                for (i, c) in inv.iter().enumerate() {
                    *acc.entry(x + 2 * i as i64).or_insert(0) += sign * c;
                }
            }
            n += 1;
        }
        if let Some(v) = acc
            .iter()
            .filter(|(k, c)| **c != 0 && **k < trunc)
            .map(|(k, _)| *k)
            .min()
        {
            return v;
        }
        trunc *= 2;
        assert!(trunc <= 4096, "I_Δ({m},{e}) vanished to high order");
    }
}

/// `1/((q;q)_a (q;q)_b)` to `len` coefficients in `q`.
fn inverse_pochhammer_product(a: i64, b: i64, len: usize) -> Vec<i128> {
    let mut s = vec![0i128; len];
    if len > 0 {
        s[0] = 1;
    }
    for k in (1..=a).chain(1..=b) {
        // multiply by 1/(1 - q^k)
        let k = k as usize;
        for i in k..len {
            s[i] += s[i - k];
        }
    }
    s
}

/// The closed-form summand valuation agrees with the valuation of the
/// summand computed term by term, and with the direct sum over `n` of each
/// tetrahedron index.
pub fn valuation_oracle(cases: u32) -> Result<(), String> {
    let knots: Vec<_> = BUILTIN_NAMES
        .iter()
        .map(|k| builtin_reduced(k).unwrap())
        .collect();
    let direct = std::cell::RefCell::new(HashMap::<(i64, i64), i64>::new());
    let strategy = (
        0..knots.len(),
        prop::collection::vec(-6i64..7, 3),
        -3i64..4,
        -3i64..4,
    );
    runner(cases)
        .run(&strategy, |(ki, k, n, np)| {
            let nz = &knots[ki];
            let k = &k[..nz.size()];
            let v = summand_valuation(nz, k, n, np);
            let s = summand(nz, k, n, np, v + 12);
            prop_assert_eq!(s.valuation(), Some(v));
            let ls = LinearSummand::rotated(nz, n, np);
            let mut oracle = ls.power.eval(k);
            let mut complete = true;
            for (m, e) in ls.args(k) {
                // the direct sum is only practical for small arguments
                if m.abs().max(e.abs()) > DIRECT_MAX {
                    complete = false;
                    break;
                }
                oracle += *direct
                    .borrow_mut()
                    .entry((m, e))
                    .or_insert_with(|| direct_tet_valuation(m, e));
            }
            if complete {
                prop_assert_eq!(oracle, v);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `u^(c n^2 + d n) / (q;q)_n`, annihilated by `(1 - q x) σ - x^c u^(c+d)`.
fn hypergeometric(c: i64, d: i64, trunc: i64) -> impl Fn(i64) -> QSeries {
    move |n| {
        let v = c * n * n + d * n;
        let len = ((trunc - v).max(0) as usize).div_ceil(2);
        let inv = inverse_pochhammer_product(n.max(0), 0, len);
        QSeries::from_terms(
            inv.iter().enumerate().map(|(i, x)| {
                (
                    v + 2 * i as i64,
                    BigRational::from_integer(BigInt::from(*x)),
                )
            }),
            trunc,
        )
    }
}

/// Enlarging the bounds of a successful guess returns the same operator.
pub fn guess_stability(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(0i64..3, 0i64..3), |(c, d)| {
            let fam = hypergeometric(c, d, 120);
            let small = guess(&fam, &GuessBounds::new(1, 2, 4), 0..=6)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let large = guess(&fam, &GuessBounds::new(2, 4, 8), 0..=6)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&small, &large);
            let expected = QDiffOperator::parse(&format!(
                "sigma^0 : -x^{c}*q^({}/2)\nsigma^1 : 1 - x*q",
                c + d
            ))
            .unwrap();
            prop_assert!(small.same_up_to_units(&expected), "{}", small);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The same check on a 4_1 block family.
pub fn fig8_block_guess_stability() -> Result<(), String> {
    let fam = block_family(BlockKnot::Fig8, 1, 200);
    let a = guess(&fam, &GuessBounds::new(2, 6, 14), 0..=6).map_err(|e| e.to_string())?;
    let b = guess(&fam, &GuessBounds::new(2, 7, 17), 0..=7).map_err(|e| e.to_string())?;
    if a == b {
        Ok(())
    } else {
        Err(format!("{a}\nvs\n{b}"))
    }
}
