//! The tetrahedron index `I_Δ(m, e)(q)` and its degree.
//!
//! ```text
//! I_Δ(m,e) = sum_{n >= max(0,-e)} (-1)^n q^{n(n+1)/2 - (n + e/2) m} / ((q;q)_n (q;q)_{n+e})
//! ```
//!
//! Every exponent `n(n+1) - 2nm - em` (in u-units) has the parity of `em`,
//! so the series is stored as a q-series with a u-offset.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::qseries::Series;
use crate::scalar::{Coeff, Overflow};

/// `2 δ(I_Δ(m, e))`, the u-valuation of the tetrahedron index:
/// `m₊(m+e)₊ + (-m)₊e₊ + (-e)₊(-e-m)₊ + max(0, m, -e)`.
pub fn tet_degree(m: i64, e: i64) -> i64 {
    let p = |x: i64| x.max(0);
    p(m) * p(m + e) + p(-m) * p(e) + p(-e) * p(-e - m) + 0.max(m).max(-e)
}

/// `I_Δ(m, e)` stored from its valuation: `sum_i q[i] u^(start + 2 i)`,
/// known for `i < q.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct TetSeries<C> {
    pub start: i64,
    pub q: Vec<C>,
}

impl<C: Coeff> TetSeries<C> {
    pub fn to_series(&self) -> Series<C> {
        let mut coeffs = Vec::with_capacity(2 * self.q.len());
        for (i, c) in self.q.iter().enumerate() {
            if i > 0 {
                coeffs.push(C::zero());
            }
            coeffs.push(c.clone());
        }
        Series::from_coeffs(self.start, coeffs, self.start + 2 * self.q.len() as i64)
    }
}

/// Divides a q-series in place by `(1 - q^a)`, `a >= 1`.
pub(crate) fn div_one_minus_qa<C: Coeff>(s: &mut [C], a: usize) -> Result<(), Overflow> {
    for i in a..s.len() {
        let (lo, hi) = s.split_at_mut(i);
        hi[0].try_add_assign(&lo[i - a])?;
    }
    Ok(())
}

/// `I_Δ(m, e)` to `q_len` q-steps beyond its valuation `tet_degree(m, e)`.
pub fn tet_qseries<C: Coeff>(m: i64, e: i64, q_len: usize) -> Result<TetSeries<C>, Overflow> {
    let start = tet_degree(m, e);
    let n0 = 0.max(-e);
    let expo = |n: i64| n * (n + 1) - 2 * n * m - e * m;
    // smallest exponent over the summation range: the vertex of the parabola
    let vertex = n0.max(m - 1).max(n0);
    let low = (vertex..=vertex + 1)
        .map(expo)
        .chain([expo(n0)])
        .min()
        .unwrap();
    debug_assert!(low <= start && (start - low) % 2 == 0);
    let end = start + 2 * q_len as i64;
    let full = ((end - low) / 2) as usize;
    let mut acc = vec![C::zero(); full];

    // t = (-1)^n / ((q;q)_n (q;q)_{n+e}) truncated to `full` q-steps
    let mut t = vec![C::zero(); full];
    if full > 0 {
        t[0] = if n0 % 2 == 0 {
            C::one()
        } else {
            C::one().negated()
        };
    }
    for a in 1..=n0 {
        if (a as usize) < full {
            div_one_minus_qa(&mut t, a as usize)?;
        }
    }
    for a in 1..=(n0 + e) {
        if (a as usize) < full {
            div_one_minus_qa(&mut t, a as usize)?;
        }
    }
    let mut n = n0;
    loop {
        let x = expo(n);
        if x >= end && n >= m {
            break;
        }
        if x < end {
            let off = ((x - low) / 2) as usize;
            for (slot, c) in acc[off..].iter_mut().zip(t.iter()) {
                slot.try_add_assign(c)?;
            }
        }
        n += 1;
        for c in t.iter_mut() {
            *c = c.negated();
        }
        for a in [n, n + e] {
            if (a as usize) < full {
                div_one_minus_qa(&mut t, a as usize)?;
            }
        }
    }
    let skip = ((start - low) / 2) as usize;
    debug_assert!(acc[..skip].iter().all(|c| c.is_zero()));
    Ok(TetSeries {
        start,
        q: acc.split_off(skip),
    })
}

/// `I_Δ(m, e) + O(u^trunc)`.
pub fn tet_index<C: Coeff>(m: i64, e: i64, trunc: i64) -> Series<C> {
    let start = tet_degree(m, e);
    let q_len = ((trunc - start).max(0) as usize).div_ceil(2);
    tet_qseries::<C>(m, e, q_len)
        .expect("coefficient overflow")
        .to_series()
        .truncate(trunc)
}

/// Shared memo of tetrahedron indices, keyed by `(m, e)`; an entry is
/// recomputed when a longer expansion is requested. Safe to share between
/// worker threads.
type TetMap<C> = HashMap<(i64, i64), Arc<TetSeries<C>>>;

#[derive(Debug, Default)]
pub struct TetCache<C> {
    map: RwLock<TetMap<C>>,
}

impl<C: Coeff> TetCache<C> {
    pub fn new() -> Self {
        TetCache {
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, m: i64, e: i64, q_len: usize) -> Result<Arc<TetSeries<C>>, Overflow> {
        if let Some(hit) = self.map.read().unwrap().get(&(m, e)) {
            if hit.q.len() >= q_len {
                return Ok(hit.clone());
            }
        }
        let fresh = Arc::new(tet_qseries::<C>(m, e, q_len)?);
        let mut map = self.map.write().unwrap();
        let entry = map.entry((m, e)).or_insert_with(|| fresh.clone());
        if entry.q.len() < fresh.q.len() {
            *entry = fresh;
        }
        Ok(entry.clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::One;

    type Q = Series<BigRational>;

    /// Literal summation with full series products of `1/(q;q)_k`.
    fn oracle(m: i64, e: i64, trunc: i64) -> Q {
        let one = Q::one(trunc + 40);
        let qpoch_inv = |k: i64| -> Q {
            let mut acc = one.clone();
            for i in 1..=k {
                let f = Series::from_terms(
                    [(0, BigRational::one()), (2 * i, -BigRational::one())],
                    trunc + 40,
                );
                acc = &acc * &f.invert().unwrap();
            }
            acc
        };
        let mut total = Q::zero(trunc);
        for n in -5..16 {
            if n < 0 || n + e < 0 {
                continue; // 1/(q;q)_k = 0 for k < 0
            }
            let x = n * (n + 1) - 2 * n * m - e * m;
            if x >= trunc + 40 {
                continue;
            }
            let term = (&qpoch_inv(n) * &qpoch_inv(n + e)).monomial_shift(x, n);
            total = &total + &term.truncate(trunc);
        }
        total
    }

    #[test]
    fn degree_examples() {
        assert_eq!(tet_degree(0, 0), 0);
        assert_eq!(tet_degree(-1, 0), 0);
        assert_eq!(tet_degree(1, 0), 2);
        assert_eq!(tet_degree(2, 3), 12);
    }

    #[test]
    fn matches_direct_summation() {
        for m in -3..=3 {
            for e in -3..=3 {
                let fast: Q = tet_index(m, e, 30);
                assert_eq!(fast, oracle(m, e, 30), "I_Δ({m},{e})");
            }
        }
    }

    #[test]
    fn tet_00_expansion() {
        let s: Series<BigInt> = tet_index(0, 0, 24);
        let expect: Vec<(i64, i64)> = vec![
            (0, 1),
            (2, -1),
            (4, -2),
            (6, -2),
            (8, -2),
            (12, 1),
            (14, 5),
            (16, 7),
            (18, 11),
            (20, 13),
            (22, 16),
        ];
        let got: Vec<(i64, i64)> = s
            .terms()
            .map(|(e, c)| (e, i64::try_from(c.clone()).unwrap()))
            .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn valuation_matches_degree() {
        for m in -6..=6 {
            for e in -6..=6 {
                let s: Series<i128> = tet_index(m, e, tet_degree(m, e) + 12);
                assert_eq!(s.valuation(), Some(tet_degree(m, e)), "({m},{e})");
            }
        }
    }

    #[test]
    fn odd_em_lives_on_half_integer_powers() {
        let s: Series<i128> = tet_index(1, 1, 20);
        assert!(s.terms().all(|(e, _)| e % 2 != 0));
    }

    #[test]
    fn cache_extends_entries() {
        let cache = TetCache::<i128>::new();
        let a = cache.get(1, -2, 5).unwrap();
        assert_eq!(a.q.len(), 5);
        let b = cache.get(1, -2, 12).unwrap();
        assert_eq!(b.q.len(), 12);
        assert_eq!(&b.q[..5], &a.q[..]);
        assert_eq!(cache.get(1, -2, 3).unwrap().q.len(), 12);
        assert_eq!(cache.len(), 1);
    }
}
