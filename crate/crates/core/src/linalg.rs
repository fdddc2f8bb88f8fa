//! Exact linear algebra: nullspaces over the rationals and modulo a prime,
//! with rational reconstruction to lift modular solutions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Basis of the right nullspace of `rows` (each of length `ncols`), computed
/// by exact Gauss-Jordan elimination. Pivots are chosen left to right, so the
/// basis vector for free column `f` has a one in position `f` and zeros in
/// every other free position.
pub fn nullspace_rational(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let pivots = rref_rational(&mut m, ncols);
    free_basis(
        &pivots,
        ncols,
        |r, c| m[r][c].clone(),
        BigRational::zero(),
        BigRational::one(),
        |x| -x,
    )
}

/// Reduces `m` in place to reduced row echelon form, returning `(row, col)` of the pivots.
pub fn rref_rational(m: &mut [Vec<BigRational>], ncols: usize) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(pivot_row.iter()).skip(c) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    pivots
}

fn free_basis<T: Clone>(
    pivots: &[(usize, usize)],
    ncols: usize,
    entry: impl Fn(usize, usize) -> T,
    zero: T,
    one: T,
    neg: impl Fn(T) -> T,
) -> Vec<Vec<T>> {
    let mut is_pivot = vec![false; ncols];
    for &(_, c) in pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![zero.clone(); ncols];
        v[f] = one.clone();
        for &(r, c) in pivots {
            v[c] = neg(entry(r, f));
        }
        basis.push(v);
    }
    basis
}

/// Arithmetic modulo the Mersenne prime `2^61 - 1`.
pub mod modp {
    pub const P: u64 = (1 << 61) - 1;

    #[inline]
    pub fn reduce(x: u128) -> u64 {
        let lo = (x as u64) & P;
        let hi = (x >> 61) as u64;
        let mut s = lo + (hi & P) + ((x >> 122) as u64);
        while s >= P {
            s -= P;
        }
        s
    }

    #[inline]
    pub fn mul(a: u64, b: u64) -> u64 {
        reduce(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= P {
            s - P
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + P - b
        }
    }

    pub fn pow(mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(a: u64) -> u64 {
        assert!(a != 0, "inverse of zero mod p");
        pow(a, P - 2)
    }
}

/// Image of a rational in `Z/pZ`; `None` if the denominator vanishes mod p.
pub fn rational_mod_p(r: &BigRational) -> Option<u64> {
    let p = BigInt::from(modp::P);
    let n = r.numer().mod_floor(&p).to_u64().unwrap();
    let d = r.denom().mod_floor(&p).to_u64().unwrap();
    (d != 0).then(|| modp::mul(n, modp::inv(d)))
}

/// Nullspace basis modulo `P` of a matrix given row by row. Rows are
/// consumed. Each basis vector has a one at its free column.
pub fn nullspace_mod_p(mut m: Vec<Vec<u64>>, ncols: usize) -> Vec<Vec<u64>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = modp::inv(m[r][c]);
        for x in m[r].iter_mut().skip(c) {
            *x = modp::mul(*x, inv);
        }
        let pivot_row = std::mem::take(&mut m[r]);
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (x, &y) in row.iter_mut().zip(pivot_row.iter()).skip(c) {
                if y != 0 {
                    *x = modp::sub(*x, modp::mul(f, y));
                }
            }
        }
        m[r] = pivot_row;
        pivots.push((r, c));
        r += 1;
    }
    free_basis(
        &pivots,
        ncols,
        |r, c| m[r][c],
        0u64,
        1u64,
        |x| modp::sub(0, x),
    )
}

/// Recovers `a/b` with `|a|, |b| <= sqrt(P/2)` from its image mod `P`
/// (Wang's half-extended Euclid). `None` when no such fraction exists.
pub fn rational_reconstruct(x: u64) -> Option<BigRational> {
    let p = modp::P as i128;
    let bound = ((p / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (p, x as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    if r1.gcd(&t1) != 1 {
        return None;
    }
    Some(BigRational::new(BigInt::from(r1), BigInt::from(t1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn rational_nullspace_small() {
        // x + y + z = 0, x - z = 0
        let rows = vec![vec![r(1), r(1), r(1)], vec![r(1), r(0), r(-1)]];
        let ns = nullspace_rational(&rows, 3);
        assert_eq!(ns, vec![vec![r(1), r(-2), r(1)]]);
        for v in &ns {
            for row in &rows {
                let dot: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn full_rank_has_trivial_nullspace() {
        let rows = vec![vec![r(2), r(1)], vec![r(1), r(3)]];
        assert!(nullspace_rational(&rows, 2).is_empty());
    }

    #[test]
    fn modular_matches_rational() {
        let rows = vec![
            vec![r(3), r(-1), r(4), r(1)],
            vec![r(1), r(5), r(-9), r(2)],
            vec![r(4), r(4), r(-5), r(3)],
        ];
        let exact = nullspace_rational(&rows, 4);
        let mrows: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| row.iter().map(|x| rational_mod_p(x).unwrap()).collect())
            .collect();
        let modular = nullspace_mod_p(mrows, 4);
        assert_eq!(exact.len(), modular.len());
        for (e, m) in exact.iter().zip(&modular) {
            let lifted: Vec<BigRational> = m
                .iter()
                .map(|&x| rational_reconstruct(x).unwrap())
                .collect();
            assert_eq!(&lifted, e);
        }
    }

    #[test]
    fn reconstruct_fractions() {
        for (n, d) in [(1i64, 2i64), (-7, 3), (0, 1), (123456, 789), (-1, 1)] {
            let q = BigRational::new(n.into(), d.into());
            let x = rational_mod_p(&q).unwrap();
            assert_eq!(rational_reconstruct(x), Some(q));
        }
    }

    #[test]
    fn mersenne_reduction() {
        assert_eq!(modp::mul(modp::P - 1, modp::P - 1), 1);
        assert_eq!(modp::mul(modp::inv(12345), 12345), 1);
        assert_eq!(modp::add(modp::P - 1, 5), 4);
        assert_eq!(modp::sub(3, 5), modp::P - 2);
    }
}
