//! Matrices of truncated series and of rational functions.

use std::fmt::Write as _;

use num_rational::BigRational;
use thiserror::Error;

use crate::qseries::Series;
use crate::ratfun::{QPoly, RatFun};
use crate::scalar::Coeff;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is singular to the available precision")]
    Singular,
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Dense row-major matrix of series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix<C> {
    rows: usize,
    cols: usize,
    entries: Vec<Series<C>>,
}

impl<C: Coeff> SeriesMatrix<C> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Series<C>>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        SeriesMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Series<C>) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        SeriesMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(n: usize, trunc: i64) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Series::one(trunc)
            } else {
                Series::zero(trunc)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Series<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series<C>) {
        self.entries[i * self.cols + j] = s;
    }

    pub fn entries(&self) -> &[Series<C>] {
        &self.entries
    }

    /// Smallest truncation among the entries.
    pub fn trunc(&self) -> i64 {
        self.entries
            .iter()
            .map(Series::trunc)
            .min()
            .unwrap_or(i64::MAX)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&Series<C>) -> Series<D>) -> SeriesMatrix<D> {
        SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn to_rational(&self) -> SeriesMatrix<BigRational> {
        self.map(Series::to_rational)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for t in 1..self.cols {
                acc = &acc + &(self.get(i, t) * other.get(t, j));
            }
            acc
        }))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) - other.get(i, j)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Series::is_zero)
    }

    /// Determinant by expansion over column subsets: `D[S]` is the minor on
    /// the first `|S|` rows and the columns in `S`. Division free, so it works
    /// over any coefficient ring.
    pub fn det(&self) -> Result<Series<C>, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::Shape(
                "determinant of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        assert!(n < 20, "subset expansion is exponential in the size");
        let mut minors: Vec<Option<Series<C>>> = vec![None; 1 << n];
        minors[0] = Some(Series::one(
            self.trunc()
                .saturating_add(self.max_abs_valuation() * n as i64),
        ));
        for mask in 1usize..(1 << n) {
            let row = mask.count_ones() as usize - 1;
            let mut acc: Option<Series<C>> = None;
            let mut sign_pos = 0;
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                // sign from the position of c among the chosen columns
                let sub = minors[mask & !(1 << c)].as_ref().unwrap();
                let term = &self.get(row, c).clone() * sub;
                let term = if (row - sign_pos) % 2 == 1 {
                    -term
                } else {
                    term
                };
                acc = Some(match acc {
                    None => term,
                    Some(a) => &a + &term,
                });
                sign_pos += 1;
            }
            minors[mask] = acc;
        }
        Ok(minors[(1 << n) - 1].take().unwrap())
    }

    fn max_abs_valuation(&self) -> i64 {
        self.entries
            .iter()
            .map(|s| s.valuation().map_or(0, i64::abs))
            .max()
            .unwrap_or(0)
    }

    /// Readable listing, one entry per line.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                writeln!(out, "[{i},{j}] {}", self.get(i, j).pretty()).unwrap();
            }
        }
        out
    }
}

impl SeriesMatrix<BigRational> {
    /// Inverse by Gauss-Jordan elimination, choosing in each column the
    /// pivot of lowest valuation.
    pub fn invert(&self) -> Result<Self, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let trunc = self.trunc();
        let mut a = self.clone();
        let mut inv = Self::identity(
            n,
            trunc.saturating_add(self.max_abs_valuation() * 2 * n as i64),
        );
        for c in 0..n {
            let p = (c..n)
                .filter_map(|r| a.get(r, c).valuation().map(|v| (v, r)))
                .min()
                .map(|(_, r)| r)
                .ok_or(MatrixError::Singular)?;
            if p != c {
                for j in 0..n {
                    a.entries.swap(p * n + j, c * n + j);
                    inv.entries.swap(p * n + j, c * n + j);
                }
            }
            let piv = a.get(c, c).invert().map_err(|_| MatrixError::Singular)?;
            for j in 0..n {
                let x = &a.get(c, j).clone() * &piv;
                a.set(c, j, x);
                let y = &inv.get(c, j).clone() * &piv;
                inv.set(c, j, y);
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for j in 0..n {
                    let x = a.get(r, j) - &(&f * a.get(c, j));
                    a.set(r, j, x);
                    let y = inv.get(r, j) - &(&f * inv.get(c, j));
                    inv.set(r, j, y);
                }
            }
        }
        Ok(inv)
    }
}

/// Dense row-major matrix of rational functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RatFun>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RatFun>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        RatMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RatFun) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        RatMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                RatFun::one()
            } else {
                RatFun::zero()
            }
        })
    }

    /// `prefactor * M` with `M` a matrix of Laurent polynomials in `u`.
    pub fn from_factored(prefactor: &RatFun, polys: &[Vec<QPoly>]) -> Self {
        let rows = polys.len();
        let cols = polys.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| {
            prefactor.mul(&RatFun::from_poly(polys[i][j].clone()))
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFun {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: RatFun) {
        self.entries[i * self.cols + j] = f;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(RatFun::zero(), |acc, t| {
                acc.add(&self.get(i, t).mul(other.get(t, j)))
            })
        })
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> RatFun {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return RatFun::one();
        }
        if n == 1 {
            return self.entries[0].clone();
        }
        let mut acc = RatFun::zero();
        for c in 0..n {
            if self.get(0, c).is_zero() {
                continue;
            }
            let minor = Self::from_fn(n - 1, n - 1, |i, j| {
                self.get(i + 1, if j < c { j } else { j + 1 }).clone()
            });
            let term = self.get(0, c).mul(&minor.det());
            acc = if c % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }

    /// Applies the matrix to a matrix of series: `(self · s)`.
    pub fn apply(&self, s: &SeriesMatrix<BigRational>) -> SeriesMatrix<BigRational> {
        assert_eq!(self.cols, s.rows(), "shape mismatch");
        SeriesMatrix::from_fn(self.rows, s.cols(), |i, j| {
            let terms: Vec<Series<BigRational>> = (0..self.cols)
                .map(|t| crate::ratfun::times_series(self.get(i, t), s.get(t, j)))
                .collect();
            let mut acc = terms[0].clone();
            for t in &terms[1..] {
                acc = &acc + t;
            }
            acc
        })
    }

    /// Splits off a common prefactor `1/D` with `D` the least common multiple
    /// of the denominators, so that `self = prefactor · polys` with Laurent
    /// polynomial entries.
    pub fn factored(&self) -> (RatFun, Vec<Vec<QPoly>>) {
        let mut lcm = QPoly::one();
        for f in &self.entries {
            let g = lcm.gcd(f.den());
            let (q, _) = f.den().div_rem(&g);
            lcm = &lcm * &q;
        }
        let lcm = lcm.monic();
        let polys = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let f = self.get(i, j);
                        let (q, r) = lcm.div_rem(f.den());
                        debug_assert!(r.is_zero());
                        f.num() * &q
                    })
                    .collect()
            })
            .collect();
        (RatFun::new(QPoly::one(), lcm).unwrap(), polys)
    }

    /// Grid text: a `prefactor <ratfun>` line, then one line per row with
    /// the polynomial entries separated by ` | `.
    pub fn to_text(&self) -> String {
        let (pre, polys) = self.factored();
        let mut out = format!("prefactor {}\n", pre.to_text());
        for row in polys {
            let cells: Vec<String> = row.iter().map(QPoly::to_text).collect();
            writeln!(out, "{}", cells.join(" | ")).unwrap();
        }
        out
    }

    /// Every entry written as a full rational function, row by row.
    pub fn entries_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let cells: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_text()).collect();
            writeln!(out, "{}", cells.join(" | ")).unwrap();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RatFun::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::parse_qpoly;

    type Q = Series<BigRational>;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn ser(terms: &[(i64, i64)], trunc: i64) -> Q {
        Series::from_terms(terms.iter().map(|&(e, c)| (e, r(c))), trunc)
    }

    fn sample() -> SeriesMatrix<BigRational> {
        SeriesMatrix::new(
            2,
            2,
            vec![
                ser(&[(0, 1), (2, -8), (4, -9)], 30),
                ser(&[(-1, -1), (1, 1)], 29),
                ser(&[(-1, -1), (1, 1), (3, -1)], 29),
                ser(&[(2, 2), (4, 2)], 30),
            ],
        )
    }

    /// Determinant by elimination over the series field, as an oracle.
    fn det_by_elimination(m: &SeriesMatrix<BigRational>) -> Q {
        let n = m.rows();
        let mut a = m.clone();
        let mut det = Q::one(m.trunc() + 100);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero()).unwrap();
            if p != c {
                for j in 0..n {
                    a.entries.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            det = &det * a.get(c, c);
            let piv = a.get(c, c).invert().unwrap();
            for rr in c + 1..n {
                let f = &a.get(rr, c).clone() * &piv;
                for j in 0..n {
                    let x = a.get(rr, j) - &(&f * a.get(c, j));
                    a.set(rr, j, x);
                }
            }
        }
        det
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = sample();
        let inv = m.invert().unwrap();
        let prod = inv.mul(&m).unwrap();
        let id = SeriesMatrix::identity(2, 100);
        assert!(prod.sub(&id).is_zero(), "{}", prod.pretty());
        assert!(prod.trunc() >= 20);
    }

    #[test]
    fn determinant_matches_elimination() {
        let m = sample();
        let d = m.det().unwrap();
        let oracle = det_by_elimination(&m);
        assert!(d.agrees_with(&oracle));
        let m3 = SeriesMatrix::from_fn(3, 3, |i, j| {
            let (i, j) = (i as i64, j as i64);
            ser(
                &[((i + j) % 3 - 1, 1 + i * i + j), (3, i * j - 2), (5, i - j)],
                20,
            )
        });
        assert!(m3.det().unwrap().agrees_with(&det_by_elimination(&m3)));
    }

    #[test]
    fn integer_determinant() {
        let m = SeriesMatrix::<i128>::from_fn(2, 2, |i, j| {
            Series::monomial(1 + (i + 2 * j) as i128, 0, 10)
        });
        // [[1, 3], [2, 4]]
        assert_eq!(m.det().unwrap(), Series::monomial(-2, 0, 10));
    }

    #[test]
    fn singular_is_detected() {
        let s = ser(&[(0, 1), (1, 2)], 10);
        let m = SeriesMatrix::new(2, 2, vec![s.clone(), s.clone(), s.clone(), s]);
        assert_eq!(m.invert(), Err(MatrixError::Singular));
    }

    #[test]
    fn factored_form() {
        let den = parse_qpoly("-1 + q").unwrap();
        let f = |p: &str| RatFun::new(parse_qpoly(p).unwrap(), den.clone()).unwrap();
        let q1 = RatMatrix::new(
            2,
            2,
            vec![
                f("2 - q"),
                f("-q^(1/2)"),
                f("q^(1/2)"),
                f("-q - 1 + q^(-1)"),
            ],
        );
        let (pre, polys) = q1.factored();
        assert_eq!(pre, RatFun::new(QPoly::one(), den).unwrap());
        assert_eq!(polys[0][0], parse_qpoly("2 - q").unwrap());
        assert_eq!(RatMatrix::from_factored(&pre, &polys), q1);
        let det = q1.det();
        assert_eq!(det, RatFun::parse("1 + 2*q^(-1)").unwrap());
    }
}
