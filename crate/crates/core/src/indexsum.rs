//! The rotated 3D-index as a lattice sum of products of tetrahedron indices,
//! and the plain 3D-index it is assembled from.
//!
//! A summand is `(-1)^s u^p prod_j I_Δ(m_j, e_j)` with `s`, `p`, `m_j`, `e_j`
//! affine in the summation variables. Its u-valuation is known in closed
//! form, which drives the enumeration: lattice points are visited in L∞
//! shells around a point of minimal valuation, and every point with
//! valuation below the truncation is kept.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::matrix::SeriesMatrix;
use crate::nzdata::NZReduced;
use crate::qseries::Series;
use crate::scalar::{Coeff, Overflow};
use crate::tetindex::{tet_degree, tet_index, TetCache, TetSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error(
        "summand valuation does not grow: admissible points persist at radius {radius} (truncation {trunc}); \
         the triangulation is probably not 1-efficient"
    )]
    DivergenceGuard { radius: i64, trunc: i64 },
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// `c + k·x`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    pub c: i64,
    pub k: Vec<i64>,
}

impl Affine {
    pub fn constant(c: i64, dim: usize) -> Self {
        Affine { c, k: vec![0; dim] }
    }

    #[inline]
    pub fn eval(&self, x: &[i64]) -> i64 {
        self.c + self.k.iter().zip(x).map(|(a, b)| a * b).sum::<i64>()
    }

    pub fn add(&self, other: &Self) -> Self {
        Affine {
            c: self.c + other.c,
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, f: i64) -> Self {
        Affine {
            c: self.c * f,
            k: self.k.iter().map(|a| a * f).collect(),
        }
    }

    /// Substitutes `x_i = value` and drops the variable.
    fn fix(&self, i: usize, value: i64) -> Self {
        let mut k = self.k.clone();
        let a = k.remove(i);
        Affine {
            c: self.c + a * value,
            k,
        }
    }
}

/// `(-1)^sign u^power prod_j I_Δ(tets[j].0, tets[j].1)` over `Z^dim`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearSummand {
    pub dim: usize,
    pub sign: Affine,
    pub power: Affine,
    pub tets: Vec<(Affine, Affine)>,
}

impl LinearSummand {
    /// The summand of the rotated index at `(n, n')`:
    /// `(-u)^(ν·k - (n-n')ν_λ) u^(k_N (n+n')) prod_j I_Δ(λ''_j(n-n') - b_j·k, -λ_j(n-n') + a_j·k)`.
    pub fn rotated(nz: &NZReduced, n: i64, np: i64) -> Self {
        let dim = nz.size();
        let d = n - np;
        let sign = Affine {
            c: -d * nz.nu_lambda,
            k: nz.nu.clone(),
        };
        let mut power = sign.clone();
        power.k[dim - 1] += n + np;
        let tets = (0..dim)
            .map(|j| {
                let m = Affine {
                    c: nz.lambdapp[j] * d,
                    k: nz.b_col(j).iter().map(|b| -b).collect(),
                };
                let e = Affine {
                    c: -nz.lambda[j] * d,
                    k: nz.a_col(j),
                };
                (m, e)
            })
            .collect();
        LinearSummand {
            dim,
            sign,
            power,
            tets,
        }
    }

    /// The summand after acting with `prod_j ẑ_j^alpha_j (ẑ''_j)^beta_j`:
    /// arguments `(m_j + beta_j, e_j - alpha_j)` and an extra `q^L` with
    /// `2L = sum_j alpha_j m_j + beta_j e_j - alpha_j beta_j`.
    pub fn with_monomial(&self, alpha: &[i64], beta: &[i64]) -> Self {
        let mut power = self.power.clone();
        let mut tets = Vec::with_capacity(self.tets.len());
        for (j, (m, e)) in self.tets.iter().enumerate() {
            power = power.add(&m.scale(alpha[j])).add(&e.scale(beta[j]));
            power.c -= alpha[j] * beta[j];
            let mut m2 = m.clone();
            m2.c += beta[j];
            let mut e2 = e.clone();
            e2.c -= alpha[j];
            tets.push((m2, e2));
        }
        LinearSummand {
            dim: self.dim,
            sign: self.sign.clone(),
            power,
            tets,
        }
    }

    /// Fixes the variable `i` to `value`, leaving a sum over one dimension less.
    pub fn fix(&self, i: usize, value: i64) -> Self {
        LinearSummand {
            dim: self.dim - 1,
            sign: self.sign.fix(i, value),
            power: self.power.fix(i, value),
            tets: self
                .tets
                .iter()
                .map(|(m, e)| (m.fix(i, value), e.fix(i, value)))
                .collect(),
        }
    }

    /// Multiplies by `u^shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        let mut out = self.clone();
        out.power.c += shift;
        out
    }

    #[inline]
    pub fn args(&self, x: &[i64]) -> impl Iterator<Item = (i64, i64)> + '_ {
        let x = x.to_vec();
        self.tets.iter().map(move |(m, e)| (m.eval(&x), e.eval(&x)))
    }

    /// Exact u-valuation at `x`.
    #[inline]
    pub fn valuation(&self, x: &[i64]) -> i64 {
        self.power.eval(x)
            + self
                .tets
                .iter()
                .map(|(m, e)| tet_degree(m.eval(x), e.eval(x)))
                .sum::<i64>()
    }

    /// The summand at `x` as a series, computed by plain series products.
    pub fn series_at<C: Coeff>(&self, x: &[i64], trunc: i64) -> Series<C> {
        let rel = (trunc - self.valuation(x)).max(0);
        let mut acc = Series::<C>::one(rel);
        for (m, e) in self.args(x) {
            acc = &acc * &tet_index::<C>(m, e, tet_degree(m, e) + rel);
        }
        acc.monomial_shift(self.power.eval(x), self.sign.eval(x))
            .truncate(trunc)
    }
}

/// Parameters of the shell enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumConfig {
    /// Empty shells required after the last admissible point, beyond the first.
    pub margin: i64,
    /// Number of trailing shells whose minimal valuation must be nondecreasing.
    pub window: usize,
    /// Hard limit on the shell radius; `None` picks one from the truncation.
    pub max_radius: Option<i64>,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            margin: 2,
            window: 5,
            max_radius: None,
        }
    }
}

/// What an enumeration visited.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SumStats {
    pub center: Vec<i64>,
    pub radius: i64,
    pub visited: usize,
    pub admissible: usize,
    pub min_valuation: Option<i64>,
}

/// Admissible lattice points with their valuations.
#[derive(Debug, Clone, Default)]
pub struct PointSet {
    pub dim: usize,
    pub coords: Vec<i64>,
    pub vals: Vec<i64>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

/// Calls `f` on every point of the L∞ sphere of radius `r` around `center`.
fn for_each_in_shell(center: &[i64], r: i64, mut f: impl FnMut(&[i64])) {
    let d = center.len();
    if d == 0 {
        if r == 0 {
            f(&[]);
        }
        return;
    }
    if r == 0 {
        f(center);
        return;
    }
    let mut x = vec![0i64; d];
    // the first coordinate with |x_i| = r is `i`; earlier ones are strictly inside
    for i in 0..d {
        for side in [-r, r] {
            x[i] = side;
            rec(center, &mut x, 0, i, r, &mut f);
        }
    }

    fn rec(
        center: &[i64],
        x: &mut [i64],
        pos: usize,
        pinned: usize,
        r: i64,
        f: &mut impl FnMut(&[i64]),
    ) {
        if pos == x.len() {
            let p: Vec<i64> = x.iter().zip(center).map(|(a, c)| a + c).collect();
            f(&p);
            return;
        }
        if pos == pinned {
            rec(center, x, pos + 1, pinned, r, f);
            return;
        }
        let range = if pos < pinned {
            -(r - 1)..=(r - 1)
        } else {
            -r..=r
        };
        for v in range {
            x[pos] = v;
            rec(center, x, pos + 1, pinned, r, f);
        }
    }
}

/// Whether the lower envelope of `mins` (the minimum over a sliding window
/// of `w` entries) is nondecreasing over its last `w` positions. Shell minima
/// alternate with the parity of the radius along narrow valleys, so the raw
/// sequence need not be monotone even when the valuation grows.
fn envelope_rising(mins: &[i64], w: usize) -> bool {
    let w = w.max(1);
    if mins.len() < 2 * w - 1 {
        return false;
    }
    let env: Vec<i64> = (mins.len() - w..mins.len())
        .map(|end| *mins[end + 1 - w..=end].iter().min().unwrap())
        .collect();
    env.windows(2).all(|p| p[0] <= p[1])
}

/// Greedy descent from `x` to a local minimum of the valuation.
fn descend_from(s: &LinearSummand, mut x: Vec<i64>, max_steps: usize) -> Option<Vec<i64>> {
    let mut v = s.valuation(&x);
    for _ in 0..max_steps {
        let mut best: Option<(i64, Vec<i64>)> = None;
        for_each_in_shell(&x, 1, |p| {
            let w = s.valuation(p);
            if w < v && best.as_ref().is_none_or(|(b, _)| w < *b) {
                best = Some((w, p.to_vec()));
            }
        });
        match best {
            Some((w, p)) => {
                v = w;
                x = p;
            }
            None => return Some(x),
        }
    }
    None
}

/// Largest `dim` for which the vertices of the breakpoint arrangement are
/// enumerated.
const MAX_ARRANGEMENT_DIM: usize = 7;

/// Vertices of the arrangement of hyperplanes `m_j = 0`, `e_j = 0`,
/// `m_j + e_j = 0` where the valuation changes its quadratic piece,
/// rounded to lattice points.
fn arrangement_vertices(s: &LinearSummand) -> Vec<Vec<i64>> {
    let d = s.dim;
    if d == 0 || d > MAX_ARRANGEMENT_DIM {
        return Vec::new();
    }
    let forms: Vec<Affine> = s
        .tets
        .iter()
        .flat_map(|(m, e)| [m.clone(), e.clone(), m.add(e)])
        .collect();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(d);
    fn choose(
        start: usize,
        forms: &[Affine],
        d: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if pick.len() == d {
            if let Some(x) = solve_vertex(
                pick.iter()
                    .map(|&i| &forms[i])
                    .collect::<Vec<_>>()
                    .as_slice(),
            ) {
                out.push(x);
            }
            return;
        }
        for i in start..forms.len() {
            pick.push(i);
            choose(i + 1, forms, d, pick, out);
            pick.pop();
        }
    }
    choose(0, &forms, d, &mut pick, &mut out);
    out.sort();
    out.dedup();
    out
}

/// The point where the given affine forms all vanish, if unique.
fn solve_vertex(forms: &[&Affine]) -> Option<Vec<i64>> {
    let d = forms.len();
    let mut a: Vec<Vec<f64>> = forms
        .iter()
        .map(|f| {
            f.k.iter()
                .map(|&x| x as f64)
                .chain([-(f.c as f64)])
                .collect()
        })
        .collect();
    for col in 0..d {
        let p = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, p);
        for r in 0..d {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot = a[col].clone();
                for (x, p) in a[r][col..=d].iter_mut().zip(&pivot[col..=d]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some((0..d).map(|i| (a[i][d] / a[i][i]).round() as i64).collect())
}

fn linf(a: &[i64], b: &[i64]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or(0)
}

/// Collects every lattice point whose summand valuation is below `trunc`.
pub fn enumerate(
    s: &LinearSummand,
    trunc: i64,
    cfg: &EnumConfig,
) -> Result<(PointSet, SumStats), IndexError> {
    let mut stats = SumStats::default();
    let guard = |radius| IndexError::DivergenceGuard { radius, trunc };
    let center = descend_from(s, vec![0; s.dim], 1_000_000).ok_or(guard(0))?;
    // the valuation can have several valleys; the shells must reach every
    // vertex of the breakpoint arrangement and every local minimum found by
    // descending from one before the stopping rule may fire
    let mut min_radius = 0;
    for v in arrangement_vertices(s) {
        min_radius = min_radius.max(linf(&v, &center));
        if let Some(m) = descend_from(s, v, 10_000) {
            min_radius = min_radius.max(linf(&m, &center));
        }
    }
    let v0 = s.valuation(&center);
    let max_radius = cfg.max_radius.unwrap_or(
        4 * (trunc - v0).max(0)
            + 64
            + center.iter().map(|c| c.abs()).max().unwrap_or(0)
            + min_radius,
    );
    let mut pts = PointSet {
        dim: s.dim,
        ..Default::default()
    };
    let mut shell_mins: Vec<i64> = Vec::new();
    let mut empty_run = 0;
    let mut r = 0;
    loop {
        let mut shell_min = i64::MAX;
        let mut found = 0;
        for_each_in_shell(&center, r, |p| {
            stats.visited += 1;
            let v = s.valuation(p);
            shell_min = shell_min.min(v);
            if v < trunc {
                found += 1;
                pts.coords.extend_from_slice(p);
                pts.vals.push(v);
            }
        });
        shell_mins.push(shell_min);
        empty_run = if found == 0 { empty_run + 1 } else { 0 };
        if s.dim == 0
            || (r >= min_radius
                && empty_run > cfg.margin
                && envelope_rising(&shell_mins, cfg.window))
        {
            break;
        }
        r += 1;
        if r > max_radius {
            return Err(guard(r));
        }
    }
    stats.center = center;
    stats.radius = r;
    stats.admissible = pts.len();
    stats.min_valuation = pts.vals.iter().copied().min();
    Ok((pts, stats))
}

/// `buf = buf * f` truncated to `buf.len()` terms.
fn mul_in_place<C: Coeff>(buf: &mut Vec<C>, f: &[C], scratch: &mut Vec<C>) -> Result<(), Overflow> {
    let len = buf.len();
    scratch.clear();
    scratch.resize(len, C::zero());
    for (i, a) in buf.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in f.iter().take(len - i).enumerate() {
            scratch[i + j].try_mul_add(a, b)?;
        }
    }
    std::mem::swap(buf, scratch);
    Ok(())
}

/// Evaluates lattice sums, memoizing tetrahedron indices across calls.
#[derive(Debug, Default)]
pub struct IndexEngine {
    pub config: EnumConfig,
    small: TetCache<i128>,
    big: TetCache<BigInt>,
}

/// Fixed-width evaluation failed; the caller retries with big integers.
enum Attempt<T> {
    Done(T),
    Overflowed,
}

impl IndexEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: EnumConfig) -> Self {
        IndexEngine {
            config,
            ..Default::default()
        }
    }

    /// `sum_x s(x) + O(u^trunc)` over the given points, in the scalar `C`.
    pub fn sum_points<C: Coeff>(
        &self,
        s: &LinearSummand,
        pts: &PointSet,
        trunc: i64,
        cache: &TetCache<C>,
    ) -> Result<Series<C>, Overflow> {
        let Some(vmin) = pts.vals.iter().copied().min() else {
            return Ok(Series::zero(trunc));
        };
        let mut need: HashMap<(i64, i64), usize> = HashMap::new();
        for i in 0..pts.len() {
            let len = ((trunc - pts.vals[i]) as usize).div_ceil(2);
            for key in s.args(pts.point(i)) {
                let slot = need.entry(key).or_insert(0);
                *slot = (*slot).max(len);
            }
        }
        let mut keys: Vec<((i64, i64), usize)> = need.into_iter().collect();
        keys.sort_unstable();
        let tets: HashMap<(i64, i64), Arc<TetSeries<C>>> = keys
            .par_iter()
            .map(|&((m, e), len)| cache.get(m, e, len).map(|t| ((m, e), t)))
            .collect::<Result<_, _>>()?;

        let width = (trunc - vmin) as usize;
        let idx: Vec<usize> = (0..pts.len()).collect();
        let acc = idx
            .par_chunks(64)
            .map(|chunk| -> Result<Vec<C>, Overflow> {
                let mut acc = vec![C::zero(); width];
                let mut buf: Vec<C> = Vec::new();
                let mut scratch: Vec<C> = Vec::new();
                for &i in chunk {
                    let x = pts.point(i);
                    let v = pts.vals[i];
                    let len = ((trunc - v) as usize).div_ceil(2);
                    let mut first = true;
                    for key in s.args(x) {
                        let t = &tets[&key].q;
                        if first {
                            buf.clear();
                            buf.extend(t.iter().take(len).cloned());
                            buf.resize(len, C::zero());
                            first = false;
                        } else {
                            mul_in_place(&mut buf, &t[..len.min(t.len())], &mut scratch)?;
                        }
                    }
                    if first {
                        buf.clear();
                        buf.push(C::one());
                        buf.resize(len, C::zero());
                    }
                    let negative = s.sign.eval(x).rem_euclid(2) == 1;
                    let off = (v - vmin) as usize;
                    for (k, c) in buf.iter().enumerate() {
                        let slot = &mut acc[off + 2 * k];
                        if negative {
                            slot.try_sub_assign(c)?;
                        } else {
                            slot.try_add_assign(c)?;
                        }
                    }
                }
                Ok(acc)
            })
            .try_reduce(
                || vec![C::zero(); width],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        x.try_add_assign(y)?;
                    }
                    Ok(a)
                },
            )?;
        Ok(Series::from_coeffs(vmin, acc, trunc))
    }

    /// `sum_x s(x) + O(u^trunc)` with exact integer coefficients. Runs in
    /// `i128` and repeats in big integers if a coefficient overflows.
    pub fn sum(
        &self,
        s: &LinearSummand,
        trunc: i64,
    ) -> Result<(Series<BigInt>, SumStats), IndexError> {
        self.sum_with(s, trunc, &self.config)
    }

    /// As [`IndexEngine::sum`] with an explicit enumeration config.
    pub fn sum_with(
        &self,
        s: &LinearSummand,
        trunc: i64,
        cfg: &EnumConfig,
    ) -> Result<(Series<BigInt>, SumStats), IndexError> {
        let (pts, stats) = enumerate(s, trunc, cfg)?;
        let fast = match self.sum_points::<i128>(s, &pts, trunc, &self.small) {
            Ok(series) => Attempt::Done(series.map_coeffs(|c| BigInt::from(*c))),
            Err(Overflow) => Attempt::Overflowed,
        };
        let series = match fast {
            Attempt::Done(series) => series,
            Attempt::Overflowed => self.sum_points::<BigInt>(s, &pts, trunc, &self.big)?,
        };
        Ok((series, stats))
    }

    /// The rotated index `I^rot(n, n') + O(u^trunc)`.
    pub fn rotated_index(
        &self,
        nz: &NZReduced,
        n: i64,
        np: i64,
        trunc: i64,
    ) -> Result<Series<BigInt>, IndexError> {
        Ok(self.sum(&LinearSummand::rotated(nz, n, np), trunc)?.0)
    }

    /// The 3D-index `I(m, e) + O(u^trunc)`: the rotated summand at
    /// `(n, n') = (m, 0)` with `k_N = e`, divided by `q^(e m / 2)`.
    pub fn plain_index(
        &self,
        nz: &NZReduced,
        m: i64,
        e: i64,
        trunc: i64,
    ) -> Result<Series<BigInt>, IndexError> {
        Ok(self.sum(&plain_summand(nz, m, e), trunc)?.0)
    }

    /// The `r x r` matrix of `I^rot(n, n')` for `0 <= n, n' < r`.
    pub fn window(
        &self,
        nz: &NZReduced,
        r: usize,
        trunc: i64,
    ) -> Result<SeriesMatrix<BigInt>, IndexError> {
        let mut entries = Vec::with_capacity(r * r);
        for n in 0..r as i64 {
            for np in 0..r as i64 {
                entries.push(self.rotated_index(nz, n, np, trunc)?);
            }
        }
        Ok(SeriesMatrix::new(r, r, entries))
    }

    /// `I^rot(n, n')` assembled as `sum_e I(n - n', e) q^(e (n + n')/2)`.
    /// `e` is walked outward in both directions with the same stopping rule
    /// as the shells: enough empty slices and nondecreasing slice minima.
    pub fn rotated_via_plain(
        &self,
        nz: &NZReduced,
        n: i64,
        np: i64,
        trunc: i64,
    ) -> Result<Series<BigInt>, IndexError> {
        let full = LinearSummand::rotated(nz, n, np);
        let last = full.dim - 1;
        let limit = 4 * trunc.abs() + 256;
        let mut total = Series::<BigInt>::zero(trunc);
        for (start, step) in [(0i64, 1i64), (-1, -1)] {
            let mut mins: Vec<i64> = Vec::new();
            let mut empty_run = 0;
            let mut e = start;
            loop {
                let slice = full.fix(last, e);
                let lowest = descend_from(&slice, vec![0; slice.dim], 1_000_000)
                    .map(|c| slice.valuation(&c))
                    .ok_or(IndexError::DivergenceGuard {
                        radius: e.abs(),
                        trunc,
                    })?;
                mins.push(lowest);
                if lowest < trunc {
                    empty_run = 0;
                    let shift = e * (n + np);
                    let part = self.plain_index(nz, n - np, e, trunc - shift)?;
                    total = &total + &part.monomial_shift(shift, 0);
                } else {
                    empty_run += 1;
                }
                if empty_run > self.config.margin && envelope_rising(&mins, self.config.window) {
                    break;
                }
                e += step;
                if e.abs() > limit {
                    return Err(IndexError::DivergenceGuard {
                        radius: e.abs(),
                        trunc,
                    });
                }
            }
        }
        Ok(total)
    }
}

/// Summand of the plain index `I(m, e)` over `k_1, ..., k_{N-1}`.
pub fn plain_summand(nz: &NZReduced, m: i64, e: i64) -> LinearSummand {
    let s = LinearSummand::rotated(nz, m, 0);
    s.fix(s.dim - 1, e).shifted(-e * m)
}

/// `S(k, n, n') + O(u^trunc)`.
pub fn summand(nz: &NZReduced, k: &[i64], n: i64, np: i64, trunc: i64) -> Series<BigInt> {
    LinearSummand::rotated(nz, n, np).series_at(k, trunc)
}

/// u-valuation of `S(k, n, n')` from the closed form.
pub fn summand_valuation(nz: &NZReduced, k: &[i64], n: i64, np: i64) -> i64 {
    LinearSummand::rotated(nz, n, np).valuation(k)
}

pub fn rotated_index(
    nz: &NZReduced,
    n: i64,
    np: i64,
    trunc: i64,
) -> Result<Series<BigInt>, IndexError> {
    IndexEngine::new().rotated_index(nz, n, np, trunc)
}

pub fn plain_index(
    nz: &NZReduced,
    m: i64,
    e: i64,
    trunc: i64,
) -> Result<Series<BigInt>, IndexError> {
    IndexEngine::new().plain_index(nz, m, e, trunc)
}

pub fn window(nz: &NZReduced, r: usize, trunc: i64) -> Result<SeriesMatrix<BigInt>, IndexError> {
    IndexEngine::new().window(nz, r, trunc)
}
