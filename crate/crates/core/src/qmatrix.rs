//! Extraction of the rational matrix `Q` with `I_O[r] = Q · I[r]` from
//! windows of the inserted and plain rotated index, and its verification.

use num_rational::BigRational;
use thiserror::Error;

use crate::indexsum::{IndexEngine, IndexError};
use crate::insertion::Insertion;
use crate::matrix::{MatrixError, RatMatrix, SeriesMatrix};
use crate::nzdata::NZReduced;
use crate::qseries::Series;
use crate::ratfun::{reconstruct, RatFun, RatFunError, DEFAULT_GUARD};

type QSer = Series<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QMatrixError {
    #[error("entry ({row},{col}) is not a rational function of u-degree at most {max_deg}")]
    NoReconstruction {
        row: usize,
        col: usize,
        max_deg: i64,
    },
    #[error("the index window is singular to the available precision")]
    SingularWindow,
    #[error("reconstructed Q fails to reproduce the inserted window at entry ({row},{col})")]
    ResidualMismatch { row: usize, col: usize },
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Degree bounds tried in turn, in u-units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSchedule {
    pub start: i64,
    pub max: i64,
    pub guard: i64,
}

impl Default for DegreeSchedule {
    fn default() -> Self {
        DegreeSchedule {
            start: 8,
            max: 64,
            guard: DEFAULT_GUARD,
        }
    }
}

impl DegreeSchedule {
    fn bounds(&self) -> Vec<i64> {
        let mut out = Vec::new();
        let mut d = self.start.max(1);
        while d < self.max {
            out.push(d);
            d *= 2;
        }
        out.push(self.max);
        out
    }
}

/// A reconstructed `Q` with the windows it came from.
#[derive(Debug, Clone)]
pub struct QExtraction {
    pub q: RatMatrix,
    pub window: SeriesMatrix<BigRational>,
    pub inserted: SeriesMatrix<BigRational>,
    /// `Q · I[r] - I_O[r]` is zero below this u-exponent in every entry.
    pub residual_order: i64,
}

/// Reconstructs one series as a rational function, escalating the bounds.
pub fn reconstruct_entry(s: &QSer, schedule: &DegreeSchedule) -> Result<RatFun, RatFunError> {
    let mut last = RatFunError::NoReconstruction {
        num_deg: schedule.start,
        den_deg: schedule.start,
    };
    for d in schedule.bounds() {
        match reconstruct(s, d, d, schedule.guard) {
            Ok(f) => return Ok(f),
            Err(e @ RatFunError::InsufficientPrecision { .. }) => return Err(last_or(e, last)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn last_or(insufficient: RatFunError, last: RatFunError) -> RatFunError {
    match last {
        RatFunError::NoReconstruction { .. } => last,
        _ => insufficient,
    }
}

/// `I[r]` and `I_O[r]` as rational series matrices.
pub fn windows(
    engine: &IndexEngine,
    nz: &NZReduced,
    ins: &Insertion,
    r: usize,
    trunc: i64,
) -> Result<(SeriesMatrix<BigRational>, SeriesMatrix<BigRational>), IndexError> {
    let plain = engine.window(nz, r, trunc)?.to_rational();
    let mut entries = Vec::with_capacity(r * r);
    for n in 0..r as i64 {
        for np in 0..r as i64 {
            entries.push(engine.inserted_rotated_index(nz, ins, n, np, trunc)?);
        }
    }
    Ok((plain, SeriesMatrix::new(r, r, entries)))
}

/// Solves `I_O[r] = Q · I[r]` over series and reconstructs every entry of
/// `Q`; the result is checked against the windows.
pub fn extract_q_from(
    plain: SeriesMatrix<BigRational>,
    inserted: SeriesMatrix<BigRational>,
    schedule: &DegreeSchedule,
) -> Result<QExtraction, QMatrixError> {
    let r = plain.rows();
    let inv = plain.invert().map_err(|e| match e {
        MatrixError::Singular | MatrixError::Shape(_) => QMatrixError::SingularWindow,
    })?;
    let approx = inserted
        .mul(&inv)
        .map_err(|_| QMatrixError::SingularWindow)?;
    let mut entries = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            let f = reconstruct_entry(approx.get(i, j), schedule).map_err(|_| {
                QMatrixError::NoReconstruction {
                    row: i,
                    col: j,
                    max_deg: schedule.max,
                }
            })?;
            entries.push(f);
        }
    }
    let q = RatMatrix::new(r, r, entries);
    let predicted = q.apply(&plain);
    let mut residual_order = i64::MAX;
    for i in 0..r {
        for j in 0..r {
            let diff = predicted.get(i, j) - inserted.get(i, j);
            if !diff.is_zero() {
                return Err(QMatrixError::ResidualMismatch { row: i, col: j });
            }
            residual_order = residual_order.min(diff.trunc());
        }
    }
    Ok(QExtraction {
        q,
        window: plain,
        inserted,
        residual_order,
    })
}

/// `Q_O` for the `r x r` window at truncation `trunc` (u-units).
pub fn extract_q(
    engine: &IndexEngine,
    nz: &NZReduced,
    ins: &Insertion,
    r: usize,
    trunc: i64,
    schedule: &DegreeSchedule,
) -> Result<QExtraction, QMatrixError> {
    let (plain, inserted) = windows(engine, nz, ins, r, trunc)?;
    extract_q_from(plain, inserted, schedule)
}

/// Outcome of checking `I_O(n, n') = sum_t Q[n][t] I(t, n')` at one sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCheck {
    pub n: i64,
    pub np: i64,
    /// Lowest u-exponent where the two sides differ, if any.
    pub mismatch_at: Option<i64>,
    /// Truncation of the comparison.
    pub trunc: i64,
}

impl SampleCheck {
    pub fn passed(&self) -> bool {
        self.mismatch_at.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QVerifyReport {
    pub samples: Vec<SampleCheck>,
}

impl QVerifyReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(SampleCheck::passed)
    }

    /// Smallest truncation to which every sample matched, or the lowest
    /// mismatch exponent.
    pub fn matched_order(&self) -> i64 {
        self.samples
            .iter()
            .map(|s| s.mismatch_at.unwrap_or(s.trunc))
            .min()
            .unwrap_or(i64::MAX)
    }
}

/// Checks `I_O(n, n') = sum_t Q[n][t] I(t, n')` for the given samples
/// (`0 <= n < r`); failures are reported, not raised.
pub fn verify_q(
    engine: &IndexEngine,
    nz: &NZReduced,
    ins: &Insertion,
    q: &RatMatrix,
    samples: &[(i64, i64)],
    trunc: i64,
) -> Result<QVerifyReport, IndexError> {
    let r = q.rows();
    let mut out = Vec::new();
    for &(n, np) in samples {
        assert!((0..r as i64).contains(&n), "sample row outside the window");
        let lhs = engine.inserted_rotated_index(nz, ins, n, np, trunc)?;
        let mut rhs = QSer::zero(i64::MAX / 4);
        for t in 0..r {
            let f = q.get(n as usize, t);
            if f.is_zero() {
                continue;
            }
            let lead = f.num().low().unwrap_or(0);
            let it = engine.rotated_index(nz, t as i64, np, trunc - lead.min(0))?;
            rhs = &rhs + &crate::ratfun::times_series(f, &it);
        }
        let rhs = rhs.truncate(trunc);
        let diff = &lhs - &rhs;
        out.push(SampleCheck {
            n,
            np,
            mismatch_at: diff.valuation(),
            trunc: diff.trunc(),
        });
    }
    Ok(QVerifyReport { samples: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::insertion::builtin_insertion;
    use crate::nzdata::builtin_reduced;
    use crate::ratfun::parse_qpoly;

    fn fig8_q1() -> RatMatrix {
        let den = parse_qpoly("q - 1").unwrap();
        let f = |p: &str| RatFun::new(parse_qpoly(p).unwrap(), den.clone()).unwrap();
        RatMatrix::new(
            2,
            2,
            vec![
                f("2 - q"),
                f("-q^(1/2)"),
                f("q^(1/2)"),
                f("-q - 1 + q^(-1)"),
            ],
        )
    }

    #[test]
    fn fig8_q1_at_moderate_depth() {
        let nz = builtin_reduced("4_1").unwrap();
        let ins = builtin_insertion("4_1:O1").unwrap();
        let eng = IndexEngine::new();
        let ex = extract_q(&eng, &nz, &ins, 2, 90, &DegreeSchedule::default()).unwrap();
        assert_eq!(ex.q, fig8_q1());
        assert_eq!(ex.q.det(), RatFun::parse("1 + 2*q^(-1)").unwrap());
    }

    #[test]
    fn verify_reports_pass_and_failure() {
        let nz = builtin_reduced("4_1").unwrap();
        let ins = builtin_insertion("4_1:O1").unwrap();
        let eng = IndexEngine::new();
        let good = verify_q(&eng, &nz, &ins, &fig8_q1(), &[(0, 0), (1, 1)], 30).unwrap();
        assert!(good.passed());
        let mut bad = fig8_q1();
        bad.set(0, 0, bad.get(0, 0).add(&RatFun::one()));
        let report = verify_q(&eng, &nz, &ins, &bad, &[(0, 0)], 30).unwrap();
        assert!(!report.passed());
        assert!(report.matched_order() < 4);
    }

    #[test]
    fn identity_for_the_trivial_insertion() {
        let nz = builtin_reduced("4_1").unwrap();
        let one = Insertion::scalar(2, RatFun::one());
        let eng = IndexEngine::new();
        let ex = extract_q(&eng, &nz, &one, 2, 60, &DegreeSchedule::default()).unwrap();
        assert_eq!(ex.q, RatMatrix::identity(2));
        let report = verify_q(&eng, &nz, &one, &RatMatrix::identity(2), &[(0, 1)], 20).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn fig52_o1_first_row() {
        let nz = builtin_reduced("5_2").unwrap();
        let ins = builtin_insertion("5_2:O1").unwrap();
        let eng = IndexEngine::new();
        let ex = extract_q(&eng, &nz, &ins, 3, 100, &DegreeSchedule::default()).unwrap();
        let den = parse_qpoly("1 - q^2 - q^3 + q^5").unwrap();
        let entry = |p: &str| RatFun::new(parse_qpoly(p).unwrap(), den.clone()).unwrap();
        assert_eq!(ex.q.get(0, 0), &entry("-q^2 - q^3 - q^4"));
        assert_eq!(ex.q.get(0, 2), &entry("-q^7"));
        assert_eq!(ex.q.get(2, 2), &entry("-q^3"));
    }

    #[test]
    fn schedule_doubles() {
        assert_eq!(DegreeSchedule::default().bounds(), vec![8, 16, 32, 64]);
    }
}
