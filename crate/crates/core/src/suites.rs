//! Verification suites: annihilation by Lagrangian and edge insertions,
//! the `n -> -n` symmetries, block factorization, recursions and the
//! classical-limit ratios.

use num_rational::BigRational;
use thiserror::Error;

use crate::blocks::{block_family, factorization_check, BlockError, BlockKnot};
use crate::indexsum::{IndexEngine, IndexError};
use crate::insertion::{builtin_insertion, edge_annihilator, lagrangian, InsertionError};
use crate::nzdata::{builtin_reduced, NZReduced, NzError};
use crate::qdiff::{ahat_41, ahat_41_o1, ahat_41_o2, ahat_52_printed, ratio_check, QDiffOperator};
use crate::qseries::Series;

type QSer = Series<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` does not apply to {knot}")]
    NotApplicable { suite: String, knot: String },
    #[error(transparent)]
    Nz(#[from] NzError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Insertion(#[from] InsertionError),
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// One check: a label, the outcome and a short detail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub knot: String,
    pub lines: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.passed)
    }
}

pub const SUITES: [&str; 6] = [
    "lagrangian",
    "edges",
    "symmetry",
    "factorization",
    "recursion",
    "aj",
];

fn zero_line(label: String, s: &QSer) -> CheckLine {
    match s.valuation() {
        None => CheckLine {
            label,
            passed: true,
            detail: format!("0 + O(u^{})", s.trunc()),
        },
        Some(v) => CheckLine {
            label,
            passed: false,
            detail: format!("nonzero at u^{v}"),
        },
    }
}

fn equal_line(label: String, a: &QSer, b: &QSer) -> CheckLine {
    let t = a.trunc().min(b.trunc());
    let diff = &a.truncate(t) - &b.truncate(t);
    match diff.valuation() {
        None => CheckLine {
            label,
            passed: true,
            detail: format!("equal to O(u^{t})"),
        },
        Some(v) => CheckLine {
            label,
            passed: false,
            detail: format!("differ at u^{v}"),
        },
    }
}

/// `ẑ_j^(-1) + ẑ''_j - 1` annihilates `I^rot(n, n')` for every tetrahedron
/// and `(n, n')` in `{0,1}^2`.
pub fn lagrangian_suite(
    engine: &IndexEngine,
    knot: &str,
    trunc: i64,
) -> Result<SuiteReport, SuiteError> {
    let nz = builtin_reduced(knot)?;
    let mut lines = Vec::new();
    for j in 0..nz.size() {
        let ins = lagrangian(nz.size(), j);
        for (n, np) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = engine.inserted_rotated_index(&nz, &ins, n, np, trunc)?;
            lines.push(zero_line(format!("lagrangian z{} ({n},{np})", j + 1), &s));
        }
    }
    Ok(report("lagrangian", knot, lines))
}

/// `E_i - q` annihilates `I^rot(n, n')` for every edge `i = 1..N-1`.
pub fn edge_suite(engine: &IndexEngine, knot: &str, trunc: i64) -> Result<SuiteReport, SuiteError> {
    let nz = builtin_reduced(knot)?;
    let mut lines = Vec::new();
    for i in 1..nz.size() {
        let ins = edge_annihilator(&nz, i)?;
        for (n, np) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = engine.inserted_rotated_index(&nz, &ins, n, np, trunc)?;
            lines.push(zero_line(format!("edge E{i} - q ({n},{np})"), &s));
        }
    }
    Ok(report("edges", knot, lines))
}

/// `I(n,n') = I(n,-n') = I(-n,n') = I(-n,-n')` for `0 <= n, n' <= max`.
pub fn symmetry_suite(
    engine: &IndexEngine,
    knot: &str,
    max: i64,
    trunc: i64,
) -> Result<SuiteReport, SuiteError> {
    let nz = builtin_reduced(knot)?;
    let mut lines = Vec::new();
    for n in 0..=max {
        for np in 0..=max {
            let base = engine.rotated_index(&nz, n, np, trunc)?.to_rational();
            for (sn, snp) in [(1, -1), (-1, 1), (-1, -1)] {
                if (sn == -1 && n == 0) || (snp == -1 && np == 0) {
                    continue;
                }
                let other = engine
                    .rotated_index(&nz, sn * n, snp * np, trunc)?
                    .to_rational();
                lines.push(equal_line(
                    format!("I({n},{np}) = I({},{})", sn * n, snp * np),
                    &base,
                    &other,
                ));
            }
        }
    }
    Ok(report("symmetry", knot, lines))
}

/// Block factorization for `|n|, |n'| <= max`.
pub fn factorization_suite(
    engine: &IndexEngine,
    knot: &str,
    max: i64,
    trunc: i64,
) -> Result<SuiteReport, SuiteError> {
    let bk = block_knot(knot, "factorization")?;
    let mut lines = Vec::new();
    for n in -max..=max {
        for np in -max..=max {
            let r = factorization_check(engine, bk, n, np, trunc)?;
            let passed = r.passed() && r.trunc >= trunc;
            let detail = match r.mismatch_at {
                None => format!("equal to O(u^{})", r.trunc),
                Some(v) => format!("differ at u^{v}"),
            };
            lines.push(CheckLine {
                label: format!("factorization ({n},{np})"),
                passed,
                detail,
            });
        }
    }
    Ok(report("factorization", knot, lines))
}

fn block_knot(knot: &str, suite: &str) -> Result<BlockKnot, SuiteError> {
    BlockKnot::parse(knot).map_err(|_| SuiteError::NotApplicable {
        suite: suite.into(),
        knot: knot.into(),
    })
}

/// The transcribed operator of a knot with blocks.
pub fn knot_operator(knot: BlockKnot) -> QDiffOperator {
    match knot {
        BlockKnot::Fig8 => ahat_41(),
        BlockKnot::FiveTwo => ahat_52_printed(),
    }
}

/// The knot's operator annihilates every block for `n = 0..=5`, and the
/// rows (left action) and columns (right action) of the index window.
pub fn recursion_suite(
    engine: &IndexEngine,
    knot: &str,
    trunc: i64,
) -> Result<SuiteReport, SuiteError> {
    let bk = block_knot(knot, "recursion")?;
    let nz = builtin_reduced(knot)?;
    let op = knot_operator(bk);
    let mut lines = Vec::new();
    for alpha in 0..bk.blocks() {
        let fam = block_family(bk, alpha, trunc);
        for n in 0..=5 {
            let s = op.apply_left(&fam, n);
            lines.push(zero_line(format!("block h{alpha} n={n}"), &s));
        }
    }
    lines.extend(window_lines(engine, &nz, &op, trunc)?);
    Ok(report("recursion", knot, lines))
}

/// Left action on rows `n -> I(n, n')` and right action on columns, for
/// `n, n'` in `0..2` and start indices `-1..=1`.
pub fn window_lines(
    engine: &IndexEngine,
    nz: &NZReduced,
    op: &QDiffOperator,
    trunc: i64,
) -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    let span = op.order() as i64;
    let mut cache = std::collections::HashMap::new();
    for a in -1..=1 + span {
        for b in 0..2 {
            cache.insert((a, b), engine.rotated_index(nz, a, b, trunc)?.to_rational());
            cache.insert((b, a), engine.rotated_index(nz, b, a, trunc)?.to_rational());
        }
    }
    for fixed in 0..2 {
        for start in -1..=1 {
            let row = op.apply_left(|n| cache[&(n, fixed)].clone(), start);
            lines.push(zero_line(
                format!("left on I(n,{fixed}) from n={start}"),
                &row,
            ));
            let col = op.apply_right(|np| cache[&(fixed, np)].clone(), start);
            lines.push(zero_line(
                format!("right on I({fixed},n') from n'={start}"),
                &col,
            ));
        }
    }
    Ok(lines)
}

/// Classical limits of the inserted 4_1 operators are multiples of the
/// classical limit of `Â_{4_1}` by a function of `x`.
pub fn aj_suite(knot: &str) -> Result<SuiteReport, SuiteError> {
    if knot != "4_1" {
        return Err(SuiteError::NotApplicable {
            suite: "aj".into(),
            knot: knot.into(),
        });
    }
    let base = ahat_41().classical_limit();
    let primitive = base.x_primitive_part().expect("u-free");
    let mut lines = Vec::new();
    for (name, op) in [("4_1:O1", ahat_41_o1()), ("4_1:O2", ahat_41_o2())] {
        let limit = op.classical_limit();
        let literal = ratio_check(&limit, &base);
        let reduced = ratio_check(&limit, &primitive);
        let text = |r: &Option<crate::qdiff::XRatio>| {
            r.as_ref().map_or("none".to_string(), |r| r.to_text())
        };
        lines.push(CheckLine {
            label: format!("{name} classical ratio"),
            passed: literal.is_some(),
            detail: format!(
                "to A(q=1): {}; to its x-primitive part: {}",
                text(&literal),
                text(&reduced)
            ),
        });
    }
    Ok(report("aj", knot, lines))
}

fn report(suite: &str, knot: &str, lines: Vec<CheckLine>) -> SuiteReport {
    SuiteReport {
        suite: suite.into(),
        knot: knot.into(),
        lines,
    }
}

/// Runs a suite by name. `trunc` is in u-units.
pub fn run_suite(
    engine: &IndexEngine,
    suite: &str,
    knot: &str,
    trunc: i64,
) -> Result<SuiteReport, SuiteError> {
    match suite {
        "lagrangian" => lagrangian_suite(engine, knot, trunc),
        "edges" => edge_suite(engine, knot, trunc),
        "symmetry" => symmetry_suite(engine, knot, 3, trunc),
        "factorization" => factorization_suite(engine, knot, 2, trunc),
        "recursion" => recursion_suite(engine, knot, trunc),
        "aj" => aj_suite(knot),
        other => Err(SuiteError::UnknownSuite(other.into())),
    }
}

/// Names of the inserted-index insertions for a knot.
pub fn knot_insertions(knot: &str) -> Vec<&'static str> {
    crate::insertion::BUILTIN_INSERTIONS
        .iter()
        .copied()
        .filter(|n| n.split(':').next() == Some(knot))
        .filter(|n| builtin_insertion(n).is_ok())
        .collect()
}
