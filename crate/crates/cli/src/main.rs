//! `qindex`: rotated 3D-index, insertions, Q-matrices, q-difference
//! operators, holomorphic blocks and verification suites.

mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qindex::blocks::{block, BlockId, BlockKnot};
use qindex::indexsum::IndexEngine;
use qindex::insertion::{builtin_insertion, Insertion};
use qindex::nzdata::{builtin_reduced, reduce, GluingData, NZReduced, BUILTIN_NAMES};
use qindex::qdiff::{ahat_41, ahat_41_o1, ahat_41_o2, guess, GuessBounds, QDiffOperator};
use qindex::qmatrix::{extract_q, DegreeSchedule, QMatrixError};
use qindex::suites::{knot_operator, run_suite, SuiteError, SUITES};
use qindex::QSeries;

use report::{Doc, Format, Section};

#[derive(Parser, Debug)]
#[command(
    name = "qindex",
    version,
    about = "Exact rotated 3D-index of ideally triangulated knot complements"
)]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rotated index I(n, n') or the r x r window.
    Index {
        /// Built-in name (4_1, 5_2, m237) or a gluing-data file.
        knot: String,
        #[arg(default_value_t = 0, allow_negative_numbers = true)]
        n: i64,
        #[arg(default_value_t = 0, allow_negative_numbers = true)]
        np: i64,
        /// Truncation O(q^T).
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        /// Print the window 0 <= n, n' < r instead.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Inserted rotated index I_O(n, n').
    Insert {
        knot: String,
        /// Insertion expression, e.g. `-1*z1^-1 + z1''^2*z3`.
        #[arg(allow_hyphen_values = true, conflicts_with = "builtin")]
        expr: Option<String>,
        /// Built-in insertion (O1, O2, z2).
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        np: i64,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Rational matrix Q with I_O[r] = Q I[r].
    Qmatrix {
        knot: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "builtin")]
        insertion: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 2)]
        window: usize,
        #[arg(long, default_value_t = 60)]
        trunc: i64,
        /// Extra series coefficients a reconstruction must reproduce.
        #[arg(long, default_value_t = qindex::ratfun::DEFAULT_GUARD)]
        guard: i64,
        /// Largest numerator and denominator degree tried, in q.
        #[arg(long, default_value_t = 32)]
        max_deg: i64,
    },
    /// Guess a q-difference operator annihilating a family.
    Guess {
        #[arg(long)]
        knot: String,
        #[arg(long, value_enum)]
        family: Family,
        /// Fixed second (row) or first (col) index.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        fixed: i64,
        /// Block label for the block family.
        #[arg(long, default_value_t = 0)]
        alpha: u32,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "builtin")]
        insertion: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 8)]
        xdeg: i64,
        /// Largest u = q^(1/2) exponent in the coefficients.
        #[arg(long, default_value_t = 20)]
        udeg: i64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        from: i64,
        #[arg(long, default_value_t = 7, allow_negative_numbers = true)]
        to: i64,
        #[arg(long, default_value_t = 120)]
        trunc: i64,
    },
    /// Holomorphic block h^(alpha)_n at q or q^-1.
    Blocks {
        #[arg(long)]
        knot: String,
        #[arg(long, default_value_t = 0)]
        alpha: u32,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        n: i64,
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
    },
    /// Run a verification suite; exit 2 on any failed check.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Knot; all applicable built-ins when omitted.
        #[arg(long)]
        knot: Option<String>,
        #[arg(long, default_value_t = 20)]
        trunc: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Row,
    Col,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lagrangian,
    Edges,
    Symmetry,
    Factorization,
    Recursion,
    Aj,
}

impl Suite {
    fn name(self) -> &'static str {
        let i = self as usize;
        SUITES[i]
    }
}

/// A finished command: the document and whether every check passed.
struct Outcome {
    doc: Doc,
    verified: bool,
}

impl Outcome {
    fn ok(doc: Doc) -> Self {
        Outcome {
            doc,
            verified: true,
        }
    }
}

/// Truncation flags are in q; the library works in u = q^(1/2).
fn u_trunc(q_trunc: i64) -> Result<i64, String> {
    if q_trunc < 0 {
        return Err(format!("truncation must be nonnegative, got {q_trunc}"));
    }
    Ok(2 * q_trunc)
}

fn load_knot(knot: &str) -> Result<(String, NZReduced), String> {
    if BUILTIN_NAMES.contains(&knot) {
        return Ok((
            knot.into(),
            builtin_reduced(knot).map_err(|e| e.to_string())?,
        ));
    }
    let text = std::fs::read_to_string(knot).map_err(|e| format!("{knot}: {e}"))?;
    let g = GluingData::parse(&text).map_err(|e| format!("{knot}: {e}"))?;
    let nz = reduce(&g).map_err(|e| format!("{knot}: {e}"))?;
    Ok((knot.into(), nz))
}

/// The insertion from an expression or a built-in label (`O1` or `4_1:O1`).
fn load_insertion(
    knot: &str,
    nz: &NZReduced,
    expr: Option<&str>,
    builtin: Option<&str>,
) -> Result<(String, Insertion), String> {
    match (expr, builtin) {
        (Some(e), None) => {
            let ins = Insertion::parse(e, nz.size()).map_err(|e| e.to_string())?;
            Ok((ins.to_text(), ins))
        }
        (None, Some(b)) => {
            let name = if b.contains(':') {
                b.to_string()
            } else {
                format!("{knot}:{b}")
            };
            let ins = builtin_insertion(&name).map_err(|e| e.to_string())?;
            if ins.terms().iter().any(|m| m.alpha.len() != nz.size()) {
                return Err(format!("insertion {name} does not fit {knot}"));
            }
            Ok((name, ins))
        }
        _ => Err("give exactly one of an insertion expression and --builtin".into()),
    }
}

fn series_section(name: String, s: &QSeries) -> Section {
    Section::new(name).text(s.pretty()).body(s.to_text())
}

fn cmd_index(
    engine: &IndexEngine,
    knot: &str,
    n: i64,
    np: i64,
    trunc: i64,
    window: Option<usize>,
) -> Result<Outcome, String> {
    let (name, nz) = load_knot(knot)?;
    let t = u_trunc(trunc)?;
    let mut doc = Doc::new("index");
    doc.push(
        Section::new("params")
            .field("knot", &name)
            .field("trunc-q", trunc),
    );
    match window {
        Some(r) => {
            let w = engine
                .window(&nz, r, t)
                .map_err(|e| e.to_string())?
                .to_rational();
            for a in 0..r {
                for b in 0..r {
                    doc.push(series_section(format!("I({a},{b})"), w.get(a, b)));
                }
            }
        }
        None => {
            let s = engine
                .rotated_index(&nz, n, np, t)
                .map_err(|e| e.to_string())?
                .to_rational();
            doc.push(series_section(format!("I({n},{np})"), &s));
        }
    }
    Ok(Outcome::ok(doc))
}

#[allow(clippy::too_many_arguments)]
fn cmd_insert(
    engine: &IndexEngine,
    knot: &str,
    expr: Option<&str>,
    builtin: Option<&str>,
    n: i64,
    np: i64,
    trunc: i64,
    window: Option<usize>,
) -> Result<Outcome, String> {
    let (name, nz) = load_knot(knot)?;
    let (label, ins) = load_insertion(&name, &nz, expr, builtin)?;
    let t = u_trunc(trunc)?;
    let mut doc = Doc::new("insert");
    doc.push(
        Section::new("params")
            .field("knot", &name)
            .field("insertion", &label)
            .field("trunc-q", trunc)
            .text(format!("O = {}", ins.to_text())),
    );
    let points: Vec<(i64, i64)> = match window {
        Some(r) => (0..r as i64)
            .flat_map(|a| (0..r as i64).map(move |b| (a, b)))
            .collect(),
        None => vec![(n, np)],
    };
    for (a, b) in points {
        let s = engine
            .inserted_rotated_index(&nz, &ins, a, b, t)
            .map_err(|e| e.to_string())?;
        doc.push(series_section(format!("I_O({a},{b})"), &s));
    }
    Ok(Outcome::ok(doc))
}

#[allow(clippy::too_many_arguments)]
fn cmd_qmatrix(
    engine: &IndexEngine,
    knot: &str,
    expr: Option<&str>,
    builtin: Option<&str>,
    r: usize,
    trunc: i64,
    guard: i64,
    max_deg: i64,
) -> Result<Outcome, String> {
    let (name, nz) = load_knot(knot)?;
    let (label, ins) = load_insertion(&name, &nz, expr, builtin)?;
    if r == 0 {
        return Err("window must be positive".into());
    }
    let t = u_trunc(trunc)?;
    let schedule = DegreeSchedule {
        start: 8.min(2 * max_deg),
        max: 2 * max_deg,
        guard,
    };
    let mut doc = Doc::new("qmatrix");
    doc.push(
        Section::new("params")
            .field("knot", &name)
            .field("insertion", &label)
            .field("window", r)
            .field("trunc-q", trunc)
            .field("guard", guard)
            .field("max-deg-q", max_deg),
    );
    match extract_q(engine, &nz, &ins, r, t, &schedule) {
        Ok(x) => {
            let (pre, polys) = x.q.factored();
            let mut grid = Section::new("Q").field("prefactor", pre.pretty());
            for row in &polys {
                let cells: Vec<String> = row.iter().map(|p| p.to_text()).collect();
                grid = grid.text(format!("[ {} ]", cells.join(" | ")));
            }
            doc.push(grid.body(x.q.to_text()));
            doc.push(Section::new("det").field("value", x.q.det().pretty()));
            doc.push(
                Section::new("residual")
                    .field("order-u", x.residual_order)
                    .text(format!("Q I[r] - I_O[r] = O(u^{})", x.residual_order)),
            );
            Ok(Outcome::ok(doc))
        }
        Err(QMatrixError::Index(e)) => Err(e.to_string()),
        Err(e) => {
            let status = match e {
                QMatrixError::NoReconstruction { .. } => "no-reconstruction",
                QMatrixError::SingularWindow => "singular-window",
                _ => "residual-mismatch",
            };
            doc.push(
                Section::new("result")
                    .field("status", status)
                    .text(e.to_string()),
            );
            Ok(Outcome {
                doc,
                verified: false,
            })
        }
    }
}

/// A transcribed operator the guess can be compared with.
fn reference_operator(
    knot: &str,
    family: Family,
    alpha_or_ins: Option<&str>,
) -> Option<QDiffOperator> {
    match (knot, family, alpha_or_ins) {
        ("4_1", Family::Row, None) => Some(ahat_41()),
        ("4_1", Family::Row, Some("4_1:O1")) => Some(ahat_41_o1()),
        ("4_1", Family::Row, Some("4_1:O2")) => Some(ahat_41_o2()),
        (k, Family::Block, _) => BlockKnot::parse(k).ok().map(knot_operator),
        _ => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_guess(
    engine: &IndexEngine,
    knot: &str,
    family: Family,
    fixed: i64,
    alpha: u32,
    expr: Option<&str>,
    builtin: Option<&str>,
    bounds: GuessBounds,
    from: i64,
    to: i64,
    trunc: i64,
) -> Result<Outcome, String> {
    let t = u_trunc(trunc)?;
    if from > to {
        return Err("--from must not exceed --to".into());
    }
    let mut params = Section::new("params")
        .field("knot", knot)
        .field("family", format!("{family:?}").to_lowercase())
        .field("order", bounds.order)
        .field("xdeg", bounds.xdeg)
        .field("udeg", bounds.udeg)
        .field("range", format!("{from}..{to}"))
        .field("trunc-q", trunc);
    let result;
    let mut label = None;
    if family == Family::Block {
        let bk = BlockKnot::parse(knot).map_err(|e| e.to_string())?;
        BlockId::new(bk, alpha, 0).map_err(|e| e.to_string())?;
        params = params.field("alpha", alpha);
        let fam = |n: i64| {
            block(BlockId::new(bk, alpha, n).expect("alpha checked"), false, t)
                .expect("block series")
        };
        result = guess(fam, &bounds, from..=to);
    } else {
        let (name, nz) = load_knot(knot)?;
        let ins = match (expr, builtin) {
            (None, None) => None,
            _ => Some(load_insertion(&name, &nz, expr, builtin)?),
        };
        params = params.field("fixed", fixed);
        if let Some((l, _)) = &ins {
            params = params.field("insertion", l);
            label = Some(l.clone());
        }
        // the family is evaluated before the search; errors surface here
        let hi = to + bounds.order as i64 + qindex::qdiff::GUESS_CHECKS;
        let mut values = std::collections::HashMap::new();
        for k in from..=hi {
            let (n, np) = if family == Family::Row {
                (k, fixed)
            } else {
                (fixed, k)
            };
            let s = match &ins {
                None => engine.rotated_index(&nz, n, np, t).map(|s| s.to_rational()),
                Some((_, o)) => engine.inserted_rotated_index(&nz, o, n, np, t),
            }
            .map_err(|e| e.to_string())?;
            values.insert(k, s);
        }
        result = guess(|k| values[&k].clone(), &bounds, from..=to);
    }
    let mut doc = Doc::new("guess");
    doc.push(params);
    match result {
        Ok(op) => {
            let mut sec = Section::new("operator")
                .field("order", op.order())
                .text(op.to_text())
                .body(op.to_text());
            if let Some(r) = reference_operator(knot, family, label.as_deref()) {
                sec = sec.field("matches-transcribed", op.same_up_to_units(&r));
            }
            doc.push(sec);
            let limit = op.classical_limit();
            doc.push(
                Section::new("classical-limit")
                    .text(limit.to_text())
                    .body(limit.to_text()),
            );
            Ok(Outcome::ok(doc))
        }
        Err(e) => {
            doc.push(
                Section::new("result")
                    .field("status", "no-operator")
                    .text(e.to_string()),
            );
            Ok(Outcome {
                doc,
                verified: false,
            })
        }
    }
}

fn cmd_blocks(
    knot: &str,
    alpha: u32,
    n: i64,
    inverse: bool,
    trunc: i64,
) -> Result<Outcome, String> {
    let bk = BlockKnot::parse(knot).map_err(|e| e.to_string())?;
    let id = BlockId::new(bk, alpha, n).map_err(|e| e.to_string())?;
    let t = u_trunc(trunc)?;
    let s = block(id, inverse, t).map_err(|e| e.to_string())?;
    let mut doc = Doc::new("blocks");
    doc.push(
        Section::new("params")
            .field("knot", bk)
            .field("alpha", alpha)
            .field("n", n)
            .field("at", if inverse { "q^-1" } else { "q" })
            .field("trunc-q", trunc),
    );
    doc.push(series_section(format!("h{alpha}({n})"), &s));
    Ok(Outcome::ok(doc))
}

fn cmd_verify(
    engine: &IndexEngine,
    suite: Suite,
    knot: Option<&str>,
    trunc: i64,
) -> Result<Outcome, String> {
    let t = u_trunc(trunc)?;
    let knots: Vec<&str> = match knot {
        Some(k) => vec![k],
        None => BUILTIN_NAMES.to_vec(),
    };
    let mut doc = Doc::new("verify");
    doc.push(
        Section::new("params")
            .field("suite", suite.name())
            .field("trunc-q", trunc),
    );
    let mut verified = true;
    let mut ran = 0;
    for k in knots {
        match run_suite(engine, suite.name(), k, t) {
            Ok(rep) => {
                ran += 1;
                let mut sec = Section::new(format!("{} {}", rep.suite, rep.knot))
                    .field("checks", rep.lines.len())
                    .field("failed", rep.failures().count());
                let mut body = String::new();
                for l in &rep.lines {
                    let mark = if l.passed { "pass" } else { "FAIL" };
                    sec = sec.text(format!("{mark} {}: {}", l.label, l.detail));
                    body.push_str(&format!("{mark}\t{}\t{}\n", l.label, l.detail));
                }
                verified &= rep.passed();
                doc.push(sec.body(body));
            }
            Err(SuiteError::NotApplicable { .. }) if knot.is_none() => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    if ran == 0 {
        return Err(format!("suite {} applies to no knot", suite.name()));
    }
    doc.push(Section::new("result").field("status", if verified { "pass" } else { "fail" }));
    Ok(Outcome { doc, verified })
}

fn run(cli: Cli) -> Result<Outcome, String> {
    let engine = IndexEngine::new();
    match cli.command {
        Command::Index {
            knot,
            n,
            np,
            trunc,
            window,
        } => cmd_index(&engine, &knot, n, np, trunc, window),
        Command::Insert {
            knot,
            expr,
            builtin,
            n,
            np,
            trunc,
            window,
        } => cmd_insert(
            &engine,
            &knot,
            expr.as_deref(),
            builtin.as_deref(),
            n,
            np,
            trunc,
            window,
        ),
        Command::Qmatrix {
            knot,
            insertion,
            builtin,
            window,
            trunc,
            guard,
            max_deg,
        } => cmd_qmatrix(
            &engine,
            &knot,
            insertion.as_deref(),
            builtin.as_deref(),
            window,
            trunc,
            guard,
            max_deg,
        ),
        Command::Guess {
            knot,
            family,
            fixed,
            alpha,
            insertion,
            builtin,
            order,
            xdeg,
            udeg,
            from,
            to,
            trunc,
        } => {
            if xdeg < 0 || udeg < 0 || order == 0 {
                return Err("order must be positive and degrees nonnegative".into());
            }
            let bounds = GuessBounds::new(order, xdeg, udeg);
            cmd_guess(
                &engine,
                &knot,
                family,
                fixed,
                alpha,
                insertion.as_deref(),
                builtin.as_deref(),
                bounds,
                from,
                to,
                trunc,
            )
        }
        Command::Blocks {
            knot,
            alpha,
            n,
            inverse,
            trunc,
        } => cmd_blocks(&knot, alpha, n, inverse, trunc),
        Command::Verify { suite, knot, trunc } => {
            cmd_verify(&engine, suite, knot.as_deref(), trunc)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            print!("{}", out.doc.render(format));
            ExitCode::from(if out.verified { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
