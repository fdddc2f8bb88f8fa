//! Gluing equation matrices, their Neumann-Zagier reduction, the built-in
//! knot tables and the triangulation file format.
//!
//! File format:
//!
//! ```text
//! N 2
//! G
//! 2 2
//! ...          (N+2 rows of N integers per block)
//! G'
//! ...
//! G''
//! ...
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NzError {
    #[error("no combination of edge rows makes the longitude row even")]
    NonIntegralLongitude,
    #[error("unknown knot `{0}` (expected 4_1, 5_2 or m237)")]
    UnknownKnot(String),
    #[error("line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
}

/// The matrices `G`, `G'`, `G''` of the logarithmic gluing equations. Rows
/// are the `N` edges, the meridian and the longitude; columns are tetrahedra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingData {
    pub n: usize,
    pub g: Vec<Vec<i64>>,
    pub gp: Vec<Vec<i64>>,
    pub gpp: Vec<Vec<i64>>,
}

/// Reduced Neumann-Zagier data driving the index sums. Row `N` of `a`, `b`
/// and `nu` is the meridian equation; `lambda`, `lambdapp` and `nu_lambda`
/// are halves of the longitude row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NZReduced {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub nu: Vec<i64>,
    pub lambda: Vec<i64>,
    pub lambdapp: Vec<i64>,
    pub nu_lambda: i64,
}

impl GluingData {
    pub fn new(g: Vec<Vec<i64>>, gp: Vec<Vec<i64>>, gpp: Vec<Vec<i64>>) -> Result<Self, NzError> {
        let n = g.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(NzError::Shape("no tetrahedra".into()));
        }
        for (name, m) in [("G", &g), ("G'", &gp), ("G''", &gpp)] {
            if m.len() != n + 2 || m.iter().any(|r| r.len() != n) {
                return Err(NzError::Shape(format!("{name} must be {}x{n}", n + 2)));
            }
        }
        Ok(GluingData { n, g, gp, gpp })
    }

    /// `(2, ..., 2, 0, 0)`.
    pub fn eta(&self) -> Vec<i64> {
        let mut v = vec![2; self.n];
        v.extend([0, 0]);
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("N {}\n", self.n);
        for (name, m) in [("G", &self.g), ("G'", &self.gp), ("G''", &self.gpp)] {
            out.push_str(name);
            out.push('\n');
            for row in m {
                let cells: Vec<String> = row.iter().map(i64::to_string).collect();
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, NzError> {
        let perr = |line: usize, col: usize, msg: &str| NzError::Parse {
            line,
            col,
            msg: msg.to_string(),
        };
        // (line number, tokens with their 1-based columns)
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap();
            let mut toks = Vec::new();
            let mut start = None;
            for (c, ch) in body.char_indices().chain([(body.len(), ' ')]) {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(c),
                    (true, Some(s0)) => {
                        toks.push((s0 + 1, &body[s0..c]));
                        start = None;
                    }
                    _ => {}
                }
            }
            if !toks.is_empty() {
                lines.push((i + 1, toks));
            }
        }
        let mut it = lines.into_iter();
        let end_line = text.lines().count().max(1);
        let (hl, header) = it.next().ok_or_else(|| perr(1, 1, "empty input"))?;
        if header.len() != 2 || header[0].1 != "N" {
            return Err(perr(hl, header[0].0, "expected header `N <count>`"));
        }
        let n: usize = header[1]
            .1
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| perr(hl, header[1].0, "bad tetrahedron count"))?;
        let mut blocks = Vec::new();
        for name in ["G", "G'", "G''"] {
            let (ln, toks) = it
                .next()
                .ok_or_else(|| perr(end_line, 1, &format!("missing block `{name}`")))?;
            if toks.len() != 1 || toks[0].1 != name {
                return Err(perr(
                    ln,
                    toks[0].0,
                    &format!("expected block header `{name}`"),
                ));
            }
            let mut rows = Vec::new();
            for _ in 0..n + 2 {
                let (ln, toks) = it.next().ok_or_else(|| {
                    perr(end_line, 1, &format!("block `{name}` needs {} rows", n + 2))
                })?;
                if toks.len() != n {
                    let col = toks.get(n).or(toks.last()).unwrap().0;
                    return Err(perr(
                        ln,
                        col,
                        &format!("expected {n} integers, found {}", toks.len()),
                    ));
                }
                let row = toks
                    .iter()
                    .map(|&(col, t)| {
                        t.parse::<i64>()
                            .map_err(|_| perr(ln, col, &format!("bad integer `{t}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
            blocks.push(rows);
        }
        if let Some((ln, toks)) = it.next() {
            return Err(perr(ln, toks[0].0, "trailing content"));
        }
        let gpp = blocks.pop().unwrap();
        let gp = blocks.pop().unwrap();
        let g = blocks.pop().unwrap();
        GluingData::new(g, gp, gpp)
    }
}

fn sub_rows(x: &[Vec<i64>], y: &[Vec<i64>]) -> Vec<Vec<i64>> {
    x.iter()
        .zip(y)
        .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a - b).collect())
        .collect()
}

/// Parity pattern of the longitude row over `A`, `B` and `ν`, as bits.
fn parity_row(a: &[i64], b: &[i64], nu: i64) -> Vec<bool> {
    a.iter()
        .chain(b)
        .chain([&nu])
        .map(|x| x.rem_euclid(2) == 1)
        .collect()
}

/// Chooses which edge rows to add to the longitude so that it becomes even,
/// by elimination over GF(2). Deterministic: pivots are taken in row order
/// and free rows are left out.
fn longitude_adjustment(edges: &[Vec<bool>], target: &[bool]) -> Option<Vec<bool>> {
    let width = target.len();
    let k = edges.len();
    // columns of the system: one per edge row; rows: one per bit position
    let mut m: Vec<Vec<bool>> = (0..width)
        .map(|p| {
            let mut r: Vec<bool> = edges.iter().map(|e| e[p]).collect();
            r.push(target[p]);
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..width).find(|&i| m[i][c]) else {
            continue;
        };
        m.swap(r, p);
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] {
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x ^= *y;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    if m[r..].iter().any(|row| row[k]) {
        return None;
    }
    let mut sol = vec![false; k];
    for (r, c) in pivots {
        sol[c] = m[r][k];
    }
    Some(sol)
}

/// Neumann-Zagier reduction: `A = G - G'`, `B = G'' - G'`,
/// `ν = η - G'·1`, keeping edge rows `1..N-1` and the meridian, and halving
/// the longitude row after making it even with edge rows if needed.
pub fn reduce(g: &GluingData) -> Result<NZReduced, NzError> {
    let n = g.n;
    let a_full = sub_rows(&g.g, &g.gp);
    let b_full = sub_rows(&g.gpp, &g.gp);
    let nu_full: Vec<i64> = g
        .eta()
        .iter()
        .zip(&g.gp)
        .map(|(e, row)| e - row.iter().sum::<i64>())
        .collect();

    let mut la = a_full[n + 1].clone();
    let mut lb = b_full[n + 1].clone();
    let mut lnu = nu_full[n + 1];
    let target = parity_row(&la, &lb, lnu);
    if target.iter().any(|&b| b) {
        let edges: Vec<Vec<bool>> = (0..n)
            .map(|i| parity_row(&a_full[i], &b_full[i], nu_full[i]))
            .collect();
        let sol = longitude_adjustment(&edges, &target).ok_or(NzError::NonIntegralLongitude)?;
        for (i, _) in sol.iter().enumerate().filter(|(_, &s)| s) {
            for j in 0..n {
                la[j] += a_full[i][j];
                lb[j] += b_full[i][j];
            }
            lnu += nu_full[i];
        }
    }
    let keep: Vec<usize> = (0..n - 1).chain([n]).collect();
    Ok(NZReduced {
        a: keep.iter().map(|&i| a_full[i].clone()).collect(),
        b: keep.iter().map(|&i| b_full[i].clone()).collect(),
        nu: keep.iter().map(|&i| nu_full[i]).collect(),
        lambda: la.iter().map(|x| x / 2).collect(),
        lambdapp: lb.iter().map(|x| x / 2).collect(),
        nu_lambda: lnu / 2,
    })
}

impl NZReduced {
    /// Number of tetrahedra.
    pub fn size(&self) -> usize {
        self.nu.len()
    }

    /// Whether `A·Bᵗ` is symmetric.
    pub fn is_symplectic(&self) -> bool {
        let n = self.size();
        let dot = |i: usize, j: usize| -> i64 { (0..n).map(|t| self.a[i][t] * self.b[j][t]).sum() };
        (0..n).all(|i| (0..n).all(|j| dot(i, j) == dot(j, i)))
    }

    /// Column `j` of `A`.
    pub fn a_col(&self, j: usize) -> Vec<i64> {
        self.a.iter().map(|r| r[j]).collect()
    }

    /// Column `j` of `B`.
    pub fn b_col(&self, j: usize) -> Vec<i64> {
        self.b.iter().map(|r| r[j]).collect()
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["4_1", "5_2", "m237"];

/// Gluing data of the built-in knots: `4_1`, `5_2` and the `(-2,3,7)`
/// pretzel knot `m237`.
pub fn builtin(name: &str) -> Result<GluingData, NzError> {
    type Rows = Vec<Vec<i64>>;
    let (g, gp, gpp): (Rows, Rows, Rows) = match name {
        "4_1" => (
            vec![vec![2, 2], vec![0, 0], vec![1, 0], vec![1, 1]],
            vec![vec![1, 1], vec![1, 1], vec![0, 0], vec![1, -1]],
            vec![vec![0, 0], vec![2, 2], vec![0, -1], vec![1, -3]],
        ),
        "5_2" => (
            vec![
                vec![1, 1, 1],
                vec![0, 0, 0],
                vec![1, 1, 1],
                vec![-1, 0, 0],
                vec![3, 2, 1],
            ],
            vec![
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 0, 1],
                vec![0, 0, 0],
                vec![1, 2, 1],
            ],
            vec![
                vec![1, 0, 1],
                vec![1, 2, 1],
                vec![0, 0, 0],
                vec![0, 1, 0],
                vec![-1, 0, 3],
            ],
        ),
        "m237" | "(-2,3,7)" => (
            vec![
                vec![1, 1, 1],
                vec![1, 0, 0],
                vec![0, 1, 1],
                vec![0, 0, -1],
                vec![-1, 1, -18],
            ],
            vec![
                vec![1, 0, 0],
                vec![0, 2, 2],
                vec![1, 0, 0],
                vec![0, 0, 0],
                vec![1, -1, -2],
            ],
            vec![
                vec![0, 1, 0],
                vec![2, 1, 0],
                vec![0, 0, 2],
                vec![2, 0, 0],
                vec![35, 1, 0],
            ],
        ),
        other => return Err(NzError::UnknownKnot(other.to_string())),
    };
    GluingData::new(g, gp, gpp)
}

/// Reduced data of a built-in knot.
///
/// `5_2` is returned in the frame of its tabulated index, which is
/// symmetric under `n -> -n`. Reducing `builtin("5_2")` gives an
/// equivalent frame whose index carries an extra factor `q^(n-n')` and
/// whose tetrahedra are labelled differently.
pub fn builtin_reduced(name: &str) -> Result<NZReduced, NzError> {
    if name == "5_2" {
        return Ok(NZReduced {
            a: vec![vec![0, 2, 0], vec![1, -2, 1], vec![1, 1, 0]],
            b: vec![vec![-1, 1, -1], vec![1, -2, 1], vec![0, 0, -1]],
            nu: vec![0, 0, 0],
            lambda: vec![-1, -1, 2],
            lambdapp: vec![0, -1, 1],
            nu_lambda: 0,
        });
    }
    reduce(&builtin(name)?)
}
