//! Insertions: combinations of Weyl monomials `prod_j ẑ_j^alpha_j (ẑ''_j)^beta_j`
//! acting on the index summand, and the inserted rotated index.
//!
//! A monomial shifts the tetrahedron arguments to `(m_j + beta_j, e_j - alpha_j)`
//! and multiplies by `q^L` with
//! `2L = sum_j alpha_j m_j + beta_j e_j - alpha_j beta_j`.
//!
//! Text syntax: `-1*z1^-1 + 1*z1''^2*z3`, with tetrahedra numbered from 1;
//! a coefficient may be a number, a power of `q` or a rational function in
//! parentheses such as `(1)/(1 - q)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::indexsum::{EnumConfig, IndexEngine, IndexError, LinearSummand};
use crate::nzdata::NZReduced;
use crate::qseries::Series;
use crate::ratfun::{times_series, RatFun};
use crate::text::{split_terms, Factor, TextError};

type QSer = Series<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InsertionError {
    #[error("unknown insertion `{0}`")]
    UnknownInsertion(String),
    #[error("edge {edge} has no constant calibration: the q-power of the shift depends on the lattice point")]
    CalibrationFailure { edge: usize },
    #[error("edge index {edge} out of range 1..={max}")]
    EdgeOutOfRange { edge: usize, max: usize },
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// `coeff * prod_j ẑ_j^alpha_j (ẑ''_j)^beta_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylMonomial {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub coeff: RatFun,
}

impl WeylMonomial {
    pub fn new(alpha: Vec<i64>, beta: Vec<i64>, coeff: RatFun) -> Self {
        assert_eq!(alpha.len(), beta.len(), "exponent vectors differ in length");
        WeylMonomial { alpha, beta, coeff }
    }

    /// `2 L(n, n', k)`, the doubled q-exponent picked up by the summand.
    pub fn twice_l(&self, nz: &NZReduced, k: &[i64], n: i64, np: i64) -> i64 {
        let base = LinearSummand::rotated(nz, n, np);
        base.with_monomial(&self.alpha, &self.beta).power.eval(k) - base.power.eval(k)
    }

    fn max_shift(&self) -> i64 {
        let m = |v: &[i64]| v.iter().map(|x| x.abs()).max().unwrap_or(0);
        m(&self.alpha) + m(&self.beta)
    }
}

/// A finite sum of Weyl monomials with distinct exponents; no term has a
/// zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Insertion {
    terms: Vec<WeylMonomial>,
}

impl Insertion {
    /// Merges terms with equal exponents and drops zero coefficients; terms
    /// are kept sorted by `(alpha, beta)`.
    pub fn new(terms: Vec<WeylMonomial>) -> Self {
        let mut merged: BTreeMap<(Vec<i64>, Vec<i64>), RatFun> = BTreeMap::new();
        for t in terms {
            let slot = merged.entry((t.alpha, t.beta)).or_insert_with(RatFun::zero);
            *slot = slot.add(&t.coeff);
        }
        Insertion {
            terms: merged
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((alpha, beta), coeff)| WeylMonomial { alpha, beta, coeff })
                .collect(),
        }
    }

    pub fn zero() -> Self {
        Insertion { terms: Vec::new() }
    }

    /// The constant insertion `c`.
    pub fn scalar(n: usize, c: RatFun) -> Self {
        Self::new(vec![WeylMonomial::new(vec![0; n], vec![0; n], c)])
    }

    /// `ẑ_j^a (ẑ''_j)^b` for a single tetrahedron `j` (0-based).
    pub fn single(n: usize, j: usize, a: i64, b: i64) -> Self {
        let mut alpha = vec![0; n];
        let mut beta = vec![0; n];
        alpha[j] = a;
        beta[j] = b;
        Self::new(vec![WeylMonomial::new(alpha, beta, RatFun::one())])
    }

    pub fn terms(&self) -> &[WeylMonomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn scale(&self, c: &RatFun) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| WeylMonomial {
                    coeff: t.coeff.mul(c),
                    ..t.clone()
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&RatFun::constant(-BigRational::one())))
    }

    /// Parses the text syntax for `n` tetrahedra.
    pub fn parse(text: &str, n: usize) -> Result<Self, InsertionError> {
        let bad = |msg: String| InsertionError::Text(crate::text::err(text, msg));
        if text.trim() == "0" {
            return Ok(Self::zero());
        }
        let mut terms = Vec::new();
        for term in split_terms(text)? {
            let mut alpha = vec![0; n];
            let mut beta = vec![0; n];
            let mut coeff = RatFun::constant(BigRational::from_integer(
                if term.negative { -1 } else { 1 }.into(),
            ));
            for f in term.factors {
                match f {
                    Factor::Number(c) => coeff = coeff.mul(&RatFun::constant(c)),
                    Factor::Group(g) => {
                        coeff = coeff.mul(&RatFun::parse(&g).map_err(|e| bad(e.to_string()))?)
                    }
                    Factor::Var { name, exp } => {
                        let twice = &exp * BigRational::from_integer(2.into());
                        if name == "q" || name == "u" {
                            let scale = if name == "q" { twice } else { exp.clone() };
                            if !scale.is_integer() {
                                return Err(bad(format!(
                                    "exponent of {name} must be a multiple of 1/2"
                                )));
                            }
                            let e = i64::try_from(scale.to_integer())
                                .map_err(|_| bad("exponent too large".into()))?;
                            coeff = coeff.mul(&RatFun::monomial(BigRational::one(), e));
                            continue;
                        }
                        if !exp.is_integer() {
                            return Err(bad(format!("exponent of {name} must be an integer")));
                        }
                        let e = i64::try_from(exp.to_integer())
                            .map_err(|_| bad("exponent too large".into()))?;
                        let (body, slot) = match name.strip_suffix("''") {
                            Some(b) => (b, &mut beta),
                            None => (name.as_str(), &mut alpha),
                        };
                        let j: usize = body
                            .strip_prefix('z')
                            .and_then(|d| d.parse().ok())
                            .filter(|&j| (1..=n).contains(&j))
                            .ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
                        slot[j - 1] += e;
                    }
                }
            }
            terms.push(WeylMonomial::new(alpha, beta, coeff));
        }
        Ok(Self::new(terms))
    }

    /// Text form, parseable by [`Insertion::parse`].
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for t in &self.terms {
            let mut vars = Vec::new();
            for (j, (&a, &b)) in t.alpha.iter().zip(&t.beta).enumerate() {
                if a != 0 {
                    vars.push(if a == 1 {
                        format!("z{}", j + 1)
                    } else {
                        format!("z{}^{}", j + 1, a)
                    });
                }
                if b != 0 {
                    vars.push(if b == 1 {
                        format!("z{}''", j + 1)
                    } else {
                        format!("z{}''^{}", j + 1, b)
                    });
                }
            }
            let vars = vars.join("*");
            let c = t.coeff.pretty();
            let (negative, body) = match (c.as_str(), vars.is_empty()) {
                ("1", false) => (false, vars),
                ("-1", false) => (true, vars),
                (c, true) if t.coeff.is_polynomial() && !c.contains([' ', '^', 'q']) => {
                    match c.strip_prefix('-') {
                        Some(rest) => (true, rest.to_string()),
                        None => (false, c.to_string()),
                    }
                }
                (c, true) => (false, format!("({c})")),
                (c, false) => (false, format!("({c})*{vars}")),
            };
            if out.is_empty() {
                out = if negative { format!("-{body}") } else { body };
            } else {
                out.push_str(if negative { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        out
    }

    fn max_shift(&self) -> i64 {
        self.terms
            .iter()
            .map(WeylMonomial::max_shift)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Lowest u-exponent of the expansion of `c`.
fn coeff_valuation(c: &RatFun) -> i64 {
    c.num().low().unwrap_or(0)
}

/// `(mono ∘ S)(k, n, n') + O(u^trunc)`.
pub fn inserted_summand(
    nz: &NZReduced,
    mono: &WeylMonomial,
    k: &[i64],
    n: i64,
    np: i64,
    trunc: i64,
) -> QSer {
    let s = LinearSummand::rotated(nz, n, np).with_monomial(&mono.alpha, &mono.beta);
    let raw: Series<BigInt> = s.series_at(k, trunc - coeff_valuation(&mono.coeff));
    times_series(&mono.coeff, &raw).truncate(trunc)
}

impl IndexEngine {
    /// `I^rot_O(n, n') + O(u^trunc)`, summing each monomial of the
    /// insertion separately.
    pub fn inserted_rotated_index(
        &self,
        nz: &NZReduced,
        ins: &Insertion,
        n: i64,
        np: i64,
        trunc: i64,
    ) -> Result<QSer, IndexError> {
        let cfg = EnumConfig {
            margin: self.config.margin + ins.max_shift(),
            ..self.config.clone()
        };
        let base = LinearSummand::rotated(nz, n, np);
        let mut total = QSer::zero(trunc);
        for t in ins.terms() {
            let s = base.with_monomial(&t.alpha, &t.beta);
            let (raw, _) = self.sum_with(&s, trunc - coeff_valuation(&t.coeff), &cfg)?;
            total = &total + &times_series(&t.coeff, &raw).truncate(trunc);
        }
        Ok(total)
    }
}

pub fn inserted_rotated_index(
    nz: &NZReduced,
    ins: &Insertion,
    n: i64,
    np: i64,
    trunc: i64,
) -> Result<QSer, IndexError> {
    IndexEngine::new().inserted_rotated_index(nz, ins, n, np, trunc)
}

/// The edge insertion `E_i` (edges numbered from 1): exponents from row `i`
/// of `A` and `B`, with the constant chosen so that
/// `(E_i ∘ S)(k, n, n') = q S(k - e_i, n, n')`.
pub fn edge_operator(nz: &NZReduced, i: usize) -> Result<Insertion, InsertionError> {
    let n = nz.size();
    if i == 0 || i >= n {
        return Err(InsertionError::EdgeOutOfRange {
            edge: i,
            max: n - 1,
        });
    }
    let alpha = nz.a[i - 1].clone();
    let beta = nz.b[i - 1].clone();
    let probe = WeylMonomial::new(alpha.clone(), beta.clone(), RatFun::one());
    // 2L must not depend on k or on (n, n')
    let mut samples = vec![(vec![0i64; n], 0i64, 0i64)];
    for t in 0..n {
        let mut k = vec![0; n];
        k[t] = 1;
        samples.push((k.clone(), 0, 0));
        k[t] = -3;
        samples.push((k, 2, -1));
    }
    samples.push((vec![0; n], 1, 0));
    samples.push((vec![0; n], 0, 1));
    let l0 = probe.twice_l(nz, &samples[0].0, 0, 0);
    if samples
        .iter()
        .any(|(k, a, b)| probe.twice_l(nz, k, *a, *b) != l0)
    {
        return Err(InsertionError::CalibrationFailure { edge: i });
    }
    // c u^(2L) = q (-u)^(-ν_i)
    let nu = nz.nu[i - 1];
    let sign = if nu.rem_euclid(2) == 1 { -1 } else { 1 };
    let coeff = RatFun::monomial(BigRational::from_integer(sign.into()), 2 - l0 - nu);
    Ok(Insertion::new(vec![WeylMonomial::new(alpha, beta, coeff)]))
}

/// `E_i - q`, which annihilates the summed index.
pub fn edge_annihilator(nz: &NZReduced, i: usize) -> Result<Insertion, InsertionError> {
    let e = edge_operator(nz, i)?;
    Ok(e.sub(&Insertion::scalar(
        nz.size(),
        RatFun::monomial(BigRational::one(), 2),
    )))
}

/// `ẑ_j^(-1) + ẑ''_j - 1` for tetrahedron `j` (0-based).
pub fn lagrangian(n: usize, j: usize) -> Insertion {
    Insertion::single(n, j, -1, 0)
        .add(&Insertion::single(n, j, 0, 1))
        .sub(&Insertion::scalar(n, RatFun::one()))
}

/// Names accepted by [`builtin_insertion`].
pub const BUILTIN_INSERTIONS: [&str; 5] = ["4_1:O1", "4_1:O2", "5_2:O1", "5_2:O2", "m237:z2"];

/// Tetrahedron carrying the variable `ŷ` of the 4_1 insertions (0-based);
/// `ẑ` is the other one. Fixed by matching the printed matrix of `O_2`.
pub const FIG8_Y_TETRAHEDRON: usize = 0;

/// The insertions used in the examples:
///
/// * `4_1:O1` = `-ŷ^-1 - ẑ^-1 + ŷ^-1 ẑ^-1`
/// * `4_1:O2` = `ŷ^-1`
/// * `5_2:O1` = `ẑ_1`, `5_2:O2` = `ẑ_1 + ẑ''_2`, both in the frame of
///   `builtin_reduced("5_2")`
/// * `m237:z2` = `ẑ_2`
pub fn builtin_insertion(name: &str) -> Result<Insertion, InsertionError> {
    let y = FIG8_Y_TETRAHEDRON;
    let z = 1 - y;
    let text = match name {
        "4_1:O1" => format!("-1*z{}^-1 - 1*z{}^-1 + 1*z1^-1*z2^-1", y + 1, z + 1),
        "4_1:O2" => format!("z{}^-1", y + 1),
        "5_2:O1" => "z1".to_string(),
        "5_2:O2" => "z1 + z2''".to_string(),
        "m237:z2" => "z2".to_string(),
        other => return Err(InsertionError::UnknownInsertion(other.to_string())),
    };
    let n = if name.starts_with("4_1") { 2 } else { 3 };
    Insertion::parse(&text, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsum::summand;
    use crate::nzdata::{builtin_reduced, BUILTIN_NAMES};

    fn q(terms: &[(i64, i64)], trunc: i64) -> QSer {
        Series::from_terms(
            terms
                .iter()
                .map(|&(e, c)| (e, BigRational::from_integer(c.into()))),
            trunc,
        )
    }

    #[test]
    fn parse_and_print() {
        let ins = Insertion::parse("-1*z1^-1 + 1*z1''^2*z3", 3).unwrap();
        assert_eq!(ins.terms().len(), 2);
        let back = Insertion::parse(&ins.to_text(), 3).unwrap();
        assert_eq!(back, ins);
        let with_q = Insertion::parse("q^(1/2)*z2 + (1)/(1 - q)*z2", 3).unwrap();
        assert_eq!(with_q.terms().len(), 1);
        assert!(Insertion::parse("z4", 3).is_err());
        assert!(Insertion::parse("z1^(1/2)", 3).is_err());
        assert!(Insertion::parse("0", 3).unwrap().is_zero());
    }

    #[test]
    fn identity_insertion_is_the_summand() {
        let nz = builtin_reduced("5_2").unwrap();
        let mono = WeylMonomial::new(vec![0; 3], vec![0; 3], RatFun::one());
        for (k, n, np) in [
            (vec![0, 0, 0], 0, 0),
            (vec![1, -1, 2], 1, 0),
            (vec![-2, 0, 1], 2, 2),
        ] {
            let a = inserted_summand(&nz, &mono, &k, n, np, 20);
            assert_eq!(a, summand(&nz, &k, n, np, 20).to_rational());
        }
    }

    #[test]
    fn l_form_hand_value() {
        let nz = builtin_reduced("4_1").unwrap();
        let mono = WeylMonomial::new(vec![1, 0], vec![0, 0], RatFun::one());
        assert_eq!(mono.twice_l(&nz, &[2, -1], 1, 0), 2);
    }

    #[test]
    fn fig8_inserted_window_entries() {
        let nz = builtin_reduced("4_1").unwrap();
        let o1 = builtin_insertion("4_1:O1").unwrap();
        assert_eq!(o1.terms().len(), 3);
        let i00 = inserted_rotated_index(&nz, &o1, 0, 0, 16).unwrap();
        assert_eq!(
            i00,
            q(
                &[
                    (0, -3),
                    (2, 15),
                    (4, 24),
                    (6, -15),
                    (8, -69),
                    (10, -174),
                    (12, -183),
                    (14, -165)
                ],
                16
            )
        );
        let i10 = inserted_rotated_index(&nz, &o1, 1, 0, 11).unwrap();
        assert_eq!(
            i10,
            q(
                &[
                    (-3, 1),
                    (-1, -1),
                    (1, -1),
                    (3, 1),
                    (5, -5),
                    (7, -26),
                    (9, -48)
                ],
                11
            )
        );
    }

    #[test]
    fn zero_insertion_gives_zero() {
        let nz = builtin_reduced("4_1").unwrap();
        assert!(inserted_rotated_index(&nz, &Insertion::zero(), 0, 0, 10)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn edge_shift_identity_on_summands() {
        for name in BUILTIN_NAMES {
            let nz = builtin_reduced(name).unwrap();
            let dim = nz.size();
            for i in 1..dim {
                let e = edge_operator(&nz, i).unwrap();
                let mono = &e.terms()[0];
                for k in [
                    vec![0; dim],
                    vec![1; dim],
                    (0..dim as i64).map(|t| 2 - t).collect(),
                ] {
                    let mut shifted = k.clone();
                    shifted[i - 1] -= 1;
                    let lhs = inserted_summand(&nz, mono, &k, 1, 0, 30);
                    let rhs = summand(&nz, &shifted, 1, 0, 28)
                        .to_rational()
                        .monomial_shift(2, 0);
                    assert!(lhs.agrees_with(&rhs), "{name} edge {i} k={k:?}");
                }
            }
        }
    }

    #[test]
    fn lagrangian_annihilates_fig8() {
        let nz = builtin_reduced("4_1").unwrap();
        for j in 0..2 {
            let s = inserted_rotated_index(&nz, &lagrangian(2, j), 0, 1, 14).unwrap();
            assert!(s.is_zero(), "{}", s.pretty());
        }
    }

    #[test]
    fn linearity() {
        let nz = builtin_reduced("4_1").unwrap();
        let a = builtin_insertion("4_1:O1").unwrap();
        let b = builtin_insertion("4_1:O2").unwrap();
        let two = RatFun::constant(BigRational::from_integer(2.into()));
        let combo = a.scale(&two).add(&b);
        let lhs = inserted_rotated_index(&nz, &combo, 1, 1, 14).unwrap();
        let ia = inserted_rotated_index(&nz, &a, 1, 1, 14).unwrap();
        let ib = inserted_rotated_index(&nz, &b, 1, 1, 14).unwrap();
        assert_eq!(lhs, &(&ia + &ia) + &ib);
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(
            builtin_insertion("6_1:O"),
            Err(InsertionError::UnknownInsertion(_))
        ));
        let nz = builtin_reduced("4_1").unwrap();
        assert!(matches!(
            edge_operator(&nz, 2),
            Err(InsertionError::EdgeOutOfRange { .. })
        ));
    }

    #[test]
    fn builtin_shapes() {
        let o = builtin_insertion("5_2:O1").unwrap();
        assert_eq!(o.terms()[0].alpha, vec![1, 0, 0]);
        assert_eq!(o.terms()[0].beta, vec![0, 0, 0]);
        let m = builtin_insertion("m237:z2").unwrap();
        assert_eq!(m.terms()[0].alpha, vec![0, 1, 0]);
        let coeffs: Vec<String> = builtin_insertion("4_1:O1")
            .unwrap()
            .terms()
            .iter()
            .map(|t| t.coeff.to_text())
            .collect();
        assert_eq!(coeffs.iter().filter(|c| c.starts_with("(-1)")).count(), 2);
        assert_eq!(coeffs.iter().filter(|c| c.starts_with("(1)")).count(), 1);
    }
}
