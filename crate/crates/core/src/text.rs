//! Tokenizer shared by the polynomial, rational-function, operator and
//! insertion text formats: sums of `*`-separated factors such as
//! `-3*q^(1/2)*x^2`, `z1''^-1` or `(1 - q)/(1 + q)*z2`.

use num_rational::BigRational;
use thiserror::Error;

use crate::scalar::parse_rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}`: {msg}")]
pub struct TextError {
    pub input: String,
    pub msg: String,
}

pub(crate) fn err(input: &str, msg: impl Into<String>) -> TextError {
    TextError {
        input: input.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Factor {
    Number(BigRational),
    Var {
        name: String,
        exp: BigRational,
    },
    /// A parenthesised group, kept verbatim including any `/(...)` tail.
    Group(String),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub negative: bool,
    pub factors: Vec<Factor>,
}

/// Splits a sum into signed terms, respecting parentheses.
pub(crate) fn split_terms(input: &str) -> Result<Vec<Term>, TextError> {
    let s: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err(input, "empty expression"));
    }
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut negative = false;
    let mut i = 0;
    if s[0] == '-' || s[0] == '+' {
        negative = s[0] == '-';
        start = 1;
        i = 1;
    }
    while i <= s.len() {
        let at_end = i == s.len();
        let c = if at_end { '+' } else { s[i] };
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(err(input, "unbalanced parentheses"));
                }
            }
            '+' | '-' if depth == 0 && (at_end || !matches!(s[i - 1], '^' | '*' | '/')) => {
                let body: String = s[start..i].iter().collect();
                if body.is_empty() {
                    return Err(err(input, "empty term"));
                }
                terms.push(Term {
                    negative,
                    factors: split_factors(&body).map_err(|m| err(input, m))?,
                });
                negative = c == '-';
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Err(err(input, "unbalanced parentheses"));
    }
    Ok(terms)
}

fn split_factors(body: &str) -> Result<Vec<Factor>, String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in body.chars().chain(std::iter::once('*')) {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            '*' if depth == 0 => {
                if cur.is_empty() {
                    return Err("empty factor".into());
                }
                out.push(parse_factor(&cur)?);
                cur.clear();
            }
            _ => cur.push(c),
        }
    }
    Ok(out)
}

fn parse_factor(tok: &str) -> Result<Factor, String> {
    if tok.starts_with('(') {
        return Ok(Factor::Group(tok.to_string()));
    }
    if tok.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return parse_rational(tok)
            .map(Factor::Number)
            .ok_or_else(|| format!("bad number `{tok}`"));
    }
    let (name, exp) = match tok.split_once('^') {
        Some((n, e)) => {
            let e = e.trim_start_matches('(').trim_end_matches(')');
            (
                n,
                parse_rational(e).ok_or_else(|| format!("bad exponent in `{tok}`"))?,
            )
        }
        None => (tok, BigRational::from_integer(1.into())),
    };
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '\'' || c == '_');
    if !valid {
        return Err(format!("bad variable `{name}`"));
    }
    Ok(Factor::Var {
        name: name.to_string(),
        exp,
    })
}

/// Splits `(a)/(b)` into `("a", Some("b"))` and `(a)` into `("a", None)`.
pub(crate) fn split_group(tok: &str) -> Result<(String, Option<String>), TextError> {
    let chars: Vec<char> = tok.chars().collect();
    let mut depth = 0;
    let mut close = None;
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close.ok_or_else(|| err(tok, "unbalanced parentheses"))?;
    let first: String = chars[1..close].iter().collect();
    let rest: String = chars[close + 1..].iter().collect();
    if rest.is_empty() {
        return Ok((first, None));
    }
    let den = rest
        .strip_prefix("/(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| err(tok, "expected `(num)/(den)`"))?;
    Ok((first, Some(den.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_signed_terms() {
        let t = split_terms("-1*z1^-1 + 1*z1''^2*z3 - q^(-1/2)").unwrap();
        assert_eq!(t.len(), 3);
        assert!(t[0].negative);
        assert!(!t[1].negative);
        assert!(t[2].negative);
        assert_eq!(
            t[0].factors[1],
            Factor::Var {
                name: "z1".into(),
                exp: BigRational::from_integer((-1).into())
            }
        );
        assert_eq!(
            t[2].factors[0],
            Factor::Var {
                name: "q".into(),
                exp: BigRational::new((-1).into(), 2.into())
            }
        );
    }

    #[test]
    fn groups_are_kept_whole() {
        let t = split_terms("(1 - q)/(1 + q)*z2").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].factors[0], Factor::Group("(1-q)/(1+q)".into()));
        assert_eq!(
            split_group("(1-q)/(1+q)").unwrap(),
            ("1-q".to_string(), Some("1+q".to_string()))
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(split_terms("").is_err());
        assert!(split_terms("(q").is_err());
        assert!(split_terms("2*%").is_err());
        assert!(split_terms("1 + + q").is_err());
    }
}
