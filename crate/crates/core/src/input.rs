//! System description files.
//!
//! ```text
//! # comment
//! system "name"
//! dim 2
//! param beta
//! param alpha = 0
//! function U
//! lagrangian = 1/2*v1^2 - U(q1)
//! ```

use thiserror::Error;

use crate::phasespace::LagrangianSpec;
use crate::sym::{parse, parse_rational, Rational, SymError, VarTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Expr { line: usize, source: SymError },
    #[error("missing `{0}` declaration")]
    Missing(&'static str),
    #[error("--set {0}: no such parameter")]
    UnknownOverride(String),
}

fn line_err(line: usize, msg: impl Into<String>) -> InputError {
    InputError::Line {
        line,
        msg: msg.into(),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parse a system file; `overrides` fix parameter values after the file's
/// own assignments.
pub fn parse_system(text: &str, overrides: &[(String, Rational)]) -> Result<LagrangianSpec, InputError> {
    let mut name = None;
    let mut dim = None;
    let mut params: Vec<(String, Option<Rational>)> = Vec::new();
    let mut functions = Vec::new();
    let mut lagrangian: Option<(usize, String)> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (kw, rest) = body
            .split_once(char::is_whitespace)
            .map(|(a, b)| (a, b.trim()))
            .unwrap_or((body, ""));
        match kw {
            "system" => {
                let n = rest
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .ok_or_else(|| line_err(line, "system name must be quoted"))?;
                name = Some(n.to_string());
            }
            "dim" => {
                let n: usize = rest
                    .parse()
                    .map_err(|_| line_err(line, format!("bad dimension `{rest}`")))?;
                dim = Some(n);
            }
            "param" => {
                let (id, val) = match rest.split_once('=') {
                    Some((a, b)) => {
                        let q = parse_rational(b)
                            .ok_or_else(|| line_err(line, format!("bad rational `{}`", b.trim())))?;
                        (a.trim(), Some(q))
                    }
                    None => (rest, None),
                };
                if !is_ident(id) {
                    return Err(line_err(line, format!("bad parameter name `{id}`")));
                }
                params.push((id.to_string(), val));
            }
            "function" => {
                if !is_ident(rest) {
                    return Err(line_err(line, format!("bad function name `{rest}`")));
                }
                functions.push(rest.to_string());
            }
            "lagrangian" => {
                let e = rest
                    .strip_prefix('=')
                    .ok_or_else(|| line_err(line, "expected `lagrangian = <expr>`"))?;
                lagrangian = Some((line, e.trim().to_string()));
            }
            other => return Err(line_err(line, format!("unknown declaration `{other}`"))),
        }
    }

    let name = name.ok_or(InputError::Missing("system"))?;
    let dim = dim.ok_or(InputError::Missing("dim"))?;
    let (lline, ltext) = lagrangian.ok_or(InputError::Missing("lagrangian"))?;
    for (n, q) in overrides {
        let slot = params
            .iter_mut()
            .find(|(p, _)| p == n)
            .ok_or_else(|| InputError::UnknownOverride(n.clone()))?;
        slot.1 = Some(q.clone());
    }
    let vars = VarTable::new(
        dim,
        params.iter().map(|(n, _)| n.clone()).collect(),
        functions,
    )
    .map_err(|e| InputError::Expr { line: 0, source: e })?;
    let expr = parse(&ltext, &vars).map_err(|e| InputError::Expr {
        line: lline,
        source: e,
    })?;
    Ok(LagrangianSpec {
        name,
        vars,
        lagrangian: expr,
        parameters: params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX5: &str = "system \"five\"\ndim 2\nparam alpha\nparam beta\n\
        lagrangian = 1/2*v1^2 + q2*v1 + (1-alpha)*q1*v2 + beta/2*(q1-q2)^2\n";

    #[test]
    fn parses_with_overrides() {
        let s = parse_system(EX5, &[("alpha".into(), Rational::from_integer(0.into()))]).unwrap();
        assert_eq!(s.vars.dim, 2);
        assert_eq!(s.parameters[0].1, Some(Rational::from_integer(0.into())));
        assert_eq!(s.parameters[1].1, None);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_system("system \"x\"\ndim 1\nlagrangian = v1 +\n", &[]).unwrap_err();
        assert!(matches!(err, InputError::Expr { line: 3, .. }));
        assert!(matches!(
            parse_system("dim 1\nlagrangian = v1\n", &[]),
            Err(InputError::Missing("system"))
        ));
        assert!(matches!(
            parse_system(EX5, &[("gamma".into(), Rational::from_integer(1.into()))]),
            Err(InputError::UnknownOverride(_))
        ));
    }
}
