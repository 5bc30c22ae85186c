//! Exact symbolic algebra over the rationals.

mod calculus;
mod eval;
mod expr;
mod parse;
mod poly;
mod print;
mod vars;

pub use calculus::{differentiate, solve_linear, substitute, LinearSolution};
pub use eval::{approx_exp, Evaluator};
pub use expr::Expr;
pub use parse::{parse, parse_ast, Ast};
pub use poly::{gcd, Atom, Monomial, Poly, Rational};
pub use vars::{Coord, CoordKind, VarTable};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("exponent at {pos} is not an integer")]
    NonIntegerExponent { pos: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclic binding: value for `{0}` mentions another substituted variable")]
    CyclicBinding(String),
    #[error("expression is not affine in `{0}`")]
    NotAffine(String),
    #[error("coefficient of `{0}` vanishes identically")]
    ZeroCoefficient(String),
    #[error("argument of exp must be polynomial")]
    NonPolynomialExponent,
    #[error("no value for `{0}`")]
    Unbound(String),
    #[error("invalid variable table: {0}")]
    InvalidVarTable(String),
}

/// Parse a rational literal such as `3`, `-2/5` or `0.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: num_bigint::BigInt = a.trim().parse().ok()?;
        let b: num_bigint::BigInt = b.trim().parse().ok()?;
        if b == num_bigint::BigInt::from(0) {
            return None;
        }
        return Some(Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let n: num_bigint::BigInt = digits.parse().ok()?;
        let d = num_bigint::BigInt::from(10).pow(frac.len() as u32);
        let q = Rational::new(n, d);
        return Some(if neg { -q } else { q });
    }
    s.parse::<num_bigint::BigInt>().ok().map(Rational::from_integer)
}
