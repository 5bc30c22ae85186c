use std::collections::BTreeMap;

use super::expr::Expr;
use super::poly::{Atom, Monomial, Poly, Rational};
use super::SymError;

/// Partial derivative with respect to the symbol `x`.
pub fn differentiate(e: &Expr, x: &str) -> Expr {
    if !e.mentions(x) {
        return Expr::zero();
    }
    let dn = d_poly(&e.num, x);
    if e.den.is_one() {
        return dn;
    }
    let den = Expr::from_poly(e.den.clone());
    let num = Expr::from_poly(e.num.clone());
    let dd = d_poly(&e.den, x);
    (dn * &den - num * dd)
        .div(&(&den * &den))
        .expect("denominator is nonzero")
}

fn d_poly(p: &Poly, x: &str) -> Expr {
    let mut total = Expr::zero();
    for (m, c) in p.terms() {
        let d = d_mono(m, x);
        if !d.is_zero() {
            total = total + d.scale(c);
        }
    }
    total
}

fn d_mono(m: &Monomial, x: &str) -> Expr {
    let mut total = Expr::zero();
    for (atom, k) in m.powers() {
        let da = d_atom(atom, x);
        if da.is_zero() {
            continue;
        }
        let rest = Expr::from_monomial(m.with_degree(atom, k - 1));
        total = total + rest.scale(&Rational::from_integer((*k).into())) * da;
    }
    if !m.exp_part().is_zero() {
        let de = d_poly(m.exp_part(), x);
        if !de.is_zero() {
            total = total + Expr::from_monomial(m.clone()) * de;
        }
    }
    total
}

fn d_atom(a: &Atom, x: &str) -> Expr {
    match a {
        Atom::Sym(s) => {
            if s == x {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Func { name, order, arg } => {
            let inner = differentiate(arg, x);
            if inner.is_zero() {
                Expr::zero()
            } else {
                Expr::func(name, order + 1, (**arg).clone()) * inner
            }
        }
    }
}

/// Simultaneous substitution of symbols by expressions.
///
/// A binding value may not mention another bound symbol; chained
/// bindings must be composed by the caller first.
pub fn substitute(e: &Expr, bindings: &BTreeMap<String, Expr>) -> Result<Expr, SymError> {
    for (k, v) in bindings {
        for k2 in bindings.keys() {
            if k2 != k && v.mentions(k2) {
                return Err(SymError::CyclicBinding(k.clone()));
            }
        }
    }
    subst_unchecked(e, bindings)
}

pub(crate) fn subst_unchecked(
    e: &Expr,
    bindings: &BTreeMap<String, Expr>,
) -> Result<Expr, SymError> {
    if !bindings.keys().any(|k| e.mentions(k)) {
        return Ok(e.clone());
    }
    let n = subst_poly(&e.num, bindings)?;
    if e.den.is_one() {
        return Ok(n);
    }
    let d = subst_poly(&e.den, bindings)?;
    n.div(&d)
}

fn subst_poly(p: &Poly, b: &BTreeMap<String, Expr>) -> Result<Expr, SymError> {
    let mut total = Expr::zero();
    for (m, c) in p.terms() {
        total = total + subst_mono(m, b)?.scale(c);
    }
    Ok(total)
}

fn subst_mono(m: &Monomial, b: &BTreeMap<String, Expr>) -> Result<Expr, SymError> {
    let mut acc = Expr::one();
    for (atom, k) in m.powers() {
        let v = match atom {
            Atom::Sym(s) => match b.get(s) {
                Some(v) => v.clone(),
                None => Expr::sym(s),
            },
            Atom::Func { name, order, arg } => {
                Expr::func(name, *order, subst_unchecked(arg, b)?)
            }
        };
        acc = acc * v.pow(*k)?;
    }
    if !m.exp_part().is_zero() {
        let arg = subst_poly(m.exp_part(), b)?;
        acc = acc * Expr::exp(&arg)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub value: Expr,
    /// The coefficient of the solved variable; must not vanish.
    pub side_condition: Expr,
}

/// Solve `e = 0` for `x` when `e` is affine in `x`.
pub fn solve_linear(e: &Expr, x: &str) -> Result<LinearSolution, SymError> {
    let a = differentiate(e, x);
    if a.is_zero() {
        return Err(SymError::ZeroCoefficient(x.to_string()));
    }
    if !differentiate(&a, x).is_zero() {
        return Err(SymError::NotAffine(x.to_string()));
    }
    let mut zero = BTreeMap::new();
    zero.insert(x.to_string(), Expr::zero());
    let b = subst_unchecked(e, &zero)?;
    let value = b.neg().div(&a)?;
    Ok(LinearSolution {
        value,
        side_condition: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: &str) -> Expr {
        Expr::sym(n)
    }

    #[test]
    fn product_and_chain_rules() {
        let q = s("q");
        let e = Expr::func("U", 0, q.clone()) * Expr::exp(&(&q * &q)).unwrap();
        let d = differentiate(&e, "q");
        let expected = Expr::func("U", 1, q.clone()) * Expr::exp(&(&q * &q)).unwrap()
            + Expr::func("U", 0, q.clone())
                * Expr::exp(&(&q * &q)).unwrap()
                * Expr::int(2)
                * &q;
        assert_eq!(d, expected);
    }

    #[test]
    fn quotient_rule() {
        let x = s("x");
        let e = Expr::one().div(&(&x + Expr::one())).unwrap();
        let d = differentiate(&e, "x");
        let expected = Expr::int(-1)
            .div(&((&x + Expr::one()) * (&x + Expr::one())))
            .unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), s("z"));
        b.insert("y".to_string(), s("z") + Expr::one());
        let e = s("x") * s("y");
        assert_eq!(substitute(&e, &b).unwrap(), s("z") * (s("z") + Expr::one()));
    }

    #[test]
    fn cyclic_binding_rejected() {
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), s("y"));
        b.insert("y".to_string(), s("x"));
        assert!(matches!(
            substitute(&s("x"), &b),
            Err(SymError::CyclicBinding(_))
        ));
    }

    #[test]
    fn linear_solve() {
        let e = s("a") * s("x") + s("b");
        let sol = solve_linear(&e, "x").unwrap();
        assert_eq!(sol.value, (-s("b")).div(&s("a")).unwrap());
        assert_eq!(sol.side_condition, s("a"));
        assert!(matches!(
            solve_linear(&(s("x") * s("x")), "x"),
            Err(SymError::NotAffine(_))
        ));
        assert!(matches!(
            solve_linear(&s("y"), "x"),
            Err(SymError::ZeroCoefficient(_))
        ));
    }
}
