//! Canonical rational-function expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::ops;

use num_traits::{One, Signed, Zero};

use super::poly::{gcd, Atom, Monomial, Poly, Rational};
use super::SymError;

/// A quotient of two polynomials in canonical form.
///
/// The denominator is either `1` or a polynomial with at least two terms,
/// no monomial content and leading coefficient one. Common polynomial
/// factors are cancelled whenever the denominator is free of exp factors,
/// so two equal expressions of that kind compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(n.into()))
    }

    pub fn rational(q: Rational) -> Expr {
        Expr::from_poly(Poly::constant(q))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_poly(Poly::atom_power(Atom::Sym(name.to_string()), 1))
    }

    pub fn func(name: &str, order: u32, arg: Expr) -> Expr {
        Expr::from_poly(Poly::atom_power(
            Atom::Func {
                name: name.to_string(),
                order,
                arg: Box::new(arg),
            },
            1,
        ))
    }

    pub fn from_poly(num: Poly) -> Expr {
        Expr {
            num,
            den: Poly::one(),
        }
    }

    pub fn from_monomial(m: Monomial) -> Expr {
        Expr::from_poly(Poly::term(m, Rational::one()))
    }

    /// `exp(e)`; the argument must be polynomial.
    pub fn exp(e: &Expr) -> Result<Expr, SymError> {
        if !e.den.is_one() {
            return Err(SymError::NonPolynomialExponent);
        }
        Ok(Expr::from_monomial(Monomial::exp_of(e.num.clone())))
    }

    pub fn numerator(&self) -> Expr {
        Expr::from_poly(self.num.clone())
    }

    pub fn denominator(&self) -> Expr {
        Expr::from_poly(self.den.clone())
    }

    pub fn num_poly(&self) -> &Poly {
        &self.num
    }

    pub fn den_poly(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_nonzero_literal(&self) -> bool {
        self.as_rational().map(|q| !q.is_zero()).unwrap_or(false)
    }

    /// Number of terms, used to rank pivot candidates.
    pub fn size(&self) -> usize {
        self.num.len() + if self.den.is_one() { 0 } else { self.den.len() }
    }

    pub fn from_parts(num: Poly, den: Poly) -> Result<Expr, SymError> {
        if den.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        Ok(normalize(num, den))
    }

    pub fn add(&self, o: &Expr) -> Expr {
        if self.den == o.den {
            return normalize(self.num.add(&o.num), self.den.clone());
        }
        normalize(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.den.is_one() && o.den.is_one() {
            return Expr::from_poly(self.num.mul(&o.num));
        }
        normalize(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, q: &Rational) -> Expr {
        Expr {
            num: self.num.scale(q),
            den: if q.is_zero() { Poly::one() } else { self.den.clone() },
        }
    }

    pub fn div(&self, o: &Expr) -> Result<Expr, SymError> {
        if o.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        Ok(normalize(self.num.mul(&o.den), self.den.mul(&o.num)))
    }

    pub fn recip(&self) -> Result<Expr, SymError> {
        Expr::one().div(self)
    }

    pub fn pow(&self, k: i32) -> Result<Expr, SymError> {
        if k >= 0 {
            let k = k as u32;
            return Ok(normalize(self.num.pow(k), self.den.pow(k)));
        }
        self.recip()?.pow(-k)
    }

    /// Names of every symbol, including those inside function arguments
    /// and exp exponents.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_poly(&self.num, &mut out);
        collect_poly(&self.den, &mut out);
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        mentions_poly(&self.num, name) || mentions_poly(&self.den, name)
    }

    pub fn mentions_any(&self, names: &BTreeSet<String>) -> bool {
        names.iter().any(|n| self.mentions(n))
    }

    /// Numerator terms grouped by their exp factor.
    pub(crate) fn exp_groups(p: &Poly) -> BTreeMap<Poly, Poly> {
        let mut out: BTreeMap<Poly, Poly> = BTreeMap::new();
        for (m, c) in p.terms() {
            let mut plain = m.clone();
            let key = std::mem::take(&mut plain.exp);
            let entry = out.entry(key).or_default();
            *entry = entry.add(&Poly::term(plain, c.clone()));
        }
        out
    }

    /// Sign of the leading numerator coefficient.
    pub fn leading_sign_negative(&self) -> bool {
        self.num.leading_coeff().is_negative()
    }
}

fn collect_poly(p: &Poly, out: &mut BTreeSet<String>) {
    for (m, _) in p.terms() {
        for (a, _) in m.powers() {
            match a {
                Atom::Sym(s) => {
                    out.insert(s.clone());
                }
                Atom::Func { arg, .. } => {
                    collect_poly(&arg.num, out);
                    collect_poly(&arg.den, out);
                }
            }
        }
        collect_poly(m.exp_part(), out);
    }
}

fn mentions_poly(p: &Poly, name: &str) -> bool {
    p.terms().any(|(m, _)| {
        m.powers().iter().any(|(a, _)| match a {
            Atom::Sym(s) => s == name,
            Atom::Func { arg, .. } => arg.mentions(name),
        }) || mentions_poly(m.exp_part(), name)
    })
}

fn normalize(mut num: Poly, mut den: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    loop {
        if let Some((m, c)) = den.as_single_term() {
            num = num.mul_monomial(&m.inv()).scale(&c.recip());
            return Expr {
                num,
                den: Poly::one(),
            };
        }
        let content = den.monomial_content();
        if !content.is_one() {
            let inv = content.inv();
            den = den.mul_monomial(&inv);
            num = num.mul_monomial(&inv);
        }
        let lc = den.leading_coeff().recip();
        den = den.scale(&lc);
        num = num.scale(&lc);
        if !den.is_plain() {
            return Expr { num, den };
        }
        // Cancel common factors group by group: distinct exp factors are
        // independent of the plain atoms.
        let groups = Expr::exp_groups(&num);
        let mut plain_groups = Vec::new();
        let mut g = den.clone();
        for (e, p) in &groups {
            let content = p.monomial_content();
            let stripped = p.mul_monomial(&content.inv());
            g = gcd(&g, &stripped);
            plain_groups.push((e.clone(), content, stripped));
        }
        if g.as_constant().is_some() {
            return Expr { num, den };
        }
        den = den.div_exact(&g).expect("gcd divides");
        num = Poly::zero();
        for (e, content, stripped) in plain_groups {
            let q = stripped.div_exact(&g).expect("gcd divides");
            num = num.add(&q.mul_monomial(&content).mul_monomial(&Monomial::exp_of(e)));
        }
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $m:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $f(self, o: &Expr) -> Expr {
                self.$m(o)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $f(self, o: Expr) -> Expr {
                (&self).$m(&o)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $f(self, o: &Expr) -> Expr {
                (&self).$m(o)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $f(self, o: Expr) -> Expr {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: &str) -> Expr {
        Expr::sym(n)
    }

    #[test]
    fn cancels_common_factor() {
        let x = s("x");
        let y = s("y");
        let e = (&x * &x - &y * &y).div(&(&x - &y)).unwrap();
        assert_eq!(e, &x + &y);
    }

    #[test]
    fn sum_of_fractions_is_canonical() {
        let x = s("x");
        let one = Expr::one();
        let a = one.div(&(&x + &one)).unwrap();
        let b = one.div(&(&x - &one)).unwrap();
        let lhs = a + b;
        let rhs = Expr::int(2)
            .mul(&x)
            .div(&(&x * &x - Expr::one()))
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exp_combines_and_cancels() {
        let q = s("q");
        let e1 = Expr::exp(&q).unwrap();
        let e2 = Expr::exp(&(-&q)).unwrap();
        assert_eq!(e1 * e2, Expr::one());
    }

    #[test]
    fn monomial_denominator_becomes_laurent() {
        let x = s("x");
        let e = Expr::one().div(&(&x * &x)).unwrap();
        assert!(e.is_polynomial());
        assert_eq!(e * &x * &x, Expr::one());
    }

    #[test]
    fn division_by_zero_is_error() {
        assert!(Expr::one().div(&Expr::zero()).is_err());
    }
}
