//! Sparse multivariate Laurent polynomials over the rationals.
//!
//! A monomial is a product of atom powers (integer, possibly negative)
//! times a single `exp(P)` factor, where `P` is itself a polynomial.
//! Exp factors combine by adding exponents, so `exp(a)*exp(b)` and
//! `exp(a+b)` share one representation.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::expr::Expr;

pub type Rational = BigRational;

/// An indeterminate of the polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Coordinate, parameter or multiplier symbol.
    Sym(String),
    /// `order`-th formal derivative of an opaque unary function.
    Func {
        name: String,
        order: u32,
        arg: Box<Expr>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    /// Sorted by atom, no zero exponents.
    pub(crate) powers: Vec<(Atom, i32)>,
    /// Exponent of the exp factor; zero means no factor.
    pub(crate) exp: Poly,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    pub(crate) terms: BTreeMap<Monomial, Rational>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(atom: Atom, k: i32) -> Self {
        if k == 0 {
            return Monomial::one();
        }
        Monomial {
            powers: vec![(atom, k)],
            exp: Poly::zero(),
        }
    }

    pub fn exp_of(p: Poly) -> Self {
        Monomial {
            powers: Vec::new(),
            exp: p,
        }
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty() && self.exp.is_zero()
    }

    pub fn powers(&self) -> &[(Atom, i32)] {
        &self.powers
    }

    pub fn exp_part(&self) -> &Poly {
        &self.exp
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut merged: BTreeMap<&Atom, i32> = BTreeMap::new();
        for (a, k) in self.powers.iter().chain(other.powers.iter()) {
            *merged.entry(a).or_insert(0) += *k;
        }
        Monomial {
            powers: merged
                .into_iter()
                .filter(|(_, k)| *k != 0)
                .map(|(a, k)| (a.clone(), k))
                .collect(),
            exp: self.exp.add(&other.exp),
        }
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            powers: self.powers.iter().map(|(a, k)| (a.clone(), -k)).collect(),
            exp: self.exp.neg(),
        }
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial {
            powers: self.powers.iter().map(|(a, e)| (a.clone(), e * k)).collect(),
            exp: self.exp.scale(&Rational::from_integer(k.into())),
        }
    }

    pub fn degree_in(&self, atom: &Atom) -> i32 {
        self.powers
            .iter()
            .find(|(a, _)| a == atom)
            .map(|(_, k)| *k)
            .unwrap_or(0)
    }

    /// The same monomial with `atom` raised to `k` instead.
    pub fn with_degree(&self, atom: &Atom, k: i32) -> Monomial {
        let mut powers: Vec<(Atom, i32)> =
            self.powers.iter().filter(|(a, _)| a != atom).cloned().collect();
        if k != 0 {
            powers.push((atom.clone(), k));
            powers.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Monomial {
            powers,
            exp: self.exp.clone(),
        }
    }

    pub fn is_plain(&self) -> bool {
        self.exp.is_zero() && self.powers.iter().all(|(_, k)| *k > 0)
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn atom_power(atom: Atom, k: i32) -> Self {
        Poly::term(Monomial::atom(atom, k), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_single_term(&self) -> Option<(Monomial, Rational)> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            Some((m.clone(), c.clone()))
        } else {
            None
        }
    }

    fn insert_add(terms: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    terms.remove(&m);
                }
            }
            None => {
                terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Poly::insert_add(&mut terms, m.clone(), c.clone());
        }
        Poly { terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            Poly::insert_add(&mut terms, t.mul(m), c.clone());
        }
        Poly { terms }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                Poly::insert_add(&mut terms, m1.mul(m2), c1 * c2);
            }
        }
        Poly { terms }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn has_exp(&self) -> bool {
        self.terms.keys().any(|m| !m.exp.is_zero())
    }

    /// No exp factors and no negative exponents.
    pub fn is_plain(&self) -> bool {
        self.terms.keys().all(Monomial::is_plain)
    }

    /// Coefficient of the greatest term.
    pub fn leading_coeff(&self) -> Rational {
        self.terms
            .iter()
            .next_back()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading_coeff().recip())
    }

    /// Top-level atoms occurring in any term.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .keys()
            .flat_map(|m| m.powers.iter().map(|(a, _)| a.clone()))
            .collect()
    }

    /// The largest monomial dividing every term: per-atom minimum exponent,
    /// and the exp factor of the greatest term.
    pub fn monomial_content(&self) -> Monomial {
        let mut mins: BTreeMap<Atom, i32> = BTreeMap::new();
        for a in self.atoms() {
            let k = self.terms.keys().map(|m| m.degree_in(&a)).min().unwrap_or(0);
            if k != 0 {
                mins.insert(a, k);
            }
        }
        let exp = self
            .terms
            .keys()
            .next_back()
            .map(|m| m.exp.clone())
            .unwrap_or_default();
        Monomial {
            powers: mins.into_iter().collect(),
            exp,
        }
    }

    pub fn degree_in(&self, atom: &Atom) -> i32 {
        self.terms.keys().map(|m| m.degree_in(atom)).max().unwrap_or(0)
    }

    /// Coefficient of `atom^k`, with `atom` removed.
    pub fn coeff_of(&self, atom: &Atom, k: i32) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.degree_in(atom) == k {
                terms.insert(m.with_degree(atom, 0), c.clone());
            }
        }
        Poly { terms }
    }

    fn coeffs_in(&self, atom: &Atom) -> BTreeMap<i32, Poly> {
        let mut out: BTreeMap<i32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.degree_in(atom);
            let entry = out.entry(k).or_default();
            Poly::insert_add(&mut entry.terms, m.with_degree(atom, 0), c.clone());
        }
        out
    }

    fn max_atom(&self) -> Option<Atom> {
        self.atoms().into_iter().next_back()
    }

    /// Exact quotient for plain polynomials; `None` when `b` does not divide.
    pub fn div_exact(&self, b: &Poly) -> Option<Poly> {
        if b.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = b.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let x = b.max_atom()?;
        let db = b.degree_in(&x);
        let lcb = b.coeff_of(&x, db);
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while !rem.is_zero() {
            let dr = rem.degree_in(&x);
            if dr < db {
                return None;
            }
            let lcr = rem.coeff_of(&x, dr);
            let t = lcr.div_exact(&lcb)?.mul(&Poly::atom_power(x.clone(), dr - db));
            rem = rem.sub(&t.mul(b));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    fn content_in(&self, x: &Atom) -> Poly {
        self.coeffs_in(x)
            .values()
            .fold(Poly::zero(), |acc, c| gcd(&acc, c))
    }

    fn primitive_in(&self, x: &Atom) -> Poly {
        let c = self.content_in(x);
        let p = self.div_exact(&c).expect("content divides");
        p.scale(&p.rational_content().recip())
    }

    fn prem(&self, g: &Poly, x: &Atom) -> Poly {
        let dg = g.degree_in(x);
        let lcg = g.coeff_of(x, dg);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(x) >= dg {
            let dr = r.degree_in(x);
            let lcr = r.coeff_of(x, dr);
            r = r
                .mul(&lcg)
                .sub(&lcr.mul(&Poly::atom_power(x.clone(), dr - dg)).mul(g));
        }
        r
    }

    /// Rational content: positive gcd of numerators over lcm of denominators.
    pub fn rational_content(&self) -> Rational {
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Rational::one();
        }
        Rational::new(num.abs(), den)
    }
}

/// Greatest common divisor of two plain polynomials, normalized so the
/// greatest term has coefficient one.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    let x = match (a.max_atom(), b.max_atom()) {
        (Some(p), Some(q)) => p.max(q),
        (Some(p), None) | (None, Some(p)) => p,
        (None, None) => return Poly::one(),
    };
    if a.degree_in(&x) == 0 {
        return gcd(a, &b.content_in(&x));
    }
    if b.degree_in(&x) == 0 {
        return gcd(&a.content_in(&x), b);
    }
    let ca = a.content_in(&x);
    let cb = b.content_in(&x);
    let c = gcd(&ca, &cb);
    let mut f = a.div_exact(&ca).expect("content divides");
    let mut g = b.div_exact(&cb).expect("content divides");
    if f.degree_in(&x) < g.degree_in(&x) {
        std::mem::swap(&mut f, &mut g);
    }
    loop {
        let r = f.prem(&g, &x);
        if r.is_zero() {
            break;
        }
        if r.degree_in(&x) == 0 {
            g = Poly::one();
            break;
        }
        f = g;
        g = r.primitive_in(&x);
    }
    c.mul(&g.primitive_in(&x)).monic()
}
