//! Exact evaluation at rational points.
//!
//! `exp` is approximated by a fixed-point Taylor series accurate to about
//! 70 digits. Opaque functions are instantiated as fixed polynomials whose
//! coefficients are derived from the function name, so their derivatives
//! agree with formal differentiation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::Expr;
use super::poly::{Atom, Monomial, Poly, Rational};
use super::SymError;

const SCALE_BITS: u64 = 256;
const FUNC_DEGREE: usize = 5;

/// Rational approximation of `e^x`.
pub fn approx_exp(x: &Rational) -> Rational {
    if x.is_zero() {
        return Rational::one();
    }
    let mut k = 0u32;
    let mut y = x.clone();
    let half = Rational::new(1.into(), 2.into());
    while y.abs() > half {
        y /= Rational::from_integer(2.into());
        k += 1;
    }
    let one = BigInt::one() << SCALE_BITS;
    let fixed = (y * Rational::from_integer(one.clone())).round().to_integer();
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut n = 1u32;
    loop {
        term = (&term * &fixed) / (&one * BigInt::from(n));
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    for _ in 0..k {
        sum = (&sum * &sum) >> SCALE_BITS;
    }
    Rational::new(sum, one)
}

fn func_coeffs(name: &str) -> Vec<Rational> {
    // FNV-1a, so the instantiation is stable across runs and platforms.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    (0..=FUNC_DEGREE)
        .map(|j| {
            let bits = (h >> (j * 8)) & 0xff;
            let n = (bits % 7) as i64 - 3;
            let n = if n == 0 { 1 } else { n };
            Rational::new(n.into(), ((j as i64) + 1).into())
        })
        .collect()
}

fn func_value(name: &str, order: u32, x: &Rational) -> Rational {
    let c = func_coeffs(name);
    let k = order as usize;
    let mut total = Rational::zero();
    for (j, cj) in c.iter().enumerate().skip(k) {
        let falling: i64 = ((j - k + 1)..=j).map(|t| t as i64).product();
        total += cj * Rational::from_integer(falling.into()) * pow_q(x, (j - k) as i32);
    }
    total
}

fn pow_q(x: &Rational, k: i32) -> Rational {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Evaluator {
    pub values: BTreeMap<String, Rational>,
}

impl Evaluator {
    pub fn new(values: BTreeMap<String, Rational>) -> Self {
        Evaluator { values }
    }

    pub fn eval(&self, e: &Expr) -> Result<Rational, SymError> {
        let n = self.eval_poly(e.num_poly())?;
        if e.den_poly().is_one() {
            return Ok(n);
        }
        let d = self.eval_poly(e.den_poly())?;
        if d.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        Ok(n / d)
    }

    pub fn eval_f64(&self, e: &Expr) -> Result<f64, SymError> {
        Ok(self.eval(e)?.to_f64().unwrap_or(f64::NAN))
    }

    fn eval_poly(&self, p: &Poly) -> Result<Rational, SymError> {
        let mut total = Rational::zero();
        for (m, c) in p.terms() {
            total += c * self.eval_mono(m)?;
        }
        Ok(total)
    }

    fn eval_mono(&self, m: &Monomial) -> Result<Rational, SymError> {
        let mut acc = Rational::one();
        for (a, k) in m.powers() {
            let v = match a {
                Atom::Sym(s) => self
                    .values
                    .get(s)
                    .cloned()
                    .ok_or_else(|| SymError::Unbound(s.clone()))?,
                Atom::Func { name, order, arg } => func_value(name, *order, &self.eval(arg)?),
            };
            if v.is_zero() && *k < 0 {
                return Err(SymError::DivisionByZero);
            }
            acc *= pow_q(&v, *k);
        }
        if !m.exp_part().is_zero() {
            acc *= approx_exp(&self.eval_poly(m.exp_part())?);
        }
        Ok(acc)
    }
}
