use std::fmt;

use num_traits::{One, Signed};

use super::expr::Expr;
use super::poly::{Atom, Monomial, Poly, Rational};

fn fmt_atom(a: &Atom) -> String {
    match a {
        Atom::Sym(s) => s.clone(),
        Atom::Func { name, order, arg } => {
            format!("{}{}({})", name, "'".repeat(*order as usize), arg)
        }
    }
}

fn fmt_factors(m: &Monomial) -> Vec<String> {
    let mut out: Vec<String> = m
        .powers()
        .iter()
        .map(|(a, k)| {
            if *k == 1 {
                fmt_atom(a)
            } else {
                format!("{}^{}", fmt_atom(a), k)
            }
        })
        .collect();
    if !m.exp_part().is_zero() {
        out.push(format!("exp({})", fmt_poly(m.exp_part())));
    }
    out
}

fn fmt_term(m: &Monomial, c: &Rational) -> String {
    let factors = fmt_factors(m);
    let c = c.abs();
    if factors.is_empty() {
        return c.to_string();
    }
    let body = factors.join("*");
    if c.is_one() {
        body
    } else {
        format!("{c}*{body}")
    }
}

/// Display rank of an atom: momenta, then velocities, then positions,
/// then everything else; higher index first within a kind.
fn atom_rank(a: &Atom) -> (u8, usize) {
    let Atom::Sym(s) = a else {
        return (1, 0);
    };
    let mut chars = s.chars();
    let class = match chars.next() {
        Some('p') => 4,
        Some('v') => 3,
        Some('q') => 2,
        _ => return (1, 0),
    };
    match chars.as_str().parse::<usize>() {
        Ok(i) => (class, i),
        Err(_) => (1, 0),
    }
}

fn display_key(m: &Monomial) -> Vec<(u8, usize, i32)> {
    let mut key: Vec<(u8, usize, i32)> = m
        .powers()
        .iter()
        .map(|(a, k)| {
            let (c, i) = atom_rank(a);
            (c, i, *k)
        })
        .collect();
    key.sort_by(|a, b| b.cmp(a));
    key
}

pub(crate) fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(&Monomial, &Rational)> = p.terms().collect();
    terms.sort_by(|a, b| display_key(b.0).cmp(&display_key(a.0)).then(b.0.cmp(a.0)));
    let mut s = String::new();
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let t = fmt_term(m, c);
        match (i, c.is_negative()) {
            (0, false) => s.push_str(&t),
            (0, true) => {
                s.push('-');
                s.push_str(&t);
            }
            (_, false) => {
                s.push_str(" + ");
                s.push_str(&t);
            }
            (_, true) => {
                s.push_str(" - ");
                s.push_str(&t);
            }
        }
    }
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            f.write_str(&fmt_poly(&self.num))
        } else {
            write!(f, "({})/({})", fmt_poly(&self.num), fmt_poly(&self.den))
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::sym::{parse, VarTable};

    #[test]
    fn prints_parseable_text() {
        let vars = VarTable::new(2, vec![], vec!["U".into()]).unwrap();
        for src in [
            "1/2*exp(q2)*v1^2",
            "v1^2/2 - U(q1)",
            "U''(q1)*v1 - 3/4",
            "1/(v1 + q2) - exp(-q1)",
            "q1^-2 + p1",
        ] {
            let e = parse(src, &vars).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed, &vars).unwrap(), e, "{src} -> {printed}");
        }
    }
}
