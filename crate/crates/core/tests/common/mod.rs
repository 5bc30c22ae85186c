#![allow(dead_code)]

use std::collections::BTreeMap;

use presym::input::parse_system;
use presym::phasespace::{build_model, LagrangianSpec, PhaseSpaceModel};
use presym::sym::{Expr, Rational, VarTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn spec(file: &str, sets: &[(&str, i64)]) -> LagrangianSpec {
    let path = format!("{}/fixtures/{file}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    let ov: Vec<(String, Rational)> = sets.iter().map(|(n, v)| (n.to_string(), q(*v))).collect();
    parse_system(&text, &ov).unwrap()
}

pub fn model(file: &str, sets: &[(&str, i64)]) -> PhaseSpaceModel {
    build_model(spec(file, sets)).unwrap()
}

/// The five example systems, with the two branches of the last one.
pub fn all_examples() -> Vec<(&'static str, PhaseSpaceModel)> {
    vec![
        ("ex1", model("ex1.lag", &[])),
        ("ex2", model("ex2.lag", &[])),
        ("ex3", model("ex3.lag", &[])),
        ("ex4", model("ex4.lag", &[])),
        ("ex5a", model("ex5.lag", &[("alpha", 0), ("beta", 0)])),
        ("ex5b", model("ex5.lag", &[("alpha", 0)])),
    ]
}

pub fn sym_vars() -> VarTable {
    VarTable::new(2, vec!["beta".into()], vec!["U".into()]).unwrap()
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into())
}

/// A random expression over q1, q2, v1, v2, p1, beta with exp, U and
/// occasional division.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    const ATOMS: [&str; 6] = ["q1", "q2", "v1", "v2", "p1", "beta"];
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0..=5 => Expr::sym(ATOMS[rng.gen_range(0..ATOMS.len())]),
            6 => Expr::func("U", 0, Expr::sym("q1")),
            _ => Expr::rational(random_rational(rng)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 | 1 => a + random_expr(rng, depth - 1),
        2 => a - random_expr(rng, depth - 1),
        3 | 4 => a * random_expr(rng, depth - 1),
        5 => a.pow(rng.gen_range(2..=3)).unwrap(),
        6 => {
            let lin = Expr::sym(ATOMS[rng.gen_range(0..2)]).scale(&random_rational(rng));
            a * Expr::exp(&lin).unwrap()
        }
        _ => {
            let d = Expr::sym(ATOMS[rng.gen_range(0..ATOMS.len())]) + Expr::int(rng.gen_range(1..=5));
            a.div(&d).unwrap()
        }
    }
}

pub fn random_exprs(seed: u64, n: usize) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_expr(&mut rng, 3)).collect()
}

/// Random rational values for every name.
pub fn random_point(rng: &mut ChaCha8Rng, names: &[String]) -> BTreeMap<String, Rational> {
    names
        .iter()
        .map(|n| {
            let num: i64 = rng.gen_range(-30..=30);
            let den: i64 = rng.gen_range(1..=7);
            (n.clone(), Rational::new(num.into(), den.into()))
        })
        .collect()
}

/// Rank by plain Gaussian elimination over the rationals.
pub fn oracle_rank(mut a: Vec<Vec<Rational>>) -> usize {
    use num_traits::Zero;
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        for i in (r + 1)..a.len() {
            let f = &a[i][c] / &pivot;
            for j in c..cols {
                let d = &f * &a[r][j];
                a[i][j] -= d;
            }
        }
        r += 1;
    }
    r
}

/// Inverse by Gauss-Jordan over the rationals; `None` when singular.
pub fn oracle_inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    use num_traits::{One, Zero};
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let piv = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x /= &piv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * n {
                    let d = &f * &m[c][j];
                    m[i][j] -= d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}
