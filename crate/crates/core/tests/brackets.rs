mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use presym::hamreduce::{dirac_bracket, run_hamiltonian, BracketTable};
use presym::lagreduce::run_lagrangian;
use presym::phasespace::poisson_bracket;
use presym::sym::{parse, CoordKind, Evaluator, Expr, Rational};
use presym::Error;

use common::*;

#[test]
fn ex3_dirac_bracket_matches_direct_evaluation() {
    let m = model("ex3.lag", &[]);
    let vars = m.vars().clone();
    let x = |s: &str| parse(s, &vars).unwrap();
    let h = run_hamiltonian(&m, 10).unwrap();
    let chi: Vec<Expr> = ["p1 + q2/2", "p2 - q1/2", "v2 - q1", "v1 + q2"].iter().map(|s| x(s)).collect();
    let named: Vec<(String, Expr)> = chi.iter().cloned().enumerate().map(|(i, c)| (i.to_string(), c)).collect();
    let table = dirac_bracket(&BracketTable::poisson(&vars), &named, &h.reduction.surface, 1).unwrap();
    let (f, g) = (x("q1"), x("p1"));
    let star = table.bracket(&f, &g);

    let names: Vec<String> = ["q1", "q2", "p1", "p2", "v1", "v2"].iter().map(|s| s.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let ev = Evaluator::new(random_point(&mut rng, &names));
        let num = |e: &Expr| ev.eval(e).unwrap();
        let c: Vec<Vec<Rational>> = chi
            .iter()
            .map(|a| chi.iter().map(|b| num(&poisson_bracket(&vars, a, b))).collect())
            .collect();
        let cinv = oracle_inverse(&c).expect("constraint matrix is invertible");
        let fa: Vec<Rational> = chi.iter().map(|a| num(&poisson_bracket(&vars, &f, a))).collect();
        let bg: Vec<Rational> = chi.iter().map(|b| num(&poisson_bracket(&vars, b, &g))).collect();
        let mut want = num(&poisson_bracket(&vars, &f, &g));
        for a in 0..chi.len() {
            for b in 0..chi.len() {
                want -= &fa[a] * &cinv[a][b] * &bg[b];
            }
        }
        assert_eq!(num(&star), want);
    }
}

#[test]
fn ex5b_evolution_matches_the_two_constraint_bracket() {
    // f' = {h,f} - {h,chi}{phi,f} + {h,phi}{chi,f} with phi = p2 - q1,
    // chi = q2 - q1, on the final surface.
    let m = model("ex5.lag", &[("alpha", 0)]);
    let vars = m.vars().clone();
    let x = |s: &str| parse(s, &vars).unwrap();
    let ham = run_hamiltonian(&m, 10).unwrap();
    let red = &ham.reduction;
    let (phi, chi) = (x("p2 - q1"), x("q2 - q1"));
    let pb = |a: &Expr, b: &Expr| poisson_bracket(&vars, a, b);
    let hh = &ham.routh.h;
    for f in ["q1", "q2", "p1", "p2"] {
        let f = x(f);
        let want = pb(hh, &f) - pb(hh, &chi) * pb(&phi, &f) + pb(hh, &phi) * pb(&chi, &f);
        let want = red.surface.restrict(&want).unwrap();
        let got = red.evolve(&f).unwrap();
        assert_eq!(got, want, "for {f}");
    }
    assert!(ham.dirac_evolution_consistent);
}

#[test]
fn consumed_constraints_are_bracket_inert() {
    for (name, m) in all_examples() {
        let h = run_hamiltonian(&m, 10).unwrap();
        let full = h.reduction.full_surface().unwrap();
        for st in &h.table.stages {
            for chi in &st.chi {
                for c in m.vars().all_coords() {
                    let b = h.table.bracket(chi, &Expr::sym(&c.name()));
                    assert!(full.restrict(&b).unwrap().is_zero(), "{name}: {{{chi}, {}}}*", c.name());
                }
            }
        }
    }
}

#[test]
fn pictures_agree_on_position_and_momentum_rates() {
    for (name, m) in all_examples() {
        let l = run_lagrangian(&m, 10).unwrap().reduction;
        let h = run_hamiltonian(&m, 10).unwrap().reduction;
        let full = h.full_surface().unwrap();
        for c in m.vars().all_coords() {
            if c.kind == CoordKind::V {
                continue;
            }
            let f = Expr::sym(&c.name());
            let a = full.restrict(&l.evolve(&f).unwrap()).unwrap();
            let b = full.restrict(&h.evolve(&f).unwrap()).unwrap();
            assert_eq!(a, b, "{name}: d{}/dt", c.name());
        }
    }
}

#[test]
fn dirac_bracket_is_antisymmetric_on_random_functions() {
    let m = model("ex2.lag", &[]);
    let h = run_hamiltonian(&m, 10).unwrap();
    assert_eq!(h.table.stages.len(), 1);
    for (i, f) in random_exprs(11, 40).iter().enumerate() {
        let g = random_exprs(12 + i as u64, 1).remove(0);
        let s = h.table.bracket(f, &g) + h.table.bracket(&g, f);
        assert!(s.is_zero(), "{f} / {g}");
    }
}

#[test]
fn empty_constraint_set_leaves_poisson_bracket() {
    let m = model("ex1.lag", &[]);
    let h = run_hamiltonian(&m, 10).unwrap();
    let t = BracketTable::poisson(m.vars());
    let same = dirac_bracket(&t, &[], &h.reduction.surface, 0).unwrap();
    assert_eq!(same, t);
    let (q1, p1) = (Expr::sym("q1"), Expr::sym("p1"));
    assert_eq!(same.bracket(&p1, &q1), Expr::one());
}

#[test]
fn first_class_constraints_make_a_singular_matrix() {
    let m = model("ex4.lag", &[]);
    let h = run_hamiltonian(&m, 10).unwrap();
    let chi = vec![("a".to_string(), Expr::sym("p2")), ("b".to_string(), Expr::sym("p1"))];
    let err = dirac_bracket(&BracketTable::poisson(m.vars()), &chi, &h.reduction.surface, 1).unwrap_err();
    assert!(matches!(err, Error::SingularConstraintMatrix { rank: 0, size: 2 }));
}
