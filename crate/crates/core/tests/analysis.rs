mod common;

use presym::analysis::{analyze, cross_check, numeric_verify, AnalysisRequest, PictureSelection};
use presym::hamreduce::run_hamiltonian;
use presym::input::parse_system;
use presym::lagreduce::run_lagrangian;
use presym::phasespace::build_model;
use presym::report::Report;
use presym::Error;

use common::*;

fn request(text: &str) -> AnalysisRequest {
    AnalysisRequest::new(parse_system(text, &[]).unwrap())
}

#[test]
fn verification_residuals_vanish_exactly() {
    for file in ["ex2.lag", "ex3.lag"] {
        let m = model(file, &[]);
        let l = run_lagrangian(&m, 10).unwrap();
        let h = run_hamiltonian(&m, 10).unwrap();
        let a = numeric_verify(&m, &l.reduction, None, 32, 1).unwrap();
        let b = numeric_verify(&m, &h.reduction, Some(&h.table), 32, 1).unwrap();
        assert!(a.contains_key("lagrangian.energy") && a.contains_key("lagrangian.constraints"));
        assert!(b.contains_key("hamiltonian.jacobi"));
        for (k, r) in a.iter().chain(b.iter()) {
            assert_eq!(*r, 0.0, "{file} {k}");
        }
    }
}

#[test]
fn free_particle_conserves_energy() {
    let r = analyze(&request("system \"free\"\ndim 1\nlagrangian = v1^2/2\n")).unwrap();
    assert_eq!(r.verification.residuals["lagrangian.energy"], 0.0);
    let lag = r.pictures.lagrangian.unwrap();
    assert_eq!(lag.determined.accelerations["vdot1"], "0");
    assert_eq!(lag.energy_on_surface, "1/2*v1^2");
}

#[test]
fn ex5b_generations_match_one_to_one() {
    let m = model("ex5.lag", &[("alpha", 0)]);
    let l = run_lagrangian(&m, 10).unwrap();
    let h = run_hamiltonian(&m, 10).unwrap();
    let eq = cross_check(&l, &h).unwrap();
    assert!(eq.matched && eq.termination_agrees && eq.undetermined_agrees);
    let labels: Vec<&str> = eq.constraints.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["phi_1", "phi_2", "phi_2^(1)", "phi_2^(2)"]);
    assert_eq!(l.reduction.generations.len(), 3);
    assert_eq!(h.reduction.generations.len(), 3);
}

#[test]
fn constant_consistency_condition_is_inconsistent() {
    let err = analyze(&request("system \"push\"\ndim 1\nlagrangian = q1\n")).unwrap_err();
    assert!(matches!(err, Error::InconsistentConstraint { .. }), "{err}");
}

#[test]
fn budget_and_request_validation() {
    let mut req = AnalysisRequest::new(spec("ex4.lag", &[]));
    req.max_generations = 1;
    assert!(matches!(analyze(&req), Err(Error::GenerationBudgetExceeded { budget: 1, .. })));
    req.max_generations = 0;
    assert!(matches!(analyze(&req), Err(Error::InvalidSpec(_))));
}

#[test]
fn momenta_in_the_lagrangian_are_rejected() {
    let spec = parse_system("system \"bad\"\ndim 1\nlagrangian = p1*v1\n", &[]).unwrap();
    assert!(matches!(build_model(spec), Err(Error::InvalidSpec(_))));
}

#[test]
fn single_picture_reports_skip_the_cross_check() {
    let mut req = AnalysisRequest::new(spec("ex3.lag", &[]));
    req.picture = PictureSelection::Hamiltonian;
    let r = analyze(&req).unwrap();
    assert!(r.pictures.lagrangian.is_none() && r.equivalence.is_none());
    let ham = r.pictures.hamiltonian.unwrap().hamiltonian.unwrap();
    assert_eq!(ham.h, "1/2*q2^2 + 1/2*q1^2");
    assert_eq!(ham.dirac_stages.len(), 1);
}

#[test]
fn reports_round_trip_through_json() {
    let cases: [(&str, &[(&str, i64)]); 6] = [
        ("ex1.lag", &[]),
        ("ex2.lag", &[]),
        ("ex3.lag", &[]),
        ("ex4.lag", &[]),
        ("ex5.lag", &[("alpha", 0), ("beta", 0)]),
        ("ex5.lag", &[("alpha", 0)]),
    ];
    for (file, sets) in cases {
        let r = analyze(&AnalysisRequest::new(spec(file, sets))).unwrap();
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r, "{file} {sets:?}");
    }
}

#[test]
fn different_seeds_change_nothing_but_sampling() {
    let mut a = AnalysisRequest::new(spec("ex4.lag", &[]));
    let mut b = a.clone();
    a.seed = 1;
    b.seed = 2;
    let (ra, rb) = (analyze(&a).unwrap(), analyze(&b).unwrap());
    assert_eq!(ra.pictures, rb.pictures);
    assert_eq!(ra.verification.max_residual, 0.0);
}
