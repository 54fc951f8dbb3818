use bargmann_core::testing;
use bargmann_core::{
    check_composition, compose, k_base, standard_points, Error, KernelExpr, KernelKind, Rule,
};

#[test]
fn every_rule_agrees_with_quadrature_at_random_points() {
    let mut rng = testing::rng(11);
    for rule in Rule::ALL {
        for _ in 0..8 {
            let (k1, k2) = testing::kind_pair(&mut rng, rule, 3);
            let e1 = testing::kernel(&mut rng, k1, 2, 4, 3).unwrap();
            let e2 = testing::kernel(&mut rng, k2, 2, 4, 3).unwrap();
            let sym = compose(&e1, &e2).unwrap();
            let k = sym.kind();
            let pts = testing::points(&mut rng, k.unprimed_dim(), k.primed_dim(), 4);
            let rep = check_composition(&sym, &e1, &e2, &pts, None, 1e-9).unwrap();
            assert!(rep.pass, "{rule:?}: max_rel {:e}", rep.max_rel);
        }
    }
}

#[test]
fn high_degree_numerators() {
    let mut rng = testing::rng(12);
    for _ in 0..10 {
        let e1 = testing::kernel(&mut rng, KernelKind::Bergman { n: 1 }, 1, 7, 2).unwrap();
        let e2 = testing::kernel(&mut rng, KernelKind::Extension { n: 1, m: 0 }, 1, 7, 2).unwrap();
        let sym = compose(&e1, &e2).unwrap();
        let rep = check_composition(&sym, &e1, &e2, &standard_points(1, 0), None, 1e-9).unwrap();
        assert!(rep.pass, "max_rel {:e}", rep.max_rel);
    }
}

#[test]
fn bergman_projector_is_idempotent() {
    for n in 0..=3 {
        let p = KernelExpr::unit(KernelKind::Bergman { n }, 1).unwrap();
        let pp = compose(&p, &p).unwrap();
        assert_eq!(pp.kind(), p.kind());
        assert!(pp.numerator().max_coef_diff(p.numerator()) < 1e-14);
    }
}

#[test]
fn orthogonal_projector_fixes_extension() {
    let e = KernelExpr::unit(KernelKind::Extension { n: 3, m: 1 }, 1).unwrap();
    let q = KernelExpr::unit(KernelKind::OrthBergman { n: 3, m: 1 }, 1).unwrap();
    let qe = compose(&q, &e).unwrap();
    assert_eq!(qe.kind(), e.kind());
    assert!(qe.numerator().max_coef_diff(e.numerator()) < 1e-14);
}

#[test]
fn base_integral_of_one() {
    let mut rng = testing::rng(13);
    let e = testing::kernel(&mut rng, KernelKind::Bergman { n: 1 }, 1, 0, 1).unwrap();
    let out = k_base(e.numerator(), 1, 1).unwrap();
    assert!(out.max_coef_diff(e.numerator()) < 1e-14);
}

#[test]
fn unsupported_pairs_are_rejected() {
    let e = KernelExpr::unit(KernelKind::Extension { n: 2, m: 1 }, 1).unwrap();
    let r = KernelExpr::unit(KernelKind::Restriction { n: 2, m: 1 }, 1).unwrap();
    assert!(matches!(compose(&e, &r), Err(Error::UnsupportedPair { .. })));
    let b3 = KernelExpr::unit(KernelKind::Bergman { n: 3 }, 1).unwrap();
    assert!(compose(&b3, &e).is_err());
}
