use approx::assert_relative_eq;
use bargmann_core::geometry::{DirectionRecord, MatrixValue, Sample, GEOM_SCHEMA};
use bargmann_core::model_operators::lambda_eq;
use bargmann_core::testing;
use bargmann_core::{
    c0, c3_c4, compose, dp3, hermitian_eigs, CMatrix, Dims, GeometryData, KernelExpr, KernelKind, Poly, C64,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn close(a: &Poly, b: &Poly) -> bool {
    a.max_coef_diff(b) <= 1e-9 * (1.0 + max_coef(a).max(max_coef(b)))
}

fn max_coef(p: &Poly) -> f64 {
    p.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

fn poly(rng: &mut ChaCha8Rng, kind: KernelKind, r: usize) -> Poly {
    testing::numerator(rng, kind, r, 3, 3).unwrap()
}

fn hermitian(rng: &mut ChaCha8Rng, k: usize) -> CMatrix {
    let a = testing::matrix(rng, k);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn anti_hermitian(rng: &mut ChaCha8Rng, k: usize) -> CMatrix {
    let a = testing::matrix(rng, k);
    (&a - a.adjoint()) * C64::new(0.5, 0.0)
}

fn geometry(rng: &mut ChaCha8Rng, samples: usize) -> GeometryData {
    let r = 2;
    let samples = (0..samples)
        .map(|i| Sample {
            id: format!("s{i:02}"),
            scal_x: rng.random_range(-3.0..3.0),
            scal_w: None,
            scal_y: rng.random_range(-3.0..3.0),
            lambda_rf_x: MatrixValue(anti_hermitian(rng, r)),
            lambda_rf_w: None,
            lambda_rf_y: MatrixValue(anti_hermitian(rng, r)),
            kappa: 1.0,
            normal_dirs: (0..2)
                .map(|k| DirectionRecord {
                    level: 1,
                    vector: (0..2).map(|j| C64::new(if j == k { 1.0 } else { 0.0 }, 0.0)).collect(),
                    d_scal_diff: rng.random_range(-3.0..3.0),
                    nabla_lambda_diff: Some(MatrixValue(anti_hermitian(rng, r))),
                })
                .collect(),
        })
        .collect();
    GeometryData {
        schema: GEOM_SCHEMA.into(),
        dims: vec![1, 3, 4],
        fiber_rank: r,
        samples,
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ring_axioms(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let kind = KernelKind::Extension { n: 2, m: 1 };
        let (a, b, c) = (poly(&mut rng, kind, 2), poly(&mut rng, kind, 2), poly(&mut rng, kind, 2));
        let left = a.add(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right));
        let assoc_l = a.mul(&b).unwrap().mul(&c).unwrap();
        let assoc_r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&assoc_l, &assoc_r));
        prop_assert!(a.sub(&a).unwrap().is_zero());
        let one = Poly::one(a.dims());
        prop_assert!(close(&a.mul(&one).unwrap(), &a));
    }

    #[test]
    fn conjugate_swap_is_an_involution(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let p = poly(&mut rng, KernelKind::Bergman { n: 2 }, 2);
        prop_assert_eq!(p.conjugate_swap().conjugate_swap(), p.clone());
        prop_assert_eq!(p.conjugate().conjugate(), p);
    }

    #[test]
    fn kernel_adjoint_matches_pointwise(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let e = testing::kernel(&mut rng, KernelKind::Extension { n: 3, m: 1 }, 2, 3, 3).unwrap();
        let pts = testing::points(&mut rng, 3, 1, 3);
        for (x, y) in pts {
            let k = e.eval(&x, &y).unwrap();
            let ka = e.adjoint().eval(&y, &x).unwrap();
            prop_assert!((ka - k.adjoint()).norm() <= 1e-12 * (1.0 + k.norm()));
        }
    }

    #[test]
    fn composition_adjoint(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let (n, m) = (2, 1);
        let b = testing::kernel(&mut rng, KernelKind::Bergman { n }, 1, 3, 3).unwrap();
        let e = testing::kernel(&mut rng, KernelKind::Extension { n, m }, 1, 3, 3).unwrap();
        let lhs = compose(&b, &e).unwrap().adjoint();
        let rhs = compose(&e.adjoint(), &b.adjoint()).unwrap();
        prop_assert_eq!(lhs.kind(), rhs.kind());
        prop_assert!(close(lhs.numerator(), rhs.numerator()));
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let n = rng.random_range(1..=2);
        let m = rng.random_range(0..=n);
        let r = rng.random_range(1..=2);
        let b1 = testing::kernel(&mut rng, KernelKind::Bergman { n }, r, 2, 2).unwrap();
        let b2 = testing::kernel(&mut rng, KernelKind::Bergman { n }, r, 2, 2).unwrap();
        let e = testing::kernel(&mut rng, KernelKind::Extension { n, m }, r, 2, 2).unwrap();
        let lhs = compose(&compose(&b1, &b2).unwrap(), &e).unwrap();
        let rhs = compose(&b1, &compose(&b2, &e).unwrap()).unwrap();
        prop_assert!(close(lhs.numerator(), rhs.numerator()));
    }

    #[test]
    fn composition_is_bilinear(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let (_, e1, e2) = testing::composable_pair(&mut rng, 3, 3, 2).unwrap();
        let f2 = KernelExpr::new(
            testing::numerator(&mut rng, e2.kind(), e2.fiber_rank(), 3, 3).unwrap(),
            e2.kind(),
        ).unwrap();
        let a = testing::complex(&mut rng);
        let sum = KernelExpr::new(
            e2.numerator().scale(a).add(f2.numerator()).unwrap(),
            e2.kind(),
        ).unwrap();
        let lhs = compose(&e1, &sum).unwrap();
        let rhs = compose(&e1, &e2).unwrap().numerator().scale(a)
            .add(compose(&e1, &f2).unwrap().numerator()).unwrap();
        prop_assert!(close(lhs.numerator(), &rhs));
    }

    #[test]
    fn lambda_eq_is_rotation_invariant(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let g = testing::symbol(&mut rng, 3, 1, 2, 2, 4).unwrap();
        let u = testing::unitary(&mut rng, 2);
        let a = lambda_eq(&g);
        let b = lambda_eq(&g.rotate(&u).unwrap());
        prop_assert!((a - &b).norm() <= 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn lambda_eq_is_positive(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let g = testing::symbol(&mut rng, 3, 1, 2, 2, 3).unwrap();
        let ev = hermitian_eigs(&lambda_eq(&g.adjoint().mul(&g).unwrap())).unwrap();
        prop_assert!(ev[0] >= -1e-12);
    }

    #[test]
    fn hermitian_eigs_invariants(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = testing::rng(seed);
        let h = hermitian(&mut rng, k);
        let u = testing::unitary(&mut rng, k);
        let ev = hermitian_eigs(&h).unwrap();
        let ev2 = hermitian_eigs(&(u.adjoint() * &h * &u)).unwrap();
        for (a, b) in ev.iter().zip(&ev2) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        assert_relative_eq!(ev.iter().sum::<f64>(), h.trace().re, epsilon = 1e-10);
        assert_relative_eq!(ev.iter().map(|x| x * x).sum::<f64>().sqrt(), h.norm(), epsilon = 1e-10);
    }

    #[test]
    fn constants_ignore_order_and_duplicates(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let data = geometry(&mut rng, 4);
        let mut shuffled = data.clone();
        shuffled.samples.reverse();
        let dup = shuffled.samples[1].clone();
        shuffled.samples.push(dup);
        let (a, b) = (c3_c4(&data).unwrap(), c3_c4(&shuffled).unwrap());
        prop_assert_eq!(a, b);
        prop_assert_eq!(c0(&data).unwrap(), c0(&shuffled).unwrap());
        let dir = vec![vec![testing::complex(&mut rng), testing::complex(&mut rng)], vec![C64::new(0.0, 0.0)]];
        prop_assert_eq!(dp3(&data, &dir).unwrap(), dp3(&shuffled, &dir).unwrap());
    }

    #[test]
    fn constants_are_monotone_in_samples(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let data = geometry(&mut rng, 5);
        let mut fewer = data.clone();
        fewer.samples.truncate(3);
        let (all, some) = (c3_c4(&data).unwrap(), c3_c4(&fewer).unwrap());
        prop_assert!(all.c3 >= some.c3 && all.c4 >= some.c4);
        prop_assert!(c0(&data).unwrap().c0 >= c0(&fewer).unwrap().c0);
    }

    #[test]
    fn dp3_is_complex_linear(seed in any::<u64>()) {
        let mut rng = testing::rng(seed);
        let data = geometry(&mut rng, 2);
        let zero = vec![C64::new(0.0, 0.0)];
        let u = vec![testing::complex(&mut rng), testing::complex(&mut rng)];
        let v = vec![testing::complex(&mut rng), testing::complex(&mut rng)];
        let a = testing::complex(&mut rng);
        let w: Vec<C64> = u.iter().zip(&v).map(|(x, y)| a * x + y).collect();
        let du = dp3(&data, &vec![u, zero.clone()]).unwrap();
        let dv = dp3(&data, &vec![v, zero.clone()]).unwrap();
        let dw = dp3(&data, &vec![w, zero]).unwrap();
        for ((x, y), z) in du.iter().zip(&dv).zip(&dw) {
            prop_assert!((&x.value * a + &y.value - &z.value).norm() <= 1e-10);
        }
    }
}

#[test]
fn dims_reject_bad_chains() {
    assert!(Dims::new(1, 2, 1).is_err());
    assert!(Dims::new(2, 1, 0).is_err());
}
