mod common;

use bergman::jets::{det_jet, Jet};
use bergman::kernels::{ball_kernel, log_field, Domain, FnField};
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_jet(nvars: usize, order: usize, seed: u64, constant: Option<C>) -> Jet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jet = Jet::from_fn(nvars, order, |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap();
    if let Some(c0) = constant {
        jet = jet.add_constant(c0 - jet.constant_term());
    }
    jet
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * a.max_abs().max(b.max_abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(n in 1usize..=3, order in 1usize..=6, seed in any::<u64>()) {
        let nvars = 2 * n;
        let a = random_jet(nvars, order, seed, None);
        let b = random_jet(nvars, order, seed ^ 0x9e37, None);
        let d = random_jet(nvars, order, seed ^ 0x7f4a, None);
        prop_assert!(close(&(&(&a * &b) * &d), &(&a * &(&b * &d)), 1e-12));
        prop_assert!(close(&(&a * &(&b + &d)), &(&(&a * &b) + &(&a * &d)), 1e-12));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-12));
        prop_assert!(close(&(&a + &b), &(&b + &a), 0.0));
        let one = a.constant_like(c(1.0, 0.0));
        prop_assert!(close(&(&a * &one), &a, 0.0));
    }

    #[test]
    fn exp_and_log_are_inverse(n in 1usize..=2, order in 1usize..=6, seed in any::<u64>()) {
        let nvars = 2 * n;
        let x = random_jet(nvars, order, seed, Some(c(0.3, 0.2))).scale_real(0.5);
        let back = x.exp().ln().unwrap();
        prop_assert!(close(&back, &x, 1e-12));

        let y = random_jet(nvars, order, seed ^ 1, Some(c(1.5, 0.0))).scale_real(0.5);
        let y = y.add_constant(c(1.5, 0.0) - y.constant_term());
        let again = y.ln().unwrap().exp();
        prop_assert!(close(&again, &y, 1e-12));
    }

    #[test]
    fn reciprocal_and_powers(n in 1usize..=2, order in 1usize..=5, seed in any::<u64>()) {
        let nvars = 2 * n;
        let x = random_jet(nvars, order, seed, Some(c(2.0, 0.5))).scale_real(0.5);
        let one = x.constant_like(c(1.0, 0.0));
        prop_assert!(close(&(&x * &x.reciprocal().unwrap()), &one, 1e-12));
        prop_assert!(close(&x.powi(3).unwrap(), &(&(&x * &x) * &x), 1e-12));
        prop_assert!(close(&x.powi(-2).unwrap(), &x.powi(2).unwrap().reciprocal().unwrap(), 1e-12));
        let x = x.add_constant(c(1.0, -x.constant_term().im));
        prop_assert!(close(&x.powf(2.0).unwrap(), &(&x * &x), 1e-12));
        prop_assert!(close(&(&x.powf(0.5).unwrap() * &x.powf(0.5).unwrap()), &x, 1e-12));
    }

    #[test]
    fn index_shift(n in 1usize..=3, order in 2usize..=5, seed in any::<u64>(), i in 0usize..3, j in 0usize..3) {
        let (i, j) = (i % n, j % n);
        let f = random_jet(2 * n, order, seed, None);
        let g = f.partial_shift(i, j).unwrap();
        let layout = g.layout().clone();
        for r in 0..layout.len() {
            let e = layout.exponents(r);
            let alpha: Vec<usize> = e[..n].iter().map(|&x| x as usize).collect();
            let beta: Vec<usize> = e[n..].iter().map(|&x| x as usize).collect();
            let mut a2 = alpha.clone();
            let mut b2 = beta.clone();
            a2[i] += 1;
            b2[j] += 1;
            let lhs = g.extract_deriv(&alpha, &beta).unwrap();
            let rhs = f.extract_deriv(&a2, &b2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn truncation_commutes_with_evaluation(n in 1usize..=3, high in 3usize..=6, seed in any::<u64>()) {
        let z = random_points(n, 1, 0.7, seed)[0].clone();
        let field = FnField::new(n, Domain::Ball, "composite", |p| {
            let s = p.norm_sqr();
            let t = (&p.z[0] + &p.zbar[0]).scale_real(0.3).exp();
            (&(-&s).add_constant(1.0.into()) * &t).powf(-0.75)
        });
        for low in 0..high {
            let a = field.jet(&z, high).unwrap().truncate(low).unwrap();
            let b = field.jet(&z, low).unwrap();
            prop_assert!(close(&a, &b, 1e-13));
        }
    }

    #[test]
    fn log_kernel_is_conjugate_symmetric(n in 1usize..=3, seed in any::<u64>()) {
        let z = random_points(n, 1, 0.9, seed)[0].clone();
        let u = log_field(ball_kernel(n)).jet(&z, 4).unwrap();
        prop_assert!(u.conj_symmetry_defect() <= 1e-12 * u.max_abs().max(1.0));
    }

    #[test]
    fn det_of_constant_jets_matches_scalar(size in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scalars = DMatrix::from_fn(size, size, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m: Vec<Vec<Jet>> = (0..size)
            .map(|i| (0..size).map(|j| Jet::constant(scalars[(i, j)], 2, 2).unwrap()).collect())
            .collect();
        let d = det_jet(&m).unwrap();
        let expected = scalars.determinant();
        prop_assert!((d.constant_term() - expected).norm() <= 1e-12 * expected.norm().max(1.0));
        prop_assert!(d.coeffs()[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn det_is_multiplicative(size in 2usize..=5, seed in any::<u64>()) {
        let a: Vec<Vec<Jet>> = (0..size)
            .map(|i| (0..size).map(|j| random_jet(2, 3, seed + (i * 7 + j) as u64, None)).collect())
            .collect();
        let b: Vec<Vec<Jet>> = (0..size)
            .map(|i| (0..size).map(|j| random_jet(2, 3, seed ^ (0xabc + (i * 7 + j) as u64), None)).collect())
            .collect();
        let ab: Vec<Vec<Jet>> = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| (0..size).map(|k| &a[i][k] * &b[k][j]).reduce(|x, y| &x + &y).unwrap())
                    .collect()
            })
            .collect();
        let lhs = det_jet(&ab).unwrap();
        let rhs = &det_jet(&a).unwrap() * &det_jet(&b).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-11));
    }
}

#[test]
fn det_examples() {
    let one = Jet::constant(c(1.0, 0.0), 2, 2).unwrap();
    let zero = Jet::zero(2, 2).unwrap();
    let id = vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]];
    assert_eq!(det_jet(&id).unwrap().constant_term(), c(1.0, 0.0));
    let diag = vec![
        vec![one.scale_real(2.0), zero.clone()],
        vec![zero.clone(), one.scale_real(3.0)],
    ];
    assert_eq!(det_jet(&diag).unwrap().constant_term(), c(6.0, 0.0));
    let ragged = vec![vec![one.clone(), zero.clone()], vec![zero]];
    assert!(det_jet(&ragged).is_err());
}

#[test]
fn monomial_shift_examples() {
    let z = [c(0.0, 0.0)];
    let zeta = Jet::coordinate(&z, 0, bergman::Direction::Holomorphic, 4).unwrap();
    let omega = Jet::coordinate(&z, 0, bergman::Direction::Antiholomorphic, 4).unwrap();
    let f = &(&(&zeta * &zeta) * &omega) * &omega;
    let g = f.partial_shift(0, 0).unwrap();
    assert_eq!(g.order(), 2);
    assert_eq!(g.coeff(&[1], &[1]), c(4.0, 0.0));
    assert_eq!(g.constant_term(), c(0.0, 0.0));

    let f = (&zeta * &omega).truncate(2).unwrap();
    let g = f.partial_shift(0, 0).unwrap();
    assert_eq!(g.order(), 0);
    assert_eq!(g.constant_term(), c(1.0, 0.0));
}

#[test]
fn order_cap_is_enforced() {
    assert!(Jet::zero(2, 13).is_err());
    assert!(Jet::zero(2, 12).is_ok());
    assert!(Jet::zero(14, 1).is_err());
}
