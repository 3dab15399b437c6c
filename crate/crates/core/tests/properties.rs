use proptest::prelude::*;
use rand::Rng;

use wienerlab::chaos::{Ambient, ChaosPoly, MultiIndex};
use wienerlab::malliavin::{divergence_h, gradient_scalar, HField};
use wienerlab::random::{self, InstanceRng};

fn setup(seed: u64, n_max: usize) -> (InstanceRng, Ambient) {
    let mut rng = random::rng(seed);
    let n = rng.random_range(1..=n_max);
    (rng, Ambient::with_dim(n).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_monomials_are_orthogonal(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 4);
        let (di, dj) = (rng.random_range(0..=4), rng.random_range(0..=4));
        let i = random::random_multi_index(&mut rng, a.dim(), di);
        let j = random::random_multi_index(&mut rng, a.dim(), dj);
        let p = ChaosPoly::monomial(a, i.clone(), 1.0).unwrap();
        let q = ChaosPoly::monomial(a, j.clone(), 1.0).unwrap();
        let expect = if i == j { i.factorial() } else { 0.0 };
        prop_assert_eq!(p.l2_inner(&q).unwrap(), expect);
    }

    #[test]
    fn expectation_of_product_is_inner_product(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 5);
        let p = random::random_poly(&mut rng, a, 4, 5);
        let q = random::random_poly(&mut rng, a, 4, 5);
        let lhs = p.hermite_product(&q).unwrap().expectation();
        prop_assert!(close(lhs, p.l2_inner(&q).unwrap(), 1e-10));
    }

    #[test]
    fn partial_derivative_obeys_product_rule(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 4);
        let p = random::random_poly(&mut rng, a, 4, 4);
        let q = random::random_poly(&mut rng, a, 4, 4);
        let i = rng.random_range(1..=a.dim());
        let lhs = p.hermite_product(&q).unwrap().partial_derivative(i).unwrap();
        let rhs = p.partial_derivative(i).unwrap().hermite_product(&q).unwrap()
            .add(&p.hermite_product(&q.partial_derivative(i).unwrap()).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-10);
    }

    #[test]
    fn gaussian_integration_by_parts(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 4);
        let p = random::random_poly(&mut rng, a, 4, 5);
        let q = random::random_poly(&mut rng, a, 4, 5);
        let i = rng.random_range(1..=a.dim());
        let lhs = p.partial_derivative(i).unwrap().l2_inner(&q).unwrap();
        let adj = q.multiply_by_coordinate(i).unwrap().sub(&q.partial_derivative(i).unwrap()).unwrap();
        prop_assert!(close(lhs, p.l2_inner(&adj).unwrap(), 1e-10));
    }

    #[test]
    fn conditional_expectations_tower(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 5);
        let p = random::random_poly(&mut rng, a, 4, 6);
        let j = rng.random_range(0..=a.dim());
        let k = rng.random_range(0..=a.dim());
        let lhs = p.conditional_expectation(k).unwrap().conditional_expectation(j).unwrap();
        prop_assert_eq!(lhs, p.conditional_expectation(j.min(k)).unwrap());
    }

    #[test]
    fn refinement_preserves_law(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 4);
        let p = random::random_poly(&mut rng, a, 4, 4);
        let q = random::random_poly(&mut rng, a, 4, 4);
        let m = rng.random_range(1..=4);
        let (pf, qf) = (p.refine(m).unwrap(), q.refine(m).unwrap());
        prop_assert!(close(pf.expectation(), p.expectation(), 1e-10));
        prop_assert!(close(pf.l2_inner(&qf).unwrap(), p.l2_inner(&q).unwrap(), 1e-10));
    }

    #[test]
    fn scalar_duality(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 5);
        let u = random::random_hfield(&mut rng, a, 3, 4);
        let f = random::random_poly(&mut rng, a, 4, 5);
        let lhs = divergence_h(&u).unwrap().l2_inner(&f).unwrap();
        let rhs = u.l2_inner(&gradient_scalar(&f)).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn gradient_is_linear(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 5);
        let p = random::random_poly(&mut rng, a, 4, 5);
        let q = random::random_poly(&mut rng, a, 4, 5);
        let (s, t) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let lhs = gradient_scalar(&p.scale(s).add(&q.scale(t)).unwrap());
        let rhs = HField::linear_combine(&[s, t], &[&gradient_scalar(&p), &gradient_scalar(&q)]).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn text_form_round_trips(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 6);
        let p = random::random_poly(&mut rng, a, 4, 6);
        prop_assert_eq!(ChaosPoly::from_text(a, &p.to_text()).unwrap(), p);
    }

    #[test]
    fn ou_inverse_inverts(seed in any::<u64>()) {
        let (mut rng, a) = setup(seed, 5);
        let p = random::random_centered_poly(&mut rng, a, 4, 5);
        prop_assert!(p.ou_inverse().unwrap().ou_apply().sub(&p).unwrap().l2_norm() <= 1e-12);
    }
}

#[test]
fn zero_has_positive_zero_norm() {
    let z = ChaosPoly::zero(Ambient::with_dim(2).unwrap());
    assert!(z.l2_norm().is_sign_positive());
    assert_eq!(MultiIndex::empty().factorial(), 1.0);
}
