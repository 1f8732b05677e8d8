use griffiths_core::adapted_frame::{random_einstein, random_riemann};
use griffiths_core::exterior::ExteriorForm;
use griffiths_core::hypersurface::{
    pullback_alpha, random_symmetric, sigma, sigma_by_minors, weingarten_density, ShapeOperator,
};
use griffiths_core::metrics::adapt_frame;
use griffiths_core::scalar::q;
use griffiths_core::space_forms::riemann_csc;
use griffiths_core::{ExactForm, ExactSystem, Rational};
use num_traits::Zero;
use proptest::prelude::*;

const DIM: usize = 7;

fn form_strategy(degree: usize) -> impl Strategy<Value = ExactForm> {
    let term = (
        proptest::sample::subsequence((0..DIM).collect::<Vec<_>>(), degree),
        -4i64..=4,
        1i64..=3,
    );
    proptest::collection::vec(term, 0..6).prop_map(move |terms| {
        ExteriorForm::from_terms(
            DIM,
            degree,
            terms.into_iter().map(|(idx, a, b)| (idx, q(a, b))),
        )
        .unwrap()
    })
}

fn pair_strategy() -> impl Strategy<Value = (usize, usize, ExactForm, ExactForm)> {
    (0usize..=3, 0usize..=3).prop_flat_map(|(p, r)| (Just(p), Just(r), form_strategy(p), form_strategy(r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_commutativity((p, r, a, b) in pair_strategy()) {
        let sign = if (p * r) % 2 == 0 { q(1, 1) } else { q(-1, 1) };
        prop_assert_eq!(a.wedge(&b), b.wedge(&a).scale(&sign));
    }

    #[test]
    fn double_star_is_identity(a in form_strategy(3)) {
        prop_assert_eq!(a.hodge().hodge(), a);
    }

    #[test]
    fn hodge_is_an_isometry(a in form_strategy(2)) {
        prop_assert_eq!(a.hodge().norm_sq(), a.norm_sq());
        // a ∧ *a = |a|² vol
        let vol = ExteriorForm::basis(DIM, &(0..DIM).collect::<Vec<_>>());
        prop_assert_eq!(a.wedge(&a.hodge()), vol.scale(&a.norm_sq()));
    }

    #[test]
    fn interior_is_an_antiderivation(a in form_strategy(2), b in form_strategy(3), j in 0usize..DIM) {
        let lhs = a.wedge(&b).interior(j);
        let rhs = &a.interior(j).wedge(&b) + &a.wedge(&b.interior(j));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_associative(a in form_strategy(1), b in form_strategy(2), c in form_strategy(2)) {
        prop_assert_eq!(a.wedge(&b).wedge(&c), a.wedge(&b.wedge(&c)));
    }

    #[test]
    fn sigma_matches_minors(seed in 0u64..1000, n in 1usize..=6) {
        let a = random_symmetric::<Rational>(seed, n);
        for i in 0..=n {
            prop_assert_eq!(sigma(i, &a), sigma_by_minors(i, &a));
        }
    }

    #[test]
    fn weingarten_density_is_alpha_sum(seed in 0u64..1000, n in 1usize..=5, t in -5i64..=5) {
        let a = ShapeOperator::new(random_symmetric::<Rational>(seed, n)).unwrap();
        let t = q(t, 2);
        let mut sum = Rational::zero();
        let mut power = q(1, 1);
        for i in 0..=n {
            sum += power.clone() * pullback_alpha(i, &a);
            power *= t.clone();
        }
        prop_assert_eq!(weingarten_density(&t, &a), sum);
    }
}

#[test]
fn ricci_invariants_survive_rotation() {
    // the max-norm residual is frame dependent; its vanishing is not
    let u = [0.6, 0.0, 0.8, 0.0];
    let o = adapt_frame(&u).unwrap();
    for seed in 0..50u64 {
        let r = random_riemann::<f64>(seed, 3);
        let rotated = r.rotate(o.matrix());
        assert!(rotated.is_valid());
        let (a, b) = (r.trace_free_ricci_norm_sq(), rotated.trace_free_ricci_norm_sq());
        assert!((a - b).abs() < 1e-9 * a.max(1.0), "seed {seed}: {a} vs {b}");
        assert!((r.ricci(&1.0).scal - rotated.ricci(&1.0).scal).abs() < 1e-10);
        let e = random_einstein::<f64>(seed, 3).rotate(o.matrix());
        assert!(e.einstein_residual() < 1e-10);
    }
}

#[test]
fn space_forms_are_isotropic() {
    let k = q(-5, 3);
    let r = riemann_csc(&k, 3);
    let u = [q(1, 2), q(1, 2), q(1, 2), q(1, 2)];
    let o = adapt_frame(&u).unwrap();
    assert_eq!(r.rotate(o.matrix()), r);
}

#[test]
fn einstein_projection_has_zero_residual() {
    for seed in 0..20 {
        let r = random_einstein::<Rational>(seed, 4);
        assert!(r.is_valid());
        assert!(r.einstein_residual().is_zero());
    }
}

#[test]
fn first_order_identities_hold_on_random_tensors() {
    for n in 2..=3 {
        let sys = ExactSystem::new(n, q(2, 5)).unwrap();
        for seed in 0..10 {
            let rep = sys.structure_report(&random_riemann(seed, n));
            assert!(rep.all_pass(), "n={n} seed={seed}: {:?}", rep.failures());
        }
    }
}
