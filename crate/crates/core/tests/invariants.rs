use proptest::prelude::*;

use pseudoboson::calogero::{CalogeroModel, ModelOptions};
use pseudoboson::dsl::{eval_op, parse_opdsl, EvalContext};
use pseudoboson::funcspace::{Element, Monomial, Poly};
use pseudoboson::gaussint::{inner_product_pi, quad_oracle, WeightSpec};
use pseudoboson::qho::PseudoBosonFamily;
use pseudoboson::scalar::{rat, rat_int, to_i64, RadKey, RadScalar, Rational};

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(p, q)| rat(p, q))
}

fn poly(max_exp: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0..=max_exp, 0..=max_exp), rational()), 1..=max_terms).prop_map(|ts| {
        Poly::from_terms(
            2,
            ts.into_iter()
                .map(|((a, b), c)| (Monomial(vec![a, b]), RadScalar::from_rational(c))),
        )
    })
}

fn model_ops(m: &CalogeroModel) -> Vec<(&'static str, pseudoboson::opalg::DiffOp)> {
    vec![
        ("OE", m.oe().clone()),
        ("OL", m.ol().clone()),
        ("X2", m.x2().clone()),
        ("LAP", m.lap().clone()),
    ]
}

/// `(x1, x2) ↦ (x2, x1)` applied to the whole element, prefactor included.
fn swap(e: &Element) -> Element {
    let sign = if to_i64(e.mu()).unwrap() % 2 == 0 { 1 } else { -1 };
    Element::new(
        e.poly().signed_permute(&[1, 0], &[1, 1]).scale(&RadScalar::from_int(sign)),
        e.mu().clone(),
        e.gamma().clone(),
    )
}

fn flip(e: &Element) -> Element {
    Element::new(e.poly().signed_permute(&[0, 1], &[-1, -1]), e.mu().clone(), e.gamma().clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scalar_canonical_form_is_idempotent(
        terms in prop::collection::vec((rational(), prop::sample::select(vec![1u64, 2, 3, 5]), -2i32..=2), 0..5),
    ) {
        let build = |ts: &[(Rational, u64, i32)]| {
            ts.iter().fold(RadScalar::zero(), |acc, (c, r, k)| {
                &acc + &RadScalar::term(c.clone(), RadKey { radicand: *r, pi_half: *k })
            })
        };
        let a = build(&terms);
        let mut rev = terms.clone();
        rev.reverse();
        prop_assert_eq!(&build(&rev), &a);
        let again = a.terms().iter().fold(RadScalar::zero(), |acc, (k, c)| &acc + &RadScalar::term(c.clone(), *k));
        prop_assert_eq!(again, a);
    }

    #[test]
    fn perfect_square_roots_are_rational(p in 1i64..=40, q in 1i64..=40) {
        let r = rat(p, q);
        let root = RadScalar::sqrt_rational(&(&r * &r)).unwrap();
        prop_assert_eq!(root.as_rational(), Some(r));
    }

    #[test]
    fn symmetrized_elements_are_invariant(
        p in poly(4, 4),
        mu in prop::sample::select(vec![rat_int(0), rat_int(1), rat_int(-1)]),
    ) {
        let g = Element::new(p, mu, rat(-1, 2)).symmetrize_d2().unwrap();
        prop_assert_eq!(&swap(&g), &g);
        prop_assert_eq!(&flip(&g), &g);
    }

    #[test]
    fn norms_are_positive(
        p in poly(3, 4),
        mu in prop::sample::select(vec![rat_int(0), rat_int(1)]),
        gamma in prop::sample::select(vec![rat_int(0), rat(-1, 2), rat(-3, 2)]),
    ) {
        prop_assume!(!p.is_zero());
        let f = Element::new(p, mu, gamma);
        let w = WeightSpec::new(2, rat(-1, 2)).unwrap();
        let n = inner_product_pi(&f, &f, &w).unwrap();
        prop_assert_eq!(n.single_term_sign(), Some(std::cmp::Ordering::Greater));
    }

    #[test]
    fn weighted_norm_dominates_damped_norm(
        p in poly(3, 4),
        gamma in prop::sample::select(vec![rat_int(0), rat(-1, 2)]),
        weight in prop::sample::select(vec![rat(-1, 4), rat(-1, 2), rat_int(-1)]),
    ) {
        let f = Element::new(p, rat_int(0), gamma);
        let w = WeightSpec::new(2, weight.clone()).unwrap();
        let damped = f.shift_gaussian(&weight);
        let plain = WeightSpec::unweighted(2);
        let lhs = quad_oracle(&damped, &damped, &plain, 40).unwrap();
        let rhs = quad_oracle(&f, &f, &w, 40).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300, "{} > {}", lhs, rhs);
    }
}

#[test]
fn prefactor_cancels_its_inverse() {
    let p = Element::from_poly(Poly::prefactor(2));
    let inv = Element::prefactor_power(2, rat_int(-1));
    assert_eq!(p.mul(&inv), Element::one(2));
    assert_eq!(p.try_inverse().unwrap(), inv);
}

#[test]
fn jacobi_on_model_operators() {
    for (omega, nu) in [(rat_int(1), rat(3, 2)), (rat_int(2), rat(5, 2))] {
        let m = CalogeroModel::new(2, omega, nu, ModelOptions::default()).unwrap();
        let ops = model_ops(&m);
        for (na, a) in &ops {
            for (nb, b) in &ops {
                for (nc, c) in &ops {
                    let t1 = a.commutator(&b.commutator(c).unwrap()).unwrap();
                    let t2 = b.commutator(&c.commutator(a).unwrap()).unwrap();
                    let t3 = c.commutator(&a.commutator(b).unwrap()).unwrap();
                    let sum = t1.try_add(&t2).unwrap().try_add(&t3).unwrap();
                    assert!(sum.is_zero(), "Jacobi fails for ({na}, {nb}, {nc}): {sum}");
                }
            }
        }
    }
}

#[test]
fn dagger_on_model_operators() {
    let m = CalogeroModel::new(2, rat_int(1), rat(3, 2), ModelOptions::default()).unwrap();
    let ops = model_ops(&m);
    for (na, a) in &ops {
        assert_eq!(&a.dagger().unwrap().dagger().unwrap(), a, "{na}");
        for (nb, b) in &ops {
            let lhs = a.compose(b).unwrap().dagger().unwrap();
            let rhs = b.dagger().unwrap().compose(&a.dagger().unwrap()).unwrap();
            assert_eq!(lhs, rhs, "({na} {nb})^dagger");
        }
    }
}

#[test]
fn parsed_hamiltonian_matches_model() {
    for (omega, nu) in [(rat_int(1), rat(3, 2)), (rat_int(2), rat(5, 2))] {
        let ctx = EvalContext::new(2, omega.clone(), nu.clone()).unwrap();
        let op = eval_op(&parse_opdsl("omega*OE - 1/2*OL", 2).unwrap(), &ctx).unwrap();
        let m = CalogeroModel::new(2, omega, nu, ModelOptions::default()).unwrap();
        assert_eq!(&op, m.h_tilde());
    }
}

#[test]
fn qho_biorthogonality_reconstruction_and_growth() {
    for (omega, beta) in [(rat_int(1), rat(1, 2)), (rat_int(4), rat_int(2)), (rat_int(2), rat(3, 2))] {
        let f = PseudoBosonFamily::new(omega.clone(), beta.clone()).unwrap();
        let c = f.check_biorthogonality(6).unwrap();
        assert!(c.passed(), "({omega}, {beta}): {:?}", c.witness);
        for c in f.check_reconstruction(6, 7, 3).unwrap() {
            assert!(c.passed(), "({omega}, {beta}) {}: {:?}", c.name, c.witness);
        }
    }
    let f = PseudoBosonFamily::new(rat_int(1), rat(1, 2)).unwrap();
    let c = f.check_non_regularity(8).unwrap();
    assert!(c.passed(), "{:?}", c.witness);
}
