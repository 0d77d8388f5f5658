use orbisymp::corpus;
use orbisymp::cocycle;
use orbisymp::orbifold::OrbifoldSignature;
use orbisymp::symplectic::omega_closed_form;
use orbisymp::words::{self, Generator, GroupRingElement, Letter, Rational, Word};
use proptest::prelude::*;

fn gens() -> Vec<Generator> {
    OrbifoldSignature::new(1, 1, vec![2, 3]).generators()
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    let n = gens().len();
    prop::collection::vec((0..n, any::<bool>()), 0..=max_len).prop_map(|ls| {
        let g = gens();
        Word::from_letters(ls.into_iter().map(|(i, pos)| Letter { gen: g[i], exp: if pos { 1 } else { -1 } }))
    })
}

fn ring_element() -> impl Strategy<Value = GroupRingElement> {
    prop::collection::vec((word(8), -5i64..=5, 1i64..=4), 0..6)
        .prop_map(|ts| GroupRingElement::from_terms(ts.into_iter().map(|(w, n, d)| (w, Rational::new(n, d)))))
}

proptest! {
    #[test]
    fn mean_value_identity(w in word(20)) {
        prop_assert!(words::mean_value_defect(&w, &gens()).is_zero());
    }

    #[test]
    fn product_rule(u in word(10), v in word(10), i in 0usize..4) {
        prop_assert!(words::product_rule_defect(&u, &v, gens()[i]).is_zero());
    }

    #[test]
    fn bar_is_an_involutive_anti_homomorphism(a in ring_element(), b in ring_element()) {
        prop_assert_eq!(words::bar_involution(&words::bar_involution(&a)), a.clone());
        prop_assert_eq!(
            words::bar_involution(&a.mul(&b)),
            words::bar_involution(&b).mul(&words::bar_involution(&a))
        );
        prop_assert_eq!(words::augmentation(&words::bar_involution(&a)), words::augmentation(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairing_is_bilinear_for_dyadic_coefficients(
        a in -16i32..=16, b in -16i32..=16, cu in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let rep = corpus::cone_sphere_2233().unwrap();
        let z = cocycle::z1_basis(&rep).unwrap();
        let pick = |k: usize| z.combine(&(0..z.dim()).map(|i| cu[(i + k) % 4]).collect::<Vec<_>>());
        let (u, w, v) = (pick(0), pick(1), pick(2));
        let (a, b) = (a as f64 / 8.0, b as f64 / 8.0);
        let lhs = omega_closed_form(&rep, &u.scale(a).add(&w.scale(b)), &v).unwrap();
        let rhs = a * omega_closed_form(&rep, &u, &v).unwrap() + b * omega_closed_form(&rep, &w, &v).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{}", (lhs - rhs).abs());
        let anti = omega_closed_form(&rep, &u, &v).unwrap() + omega_closed_form(&rep, &v, &u).unwrap();
        prop_assert!(anti.abs() < 1e-9);
    }
}
