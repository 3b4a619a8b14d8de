use std::sync::Arc;

use proptest::prelude::*;

use fv_core::boolean::{fubini, limsup_ideal, IdealSpec, Mask, QuotientBA};
use fv_core::harness::{default_signature, omega_labels};
use fv_core::rational::{self, Rational};
use fv_core::reduced::{reduced_product, Family};
use fv_core::structures::random_structure;
use fv_core::syntax::{free_vars, normalize_restricted, parse, Formula, Signature, Term};
use fv_core::translate::{certify, weak_truth_is_downward_closed};

fn sig() -> Arc<Signature> {
    default_signature()
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::var("x")), Just(Term::var("y")), Just(Term::constant("c"))];
    leaf.prop_recursive(2, 6, 2, |t| (t.clone(), t).prop_map(|(a, b)| Term::app("f", vec![a, b])))
}

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        term().prop_map(|t| Formula::atomic("P", vec![t])),
        (term(), term()).prop_map(|(a, b)| Formula::dist(a, b)),
        Just(Formula::Zero),
        Just(Formula::One),
    ]
}

fn var() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("x"), Just("y")]
}

/// Any formula, derived connectives included.
fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![atom(), (0u32..4).prop_flat_map(|q| (0..=(1u64 << q)).prop_map(move |p| Formula::DyadicConst(p, q)))];
    leaf.prop_recursive(4, 24, 2, |f| {
        prop_oneof![
            f.clone().prop_map(Formula::half),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::monus(a, b)),
            (var(), f.clone()).prop_map(|(v, a)| Formula::sup(v, a)),
            (var(), f.clone()).prop_map(|(v, a)| Formula::inf(v, a)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::min(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::max(a, b)),
            f.prop_map(Formula::neg),
        ]
    })
}

/// Restricted formulas using only `1/2` and `sup` over atoms.
fn half_sup_formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(3, 8, 1, |f| {
        prop_oneof![f.clone().prop_map(Formula::half), (var(), f).prop_map(|(v, a)| Formula::sup(v, a))]
    })
}

/// Binds every free variable with `sup`.
fn close(f: Formula) -> Formula {
    free_vars(&f).iter().fold(f, |acc, v| Formula::sup(v, acc))
}

fn ideal(size: usize, kernel: Mask) -> IdealSpec {
    let full = (1u32 << size) - 1;
    IdealSpec::close(omega_labels(size), &[kernel & full & !1]).unwrap()
}

/// `inf` over members `S` of `sup` over `γ ∉ S`, enumerating every subset
/// of the ground set and testing membership.
fn limsup_by_subsets(ideal: &IdealSpec, r: &[Rational]) -> Rational {
    (0..1u32 << r.len())
        .filter(|&s| ideal.contains(s))
        .map(|s| {
            (0..r.len())
                .filter(|g| s >> g & 1 == 0)
                .map(|g| r[g].clone())
                .max()
                .unwrap_or_else(rational::zero)
        })
        .min()
        .expect("the empty set is a member")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(f in formula()) {
        let text = f.to_string();
        prop_assert_eq!(parse(&text, &sig()).unwrap(), f);
    }

    #[test]
    fn normalization_is_restricted_and_preserves_values(f in formula(), seed in 0u64..1000, size in 1usize..4) {
        let f = close(f);
        let g = normalize_restricted(&f);
        prop_assert!(g.is_restricted());
        let s = random_structure(&sig(), size, seed);
        prop_assert_eq!(s.eval_sentence(&f).unwrap(), s.eval_sentence(&g).unwrap());
    }

    #[test]
    fn values_lie_in_unit_interval(f in formula(), seed in 0u64..1000, size in 1usize..5) {
        let s = random_structure(&sig(), size, seed);
        let v = s.eval_sentence(&close(f)).unwrap();
        prop_assert!(rational::in_unit_interval(&v));
    }

    #[test]
    fn random_structures_respect_their_moduli(seed in 0u64..10_000, size in 1usize..6) {
        prop_assert!(random_structure(&sig(), size, seed).validate().is_ok());
    }

    #[test]
    fn sentence_values_are_isomorphism_invariant(
        f in formula(), seed in 0u64..1000, perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()
    ) {
        let f = close(f);
        let s = random_structure(&sig(), 4, seed);
        prop_assert_eq!(s.eval_sentence(&f).unwrap(), s.permuted(&perm).eval_sentence(&f).unwrap());
    }

    #[test]
    fn limsup_matches_subset_enumeration(
        kernel in 0u32..16,
        r in proptest::collection::vec((0i64..=8).prop_map(|k| rational::ratio(k, 8)), 1..=4),
    ) {
        let i = ideal(r.len(), kernel);
        prop_assert_eq!(limsup_ideal(&i, &r), limsup_by_subsets(&i, &r));
    }

    #[test]
    fn quotient_algebra_laws(size in 1usize..=4, kernel in 0u32..16, x in 0u32..16, y in 0u32..16, z in 0u32..16) {
        let ba = QuotientBA::new(ideal(size, kernel));
        let full = (1u32 << size) - 1;
        let (x, y, z) = (x & full, y & full, z & full);
        let eq = |a: Mask, b: Mask| ba.equivalent(a, b);
        prop_assert!(eq(ba.meet(x, y), ba.meet(y, x)));
        prop_assert!(eq(ba.join(x, ba.meet(y, z)), ba.meet(ba.join(x, y), ba.join(x, z))));
        prop_assert!(eq(ba.meet(x, ba.join(y, z)), ba.join(ba.meet(x, y), ba.meet(x, z))));
        prop_assert!(eq(ba.join(x, ba.complement(x)), ba.one()));
        prop_assert!(eq(ba.meet(x, ba.complement(x)), ba.zero()));
        prop_assert_eq!(ba.le(x, y), eq(ba.meet(x, y), x));
        // equivalence is symmetric difference inside the ideal
        prop_assert_eq!(eq(x, y), ba.ideal().contains(x ^ y));
    }

    #[test]
    fn fubini_ideal_matches_sectionwise_rule(
        n1 in 1usize..=3, n2 in 1usize..=3, k1 in 0u32..8, k2 in 0u32..8, set in 0u32..512,
    ) {
        let outer = ideal(n1, k1);
        let inner = ideal(n2, k2);
        let grid = fubini(&outer, &inner).unwrap();
        let set = set & ((1u32 << (n1 * n2)) - 1);
        let mut big_rows = 0;
        for a in 0..n1 {
            let section: Mask = (0..n2).filter(|b| set >> (a * n2 + b) & 1 == 1).map(|b| 1 << b).sum();
            if !inner.contains(section) {
                big_rows |= 1 << a;
            }
        }
        prop_assert_eq!(grid.contains(set), outer.contains(big_rows));
    }

    #[test]
    fn single_coordinate_power_is_the_structure(f in formula(), seed in 0u64..1000, size in 1usize..4) {
        let f = close(f);
        let s = random_structure(&sig(), size, seed);
        let rp = reduced_product(&Family::power(IdealSpec::trivial(omega_labels(1)).unwrap(), &s)).unwrap();
        prop_assert_eq!(rp.eval_at(&f, &[]).unwrap(), s.eval_sentence(&f).unwrap());
    }

    #[test]
    fn half_sup_sentences_certify(f in half_sup_formula(), n in 0u32..=2, seed in 0u64..1000) {
        let f = close(f);
        let fam = fv_core::harness::random_family(&sig(), 3, 3, seed);
        let cert = certify(&f, n, &fam, &[]).unwrap();
        prop_assert!(cert.passed(), "{} at n={}: {:?}", f, n, cert.failures);
        prop_assert!(weak_truth_is_downward_closed(&cert.bounds.weak_truth));
        // direct value against the reduced product
        let rp = reduced_product(&fam).unwrap();
        prop_assert_eq!(&cert.value, &rp.eval_at(&f, &[]).unwrap());
    }
}
