use proptest::prelude::*;

use confstab::algebra::multiply;
use confstab::basis::{dim, enumerate_basis, poincare};
use confstab::browder::{
    apply_rule, br, check_point_bracket, class_expr, normalize, parse_expr, Ambient, ClassName, Expr, ProofTrace, Rule,
};
use confstab::stability::{cone_dim, d_constant, stab_cokernel, verify_ideal_coverage, verify_iso_range};
use confstab::words::{classify, enumerate_words, word_tag, OpWord, WordMonomial, WordVerdict};
use confstab::{Bidegree, GenName, GeneratorSet, Monomial, Prime};

fn prime() -> impl Strategy<Value = Prime> {
    prop_oneof![Just(2u64), Just(3), Just(5)].prop_map(|p| Prime::new(p).unwrap())
}

fn surface(p: Prime) -> GeneratorSet {
    GeneratorSet::surface(p)
}

/// A basis monomial of the plane family in a small bidegree, if one exists.
fn monomial() -> impl Strategy<Value = (Prime, Monomial, Monomial)> {
    (prime(), 0u32..8, 1u32..8, 0u32..8, 1u32..8, any::<prop::sample::Index>(), any::<prop::sample::Index>())
        .prop_filter_map("empty bidegree", |(p, i1, k1, i2, k2, a, b)| {
            let gs = surface(p);
            let xs = enumerate_basis(&gs, Bidegree::new(i1, k1));
            let ys = enumerate_basis(&gs, Bidegree::new(i2, k2));
            if xs.is_empty() || ys.is_empty() {
                return None;
            }
            Some((p, a.get(&xs).clone(), b.get(&ys).clone()))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_bidegree_is_additive((_, a, b) in monomial()) {
        let prod = multiply(&a, &b).unwrap();
        for (m, _) in prod.terms() {
            prop_assert_eq!(m.bidegree(), a.bidegree() + b.bidegree());
        }
    }

    #[test]
    fn product_is_graded_commutative((p, a, b) in monomial()) {
        let ab = multiply(&a, &b).unwrap();
        let ba = multiply(&b, &a).unwrap();
        let sign = p.sign(u64::from(a.bidegree().deg) * u64::from(b.bidegree().deg));
        prop_assert_eq!(ab, ba.scale(sign));
    }

    #[test]
    fn exterior_generators_square_to_zero(p in prop_oneof![Just(3u64), Just(5), Just(7)], j in 0u32..4) {
        let gs = surface(Prime::new(p).unwrap());
        let z = gs.generator(GenName::Z, j).unwrap();
        prop_assert!(z.is_exterior());
        let m = Monomial::generator(gs, z).unwrap();
        prop_assert!(multiply(&m, &m).unwrap().is_zero());
    }

    #[test]
    fn sign_is_an_involution(p in prime(), e in 0u64..50) {
        let s = p.sign(e);
        prop_assert_eq!(p.mul(s, s), 1);
        prop_assert_eq!(p.add(s, p.sign(e + 1)), 0);
    }

    #[test]
    fn char_two_coefficients_are_one((p, a, b) in monomial()) {
        prop_assume!(p.is_two());
        let prod = multiply(&a, &b).unwrap();
        prop_assert_eq!(prod.len(), 1);
        prop_assert!(prod.terms().all(|(_, c)| c == 1));
    }

    #[test]
    fn enumeration_matches_series(p in prime(), i in 0u32..14, k in 0u32..30) {
        let gs = surface(p);
        let basis = enumerate_basis(&gs, Bidegree::new(i, k));
        let series = poincare(&gs, 14, 30).unwrap();
        prop_assert_eq!(Some(basis.len() as u64), series.get(i, k));
        prop_assert_eq!(basis.len() as u64, dim(&gs, i, k).unwrap());
        prop_assert!(basis.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(basis.iter().all(|m| m.bidegree() == Bidegree::new(i, k)));
    }

    #[test]
    fn homology_stabilizes(p in prime(), i in 0u32..6, extra in 0u32..6) {
        let gs = surface(p);
        let k = 2 * i * p.get() + extra;
        prop_assert_eq!(dim(&gs, i, k).unwrap(), dim(&gs, i, k + 1).unwrap());
    }

    #[test]
    fn homology_vanishes_above_dimension(p in prime(), k in 1u32..20, over in 0u32..6) {
        prop_assert_eq!(dim(&surface(p), k + over, k).unwrap(), 0);
    }

    #[test]
    fn range_constant_is_nondecreasing(p in prime(), m in 1u32..5, k in -20i64..200) {
        prop_assert!(d_constant(p, m, k).unwrap() <= d_constant(p, m, k + 1).unwrap());
    }

    #[test]
    fn cokernel_counts_are_consistent(p in prime(), m in 0u32..3, i in 0u32..12, k in 0u32..24) {
        let gs = surface(p);
        let c = stab_cokernel(&gs, m, Bidegree::new(i, k)).unwrap();
        prop_assert_eq!(c.target_dim, cone_dim(&gs, m, i, k).unwrap());
        prop_assert!(c.image_dim <= c.target_dim);
        prop_assert_eq!(c.spanning.is_some(), c.dim() > 0);
        let w = gs.stability_class(m).unwrap().bidegree;
        if c.injective {
            let src = Bidegree::new(i, k).checked_sub(w);
            let expect = src.map_or(0, |s| cone_dim(&gs, m, s.deg, s.par).unwrap());
            prop_assert_eq!(c.image_dim, expect);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn iso_and_ideal_phrasings_agree(p in prime(), m in 0u32..3, k_max in 4u32..20) {
        let gs = surface(p);
        let iso = verify_iso_range(&gs, m, k_max).unwrap();
        let ideal = verify_ideal_coverage(&gs, m + 1, k_max).unwrap();
        prop_assert!(iso.passed());
        prop_assert!(ideal.passed());
        prop_assert_eq!(iso.checked, ideal.checked);
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let class = prop_oneof![
        Just(ClassName::E),
        (1u32..4).prop_map(ClassName::X),
        (1u32..4).prop_map(ClassName::Y),
        (0u32..4).prop_map(ClassName::Z),
        (1u32..4).prop_map(ClassName::W),
    ];
    let leaf = prop_oneof![
        Just(Expr::Zero),
        class.prop_map(Expr::Gen),
        ("[a-z][a-z0-9_]{0,3}", 0u32..9, 0u32..9).prop_map(|(name, deg, par)| Expr::Sym { name, deg, par }),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        let b = || inner.clone().prop_map(Box::new);
        prop_oneof![
            (-9i64..9, b()).prop_map(|(c, x)| Expr::Scalar(c, x)),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::Sum),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::Product),
            (b(), b()).prop_map(|(x, y)| Expr::Bracket(x, y)),
            b().prop_map(Expr::Xi),
            b().prop_map(Expr::Beta),
            b().prop_map(Expr::BetaXi),
            b().prop_map(Expr::Zeta),
            (-3i64..9, b()).prop_map(|(s, x)| Expr::Q(s, x)),
            (0u32..4, b(), b()).prop_map(|(i, x, y)| Expr::Ad(i, x, y)),
        ]
    })
}

fn ambient() -> impl Strategy<Value = Ambient> {
    (2u32..5, prime()).prop_map(|(n, p)| Ambient::new(n, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn grammar_round_trips(e in expr()) {
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn normalize_preserves_bidegree(amb in ambient(), e in expr()) {
        let Ok(Some(b)) = amb.infer(&e) else { return Ok(()) };
        let nf = normalize(&amb, &e).unwrap();
        let after = amb.infer(&nf).unwrap();
        prop_assert!(after.is_none() || after == Some(b), "{} -> {}", e, nf);
        prop_assert_eq!(normalize(&amb, &nf).unwrap(), nf);
    }

    #[test]
    fn antisymmetry_preserves_bidegree(amb in ambient(), x in expr(), y in expr()) {
        let t = br(x, y);
        let Ok(Some(b)) = amb.infer(&t) else { return Ok(()) };
        let flipped = apply_rule(&amb, &t, Rule::Antisymmetry, &[]).unwrap();
        let after = amb.infer(&flipped).unwrap();
        prop_assert!(after.is_none() || after == Some(b));
    }

    #[test]
    fn traces_are_deterministic(n in 2u32..5, p in prime(), idx in 0usize..8) {
        let amb = Ambient::new(n, p).unwrap();
        let labels = ["e", "e^2", "e^3", "x1", "x2", "z0", "y1", "w1"];
        let Ok(z) = class_expr(labels[idx]) else { return Ok(()) };
        let Ok(first) = check_point_bracket(&amb, &z) else { return Ok(()) };
        let second = check_point_bracket(&amb, &z).unwrap();
        prop_assert_eq!(first.to_jsonl(), second.to_jsonl());
        let back = ProofTrace::from_jsonl(&first.to_jsonl()).unwrap();
        prop_assert_eq!(&back, &first);
        back.replay(&amb).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn omega_bidegrees(n in 3u32..7, j in 1u32..7) {
        let w = OpWord::omega(j, n).unwrap();
        let g = GeneratorSet::higher_dim_f2(n).unwrap().generator(GenName::Omega, j).unwrap();
        prop_assert_eq!(w.bidegree(), Some(g.bidegree));
        prop_assert_eq!(g.bidegree, Bidegree::new((1 << j) - 1, 1 << j));
        prop_assert_eq!(w.omega_index(), Some(j));
    }

    #[test]
    fn classification_is_total_on_products(n in 3u32..6, m in 1u32..4, a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let (words, _) = enumerate_words(n, 16).unwrap();
        let (u, v) = (a.get(&words).clone(), b.get(&words).clone());
        let single = |w: &OpWord| classify(&WordMonomial::new(vec![w.clone()]).unwrap(), m).verdict;
        let both = classify(&WordMonomial::new(vec![u.clone(), v.clone()]).unwrap(), m);
        match (single(&u), single(&v)) {
            (WordVerdict::IdealMember, _) | (_, WordVerdict::IdealMember) => prop_assert_eq!(&both.verdict, &WordVerdict::IdealMember),
            (WordVerdict::Unstable, WordVerdict::Unstable) => prop_assert_eq!(&both.verdict, &WordVerdict::Unstable),
            _ => prop_assert_eq!(&both.verdict, &WordVerdict::Unclassified),
        }
        if both.verdict == WordVerdict::Unstable {
            prop_assert!(word_tag(&u, m).is_some() && word_tag(&v, m).is_some());
        }
    }

    #[test]
    fn degenerate_words_reduce_in_place(n in 3u32..6, m in 1u32..4, a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let (words, degenerate) = enumerate_words(n, 16).unwrap();
        prop_assume!(!degenerate.is_empty());
        let (d, w) = (a.get(&degenerate).clone(), b.get(&words).clone());
        let mon = WordMonomial::new(vec![d, w]).unwrap();
        match classify(&mon, m).verdict {
            WordVerdict::Zero => {}
            WordVerdict::Reduces(r) => {
                prop_assert_eq!(r.bidegree(), mon.bidegree());
                prop_assert_eq!(r.factors().len(), 3);
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }
}
