mod common;

use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;

use common::{explicit_tree_counts, holonomic_terms, recurrence_terms};
use ecorules::compiler::{qr_for, to_ordinary_rule, Positivity};
use ecorules::numseq::series_of_gf;
use ecorules::parametric::parametric_totals;
use ecorules::{
    compile_generic, eliminate_jumps, eval_sequence, generating_function, holonomic_to_level_indexed,
    level_totals, parse_parametric, parse_rule, positivity_check, print_rule, production_matrix,
    to_extended_rule, Branch, Label, Production, Recurrence, SuccessionRule,
};

fn coeffs(max_k: usize) -> impl Strategy<Value = Vec<i64>> {
    (1usize..=max_k).prop_flat_map(|k| {
        (1i64..=9, prop::collection::vec(-9i64..=9, k - 1)).prop_filter_map("nonzero a_k", |(a1, rest)| {
            let mut v = vec![a1];
            v.extend(rest);
            (*v.last().unwrap() != 0).then_some(v)
        })
    })
}

fn any_coeffs() -> impl Strategy<Value = Vec<i64>> {
    (1usize..=4).prop_flat_map(|k| {
        prop::collection::vec(-9i64..=9, k).prop_filter("nonzero a_k", |v| *v.last().unwrap() != 0)
    })
}

fn with_inits() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    coeffs(4).prop_flat_map(|a| {
        let k = a.len();
        (Just(a), prop::collection::vec(-20i64..=40, k - 1))
    })
}

fn branch() -> impl Strategy<Value = Branch> {
    (1u32..=2, 0i64..=4, any::<bool>(), 1i64..=2).prop_map(|(jump, v, marked, m)| {
        let l = Label::new(v);
        Branch::new(jump, if marked { l.mark() } else { l }, m)
    })
}

/// Labels (1)..(4) all have productions; (0) is the sink.
fn small_rule(jumps: bool) -> impl Strategy<Value = SuccessionRule> {
    (1i64..=4, prop::collection::vec(prop::collection::vec(branch(), 0..=3), 4)).prop_map(move |(axiom, table)| {
        let prods = table.into_iter().enumerate().map(|(i, bs)| {
            let bs: Vec<Branch> = bs
                .into_iter()
                .map(|b| if jumps { b } else { Branch::new(1, b.successor, b.multiplicity) })
                .collect();
            Production::new(Label::new(i as i64 + 1), bs).unwrap()
        });
        SuccessionRule::new(Label::new(axiom), prods).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gf_series_equals_sequence((a, h) in with_inits(), default in any::<bool>()) {
        let rec = if default {
            Recurrence::with_default_inits(a.clone()).unwrap()
        } else {
            Recurrence::with_inits(a.clone(), h.clone()).unwrap()
        };
        let gf = generating_function(&rec);
        prop_assert_eq!(series_of_gf(&gf, 20), eval_sequence(&rec, 20));
        let oracle = recurrence_terms(&a, (!default).then_some(&h[..]), 20);
        prop_assert_eq!(eval_sequence(&rec, 20), oracle);
    }

    #[test]
    fn sequence_is_affine_in_inits((a, h) in with_inits(), g in prop::collection::vec(-20i64..=20, 4)) {
        let k = a.len();
        let g = &g[..k - 1];
        let sum: Vec<i64> = h.iter().zip(g).map(|(x, y)| x + y).collect();
        let zero = vec![0i64; k - 1];
        let terms = |init: &[i64]| eval_sequence(&Recurrence::with_inits(a.clone(), init.to_vec()).unwrap(), 15);
        let lhs: Vec<BigInt> = terms(&h).iter().zip(terms(g)).map(|(x, y)| x + y).collect();
        let rhs: Vec<BigInt> = terms(&sum).iter().zip(terms(&zero)).map(|(x, y)| x + y).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn extended_and_jump_free_match_oracle(a in any_coeffs()) {
        let rec = Recurrence::with_default_inits(a.clone()).unwrap();
        let oracle = recurrence_terms(&a, None, 15);
        prop_assert_eq!(&level_totals(&to_extended_rule(&rec).unwrap(), 15), &oracle);
        prop_assert_eq!(&level_totals(&eliminate_jumps(&rec).unwrap(), 15), &oracle);
        prop_assert_eq!(eliminate_jumps(&rec).unwrap().max_jump(), 1);
    }

    #[test]
    fn ordinary_form_matches_for_any_valid_q(a in coeffs(5), extra in prop::collection::vec(0i64..=3, 4)) {
        let rec = Recurrence::with_default_inits(a.clone()).unwrap();
        let minimal = qr_for(&a, None).unwrap();
        // raise every free q_i; the rule stays a correct signed rule
        let q: Vec<i64> = minimal.q.iter().zip(&extra).map(|(&q, &e)| if q > 0 { q + e } else { q }).collect();
        let qr = qr_for(&a, Some(&q)).unwrap();
        let out = to_ordinary_rule(&rec, &qr).unwrap();
        prop_assert_eq!(out.rule.max_jump(), 1);
        prop_assert_eq!(level_totals(&out.rule, 15), recurrence_terms(&a, None, 15));
        prop_assert_eq!(out.is_ordinary, out.exponents.iter().all(|&e| e >= 0));
    }

    #[test]
    fn witness_is_sound(a in coeffs(5)) {
        let rec = Recurrence::with_default_inits(a.clone()).unwrap();
        if let Positivity::Witness(w) = positivity_check(&rec) {
            prop_assert!(w.slack.iter().all(|&s| s >= 0));
            let terms = recurrence_terms(&a, None, 30);
            prop_assert!(terms.iter().all(|t| t >= &BigInt::from(1)), "{:?} {:?}", a, terms);
            let ord = to_ordinary_rule(&rec, &w.qr).unwrap();
            prop_assert!(ord.rule.is_consistent().is_consistent());
            prop_assert!(!ord.rule.has_marks());
            prop_assert_eq!(level_totals(&ord.rule, 20), recurrence_terms(&a, None, 20));
        }
    }

    #[test]
    fn generic_compilation_is_sound((a, h) in with_inits()) {
        let rec = Recurrence::with_inits(a.clone(), h.clone()).unwrap();
        if let Ok(rule) = compile_generic(&rec) {
            prop_assert!(!rule.has_marks());
            prop_assert_eq!(rule.max_jump(), 1);
            prop_assert!(rule.is_consistent().is_consistent());
            prop_assert_eq!(level_totals(&rule, 15), recurrence_terms(&a, Some(&h), 15));
        }
        prop_assert_eq!(level_totals(&to_extended_rule(&rec).unwrap(), 15), recurrence_terms(&a, Some(&h), 15));
    }

    #[test]
    fn print_then_parse_is_identity(rule in small_rule(true)) {
        let text = print_rule(&rule);
        let back = parse_rule(&text).unwrap();
        prop_assert_eq!(print_rule(&back), text);
        prop_assert_eq!(back, rule);
    }

    #[test]
    fn normalization_is_idempotent(bs in prop::collection::vec(branch(), 0..8)) {
        let p = Production::new(Label::new(3), bs).unwrap();
        let again = Production::new(Label::new(3), p.branches().to_vec()).unwrap();
        prop_assert_eq!(again.branches(), p.branches());
        prop_assert!(p.branches().iter().all(|b| b.multiplicity > 0));
    }

    #[test]
    fn matrix_powers_match_expansion(rule in small_rule(false)) {
        let m = production_matrix(&rule).unwrap();
        prop_assert_eq!(m.level_totals(rule.axiom(), 10), level_totals(&rule, 10));
    }

    #[test]
    fn annihilation_matches_explicit_tree(rule in small_rule(true)) {
        if let Some(reference) = explicit_tree_counts(&rule, 6, 400_000) {
            let reference: Vec<BigInt> = reference.into_iter().map(BigInt::from).collect();
            prop_assert_eq!(level_totals(&rule, 6), reference);
        }
    }

    #[test]
    fn holonomic_translation_matches_oracle(p1 in (-3i64..=3, 0i64..=2), p2 in (-3i64..=3, 0i64..=2)) {
        // keep multiplicities nonnegative on every reachable level
        prop_assume!(p1.1 > 0 || p1.0 != 0);
        prop_assume!(p1.1 == 0 || p1.0 + p1.1 >= 0);
        prop_assume!(p2.1 == 0 || p2.0 + 2 * p2.1 >= 0);
        let polys = vec![vec![p1.0, p1.1], vec![p2.0, p2.1]];
        let ratios: Vec<Vec<Ratio<i64>>> =
            polys.iter().map(|p| p.iter().map(|&c| Ratio::from_integer(c)).collect()).collect();
        let rule = holonomic_to_level_indexed(&ratios).unwrap();
        prop_assert_eq!(parametric_totals(&rule, 12).unwrap(), holonomic_terms(&polys, 12));
    }
}

#[test]
fn involution_rules_agree_to_depth_twelve() {
    let level_rule = parse_parametric("axiom (0)\nlevel-indexed\n(k) -> (k+1)\n(k) =2=> (k+2)^{k+1}").unwrap();
    let ordinary_rule = parse_parametric("axiom (1)\n(k) -> (k-1)^{k-1} (k+1)").unwrap();
    let oracle = holonomic_terms(&[vec![1], vec![-1, 1]], 12);
    assert_eq!(parametric_totals(&level_rule, 12).unwrap(), oracle);
    assert_eq!(parametric_totals(&ordinary_rule, 12).unwrap(), oracle);
}

#[test]
fn constant_coefficient_degenerations() {
    for a in [[2i64, 1], [1, 1], [3, -2]] {
        let ratios = vec![vec![Ratio::from_integer(a[0])], vec![Ratio::from_integer(a[1])]];
        let rule = holonomic_to_level_indexed(&ratios).unwrap();
        assert_eq!(parametric_totals(&rule, 12).unwrap(), recurrence_terms(&a, None, 12));
    }
}

#[test]
fn oracles_agree_with_known_values() {
    assert_eq!(
        (0..=6).map(common::dyck_brute_force).collect::<Vec<_>>(),
        [1, 1, 2, 5, 14, 42, 132]
    );
    assert_eq!(
        (0..=8).map(common::motzkin_long_level).collect::<Vec<_>>(),
        [1, 1, 3, 6, 16, 40, 109, 297, 836]
    );
    assert_eq!(recurrence_terms(&[1, 1], None, 6), common::big(&[1, 1, 2, 3, 5, 8, 13]));
}
