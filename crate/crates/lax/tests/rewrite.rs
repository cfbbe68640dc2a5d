mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lax::analysis::generate::random_simple_term;
use lax::rewrite::{find_redexes, is_normal, is_value, step, value_complexity, RedexKind};
use lax::syntax::{alpha_eq, parse_term, parse_term_with_context, Term};
use lax::typing::{check_subject_reduction, TypingContext};

use common::{brute_force_redexes, found, is_value_oracle, random_stacked_term, small_terms, vc_oracle};

fn names(t: &Term) -> HashSet<lax::syntax::Name> {
    let mut out = HashSet::new();
    t.all_names(&mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn redex_finder_agrees_with_brute_force(seed in any::<u64>()) {
        for t in small_terms(seed, 20, 14) {
            let mut mine: Vec<_> =
                find_redexes(&t).iter().map(|r| found(r.position.clone(), &r.kind, r.complexity, r.group)).collect();
            mine.sort();
            prop_assert_eq!(mine, brute_force_redexes(&t), "{}", lax::syntax::print_term(&t));
        }
    }

    // Every redex, not only the one the strategy picks, preserves the type and adds no free variable.
    #[test]
    fn every_redex_preserves_types(seed in any::<u64>()) {
        for t in small_terms(seed, 10, 30) {
            let ctx = TypingContext::from_free_vars(&t);
            for r in find_redexes(&t) {
                let after = step(&t, &r).map_err(|e| TestCaseError::fail(format!("{:?}: {}", r.kind, e)))?;
                let report = check_subject_reduction(&ctx, &t, &after);
                prop_assert!(report.holds, "{:?} at {:?}: {:?}", r.kind, r.position, report.witnesses);
            }
        }
    }

    #[test]
    fn steps_are_deterministic(seed in any::<u64>()) {
        for t in small_terms(seed, 10, 30) {
            for r in find_redexes(&t) {
                prop_assert_eq!(step(&t, &r).unwrap(), step(&t, &r).unwrap());
            }
        }
    }

    #[test]
    fn value_complexity_matches_unfolding(seed in any::<u64>()) {
        let t = random_simple_term(&mut ChaCha8Rng::seed_from_u64(seed), 24);
        prop_assert_eq!(value_complexity(&t), vc_oracle(&t));
        prop_assert_eq!(is_value(&t), is_value_oracle(&t));
    }

    // A term followed by a non-empty case-free stack never has positive value complexity.
    #[test]
    fn case_free_stacks_have_value_complexity_zero(seed in any::<u64>()) {
        let t = random_stacked_term(&mut ChaCha8Rng::seed_from_u64(seed), 16);
        prop_assert_eq!(value_complexity(&t), 0);
        prop_assert_eq!(vc_oracle(&t), 0);
    }
}

#[test]
fn full_cross_mints_channels_outside_the_term() {
    let t = parse_term(lax::examples::MOBILITY).unwrap();
    let (_, trace) = lax::strategy::normalize(&t, &Default::default()).unwrap();
    let k = trace.steps.iter().position(|s| s.redex.kind == RedexKind::FullCross).expect("a full cross");
    let before = names(trace.before(k));
    let minted: Vec<_> = names(&trace.steps[k].term_after).difference(&before).cloned().collect();
    assert!(!minted.is_empty());
}

#[test]
fn intuitionistic_rules() {
    let cases = [
        (r"y:A |- (\x:A. x) y", "y:A |- y"),
        (r"x:A, y:B |- <x, y> pi1", "x:A, y:B |- y"),
        (r"y:A |- case inj0[A \/ B](y) of { l. inj1[B \/ A](l) | r. inj0[B \/ A](r) }", "y:A |- inj1[B \\/ A](y)"),
    ];
    for (src, want) in cases {
        let (t, _) = parse_term_with_context(src).unwrap();
        let rs = find_redexes(&t);
        assert_eq!(rs.len(), 1, "{}", src);
        let after = step(&t, &rs[0]).unwrap();
        let (w, _) = parse_term_with_context(want).unwrap();
        assert!(alpha_eq(&after, &w), "{}", src);
        assert!(is_normal(&after));
    }
}

#[test]
fn case_permutation_pushes_the_stack_into_branches() {
    let (t, _) = parse_term_with_context(
        r"d:A \/ B, f:A -> C -> D, g:B -> C -> D, c:C |- (case d of { x. f x | y. g y }) c",
    )
    .unwrap();
    let rs = find_redexes(&t);
    assert_eq!(rs.len(), 1);
    assert_eq!(rs[0].kind, RedexKind::CasePerm);
    let after = step(&t, &rs[0]).unwrap();
    let (want, _) =
        parse_term_with_context(r"d:A \/ B, f:A -> C -> D, g:B -> C -> D, c:C |- case d of { x. f x c | y. g y c }").unwrap();
    assert!(alpha_eq(&after, &want));
}

#[test]
fn stale_redexes_are_refused() {
    let (t, _) = parse_term_with_context(r"y:A |- (\x:A. x) y").unwrap();
    let mut r = find_redexes(&t).remove(0);
    r.kind = RedexKind::ProjPair;
    assert!(step(&t, &r).is_err());
}
