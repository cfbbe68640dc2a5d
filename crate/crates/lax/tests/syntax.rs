mod common;

use proptest::prelude::*;

use lax::analysis::generate::{corpus, random_formula, Preset};
use lax::strategy::{normalize, Config};
use lax::syntax::{
    alpha_eq, parse_axiom, parse_formula, parse_term, parse_term_with_context, print_axiom, print_formula,
    print_term, Formula, Name, NameSupply, ParseErrorKind, Term,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

fn formula() -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(|seed| random_formula(&mut ChaCha8Rng::seed_from_u64(seed), 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_terms_parse_back(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 4, 30, p) {
            let text = print_term(&s.term);
            let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", e, text)))?;
            prop_assert!(alpha_eq(&back, &s.term), "{}", text);
        }
    }

    // Intermediate states carry active sessions, underlines and generated channel names.
    #[test]
    fn trace_states_parse_back(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 2, 24, p) {
            let Ok((_, trace)) = normalize(&s.term, &Config::default()) else { continue };
            for st in trace.steps.iter().filter(|st| st.term_after.size() <= 200) {
                let text = print_term(&st.term_after);
                let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", e, text)))?;
                prop_assert!(alpha_eq(&back, &st.term_after), "{}", text);
            }
        }
    }

    #[test]
    fn printed_formulas_parse_back(f in formula()) {
        prop_assert_eq!(parse_formula(&print_formula(&f)).unwrap(), f);
    }

    #[test]
    fn prime_factors_are_prime_and_recombine(f in formula()) {
        let parts = f.prime_factors();
        prop_assert!(parts.iter().all(Formula::is_prime));
        let again = Formula::conjoin(&parts).prime_factors();
        prop_assert_eq!(again, parts);
    }

    #[test]
    fn fresh_names_avoid_the_seed(seed in any::<u64>(), hints in prop::collection::vec("[a-z]{1,2}[0-9]{0,2}", 1..20)) {
        let Some(s) = corpus(seed, 1, 30, Preset::Em).pop() else { return Ok(()) };
        let mut seeded = std::collections::HashSet::new();
        s.term.all_names(&mut seeded);
        let mut supply = NameSupply::seeded(&s.term);
        let mut handed = std::collections::HashSet::new();
        for h in &hints {
            let n = supply.fresh(h);
            prop_assert!(!seeded.contains(&n), "{} was in the term", n.as_str());
            prop_assert!(handed.insert(n.clone()), "{} handed out twice", n.as_str());
        }
    }

    #[test]
    fn erasing_marks_is_idempotent(seed in any::<u64>()) {
        for s in corpus(seed, 2, 24, Preset::C3) {
            let Ok((nf, _)) = normalize(&s.term, &Config::default()) else { continue };
            let once = nf.erase_marks();
            prop_assert_eq!(once.erase_marks(), once);
        }
    }
}

#[test]
fn reserved_names_are_skipped() {
    let mut s = NameSupply::new();
    s.reserve(&Name::new("x1"));
    s.reserve(&Name::new("x2"));
    assert_eq!(s.fresh("x").as_str(), "x3");
    assert_eq!(s.fresh("x7").as_str(), "x4");
}

#[test]
fn formula_precedence() {
    let f = parse_formula("A /\\ B \\/ C -> D").unwrap();
    assert_eq!(
        f,
        Formula::imp(Formula::disj(Formula::conj(Formula::atom("A"), Formula::atom("B")), Formula::atom("C")), Formula::atom("D"))
    );
    assert_eq!(parse_formula("~A").unwrap(), Formula::imp(Formula::atom("A"), Formula::Bot));
    assert_eq!(parse_formula("Bool").unwrap(), Formula::bool());
}

#[test]
fn axiom_presets_print_back() {
    for text in ["EM[A -> B]", "EMN[A; 3]", "C[A, B, C]", "G[A, B]"] {
        let ax = parse_axiom(text).unwrap();
        assert_eq!(parse_axiom(&print_axiom(&ax)).unwrap(), ax, "{}", text);
    }
}

#[test]
fn context_declares_free_variables() {
    let (t, ctx) = parse_term_with_context("z:Bot, k:A -> F |- k efq[A](z)").unwrap();
    assert_eq!(ctx.len(), 2);
    assert!(matches!(t, Term::App(..)));
    let err = parse_term("k efq[A](z)").unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::Unbound);
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_term("\\x:A.\n  x )").unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::Syntax);
    assert_eq!((err.line, err.column), (2, 5));
}

#[test]
fn bundled_programs_parse() {
    for ex in lax::examples::suite() {
        let (t, _) = parse_term_with_context(&ex.source).unwrap_or_else(|e| panic!("{}: {}", ex.name, e));
        assert!(t.size() > 1);
        parse_term(ex.golden.trim()).unwrap_or_else(|e| panic!("{} golden: {}", ex.name, e));
    }
}
