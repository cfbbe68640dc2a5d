mod common;

use proptest::prelude::*;

use lax::analysis::generate::{corpus, random_simple_term, Preset};
use lax::rewrite::value_complexity;
use lax::syntax::{parse_axiom, parse_term, parse_term_with_context, AxiomScheme, Formula, Term};
use lax::typing::{check, infer_type, type_of, validate_axiom, AxiomError, TypeError, TypingContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

fn infer(src: &str) -> Result<Formula, TypeError> {
    let (t, ctx) = parse_term_with_context(src).unwrap();
    infer_type(&TypingContext::from_vars(&ctx), &t)
}

// Positions of variable and channel occurrences.
fn leaves(t: &Term) -> Vec<Vec<usize>> {
    common::all_positions(t).into_iter().filter(|p| matches!(t.at(p), Some(Term::Var(_) | Term::Chan(_)))).collect()
}

fn retype_leaf(t: &Term, path: &[usize]) -> Term {
    let mut out = t.clone();
    match out.at_mut(path).unwrap() {
        Term::Var(v) => v.ty = Formula::imp(v.ty.clone(), v.ty.clone()),
        Term::Chan(c) => c.ty = Formula::imp(c.ty.clone(), c.ty.clone()),
        _ => unreachable!(),
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_terms_are_well_typed(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 4, 40, p) {
            let ty = infer_type(&s.typing_context(), &s.term);
            prop_assert!(ty.is_ok(), "{:?}", ty);
            prop_assert_eq!(type_of(&s.term), ty.ok());
        }
    }

    #[test]
    fn every_retyped_leaf_is_rejected(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 2, 30, p) {
            let ctx = s.typing_context();
            for path in leaves(&s.term) {
                let bad = retype_leaf(&s.term, &path);
                prop_assert!(infer_type(&ctx, &bad).is_err(), "accepted retyped leaf at {:?}", path);
            }
        }
    }

    #[test]
    fn value_complexity_is_bounded_by_the_type(seed in any::<u64>()) {
        let t = random_simple_term(&mut ChaCha8Rng::seed_from_u64(seed), 30);
        let ty = type_of(&t).unwrap();
        prop_assert!(value_complexity(&t) <= ty.complexity());
    }
}

#[test]
fn simple_types() {
    assert_eq!(infer(r"\x:A. x").unwrap(), Formula::imp(Formula::atom("A"), Formula::atom("A")));
    assert_eq!(infer(r"\p:A /\ B. p pi1").unwrap().to_string(), "A /\\ B -> B");
    assert_eq!(infer(lax::examples::OR).unwrap(), Formula::imp(Formula::bool(), Formula::imp(Formula::bool(), Formula::bool())));
    assert_eq!(infer(lax::examples::SCHEDULER_C3).unwrap(), Formula::atom("F"));
}

#[test]
fn mismatches_are_reported_with_positions() {
    let err = infer(r"f:A -> B, y:B |- f y").unwrap_err();
    assert_eq!(err.code(), "TypeMismatch");
    assert_eq!(err.position(), &vec![1]);
    let err = infer(r"z:Bot |- efq[A -> A](z)").unwrap_err();
    assert_eq!(err.code(), "EfqTargetNotAtomic");
}

#[test]
fn check_report_shape() {
    let t = parse_term(r"\x:A. x").unwrap();
    let ok = serde_json::to_value(check(&TypingContext::new(), &t)).unwrap();
    assert_eq!(ok["ok"], true);
    assert_eq!(ok["type"], "A -> A");
    let bad = Term::app(t.clone(), t);
    let err = serde_json::to_value(check(&TypingContext::new(), &bad)).unwrap();
    assert_eq!(err["ok"], false);
    assert_eq!(err["errors"][0]["code"], "TypeMismatch");
}

#[test]
fn channel_discipline() {
    // A sending occurrence must be applied.
    assert!(parse_term(r"nu a:EM[A].[ a || a ]").is_err() || infer(r"nu a:EM[A].[ a || a ]").is_err());
    // Components must share the session type.
    assert!(infer(r"x:A, y:B |- nu a:EM[A].[ efq[B](a x) || y ]").is_ok());
    let err = infer(r"x:A, y:C |- nu a:EM[A].[ efq[B](a x) || y ]");
    assert!(err.is_err());
}

#[test]
fn axiom_validation() {
    for text in ["EM[A]", "EMN[A -> B; 4]", "C[A, B, C]", "G[A, B]"] {
        assert!(parse_axiom(text).is_ok(), "{}", text);
    }
    let (a, b) = (Formula::atom("A"), Formula::atom("B"));
    let general = |c: Vec<(Formula, Formula)>| validate_axiom(&AxiomScheme::general(c));
    assert_eq!(general(vec![(a.clone(), b.clone())]), Err(AxiomError::TooFewComponents));
    assert_eq!(
        general(vec![(Formula::conj(a.clone(), a.clone()), b.clone()), (b.clone(), a.clone())]),
        Err(AxiomError::NotAtomic { index: 0 })
    );
    assert_eq!(
        general(vec![(a.clone(), b.clone()), (a.clone(), Formula::Bot)]),
        Err(AxiomError::DuplicateAntecedent { antecedent: a.clone() })
    );
    assert_eq!(
        general(vec![(a.clone(), b.clone()), (Formula::Top, Formula::Bot)]),
        Err(AxiomError::UnmatchedConsequent { index: 0, consequent: b.clone() })
    );
    assert_eq!(general(vec![(a.clone(), Formula::Bot), (b, Formula::Bot)]), Err(AxiomError::NoReceiver));
    // A component may not receive from itself.
    assert!(general(vec![(a.clone(), a), (Formula::Top, Formula::Bot)]).is_err());
}
