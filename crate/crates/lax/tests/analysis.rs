mod common;

use proptest::prelude::*;

use lax::analysis::fuzz::{audit_run, shrink};
use lax::analysis::generate::{corpus, generate, Preset};
use lax::analysis::{
    audit_trace, check_subformula, monitor_decrease, monitor_phase_order, monitor_replay, monitor_subject_reduction,
};
use lax::rewrite::is_normal;
use lax::strategy::{normalize, Config};
use lax::syntax::{parse_term, Formula, Term};
use lax::typing::{infer_type, TypingContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{small_terms, subformula_oracle};

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

fn mobility_trace() -> lax::strategy::Trace {
    normalize(&parse_term(lax::examples::MOBILITY).unwrap(), &Config::default()).unwrap().1
}

// First variable occurrence of `t`, retyped.
fn retype_first_var(t: &Term) -> Term {
    let mut out = t.clone();
    let path = common::all_positions(t).into_iter().find(|p| matches!(t.at(p), Some(Term::Var(_)))).unwrap();
    if let Some(Term::Var(v)) = out.at_mut(&path) {
        v.ty = Formula::imp(v.ty.clone(), v.ty.clone());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_runs_pass_every_monitor(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 4, 36, p) {
            let o = audit_run(&s.typing_context(), &s.term, &Config::default());
            prop_assert!(o.holds(), "{}: {:?}", lax::syntax::print_term(&s.term), o.report.witnesses);
            prop_assert!(!o.limit_hit);
        }
    }

    #[test]
    fn subformula_check_matches_oracle(seed in any::<u64>()) {
        for t in small_terms(seed, 15, 20).into_iter().filter(is_normal) {
            let ctx = TypingContext::from_free_vars(&t);
            let a = infer_type(&ctx, &t).unwrap();
            let hyps: Vec<Formula> = ctx.vars.values().cloned().collect();
            let mine = check_subformula(&ctx, &t).unwrap().holds;
            prop_assert_eq!(mine, subformula_oracle(&hyps, &a, &t), "{}", lax::syntax::print_term(&t));
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), p in preset()) {
        let a = generate(&mut ChaCha8Rng::seed_from_u64(seed), p, 30);
        let b = generate(&mut ChaCha8Rng::seed_from_u64(seed), p, 30);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn corpus_respects_bounds() {
    for p in Preset::ALL {
        let c = corpus(5, 50, 25, p);
        assert_eq!(c.len(), 50);
        assert!(c.iter().all(|s| s.term.size() <= 25));
        assert!(corpus(5, 50, 0, p).is_empty());
    }
}

#[test]
fn audit_catches_a_retyped_step() {
    let mut trace = mobility_trace();
    let k = trace.steps.len() / 2;
    trace.steps[k].term_after = retype_first_var(&trace.steps[k].term_after);
    assert!(!monitor_subject_reduction(&TypingContext::new(), &trace).holds);
    assert!(!monitor_replay(&trace).holds);
    assert!(!audit_trace(&TypingContext::new(), &trace).holds);
}

#[test]
fn audit_catches_reordered_steps() {
    let mut trace = mobility_trace();
    trace.steps.swap(0, 1);
    assert!(!monitor_replay(&trace).holds);
}

#[test]
fn audit_catches_mislabelled_phases() {
    let mut trace = mobility_trace();
    trace.phases.swap(1, 2);
    assert!(!monitor_phase_order(&trace).holds);
}

// A step that jumps back to a term with a bigger redex than the one it claims to contract.
#[test]
fn decrease_monitor_flags_growth() {
    let mut trace = mobility_trace();
    let k = trace.steps.iter().position(|s| s.redex.kind == lax::rewrite::RedexKind::ProjPair).unwrap();
    let big = parse_term(r"(\f:(A -> A) -> A -> A. f) (\g:A -> A. g)").unwrap();
    trace.steps[k].term_after = Term::app(big.clone(), parse_term(r"\x:A. x").unwrap());
    assert!(!monitor_decrease(&trace).holds);
}

fn has_session(t: &Term) -> bool {
    common::all_positions(t).iter().any(|p| matches!(t.at(p), Some(Term::Par(_))))
}

#[test]
fn shrinking_keeps_the_failure_and_the_type() {
    let s = corpus(9, 50, 40, Preset::Em).into_iter().find(|s| has_session(&s.term)).unwrap();
    let ctx = s.typing_context();
    let ty = infer_type(&ctx, &s.term).unwrap();
    // Any term with a session counts as failing here.
    let small = shrink(&ctx, &s.term, 500, has_session);
    assert!(has_session(&small));
    assert!(small.size() < s.term.size());
    assert_eq!(infer_type(&ctx, &small).unwrap(), ty);
}
