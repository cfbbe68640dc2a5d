use proptest::prelude::*;

use lax::analysis::generate::{corpus, Preset};
use lax::rewrite::{is_normal, is_parallel_form};
use lax::strategy::{
    normalize, progress_measure, replay, to_parallel_form, Config, Phase, SideClause, StrategyError,
};
use lax::syntax::parse_term;

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_forms_are_normal_and_parallel(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 4, 32, p) {
            let (nf, trace) = normalize(&s.term, &Config::default()).unwrap();
            prop_assert!(is_normal(&nf));
            prop_assert!(is_parallel_form(&nf));
            prop_assert_eq!(trace.final_term(), &nf);
        }
    }

    #[test]
    fn runs_are_reproducible(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 3, 32, p) {
            let a = normalize(&s.term, &Config::default()).unwrap();
            let b = normalize(&s.term, &Config::default()).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(replay(&a.1), Ok(a.0.clone()));
        }
    }

    // Each step of the side strategy, taken together with its chase, lowers the progress measure.
    #[test]
    fn communication_lowers_the_measure(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 3, 32, p) {
            let (_, trace) = normalize(&s.term, &Config::default()).unwrap();
            let mut k = 0;
            while k < trace.steps.len() {
                let st = &trace.steps[k];
                let mut end = k;
                if st.clause == Some(SideClause::Cross) {
                    while end + 1 < trace.steps.len() && trace.steps[end + 1].clause == Some(SideClause::Chase) {
                        end += 1;
                    }
                }
                if matches!(st.clause, Some(SideClause::Cross | SideClause::ParPar)) {
                    let before = progress_measure(trace.before(k));
                    let after = progress_measure(&trace.steps[end].term_after);
                    prop_assert!(after < before, "step {} {:?}", k, st.redex.kind);
                }
                k = end + 1;
            }
        }
    }

    #[test]
    fn parallel_form_phase_only_permutes(seed in any::<u64>(), p in preset()) {
        for s in corpus(seed, 3, 32, p) {
            let (t, trace) = to_parallel_form(&s.term, &Config::default()).unwrap();
            prop_assert!(trace.steps.iter().all(|st| st.redex.kind.is_permutation() && st.phase == Phase::ParallelForm));
            prop_assert!(lax::rewrite::find_redexes(&t).iter().all(|r| !matches!(r.kind, lax::rewrite::RedexKind::ParPerm(_))));
        }
    }
}

#[test]
fn step_limit_stops_with_partial_trace() {
    let t = parse_term(lax::examples::MOBILITY).unwrap();
    let cfg = Config { max_steps: 3, ..Config::default() };
    let err = normalize(&t, &cfg).unwrap_err();
    assert!(matches!(err, StrategyError::StepLimit { limit: 3, .. }));
    assert!(err.is_limit());
    assert_eq!(err.trace().steps.len(), 3);
    assert!(err.trace().limit_hit);
}

#[test]
fn trace_size_limit_stops_with_partial_trace() {
    let t = parse_term(lax::examples::MOBILITY).unwrap();
    let cfg = Config { max_trace_size: 2 * t.size(), ..Config::default() };
    let err = normalize(&t, &cfg).unwrap_err();
    assert!(matches!(err, StrategyError::SizeLimit { .. }));
    assert!(err.is_limit());
    let stored: usize = t.size() + err.trace().steps.iter().map(|s| s.term_after.size()).sum::<usize>();
    assert!(stored <= cfg.max_trace_size);
}

#[test]
fn disabled_broadcast_gets_stuck() {
    let t = parse_term(lax::examples::BROADCAST_EM3).unwrap();
    let err = normalize(&t, &Config { broadcast: false, ..Config::default() }).unwrap_err();
    assert!(matches!(err, StrategyError::NoRule { .. }));
    assert!(!err.is_limit());
}

#[test]
fn phases_cycle_in_order() {
    let t = parse_term(lax::examples::SCHEDULER_C3).unwrap();
    let (_, trace) = normalize(&t, &Config::default()).unwrap();
    assert_eq!(trace.phases[0].phase, Phase::ParallelForm);
    let order = [Phase::Intuitionistic, Phase::Activation, Phase::Communication];
    for (n, span) in trace.phases[1..].iter().enumerate() {
        assert_eq!(span.phase, order[n % 3]);
        assert_eq!(span.cycle, n / 3 + 1);
    }
    assert!(trace.cycles() >= 1);
}
