//! Checkers for the metatheoretic properties on concrete terms and traces.

pub mod fuzz;
pub mod generate;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::report::PropertyReport;
use crate::rewrite::{communication_complexity, find_redexes, Group, Redex, RedexKind};
use crate::strategy::{replay, Phase, PhaseSpan, SideClause, Trace};
use crate::syntax::{Formula, Path, Term};
use crate::typing::{check_subject_reduction, infer_type, type_of, TypingContext};

pub use crate::rewrite::{is_normal, is_parallel_form};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("the term is not normal")]
    NotNormal,
    #[error("the term is ill typed: {0}")]
    IllTyped(String),
}

/// A normal term is in parallel form.
pub fn check_parallel_nf_property(t: &Term) -> PropertyReport {
    let name = "parallel-normal-form";
    if !is_normal(t) {
        return PropertyReport::not_applicable(name);
    }
    let mut report = PropertyReport::new(name);
    if !is_parallel_form(t) {
        let pos = first_non_parallel(t, &mut Vec::new()).unwrap_or_default();
        report.fail(pos, "a session or contraction occurs below a non-parallel node".to_string());
    }
    report
}

fn first_non_parallel(t: &Term, path: &mut Path) -> Option<Path> {
    match t.unmarked() {
        Term::Par(_) | Term::Contract(..) => {
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                let r = first_non_parallel(c, path);
                path.pop();
                if r.is_some() {
                    return r;
                }
            }
            None
        }
        _ if t.is_simply_typed() => None,
        _ => Some(path.clone()),
    }
}

/// The formulas the subformula property allows as prime factors under `ctx` for result type `a`.
pub fn admissible_formulas(ctx: &TypingContext, a: &Formula) -> BTreeSet<Formula> {
    let mut out: BTreeSet<Formula> = BTreeSet::new();
    out.extend(a.subformulas());
    for ty in ctx.vars.values() {
        out.extend(ty.subformulas());
    }
    for (d, _) in ctx.chans.values() {
        out.extend(d.subformulas().into_iter().filter(|f| f != d));
    }
    // The constants carry no information and appear in the encodings of stuck sessions.
    out.insert(Formula::Top);
    out.insert(Formula::Bot);
    out
}

/// Both clauses of the subformula property for a normal term.
pub fn check_subformula(ctx: &TypingContext, t: &Term) -> Result<PropertyReport, AnalysisError> {
    if !is_normal(t) {
        return Err(AnalysisError::NotNormal);
    }
    let a = infer_type(ctx, t).map_err(|e| AnalysisError::IllTyped(e.to_string()))?;
    let allowed = admissible_formulas(ctx, &a);
    let mut report = PropertyReport::new("subformula");
    let mut path = Vec::new();
    subformula_walk(t, &allowed, &mut path, &mut report);
    Ok(report)
}

fn subformula_walk(t: &Term, allowed: &BTreeSet<Formula>, path: &mut Path, report: &mut PropertyReport) {
    if let Term::Par(p) = t {
        for i in 0..p.axiom.len() {
            for f in [p.axiom.antecedent(i), p.axiom.consequent(i)] {
                for factor in f.prime_factors() {
                    if !allowed.contains(&factor) {
                        report.fail(
                            path.clone(),
                            format!("channel {} component {}: prime factor {} is not admissible", p.chan, i, factor),
                        );
                    }
                }
            }
        }
    }
    // Channel occurrences are governed by the first clause.
    if !matches!(t, Term::Chan(_) | Term::Mark(_)) {
        match type_of(t) {
            Some(ty) => {
                for factor in ty.prime_factors() {
                    if !allowed.contains(&factor) {
                        report.fail(path.clone(), format!("subterm of type {} has prime factor {}", ty, factor));
                    }
                }
            }
            None => report.fail(path.clone(), "subterm cannot be typed".to_string()),
        }
    }
    for (i, c) in t.children().into_iter().enumerate() {
        path.push(i);
        subformula_walk(c, allowed, path, report);
        path.pop();
    }
}

fn max_in(redexes: &[Redex], keep: impl Fn(&Redex) -> bool) -> Option<usize> {
    redexes.iter().filter(|r| keep(r)).map(|r| r.complexity).max()
}

fn step_label(k: usize, r: &Redex) -> String {
    format!("step {} ({})", k, r.kind)
}

/// Subject reduction on every step of the trace.
pub fn monitor_subject_reduction(ctx: &TypingContext, trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("subject-reduction");
    for (k, s) in trace.steps.iter().enumerate() {
        let r = check_subject_reduction(ctx, trace.before(k), &s.term_after);
        for w in r.witnesses {
            report.fail(s.redex.position.clone(), format!("{}: {}", step_label(k, &s.redex), w.explanation));
        }
    }
    report
}

/// Contracting a redex of complexity `τ` creates no redex above the bounds allowed for its group.
pub fn monitor_decrease(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("decrease");
    let mut before = find_redexes(&trace.initial);
    for (k, s) in trace.steps.iter().enumerate() {
        let after = find_redexes(&s.term_after);
        let fired = &s.redex;
        let tau = fired.complexity;
        let monitored = !fired.kind.is_permutation() && fired.kind != RedexKind::Activation;
        if monitored {
            let case_perm = max_in(&before, |q| q.kind == RedexKind::CasePerm);
            // A communication exposed by the step was already latent in its session.
            let latent = max_communication_complexity(trace.before(k));
            for q in after.iter().filter(|q| q.group != Group::Other) {
                let mut same = max_in(&before, |p| p.group == q.group);
                if q.kind.is_cross() {
                    same = same.max(Some(latent));
                }
                let ok = match fired.group {
                    Group::One => {
                        q.complexity < tau
                            || same.is_some_and(|m| q.complexity <= m)
                            || case_perm.is_some_and(|m| q.complexity <= m)
                    }
                    _ => q.complexity <= tau || same.is_some_and(|m| q.complexity <= m),
                };
                if !ok {
                    report.fail(
                        q.position.clone(),
                        format!("{} created {} of complexity {}", step_label(k, fired), q.kind, q.complexity),
                    );
                }
            }
        }
        before = after;
    }
    report
}

fn has_structural_or_activation(t: &Term) -> bool {
    find_redexes(t)
        .iter()
        .any(|r| matches!(r.kind, RedexKind::ProjPair | RedexKind::CasePerm | RedexKind::Activation))
}

/// A cross reduction followed by its chase creates no activation redex when started from a term
/// without projection, case-permutation or activation redexes.
pub fn monitor_freeze(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("freeze");
    let steps = &trace.steps;
    for (k, s) in steps.iter().enumerate() {
        if s.clause != Some(SideClause::Cross) || has_structural_or_activation(trace.before(k)) {
            continue;
        }
        let mut end = k;
        while end + 1 < steps.len() && steps[end + 1].clause == Some(SideClause::Chase) {
            end += 1;
        }
        if let Some(r) = find_redexes(&steps[end].term_after).into_iter().find(|r| r.kind == RedexKind::Activation) {
            report.fail(r.position, format!("{} left an activation redex", step_label(k, &s.redex)));
        }
    }
    report
}

// Phases that ran to completion. A run stopped by a resource limit ends inside its last phase.
fn complete_phases(trace: &Trace) -> &[PhaseSpan] {
    let n = trace.phases.len();
    &trace.phases[..if trace.limit_hit { n.saturating_sub(1) } else { n }]
}

/// Largest communication complexity over all sessions of `t`.
pub fn max_communication_complexity(t: &Term) -> usize {
    let mut m = 0;
    fn go(t: &Term, m: &mut usize) {
        if let Term::Par(p) = t {
            *m = (*m).max(communication_complexity(p));
        }
        for c in t.children() {
            go(c, m);
        }
    }
    go(t, &mut m);
    m
}

/// Activation never raises the complexity of channel occurrences.
pub fn monitor_activate(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("activate");
    for span in complete_phases(trace).iter().filter(|p| p.phase == Phase::Activation && p.end > p.start) {
        let before = max_communication_complexity(trace.before(span.start));
        let after = max_communication_complexity(trace.before(span.end));
        if after > before {
            report.fail(
                vec![],
                format!("cycle {}: activation raised communication complexity from {} to {}", span.cycle, before, after),
            );
        }
    }
    report
}

fn max_complexity(t: &Term) -> Option<usize> {
    find_redexes(t).iter().map(|r| r.complexity).max()
}

/// Largest complexity of a redex of `t` or of a communication that a session of `t` may
/// perform once its components are simply typed.
pub fn potential_complexity(t: &Term) -> Option<usize> {
    let latent = max_communication_complexity(t);
    match max_complexity(t) {
        Some(c) => Some(c.max(latent)),
        None if latent > 0 => Some(latent),
        None => None,
    }
}

/// After a communication phase only Group 1 redexes remain, bounded by the phase's entry
/// complexity. Communications hidden behind parallel components count towards that bound.
pub fn monitor_communicate(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("communicate");
    for span in complete_phases(trace).iter().filter(|p| p.phase == Phase::Communication) {
        let bound = potential_complexity(trace.before(span.start)).unwrap_or(0);
        for r in find_redexes(trace.before(span.end)) {
            if r.group != Group::One || r.complexity > bound {
                report.fail(
                    r.position.clone(),
                    format!("cycle {}: {} of complexity {} survives (bound {})", span.cycle, r.kind, r.complexity, bound),
                );
            }
        }
    }
    report
}

/// The maximal redex complexity at the start of each cycle does not increase, and the
/// intuitionistic phase of the following cycle pushes every redex strictly below it.
pub fn monitor_cycle_bound(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("cycle-bound");
    let intuitionistic: Vec<_> = complete_phases(trace).iter().filter(|p| p.phase == Phase::Intuitionistic).collect();
    for w in intuitionistic.windows(2) {
        let (prev, next) = (w[0], w[1]);
        let tau_prev = potential_complexity(trace.before(prev.start));
        let tau_next = potential_complexity(trace.before(next.start));
        if tau_next > tau_prev {
            report.fail(vec![], format!("cycle {}: start complexity {:?} exceeds {:?}", next.cycle, tau_next, tau_prev));
        }
        let after = potential_complexity(trace.before(next.end));
        let ok = match (tau_prev, after) {
            (_, None) => true,
            (Some(t), Some(a)) => t > 0 && a < t,
            (None, Some(_)) => false,
        };
        if !ok {
            report.fail(
                vec![],
                format!("cycle {}: redex of complexity {:?} survives the intuitionistic phase (bound {:?})", next.cycle, after, tau_prev),
            );
        }
    }
    report
}

/// Phases occur as parallel form, then intuitionistic, activation, communication per cycle, and
/// cover the steps contiguously with matching tags.
pub fn monitor_phase_order(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("phase-order");
    let cycle_order = [Phase::Intuitionistic, Phase::Activation, Phase::Communication];
    let mut next_start = 0;
    for (n, span) in trace.phases.iter().enumerate() {
        let expected = if n == 0 { Phase::ParallelForm } else { cycle_order[(n - 1) % 3] };
        let expected_cycle = if n == 0 { 0 } else { (n - 1) / 3 + 1 };
        if span.phase != expected || span.cycle != expected_cycle {
            report.fail(vec![], format!("phase {} is {} of cycle {}, expected {} of cycle {}", n, span.phase, span.cycle, expected, expected_cycle));
        }
        if span.start != next_start {
            report.fail(vec![], format!("phase {} starts at step {}, expected {}", n, span.start, next_start));
        }
        next_start = span.end;
        for k in span.start..span.end.min(trace.steps.len()) {
            let s = &trace.steps[k];
            if s.phase != span.phase || s.cycle != span.cycle {
                report.fail(s.redex.position.clone(), format!("step {} is tagged {} but lies in {}", k, s.phase, span.phase));
            }
        }
    }
    if next_start != trace.steps.len() {
        report.fail(vec![], format!("phases cover {} of {} steps", next_start, trace.steps.len()));
    }
    report
}

pub fn monitor_replay(trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("replay");
    if let Err(k) = replay(trace) {
        report.fail(trace.steps[k].redex.position.clone(), format!("replaying step {} does not reproduce the trace", k));
    }
    report
}

/// All trace monitors together.
pub fn audit_trace(ctx: &TypingContext, trace: &Trace) -> PropertyReport {
    let mut report = PropertyReport::new("audit");
    report.merge(monitor_subject_reduction(ctx, trace));
    report.merge(monitor_decrease(trace));
    report.merge(monitor_freeze(trace));
    report.merge(monitor_activate(trace));
    report.merge(monitor_communicate(trace));
    report.merge(monitor_cycle_bound(trace));
    report.merge(monitor_phase_order(trace));
    report.merge(monitor_replay(trace));
    report
}

/// Properties of a normalization result: parallel normal form and, when normal, subformula.
pub fn check_result(ctx: &TypingContext, t: &Term) -> PropertyReport {
    let mut report = PropertyReport::new("result");
    let mut normal = PropertyReport::new("normal");
    if !is_normal(t) {
        normal.fail(vec![], "the final term still has redexes".to_string());
    }
    report.merge(normal);
    report.merge(check_parallel_nf_property(t));
    match check_subformula(ctx, t) {
        Ok(r) => report.merge(r),
        Err(AnalysisError::NotNormal) => {}
        Err(e) => report.fail(vec![], e.to_string()),
    }
    report
}
