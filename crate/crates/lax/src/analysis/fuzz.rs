//! Normalize-and-audit runs over single terms, and shrinking of failing terms.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{audit_trace, check_result};
use crate::report::PropertyReport;
use crate::strategy::{normalize, Config, StrategyError};
use crate::syntax::{Path, Term};
use crate::typing::{infer_type, TypingContext};

#[derive(Clone, Debug, Serialize)]
pub struct AuditOutcome {
    pub steps: usize,
    pub cycles: usize,
    /// Largest complexity among the fired redexes.
    pub max_complexity: usize,
    pub phase_counts: BTreeMap<String, usize>,
    pub limit_hit: bool,
    pub report: PropertyReport,
}

impl AuditOutcome {
    pub fn holds(&self) -> bool {
        self.report.holds
    }
}

/// Normalizes `t` and runs every trace monitor and result checker on the run.
/// A failed normalization counts as a violation of the `normalization` property. Hitting a
/// resource limit does not; the partial trace is still audited.
pub fn audit_run(ctx: &TypingContext, t: &Term, cfg: &Config) -> AuditOutcome {
    let mut report = PropertyReport::new("audit");
    let (trace, limit_hit) = match normalize(t, cfg) {
        Ok((nf, trace)) => {
            report.merge(check_result(ctx, &nf));
            (trace, false)
        }
        Err(e) if e.is_limit() => (e.trace().clone(), true),
        Err(e) => {
            let mut failed = PropertyReport::new("normalization");
            let position = match &e {
                StrategyError::ProgressViolation { position, .. } | StrategyError::NoRule { position, .. } => {
                    position.clone()
                }
                _ => Path::new(),
            };
            failed.fail(position, e.to_string());
            report.merge(failed);
            (e.trace().clone(), false)
        }
    };
    report.merge(audit_trace(ctx, &trace));
    AuditOutcome {
        steps: trace.steps.len(),
        cycles: trace.cycles(),
        max_complexity: trace.steps.iter().map(|s| s.redex.complexity).max().unwrap_or(0),
        phase_counts: trace.phase_counts(),
        limit_hit,
        report,
    }
}

/// Greedily replaces subterms by their own subterms of the same type while `fails` keeps
/// holding, trying at most `budget` candidates.
pub fn shrink(ctx: &TypingContext, t: &Term, budget: usize, fails: impl Fn(&Term) -> bool) -> Term {
    let Ok(ty) = infer_type(ctx, t) else { return t.clone() };
    let mut cur = t.clone();
    let mut tried = 0;
    'outer: loop {
        for path in paths(&cur) {
            let node = cur.at(&path).expect("path from paths()");
            for sub in paths(node).into_iter().skip(1) {
                if tried >= budget {
                    return cur;
                }
                let mut cand = cur.clone();
                let replacement = node.at(&sub).expect("path from paths()").clone();
                cand.replace_at(&path, replacement);
                if infer_type(ctx, &cand).ok().as_ref() != Some(&ty) {
                    continue;
                }
                tried += 1;
                if fails(&cand) {
                    cur = cand;
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

/// Every position of `t` in preorder.
fn paths(t: &Term) -> Vec<Path> {
    fn go(t: &Term, path: &mut Path, out: &mut Vec<Path>) {
        out.push(path.clone());
        for (i, c) in t.children().into_iter().enumerate() {
            path.push(i);
            go(c, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}
