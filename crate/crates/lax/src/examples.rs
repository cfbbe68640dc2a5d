//! The bundled example programs and their expected normal forms.

use serde::Serialize;

use crate::rewrite::is_normal;
use crate::strategy::{normalize, Config, Trace};
use crate::syntax::{alpha_eq, parse_term, parse_term_with_context, print_term, Term};
use crate::typing::{infer_type, TypingContext};

/// Parallel OR, `Bool -> Bool -> Bool`.
pub const OR: &str = include_str!("../programs/or.lax");
pub const MOBILITY: &str = include_str!("../programs/mobility.lax");
pub const SCHEDULER_C3: &str = include_str!("../programs/scheduler_c3.lax");
pub const BROADCAST_EM3: &str = include_str!("../programs/broadcast_em3.lax");
pub const GODEL: &str = include_str!("../programs/godel.lax");

pub const TRUE: &str = "inj0[Bool](tt)";
pub const FALSE: &str = "inj1[Bool](tt)";

/// Source of `O l r` where `ctx` declares the free variables of `l` and `r`.
pub fn or_application(ctx: &str, l: &str, r: &str) -> String {
    let prefix = if ctx.is_empty() { String::new() } else { format!("{} |- ", ctx) };
    format!("{}(\n{}\n) ({}) ({})", prefix, OR, l, r)
}

#[derive(Clone, Debug)]
pub struct Example {
    pub name: &'static str,
    pub source: String,
    pub golden: &'static str,
    /// The result depends on the message order the underline enforces. Without the underline
    /// only normality is checked.
    pub order_sensitive: bool,
}

pub fn suite() -> Vec<Example> {
    let ex = |name, source: String, golden| Example { name, source, golden, order_sensitive: false };
    vec![
        ex("or_ff", or_application("", FALSE, FALSE), include_str!("../programs/golden/or_ff.nf")),
        ex("or_tx", or_application("x:Bool", TRUE, "x"), include_str!("../programs/golden/or_tx.nf")),
        ex("or_xt", or_application("x:Bool", "x", TRUE), include_str!("../programs/golden/or_xt.nf")),
        ex("mobility", MOBILITY.to_string(), include_str!("../programs/golden/mobility.nf")),
        Example {
            order_sensitive: true,
            ..ex("scheduler_c3", SCHEDULER_C3.to_string(), include_str!("../programs/golden/scheduler_c3.nf"))
        },
        ex("broadcast_em3", BROADCAST_EM3.to_string(), include_str!("../programs/golden/broadcast_em3.nf")),
        ex("godel", GODEL.to_string(), include_str!("../programs/golden/godel.nf")),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub steps: usize,
    /// Printed normal form, when the run reached one.
    pub result: Option<String>,
    pub detail: Option<String>,
}

/// Normalizes the example and compares the result with its golden file up to α-equivalence
/// and underlines.
pub fn run_example(ex: &Example, cfg: &Config) -> ExampleOutcome {
    let fail = |steps, result, detail: String| ExampleOutcome {
        name: ex.name,
        passed: false,
        steps,
        result,
        detail: Some(detail),
    };
    let ((term, ctx), golden) = match (parse_term_with_context(&ex.source), parse_term(ex.golden.trim())) {
        (Ok(t), Ok(g)) => (t, g),
        (Err(e), _) => return fail(0, None, format!("program: {}", e)),
        (_, Err(e)) => return fail(0, None, format!("golden file: {}", e)),
    };
    if let Err(e) = infer_type(&TypingContext::from_vars(&ctx), &term) {
        return fail(0, None, format!("ill typed: {}", e));
    }
    match normalize(&term, cfg) {
        Ok((nf, trace)) => {
            let steps = trace.steps.len();
            let printed = print_term(&nf);
            let passed = if ex.order_sensitive && !cfg.underline {
                is_normal(&nf)
            } else {
                matches_golden(&nf, &golden)
            };
            if passed {
                ExampleOutcome { name: ex.name, passed: true, steps, result: Some(printed), detail: None }
            } else {
                fail(steps, Some(printed), format!("expected {}", print_term(&golden)))
            }
        }
        Err(e) => fail(e.trace().steps.len(), None, e.to_string()),
    }
}

pub fn matches_golden(nf: &Term, golden: &Term) -> bool {
    alpha_eq(&nf.erase_marks(), &golden.erase_marks())
}

pub fn run_suite(cfg: &Config) -> Vec<ExampleOutcome> {
    suite().iter().map(|ex| run_example(ex, cfg)).collect()
}

/// Normalizes a bundled program, for callers that need the trace.
pub fn trace_of(source: &str, cfg: &Config) -> Option<(Term, Trace)> {
    let t = parse_term(source).ok()?;
    normalize(&t, cfg).ok()
}
