use thiserror::Error;

use super::stack::{spine, FrameRef};
use crate::syntax::Term;
use crate::typing::type_of;

/// Leaves of the right- and left-nested pair structure of `t`.
pub fn pair_leaves(t: &Term) -> Vec<&Term> {
    let mut out = Vec::new();
    fn go<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
        match t {
            Term::Pair(a, b) => {
                go(a, out);
                go(b, out);
            }
            other => out.push(other),
        }
    }
    go(t, &mut out);
    out
}

/// A tuple one of whose components is a λ, an injection, an ex falso, a case distinction, or
/// an active channel applied to a stack.
pub fn is_value(t: &Term) -> bool {
    pair_leaves(t).into_iter().any(|leaf| match leaf {
        Term::Lam(..) | Term::Inj(..) | Term::Efq(..) | Term::Case { .. } => true,
        other => matches!(spine(other).0, Term::Chan(c) if c.active),
    })
}

/// Value complexity of a simply typed term.
pub fn value_complexity(t: &Term) -> usize {
    vc_with(t, &[])
}

// Value complexity of `t σ` where `σ` is `extra`, without building the term.
fn vc_with(t: &Term, extra: &[FrameRef<'_>]) -> usize {
    if extra.is_empty() {
        match t {
            Term::Lam(..) => return type_of(t).map(|f| f.complexity()).unwrap_or(0),
            Term::Inj(_, ty, _) => return ty.complexity(),
            Term::Pair(a, b) => return vc_with(a, &[]).max(vc_with(b, &[])),
            _ => {}
        }
    }
    let (_, mut frames) = spine(t);
    frames.extend_from_slice(extra);
    match frames.iter().rposition(|f| matches!(f, FrameRef::Case { .. })) {
        Some(k) => {
            let rest = &frames[k + 1..];
            match frames[k] {
                FrameRef::Case { lbody, rbody } => vc_with(lbody, rest).max(vc_with(rbody, rest)),
                _ => unreachable!(),
            }
        }
        None => 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("term is not in parallel form")]
pub struct NotParallelForm;

/// 0 on simply typed terms, one more than the highest component on parallel nodes.
pub fn height(t: &Term) -> Result<usize, NotParallelForm> {
    match t.unmarked() {
        Term::Par(p) => {
            let mut h = 0;
            for c in &p.comps {
                h = h.max(height(c)?);
            }
            Ok(h + 1)
        }
        Term::Contract(a, b) => Ok(1 + height(a)?.max(height(b)?)),
        other if other.is_simply_typed() => Ok(0),
        _ => Err(NotParallelForm),
    }
}

/// Removing parentheses, a spine of parallel nodes over simply typed terms.
pub fn is_parallel_form(t: &Term) -> bool {
    height(t).is_ok()
}
