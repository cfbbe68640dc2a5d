use crate::syntax::{Formula, Term, Var};

/// One elimination waiting to be applied to a head term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    Arg(Term),
    Proj(u8),
    Case { left: Var, lbody: Term, right: Var, rbody: Term },
    Efq(Formula),
}

impl Frame {
    pub fn is_case(&self) -> bool {
        matches!(self, Frame::Case { .. })
    }

    /// `head ξ` for this one-element stack.
    pub fn apply(self, head: Term) -> Term {
        match self {
            Frame::Arg(a) => Term::app(head, a),
            Frame::Proj(i) => Term::proj(head, i),
            Frame::Case { left, lbody, right, rbody } => Term::case(head, left, lbody, right, rbody),
            Frame::Efq(p) => Term::efq(p, head),
        }
    }
}

/// A Krivine-style continuation, innermost elimination first.
pub type Stack = Vec<Frame>;

pub fn is_case_free(s: &[Frame]) -> bool {
    !s.iter().any(Frame::is_case)
}

/// Splits `t` into a head that is not an elimination and the stack applied to it.
pub fn decompose_stack(t: &Term) -> (Term, Stack) {
    let mut frames = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(f, a) => {
                frames.push(Frame::Arg((**a).clone()));
                cur = f;
            }
            Term::Proj(a, i) => {
                frames.push(Frame::Proj(*i));
                cur = a;
            }
            Term::Case { scrut, left, lbody, right, rbody } => {
                frames.push(Frame::Case {
                    left: left.clone(),
                    lbody: (**lbody).clone(),
                    right: right.clone(),
                    rbody: (**rbody).clone(),
                });
                cur = scrut;
            }
            Term::Efq(p, a) => {
                frames.push(Frame::Efq(p.clone()));
                cur = a;
            }
            _ => break,
        }
    }
    frames.reverse();
    (cur.clone(), frames)
}

/// `head σ`.
pub fn apply_stack(head: Term, stack: Stack) -> Term {
    stack.into_iter().fold(head, |acc, f| f.apply(acc))
}

/// Borrowed view of a frame, used by the measures to avoid rebuilding terms.
#[derive(Clone, Copy, Debug)]
pub(crate) enum FrameRef<'a> {
    Arg,
    Proj,
    Case { lbody: &'a Term, rbody: &'a Term },
    Efq,
}

/// Head and borrowed frames of `t`, innermost first.
pub(crate) fn spine(t: &Term) -> (&Term, Vec<FrameRef<'_>>) {
    let mut frames = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::App(f, _) => {
                frames.push(FrameRef::Arg);
                cur = f;
            }
            Term::Proj(a, _) => {
                frames.push(FrameRef::Proj);
                cur = a;
            }
            Term::Case { scrut, lbody, rbody, .. } => {
                frames.push(FrameRef::Case { lbody, rbody });
                cur = scrut;
            }
            Term::Efq(_, a) => {
                frames.push(FrameRef::Efq);
                cur = a;
            }
            _ => break,
        }
    }
    frames.reverse();
    (cur, frames)
}
