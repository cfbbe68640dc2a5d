use std::fmt;

use serde::Serialize;

use super::measure::{is_value, value_complexity};
use crate::syntax::{AxiomMode, Formula, Name, Par, Path, Term, Var};
use crate::typing::type_of;

/// Which non-parallel node a parallel child is permuted through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PermShape {
    /// `(u ∥ v) w`
    Fun,
    /// `w (u ∥ v)`
    Arg,
    Proj,
    /// `case (u ∥ v) of {...}`
    Scrutinee,
    Efq,
    Lam,
    Inj,
    PairLeft,
    PairRight,
    /// `case t of {x. u ∥ v | y. w}`
    BranchLeft,
    BranchRight,
}

impl PermShape {
    pub fn child(self) -> usize {
        match self {
            PermShape::Fun | PermShape::Proj | PermShape::Scrutinee | PermShape::Efq => 0,
            PermShape::Lam | PermShape::Inj | PermShape::PairLeft => 0,
            PermShape::Arg | PermShape::PairRight | PermShape::BranchLeft => 1,
            PermShape::BranchRight => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RedexKind {
    Beta,
    ProjPair,
    CaseInj,
    /// A one-element stack applied to a case distinction.
    CasePerm,
    ParPerm(PermShape),
    /// Session whose `component`-th component is itself parallel.
    ParParPerm { component: usize },
    Activation,
    BasicCross { sender: usize, receiver: usize },
    FullCross,
    GarbageCross { survivors: Vec<usize> },
    BroadcastCross,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    One,
    Two,
    Other,
}

impl RedexKind {
    pub fn name(&self) -> String {
        match self {
            RedexKind::Beta => "Beta".into(),
            RedexKind::ProjPair => "ProjPair".into(),
            RedexKind::CaseInj => "CaseInj".into(),
            RedexKind::CasePerm => "CasePerm".into(),
            RedexKind::ParPerm(s) => format!("ParPerm({:?})", s),
            RedexKind::ParParPerm { component } => format!("ParParPerm({})", component),
            RedexKind::Activation => "Activation".into(),
            RedexKind::BasicCross { sender, receiver } => format!("BasicCross({}->{})", sender, receiver),
            RedexKind::FullCross => "FullCross".into(),
            RedexKind::GarbageCross { survivors } => {
                let s: Vec<String> = survivors.iter().map(|i| i.to_string()).collect();
                format!("GarbageCross({})", s.join(","))
            }
            RedexKind::BroadcastCross => "BroadcastCross".into(),
        }
    }

    pub fn group(&self) -> Group {
        match self {
            RedexKind::Beta | RedexKind::CaseInj => Group::One,
            RedexKind::ParPerm(_) | RedexKind::ParParPerm { .. } => Group::Other,
            _ => Group::Two,
        }
    }

    pub fn is_intuitionistic(&self) -> bool {
        matches!(self, RedexKind::Beta | RedexKind::ProjPair | RedexKind::CaseInj | RedexKind::CasePerm)
    }

    pub fn is_permutation(&self) -> bool {
        matches!(self, RedexKind::ParPerm(_) | RedexKind::ParParPerm { .. })
    }

    /// Activation and cross reductions.
    pub fn is_communication(&self) -> bool {
        matches!(
            self,
            RedexKind::Activation
                | RedexKind::BasicCross { .. }
                | RedexKind::FullCross
                | RedexKind::GarbageCross { .. }
                | RedexKind::BroadcastCross
        )
    }

    pub fn is_cross(&self) -> bool {
        self.is_communication() && *self != RedexKind::Activation
    }
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub position: Path,
    pub kind: RedexKind,
    pub complexity: usize,
    pub group: Group,
}

impl Redex {
    fn new(position: &Path, kind: RedexKind, complexity: usize) -> Redex {
        let group = kind.group();
        Redex { position: position.clone(), kind, complexity, group }
    }
}

/// `{rule, position, complexity, group}` listing entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RedexRecord {
    pub rule: String,
    pub position: Path,
    pub complexity: usize,
    pub group: Group,
}

impl From<&Redex> for RedexRecord {
    fn from(r: &Redex) -> RedexRecord {
        RedexRecord { rule: r.kind.name(), position: r.position.clone(), complexity: r.complexity, group: r.group }
    }
}

/// A channel occurrence inside one session component.
#[derive(Clone, Debug)]
pub(crate) struct Occurrence<'a> {
    /// Path from the (unmarked) component to the application `a t`, or to the bare channel.
    pub path: Path,
    pub arg: Option<&'a Term>,
    /// Variables bound on the way down, outermost first.
    pub bound: Vec<Var>,
}

impl Occurrence<'_> {
    /// Free variables of the message that are bound by the surrounding context, in binding order.
    pub fn context_vars(&self) -> Vec<Var> {
        let arg = match self.arg {
            Some(a) => a,
            None => return Vec::new(),
        };
        let fv = arg.free_vars();
        let mut picked: Vec<usize> = Vec::new();
        for v in &fv.vars {
            if let Some(k) = self.bound.iter().rposition(|b| b.name == v.name) {
                if !picked.contains(&k) {
                    picked.push(k);
                }
            }
        }
        picked.sort_unstable();
        picked.into_iter().map(|k| self.bound[k].clone()).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.context_vars().is_empty()
    }

    pub fn complexity(&self) -> usize {
        self.arg.map(value_complexity).unwrap_or(0)
    }
}

/// Free occurrences of channel `a` in `comp`, in depth-first left-to-right order. For a
/// non-bare component these are the applications `a t`; otherwise the bare channel terms.
pub(crate) fn occurrences<'a>(comp: &'a Term, a: &Name, bare: bool) -> Vec<Occurrence<'a>> {
    let mut out = Vec::new();
    collect_occ(comp.unmarked(), a, bare, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

fn collect_occ<'a>(
    t: &'a Term,
    a: &Name,
    bare: bool,
    path: &mut Path,
    bound: &mut Vec<Var>,
    out: &mut Vec<Occurrence<'a>>,
) {
    match t {
        Term::App(f, arg) if !bare && matches!(&**f, Term::Chan(c) if c.name == *a) => {
            out.push(Occurrence { path: path.clone(), arg: Some(arg), bound: bound.clone() });
            path.push(1);
            collect_occ(arg, a, bare, path, bound, out);
            path.pop();
        }
        Term::Chan(c) if c.name == *a => {
            if bare {
                out.push(Occurrence { path: path.clone(), arg: None, bound: bound.clone() });
            }
        }
        Term::Par(p) if p.chan == *a => {}
        Term::Lam(x, b) => {
            bound.push(x.clone());
            path.push(0);
            collect_occ(b, a, bare, path, bound, out);
            path.pop();
            bound.pop();
        }
        Term::Case { scrut, left, lbody, right, rbody } => {
            path.push(0);
            collect_occ(scrut, a, bare, path, bound, out);
            path.pop();
            for (i, (x, b)) in [(left, lbody), (right, rbody)].into_iter().enumerate() {
                bound.push(x.clone());
                path.push(i + 1);
                collect_occ(b, a, bare, path, bound, out);
                path.pop();
                bound.pop();
            }
        }
        _ => {
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                collect_occ(c, a, bare, path, bound, out);
                path.pop();
            }
        }
    }
}

/// Occurrences of the session channel in every component.
pub(crate) fn session_occurrences(p: &Par) -> Vec<Vec<Occurrence<'_>>> {
    p.comps.iter().enumerate().map(|(i, c)| occurrences(c, &p.chan, p.axiom.is_bare(i))).collect()
}

/// Largest complexity of a channel occurrence of the session.
pub fn communication_complexity(p: &Par) -> usize {
    session_occurrences(p).iter().flatten().map(|o| o.complexity()).max().unwrap_or(0)
}

fn parallel_child_shapes(t: &Term) -> Vec<PermShape> {
    let par = |c: &Term| c.is_parallel();
    let mut out = Vec::new();
    match t {
        Term::Lam(_, b) if par(b) => out.push(PermShape::Lam),
        Term::App(f, a) => {
            if par(f) {
                out.push(PermShape::Fun);
            }
            if par(a) {
                out.push(PermShape::Arg);
            }
        }
        Term::Pair(a, b) => {
            if par(a) {
                out.push(PermShape::PairLeft);
            }
            if par(b) {
                out.push(PermShape::PairRight);
            }
        }
        Term::Proj(a, _) if par(a) => out.push(PermShape::Proj),
        Term::Inj(_, _, a) if par(a) => out.push(PermShape::Inj),
        Term::Efq(_, a) if par(a) => out.push(PermShape::Efq),
        Term::Case { scrut, lbody, rbody, .. } => {
            if par(scrut) {
                out.push(PermShape::Scrutinee);
            }
            if par(lbody) {
                out.push(PermShape::BranchLeft);
            }
            if par(rbody) {
                out.push(PermShape::BranchRight);
            }
        }
        _ => {}
    }
    out
}

/// The case term a one-element stack is applied to, if `t` is a case permutation redex.
pub(crate) fn case_perm_head(t: &Term) -> Option<&Term> {
    let inner = match t {
        Term::App(f, _) => f,
        Term::Proj(a, _) => a,
        Term::Case { scrut, .. } => scrut,
        Term::Efq(_, a) => a,
        _ => return None,
    };
    matches!(&**inner, Term::Case { .. }).then_some(&**inner)
}

/// Redexes whose pattern is rooted at `t`, found at `path`.
pub fn redexes_at(t: &Term, path: &Path) -> Vec<Redex> {
    let mut out = Vec::new();
    match t {
        Term::App(f, _) if matches!(&**f, Term::Lam(..)) => {
            let c = type_of(f).map(|ty| ty.complexity()).unwrap_or(0);
            out.push(Redex::new(path, RedexKind::Beta, c));
        }
        Term::Proj(a, _) if matches!(&**a, Term::Pair(..)) => {
            out.push(Redex::new(path, RedexKind::ProjPair, value_complexity(a)));
        }
        Term::Case { scrut, .. } if matches!(&**scrut, Term::Inj(..)) => {
            if let Term::Inj(_, ty, _) = &**scrut {
                out.push(Redex::new(path, RedexKind::CaseInj, ty.complexity()));
            }
        }
        _ => {}
    }
    if let Some(head) = case_perm_head(t) {
        out.push(Redex::new(path, RedexKind::CasePerm, value_complexity(head)));
    }
    for shape in parallel_child_shapes(t) {
        out.push(Redex::new(path, RedexKind::ParPerm(shape), 0));
    }
    if let Term::Par(p) = t {
        session_redexes(p, path, &mut out);
    }
    out
}

fn session_redexes(p: &Par, path: &Path, out: &mut Vec<Redex>) {
    let occ = session_occurrences(p);
    let complexity = occ.iter().flatten().map(|o| o.complexity()).max().unwrap_or(0);
    let survivors: Vec<usize> = (0..p.comps.len()).filter(|&i| occ[i].is_empty()).collect();
    if !p.active {
        let activable = occ.iter().flatten().any(|o| o.arg.is_some_and(|w| w.is_simply_typed() && is_value(w)));
        if activable {
            out.push(Redex::new(path, RedexKind::Activation, complexity));
        }
        if !survivors.is_empty() {
            out.push(Redex::new(path, RedexKind::GarbageCross { survivors }, complexity));
        }
        return;
    }
    if !p.comps.iter().any(|c| c.contains_active_session()) {
        for (i, c) in p.comps.iter().enumerate() {
            if c.unmarked().is_parallel() {
                out.push(Redex::new(path, RedexKind::ParParPerm { component: i }, 0));
            }
        }
    }
    if !survivors.is_empty() {
        out.push(Redex::new(path, RedexKind::GarbageCross { survivors }, complexity));
        return;
    }
    if !p.comps.iter().all(|c| c.unmarked().is_simply_typed()) {
        return;
    }
    let message = |i: usize| occ[i].last().expect("every component mentions the channel");
    match p.axiom.mode() {
        AxiomMode::Em | AxiomMode::Broadcast(_) => {
            let sender = message(0);
            if sender.arg.is_none() {
                return;
            }
            let kind = if !sender.is_closed() {
                RedexKind::FullCross
            } else if matches!(p.axiom.mode(), AxiomMode::Em) {
                RedexKind::BasicCross { sender: 0, receiver: 1 }
            } else {
                RedexKind::BroadcastCross
            };
            out.push(Redex::new(path, kind, complexity));
        }
        AxiomMode::General => {
            let m = p.comps.len();
            let mut any_open = false;
            for i in 0..m {
                if !message(i).is_closed() {
                    any_open = true;
                    continue;
                }
                for j in 0..m {
                    if p.axiom.source(j) == Some(i) {
                        out.push(Redex::new(path, RedexKind::BasicCross { sender: i, receiver: j }, complexity));
                    }
                }
            }
            if any_open {
                out.push(Redex::new(path, RedexKind::FullCross, complexity));
            }
        }
    }
}

/// Every redex of `t`, in leftmost-outermost (preorder) order.
pub fn find_redexes(t: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk(t, &mut path, &mut out);
    out
}

fn walk(t: &Term, path: &mut Path, out: &mut Vec<Redex>) {
    out.extend(redexes_at(t, path));
    for (i, c) in t.children().into_iter().enumerate() {
        path.push(i);
        walk(c, path, out);
        path.pop();
    }
}

/// Redex complexity as defined for each kind, recomputed from the host term.
pub fn redex_complexity(r: &Redex, host: &Term) -> Option<usize> {
    let node = host.at(&r.position)?;
    redexes_at(node, &r.position).into_iter().find(|q| q.kind == r.kind).map(|q| q.complexity)
}

/// True when `t` has no redex under any rule.
pub fn is_normal(t: &Term) -> bool {
    find_redexes(t).is_empty()
}

/// `B`, the conjunction of the types of `ys`.
pub(crate) fn conj_of(ys: &[Var]) -> Formula {
    Formula::conjoin(&ys.iter().map(|y| y.ty.clone()).collect::<Vec<_>>())
}
