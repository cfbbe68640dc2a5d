use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::axiom::ValidatedAxiom;
use super::formula::{Formula, Name};

/// A position in a term: the child indices followed from the root.
///
/// Child numbering: `Lam` body 0; `App` function 0, argument 1; `Pair` 0 and 1; `Proj`, `Inj`,
/// `Efq`, `Mark` 0; `Case` scrutinee 0, left branch 1, right branch 2; `Par` component `i` is
/// child `i`; `Contract` 0 and 1.
pub type Path = Vec<usize>;

/// An intuitionistic variable with its type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Name,
    pub ty: Formula,
}

impl Var {
    pub fn new(name: &str, ty: Formula) -> Var {
        Var { name: Name::new(name), ty }
    }
}

/// A channel occurrence. `ty` is the occurrence type dictated by the enclosing component.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chan {
    pub name: Name,
    pub ty: Formula,
    pub active: bool,
}

/// A session `nu a:AX. [u1 || ... || um]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Par {
    pub chan: Name,
    pub active: bool,
    pub axiom: Arc<ValidatedAxiom>,
    pub comps: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Chan(Chan),
    /// `tt : Top`.
    Unit,
    Lam(Var, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Proj(Box<Term>, u8),
    /// `inj_i[A \/ B](t)`; the formula is the whole disjunction.
    Inj(u8, Formula, Box<Term>),
    Case {
        scrut: Box<Term>,
        left: Var,
        lbody: Box<Term>,
        right: Var,
        rbody: Box<Term>,
    },
    Efq(Formula, Box<Term>),
    Par(Par),
    /// Contraction `t1 |+| t2`.
    Contract(Box<Term>, Box<Term>),
    /// Underline marker on a session component.
    Mark(Box<Term>),
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn lam(x: Var, body: Term) -> Term {
        Term::Lam(x, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn proj(t: Term, i: u8) -> Term {
        Term::Proj(Box::new(t), i)
    }

    pub fn inj(i: u8, ty: Formula, t: Term) -> Term {
        Term::Inj(i, ty, Box::new(t))
    }

    pub fn case(scrut: Term, left: Var, lbody: Term, right: Var, rbody: Term) -> Term {
        Term::Case {
            scrut: Box::new(scrut),
            left,
            lbody: Box::new(lbody),
            right,
            rbody: Box::new(rbody),
        }
    }

    pub fn efq(target: Formula, t: Term) -> Term {
        Term::Efq(target, Box::new(t))
    }

    pub fn contract(a: Term, b: Term) -> Term {
        Term::Contract(Box::new(a), Box::new(b))
    }

    /// Right-nested contraction of a non-empty list.
    pub fn contract_all(mut parts: Vec<Term>) -> Term {
        let mut acc = parts.pop().expect("contraction of an empty list");
        while let Some(p) = parts.pop() {
            acc = Term::contract(p, acc);
        }
        acc
    }

    pub fn mark(t: Term) -> Term {
        Term::Mark(Box::new(t))
    }

    /// Right-nested tuple; the empty tuple is `tt`.
    pub fn tuple(parts: Vec<Term>) -> Term {
        let mut parts = parts;
        match parts.len() {
            0 => Term::Unit,
            1 => parts.pop().unwrap(),
            _ => {
                let rest = parts.split_off(1);
                Term::pair(parts.pop().unwrap(), Term::tuple(rest))
            }
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Chan(_) | Term::Unit => vec![],
            Term::Lam(_, b) | Term::Proj(b, _) | Term::Inj(_, _, b) | Term::Efq(_, b) | Term::Mark(b) => {
                vec![b]
            }
            Term::App(a, b) | Term::Pair(a, b) | Term::Contract(a, b) => vec![a, b],
            Term::Case { scrut, lbody, rbody, .. } => vec![scrut, lbody, rbody],
            Term::Par(p) => p.comps.iter().collect(),
        }
    }

    pub fn child(&self, i: usize) -> Option<&Term> {
        match (self, i) {
            (Term::Lam(_, b), 0)
            | (Term::Proj(b, _), 0)
            | (Term::Inj(_, _, b), 0)
            | (Term::Efq(_, b), 0)
            | (Term::Mark(b), 0) => Some(b),
            (Term::App(a, _), 0) | (Term::Pair(a, _), 0) | (Term::Contract(a, _), 0) => Some(a),
            (Term::App(_, b), 1) | (Term::Pair(_, b), 1) | (Term::Contract(_, b), 1) => Some(b),
            (Term::Case { scrut, .. }, 0) => Some(scrut),
            (Term::Case { lbody, .. }, 1) => Some(lbody),
            (Term::Case { rbody, .. }, 2) => Some(rbody),
            (Term::Par(p), i) => p.comps.get(i),
            _ => None,
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut Term> {
        match (self, i) {
            (Term::Lam(_, b), 0)
            | (Term::Proj(b, _), 0)
            | (Term::Inj(_, _, b), 0)
            | (Term::Efq(_, b), 0)
            | (Term::Mark(b), 0) => Some(b),
            (Term::App(a, _), 0) | (Term::Pair(a, _), 0) | (Term::Contract(a, _), 0) => Some(a),
            (Term::App(_, b), 1) | (Term::Pair(_, b), 1) | (Term::Contract(_, b), 1) => Some(b),
            (Term::Case { scrut, .. }, 0) => Some(scrut),
            (Term::Case { lbody, .. }, 1) => Some(lbody),
            (Term::Case { rbody, .. }, 2) => Some(rbody),
            (Term::Par(p), i) => p.comps.get_mut(i),
            _ => None,
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        let mut t = self;
        for &i in path {
            t = t.child(i)?;
        }
        Some(t)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        let mut t = self;
        for &i in path {
            t = t.child_mut(i)?;
        }
        Some(t)
    }

    /// Replaces the subterm at `path`, without any renaming.
    pub fn replace_at(&mut self, path: &[usize], new: Term) -> Option<Term> {
        let slot = self.at_mut(path)?;
        Some(std::mem::replace(slot, new))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Removes an underline marker, if any.
    pub fn unmarked(&self) -> &Term {
        match self {
            Term::Mark(t) => t,
            t => t,
        }
    }

    pub fn into_unmarked(self) -> Term {
        match self {
            Term::Mark(t) => *t,
            t => t,
        }
    }

    /// The term with every underline removed.
    pub fn erase_marks(&self) -> Term {
        let mut t = self.unmarked().clone();
        t.erase_marks_in_place();
        t
    }

    fn erase_marks_in_place(&mut self) {
        let mut i = 0;
        while let Some(c) = self.child_mut(i) {
            if c.is_marked() {
                let inner = std::mem::replace(c, Term::Unit);
                *c = inner.into_unmarked();
            }
            c.erase_marks_in_place();
            i += 1;
        }
    }

    pub fn is_marked(&self) -> bool {
        matches!(self, Term::Mark(_))
    }

    /// Session or contraction node.
    pub fn is_parallel(&self) -> bool {
        matches!(self, Term::Par(_) | Term::Contract(..))
    }

    /// No sessions, contractions or markers anywhere inside.
    pub fn is_simply_typed(&self) -> bool {
        match self {
            Term::Par(_) | Term::Contract(..) | Term::Mark(_) => false,
            t => t.children().iter().all(|c| c.is_simply_typed()),
        }
    }

    /// Some descendant (or the node itself) is an active session.
    pub fn contains_active_session(&self) -> bool {
        match self {
            Term::Par(p) if p.active => true,
            t => t.children().iter().any(|c| c.contains_active_session()),
        }
    }

    /// Free occurrence of the channel `a`.
    pub fn mentions_chan(&self, a: &Name) -> bool {
        match self {
            Term::Chan(c) => &c.name == a,
            Term::Par(p) if &p.chan == a => false,
            t => t.children().iter().any(|c| c.mentions_chan(a)),
        }
    }

    /// Free occurrence of the intuitionistic variable `x`.
    pub fn mentions_var(&self, x: &Name) -> bool {
        match self {
            Term::Var(v) => &v.name == x,
            Term::Lam(y, b) => &y.name != x && b.mentions_var(x),
            Term::Case { scrut, left, lbody, right, rbody } => {
                scrut.mentions_var(x)
                    || (&left.name != x && lbody.mentions_var(x))
                    || (&right.name != x && rbody.mentions_var(x))
            }
            t => t.children().iter().any(|c| c.mentions_var(x)),
        }
    }

    pub fn free_vars(&self) -> FreeVars {
        let mut fv = FreeVars::default();
        collect_free(self, &mut Vec::new(), &mut Vec::new(), &mut fv);
        fv
    }

    /// Names of free variables and free channels together.
    pub fn free_names(&self) -> HashSet<Name> {
        let fv = self.free_vars();
        fv.vars.into_iter().map(|v| v.name).chain(fv.chans).collect()
    }

    /// Every name occurring anywhere: free, bound, or at a binder.
    pub fn all_names(&self, out: &mut HashSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.name.clone());
            }
            Term::Chan(c) => {
                out.insert(c.name.clone());
            }
            Term::Lam(x, _) => {
                out.insert(x.name.clone());
            }
            Term::Case { left, right, .. } => {
                out.insert(left.name.clone());
                out.insert(right.name.clone());
            }
            Term::Par(p) => {
                out.insert(p.chan.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.all_names(out);
        }
    }
}

/// Free intuitionistic variables and free channel names of a term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub vars: BTreeSet<Var>,
    pub chans: BTreeSet<Name>,
}

impl FreeVars {
    pub fn is_subset(&self, other: &FreeVars) -> bool {
        self.vars.is_subset(&other.vars) && self.chans.is_subset(&other.chans)
    }
}

fn collect_free(t: &Term, vars: &mut Vec<Name>, chans: &mut Vec<Name>, out: &mut FreeVars) {
    match t {
        Term::Var(v) => {
            if !vars.contains(&v.name) {
                out.vars.insert(v.clone());
            }
        }
        Term::Chan(c) => {
            if !chans.contains(&c.name) {
                out.chans.insert(c.name.clone());
            }
        }
        Term::Lam(x, b) => {
            vars.push(x.name.clone());
            collect_free(b, vars, chans, out);
            vars.pop();
        }
        Term::Case { scrut, left, lbody, right, rbody } => {
            collect_free(scrut, vars, chans, out);
            vars.push(left.name.clone());
            collect_free(lbody, vars, chans, out);
            vars.pop();
            vars.push(right.name.clone());
            collect_free(rbody, vars, chans, out);
            vars.pop();
        }
        Term::Par(p) => {
            chans.push(p.chan.clone());
            for c in &p.comps {
                collect_free(c, vars, chans, out);
            }
            chans.pop();
        }
        t => {
            for c in t.children() {
                collect_free(c, vars, chans, out);
            }
        }
    }
}

/// Fresh-name supply. Seeded with the names of a term, it never hands out one of them.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    used: HashSet<Name>,
    counter: u64,
}

impl NameSupply {
    pub fn new() -> NameSupply {
        NameSupply::default()
    }

    pub fn seeded(t: &Term) -> NameSupply {
        let mut s = NameSupply::new();
        s.reserve_term(t);
        s
    }

    pub fn reserve_term(&mut self, t: &Term) {
        t.all_names(&mut self.used);
    }

    pub fn reserve(&mut self, n: &Name) {
        self.used.insert(n.clone());
    }

    pub fn is_used(&self, n: &Name) -> bool {
        self.used.contains(n)
    }

    /// A new name built from `hint` with its trailing digits replaced by a counter.
    pub fn fresh(&mut self, hint: &str) -> Name {
        let base = hint.trim_end_matches(|c: char| c.is_ascii_digit());
        let base = if base.is_empty() { "v" } else { base };
        loop {
            self.counter += 1;
            let candidate = Name::new(&format!("{}{}", base, self.counter));
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

/// Equality up to consistent renaming of bound variables and channels.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    alpha(t, u, &mut Vec::new())
}

fn lookup(env: &[(Name, Name)], l: &Name, r: &Name) -> bool {
    let li = env.iter().rposition(|(a, _)| a == l);
    let ri = env.iter().rposition(|(_, b)| b == r);
    match (li, ri) {
        (None, None) => l == r,
        (Some(i), Some(j)) => i == j,
        _ => false,
    }
}

fn alpha(t: &Term, u: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    match (t, u) {
        (Term::Var(a), Term::Var(b)) => a.ty == b.ty && lookup(env, &a.name, &b.name),
        (Term::Chan(a), Term::Chan(b)) => {
            a.ty == b.ty && a.active == b.active && lookup(env, &a.name, &b.name)
        }
        (Term::Unit, Term::Unit) => true,
        (Term::Lam(x, b1), Term::Lam(y, b2)) => {
            if x.ty != y.ty {
                return false;
            }
            env.push((x.name.clone(), y.name.clone()));
            let ok = alpha(b1, b2, env);
            env.pop();
            ok
        }
        (Term::App(a1, b1), Term::App(a2, b2))
        | (Term::Pair(a1, b1), Term::Pair(a2, b2))
        | (Term::Contract(a1, b1), Term::Contract(a2, b2)) => alpha(a1, a2, env) && alpha(b1, b2, env),
        (Term::Proj(a, i), Term::Proj(b, j)) => i == j && alpha(a, b, env),
        (Term::Inj(i, f, a), Term::Inj(j, g, b)) => i == j && f == g && alpha(a, b, env),
        (Term::Efq(f, a), Term::Efq(g, b)) => f == g && alpha(a, b, env),
        (Term::Mark(a), Term::Mark(b)) => alpha(a, b, env),
        (
            Term::Case { scrut: s1, left: l1, lbody: lb1, right: r1, rbody: rb1 },
            Term::Case { scrut: s2, left: l2, lbody: lb2, right: r2, rbody: rb2 },
        ) => {
            if l1.ty != l2.ty || r1.ty != r2.ty || !alpha(s1, s2, env) {
                return false;
            }
            env.push((l1.name.clone(), l2.name.clone()));
            let ok = alpha(lb1, lb2, env);
            env.pop();
            if !ok {
                return false;
            }
            env.push((r1.name.clone(), r2.name.clone()));
            let ok = alpha(rb1, rb2, env);
            env.pop();
            ok
        }
        (Term::Par(p), Term::Par(q)) => {
            if p.active != q.active || p.axiom != q.axiom || p.comps.len() != q.comps.len() {
                return false;
            }
            env.push((p.chan.clone(), q.chan.clone()));
            let ok = p.comps.iter().zip(&q.comps).all(|(a, b)| alpha(a, b, env));
            env.pop();
            ok
        }
        _ => false,
    }
}
