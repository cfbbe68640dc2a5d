use std::collections::HashSet;

use thiserror::Error;

use crate::syntax::{Chan, Formula, Name, NameSupply, Par, Term, Var};
use crate::typing::type_of;

/// What a substitution replaces: free intuitionistic variables or free channel occurrences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Var(Name),
    Chan(Name),
}

/// Simultaneous capture-avoiding substitution. Binders that would capture a free name of a
/// replacement are renamed with names from `supply`.
pub fn substitute(t: &Term, map: &[(Target, Term)], supply: &mut NameSupply) -> Term {
    let mut fv: HashSet<Name> = HashSet::new();
    for (_, v) in map {
        fv.extend(v.free_names());
    }
    let active: Vec<&(Target, Term)> = map.iter().collect();
    go(t, &active, &fv, supply)
}

fn go(t: &Term, map: &[&(Target, Term)], fv: &HashSet<Name>, supply: &mut NameSupply) -> Term {
    if map.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(v) => map
            .iter()
            .find(|(k, _)| matches!(k, Target::Var(n) if *n == v.name))
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| t.clone()),
        Term::Chan(c) => map
            .iter()
            .find(|(k, _)| matches!(k, Target::Chan(n) if *n == c.name))
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| t.clone()),
        Term::Unit => Term::Unit,
        Term::Lam(x, b) => {
            let (x, b) = under_var_binder(x, b, map, fv, supply);
            Term::Lam(x, Box::new(b))
        }
        Term::Case { scrut, left, lbody, right, rbody } => {
            let scrut = go(scrut, map, fv, supply);
            let (left, lbody) = under_var_binder(left, lbody, map, fv, supply);
            let (right, rbody) = under_var_binder(right, rbody, map, fv, supply);
            Term::case(scrut, left, lbody, right, rbody)
        }
        Term::Par(p) => {
            let inner: Vec<&(Target, Term)> =
                map.iter().copied().filter(|(k, _)| *k != Target::Chan(p.chan.clone())).collect();
            let mut chan = p.chan.clone();
            let mut comps: Vec<Term> = p.comps.clone();
            if fv.contains(&chan) && !inner.is_empty() {
                let fresh = supply.fresh(chan.as_str());
                comps = comps.iter().map(|c| rename_chan(c, &chan, &fresh, p.active)).collect();
                chan = fresh;
            }
            let comps = comps.iter().map(|c| go(c, &inner, fv, supply)).collect();
            Term::Par(Par { chan, active: p.active, axiom: p.axiom.clone(), comps })
        }
        Term::App(a, b) => Term::app(go(a, map, fv, supply), go(b, map, fv, supply)),
        Term::Pair(a, b) => Term::pair(go(a, map, fv, supply), go(b, map, fv, supply)),
        Term::Contract(a, b) => Term::contract(go(a, map, fv, supply), go(b, map, fv, supply)),
        Term::Proj(a, i) => Term::proj(go(a, map, fv, supply), *i),
        Term::Inj(i, ty, a) => Term::inj(*i, ty.clone(), go(a, map, fv, supply)),
        Term::Efq(p, a) => Term::efq(p.clone(), go(a, map, fv, supply)),
        Term::Mark(a) => Term::mark(go(a, map, fv, supply)),
    }
}

fn under_var_binder(
    x: &Var,
    body: &Term,
    map: &[&(Target, Term)],
    fv: &HashSet<Name>,
    supply: &mut NameSupply,
) -> (Var, Term) {
    let inner: Vec<&(Target, Term)> =
        map.iter().copied().filter(|(k, _)| *k != Target::Var(x.name.clone())).collect();
    if inner.is_empty() {
        return (x.clone(), body.clone());
    }
    if fv.contains(&x.name) {
        let fresh = Var { name: supply.fresh(x.name.as_str()), ty: x.ty.clone() };
        let renamed = rename_var(body, &x.name, &fresh);
        (fresh, go(&renamed, &inner, fv, supply))
    } else {
        (x.clone(), go(body, &inner, fv, supply))
    }
}

/// Renames free occurrences of the variable `from` to `to` (which must be fresh).
pub fn rename_var(t: &Term, from: &Name, to: &Var) -> Term {
    match t {
        Term::Var(v) if v.name == *from => Term::Var(Var { name: to.name.clone(), ty: v.ty.clone() }),
        Term::Lam(x, _) if x.name == *from => t.clone(),
        Term::Case { scrut, left, lbody, right, rbody } => Term::case(
            rename_var(scrut, from, to),
            left.clone(),
            if left.name == *from { (**lbody).clone() } else { rename_var(lbody, from, to) },
            right.clone(),
            if right.name == *from { (**rbody).clone() } else { rename_var(rbody, from, to) },
        ),
        _ => map_children(t, |c| rename_var(c, from, to)),
    }
}

/// Renames free occurrences of channel `from` to `to`, setting their activity flag.
pub fn rename_chan(t: &Term, from: &Name, to: &Name, active: bool) -> Term {
    match t {
        Term::Chan(c) if c.name == *from => Term::Chan(Chan { name: to.clone(), ty: c.ty.clone(), active }),
        Term::Par(p) if p.chan == *from => t.clone(),
        _ => map_children(t, |c| rename_chan(c, from, to, active)),
    }
}

/// Rebuilds `t` with `f` applied to each child.
pub fn map_children(t: &Term, mut f: impl FnMut(&Term) -> Term) -> Term {
    match t {
        Term::Var(_) | Term::Chan(_) | Term::Unit => t.clone(),
        Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(f(b))),
        Term::App(a, b) => Term::app(f(a), f(b)),
        Term::Pair(a, b) => Term::pair(f(a), f(b)),
        Term::Contract(a, b) => Term::contract(f(a), f(b)),
        Term::Proj(a, i) => Term::proj(f(a), *i),
        Term::Inj(i, ty, a) => Term::inj(*i, ty.clone(), f(a)),
        Term::Efq(p, a) => Term::efq(p.clone(), f(a)),
        Term::Mark(a) => Term::mark(f(a)),
        Term::Case { scrut, left, lbody, right, rbody } => {
            Term::case(f(scrut), left.clone(), f(lbody), right.clone(), f(rbody))
        }
        Term::Par(p) => Term::Par(Par {
            chan: p.chan.clone(),
            active: p.active,
            axiom: p.axiom.clone(),
            comps: p.comps.iter().map(f).collect(),
        }),
    }
}

/// `u[v/x]`.
pub fn subst_var(u: &Term, x: &Name, v: &Term, supply: &mut NameSupply) -> Term {
    substitute(u, &[(Target::Var(x.clone()), v.clone())], supply)
}

/// `u[v/a]` for a bare channel `a`.
pub fn subst_chan(u: &Term, a: &Name, v: &Term, supply: &mut NameSupply) -> Term {
    substitute(u, &[(Target::Chan(a.clone()), v.clone())], supply)
}

/// The `k`-th of `n` projections of a right-nested tuple: `π1^k π0`, the last being `π1^(n-1)`.
pub fn projection(v: &Term, k: usize, n: usize) -> Term {
    let mut t = v.clone();
    for _ in 0..k {
        t = Term::proj(t, 1);
    }
    if k + 1 < n {
        t = Term::proj(t, 0);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("substituted term has type {found}, expected {expected}")]
    TypeMismatch { expected: Formula, found: Formula },
    #[error("substituted term cannot be typed")]
    Untyped,
}

/// `u^{v/ys}`: each `ys[k]` replaced by the `k`-th projection of `v`, simultaneously.
pub fn multiple_subst(u: &Term, ys: &[Var], v: &Term, supply: &mut NameSupply) -> Result<Term, SubstError> {
    let expected = Formula::conjoin(&ys.iter().map(|y| y.ty.clone()).collect::<Vec<_>>());
    let found = type_of(v).ok_or(SubstError::Untyped)?;
    if found != expected {
        return Err(SubstError::TypeMismatch { expected, found });
    }
    let n = ys.len();
    let map: Vec<(Target, Term)> =
        ys.iter().enumerate().map(|(k, y)| (Target::Var(y.name.clone()), projection(v, k, n))).collect();
    Ok(substitute(u, &map, supply))
}
