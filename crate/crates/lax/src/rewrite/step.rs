use std::sync::Arc;

use thiserror::Error;

use super::redex::{conj_of, redexes_at, session_occurrences, Occurrence, Redex, RedexKind};
use super::subst::{multiple_subst, rename_chan, subst_chan, subst_var, SubstError};
use crate::syntax::{AxiomMode, AxiomScheme, Chan, Formula, NameSupply, Par, Path, Term, Var};
use crate::typing::{show_path, validate_axiom, AxiomError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no {rule} redex at {}", show_path(.position))]
    InvalidRedex { position: Path, rule: String },
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("minted axiom is invalid: {0}")]
    Axiom(#[from] AxiomError),
}

/// Contracts `r` inside `t`. Fresh names are drawn from a supply seeded with every name of
/// `t`, so the result depends only on `t` and `r`.
pub fn step(t: &Term, r: &Redex) -> Result<Term, StepError> {
    let invalid = || StepError::InvalidRedex { position: r.position.clone(), rule: r.kind.name() };
    let node = t.at(&r.position).ok_or_else(invalid)?;
    if !redexes_at(node, &r.position).iter().any(|q| q.kind == r.kind) {
        return Err(invalid());
    }
    let mut supply = NameSupply::seeded(t);
    let contractum = contract(node, &r.kind, &mut supply)?;
    let mut out = t.clone();
    out.replace_at(&r.position, contractum);
    Ok(out)
}

/// Contractum of a redex rooted at `node`. The caller guarantees the pattern matches.
pub fn contract(node: &Term, kind: &RedexKind, supply: &mut NameSupply) -> Result<Term, StepError> {
    Ok(match kind {
        RedexKind::Beta => match node {
            Term::App(f, a) => match &**f {
                Term::Lam(x, b) => subst_var(b, &x.name, a, supply),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        },
        RedexKind::ProjPair => match node {
            Term::Proj(p, i) => match &**p {
                Term::Pair(a, b) => (**if *i == 0 { a } else { b }).clone(),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        },
        RedexKind::CaseInj => match node {
            Term::Case { scrut, left, lbody, right, rbody } => match &**scrut {
                Term::Inj(0, _, v) => subst_var(lbody, &left.name, v, supply),
                Term::Inj(_, _, v) => subst_var(rbody, &right.name, v, supply),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        },
        RedexKind::CasePerm => case_perm(node, supply),
        RedexKind::ParPerm(shape) => par_perm(node, shape.child(), supply),
        RedexKind::ParParPerm { component } => par_par_perm(session(node), *component, supply),
        RedexKind::Activation => {
            let p = session(node);
            let fresh = supply.fresh(p.chan.as_str());
            Term::Par(Par {
                chan: fresh.clone(),
                active: true,
                axiom: p.axiom.clone(),
                comps: p.comps.iter().map(|c| rename_chan(c, &p.chan, &fresh, true)).collect(),
            })
        }
        RedexKind::GarbageCross { survivors } => {
            let p = session(node);
            Term::contract_all(survivors.iter().map(|&i| p.comps[i].unmarked().clone()).collect())
        }
        RedexKind::BasicCross { sender, receiver } => {
            let p = session(node);
            match p.axiom.mode() {
                AxiomMode::Em => em_basic(p, &[*receiver], supply),
                _ => general_basic(p, *sender, *receiver),
            }
        }
        RedexKind::BroadcastCross => {
            let p = session(node);
            em_basic(p, &(1..p.comps.len()).collect::<Vec<_>>(), supply)
        }
        RedexKind::FullCross => {
            let p = session(node);
            match p.axiom.mode() {
                AxiomMode::General => general_full(p, supply)?,
                _ => em_full(p, supply)?,
            }
        }
    })
}

fn session(node: &Term) -> &Par {
    match node {
        Term::Par(p) => p,
        _ => unreachable!("session rule on a non-session node"),
    }
}

fn with_child(node: &Term, k: usize, new: Term) -> Term {
    let mut out = node.clone();
    *out.child_mut(k).expect("child exists") = new;
    out
}

fn remark(marked: bool, t: Term) -> Term {
    if marked {
        Term::mark(t)
    } else {
        t
    }
}

fn case_perm(node: &Term, supply: &mut NameSupply) -> Term {
    let head = node.child(0).expect("frame over a case");
    let (scrut, left, lbody, right, rbody) = match head {
        Term::Case { scrut, left, lbody, right, rbody } => (scrut, left, lbody, right, rbody),
        _ => unreachable!(),
    };
    let frame_names = with_child(node, 0, Term::Unit).free_names();
    let mut branch = |x: &Var, body: &Term| {
        if frame_names.contains(&x.name) {
            let fresh = Var { name: supply.fresh(x.name.as_str()), ty: x.ty.clone() };
            let body = super::subst::rename_var(body, &x.name, &fresh);
            (fresh.clone(), with_child(node, 0, body))
        } else {
            (x.clone(), with_child(node, 0, body.clone()))
        }
    };
    let (l, lb) = branch(left, lbody);
    let (r, rb) = branch(right, rbody);
    Term::case((**scrut).clone(), l, lb, r, rb)
}

fn par_perm(node: &Term, k: usize, supply: &mut NameSupply) -> Term {
    match node.child(k).expect("parallel child") {
        Term::Contract(l, r) => {
            Term::contract(with_child(node, k, (**l).clone()), with_child(node, k, (**r).clone()))
        }
        Term::Par(p) => {
            let rest = with_child(node, k, Term::Unit);
            let (chan, comps) = if rest.mentions_chan(&p.chan) {
                let fresh = supply.fresh(p.chan.as_str());
                (fresh.clone(), p.comps.iter().map(|c| rename_chan(c, &p.chan, &fresh, p.active)).collect())
            } else {
                (p.chan.clone(), p.comps.clone())
            };
            let comps = comps
                .into_iter()
                .map(|c| {
                    let marked = c.is_marked();
                    remark(marked, with_child(node, k, c.into_unmarked()))
                })
                .collect();
            Term::Par(Par { chan, active: p.active, axiom: p.axiom.clone(), comps })
        }
        _ => unreachable!("permutation without a parallel child"),
    }
}

fn par_par_perm(outer: &Par, i: usize, supply: &mut NameSupply) -> Term {
    let marked = outer.comps[i].is_marked();
    let replace = |w: Term| {
        let mut comps = outer.comps.clone();
        comps[i] = remark(marked, w);
        Term::Par(Par { chan: outer.chan.clone(), active: outer.active, axiom: outer.axiom.clone(), comps })
    };
    match outer.comps[i].unmarked() {
        Term::Contract(l, r) => Term::contract(replace((**l).clone()), replace((**r).clone())),
        Term::Par(q) => {
            let clash = outer.comps.iter().enumerate().any(|(l, u)| l != i && u.mentions_chan(&q.chan));
            let (chan, comps) = if clash {
                let fresh = supply.fresh(q.chan.as_str());
                (fresh.clone(), q.comps.iter().map(|c| rename_chan(c, &q.chan, &fresh, q.active)).collect())
            } else {
                (q.chan.clone(), q.comps.clone())
            };
            let comps = comps
                .into_iter()
                .map(|w| {
                    let inner_marked = w.is_marked();
                    remark(inner_marked, replace(w.into_unmarked()))
                })
                .collect();
            Term::Par(Par { chan, active: q.active, axiom: q.axiom.clone(), comps })
        }
        _ => unreachable!("component is not parallel"),
    }
}

fn last_occurrence<'a>(occ: &'a [Vec<Occurrence<'a>>], i: usize) -> &'a Occurrence<'a> {
    occ[i].last().expect("every component mentions the channel")
}

/// Replaces the subterm at `path` inside a (possibly marked) component.
fn replace_in_comp(comp: &Term, path: &Path, new: Term) -> Term {
    let marked = comp.is_marked();
    let mut inner = comp.unmarked().clone();
    inner.replace_at(path, new);
    remark(marked, inner)
}

fn em_basic(p: &Par, receivers: &[usize], supply: &mut NameSupply) -> Term {
    let occ = session_occurrences(p);
    let u = last_occurrence(&occ, 0).arg.expect("sender occurrence carries a message");
    Term::contract_all(
        receivers.iter().map(|&k| subst_chan(p.comps[k].unmarked(), &p.chan, u, supply)).collect(),
    )
}

fn general_basic(p: &Par, sender: usize, receiver: usize) -> Term {
    let occ = session_occurrences(p);
    let t = last_occurrence(&occ, sender).arg.expect("message").clone();
    let target = last_occurrence(&occ, receiver).path.clone();
    let mut comps = p.comps.clone();
    let sender_marked = comps[sender].is_marked();
    let received = replace_in_comp(&comps[receiver], &target, t);
    comps[receiver] = if sender_marked { Term::mark(received.into_unmarked()) } else { received };
    if sender_marked {
        comps[sender] = comps[sender].clone().into_unmarked();
    }
    Term::Par(Par { chan: p.chan.clone(), active: p.active, axiom: p.axiom.clone(), comps })
}

fn chan(name: &crate::syntax::Name, ty: Formula) -> Term {
    Term::Chan(Chan { name: name.clone(), ty, active: false })
}

fn em_full(p: &Par, supply: &mut NameSupply) -> Result<Term, StepError> {
    let occ = session_occurrences(p);
    let sender = last_occurrence(&occ, 0);
    let u = sender.arg.expect("message");
    let ys = sender.context_vars();
    let b_ty = conj_of(&ys);
    let b = supply.fresh("b");
    let call = Term::app(chan(&b, Formula::not(b_ty.clone())), Term::tuple(ys.iter().map(Term::var).collect()));
    let mut inner_comps = p.comps.clone();
    inner_comps[0] = replace_in_comp(&p.comps[0], &sender.path, call);
    let inner = Term::Par(Par { chan: p.chan.clone(), active: true, axiom: p.axiom.clone(), comps: inner_comps });
    let sent = multiple_subst(u, &ys, &chan(&b, b_ty.clone()), supply)?;
    let mut comps = vec![inner];
    for d in &p.comps[1..] {
        comps.push(subst_chan(d.unmarked(), &p.chan, &sent, supply));
    }
    let scheme = match p.axiom.mode() {
        AxiomMode::Broadcast(n) => AxiomScheme::broadcast(b_ty, *n),
        _ => AxiomScheme::em(b_ty),
    };
    let axiom = Arc::new(validate_axiom(&scheme)?);
    Ok(Term::Par(Par { chan: b, active: false, axiom, comps }))
}

fn general_full(p: &Par, supply: &mut NameSupply) -> Result<Term, StepError> {
    let occ = session_occurrences(p);
    let m = p.comps.len();
    let ys: Vec<Vec<Var>> = (0..m).map(|i| last_occurrence(&occ, i).context_vars()).collect();
    let bs: Vec<Formula> = ys.iter().map(|y| conj_of(y)).collect();
    let b = supply.fresh("b");
    let any_marked = p.comps.iter().any(Term::is_marked);
    let mut components = Vec::with_capacity(m);
    let mut sessions = Vec::with_capacity(m);
    for i in 0..m {
        let src = p.axiom.source(i);
        let cod = src.map(|j| bs[j].clone()).unwrap_or(Formula::Bot);
        components.push((bs[i].clone(), cod.clone()));
        let call = Term::app(
            chan(&b, Formula::imp(bs[i].clone(), cod)),
            Term::tuple(ys[i].iter().map(Term::var).collect()),
        );
        let new = match src {
            Some(j) => {
                let t_j = last_occurrence(&occ, j).arg.expect("message");
                multiple_subst(t_j, &ys[j], &call, supply)?
            }
            None => call,
        };
        let mut comps = p.comps.clone();
        let ci = replace_in_comp(&p.comps[i], &last_occurrence(&occ, i).path, new).into_unmarked();
        for c in comps.iter_mut() {
            *c = c.clone().into_unmarked();
        }
        comps[i] = ci;
        if any_marked {
            comps[i] = Term::mark(comps[i].clone());
        }
        sessions.push(Term::Par(Par { chan: p.chan.clone(), active: p.active, axiom: p.axiom.clone(), comps }));
    }
    let sources: Vec<Option<usize>> = p.axiom.sources().to_vec();
    let axiom = Arc::new(validate_axiom(&AxiomScheme::routed(components, sources))?);
    Ok(Term::Par(Par { chan: b, active: false, axiom, comps: sessions }))
}
