//! Oracles shared by the integration tests. Each one is written from the definitions, by a
//! different route than the library code it is compared against.
#![allow(dead_code)]

use lax::analysis::generate::{corpus, random_simple_term, Preset};
use lax::rewrite::{Group, RedexKind};
use lax::strategy::{normalize, Config};
use lax::syntax::{AxiomMode, Formula, Name, Par, Path, Term, Var};
use lax::typing::type_of;
use rand::Rng;

// ---------------------------------------------------------------------------------------------
// Value complexity by literal unfolding.

/// Value complexity, building `u σ` and `v σ` explicitly at each case distinction.
pub fn vc_oracle(s: &Term) -> usize {
    match s {
        Term::Lam(..) | Term::Inj(..) => complexity(&type_of(s).expect("simply typed")),
        Term::Pair(a, b) => vc_oracle(a).max(vc_oracle(b)),
        _ => {
            // Peel eliminations from the outside until the first case distinction.
            let mut outer: Vec<&Term> = Vec::new();
            let mut cur = s;
            loop {
                match cur {
                    Term::Case { lbody, rbody, .. } => {
                        let l = rebuild(lbody, &outer);
                        let r = rebuild(rbody, &outer);
                        return vc_oracle(&l).max(vc_oracle(&r));
                    }
                    Term::App(f, _) => {
                        outer.push(cur);
                        cur = f;
                    }
                    Term::Proj(a, _) | Term::Efq(_, a) => {
                        outer.push(cur);
                        cur = a;
                    }
                    _ => return 0,
                }
            }
        }
    }
}

/// Plugs `head` into the eliminations `outer` (outermost first).
fn rebuild(head: &Term, outer: &[&Term]) -> Term {
    let mut t = head.clone();
    for frame in outer.iter().rev() {
        t = match frame {
            Term::App(_, a) => Term::app(t, (**a).clone()),
            Term::Proj(_, i) => Term::proj(t, *i),
            Term::Efq(p, _) => Term::efq(p.clone(), t),
            _ => unreachable!(),
        };
    }
    t
}

/// Number of connectives.
pub fn complexity(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) | Formula::Top | Formula::Bot => 0,
        Formula::Impl(a, b) | Formula::Conj(a, b) | Formula::Disj(a, b) => 1 + complexity(a) + complexity(b),
    }
}

/// Membership in the value clauses, one tuple component at a time.
pub fn is_value_oracle(t: &Term) -> bool {
    match t {
        Term::Pair(a, b) => is_value_oracle(a) || is_value_oracle(b),
        Term::Lam(..) | Term::Inj(..) | Term::Efq(..) | Term::Case { .. } => true,
        Term::App(f, _) | Term::Proj(f, _) => head_is_active_chan(f),
        Term::Chan(c) => c.active,
        _ => false,
    }
}

fn head_is_active_chan(t: &Term) -> bool {
    match t {
        Term::Chan(c) => c.active,
        Term::App(f, _) | Term::Proj(f, _) => head_is_active_chan(f),
        _ => false,
    }
}

// ---------------------------------------------------------------------------------------------
// Brute-force redex matcher.

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Found {
    pub position: Path,
    pub rule: String,
    pub complexity: usize,
    pub group: String,
}

pub fn found(position: Path, kind: &RedexKind, complexity: usize, group: Group) -> Found {
    Found { position, rule: kind.name(), complexity, group: format!("{:?}", group) }
}

/// Every position of `t`, sorted (which is preorder).
pub fn all_positions(t: &Term) -> Vec<Path> {
    let mut out = vec![Vec::new()];
    let mut i = 0;
    while i < out.len() {
        let p = out[i].clone();
        let node = t.at(&p).unwrap();
        for k in 0..node.children().len() {
            let mut q = p.clone();
            q.push(k);
            out.push(q);
        }
        i += 1;
    }
    out.sort();
    out
}

fn is_par(t: &Term) -> bool {
    matches!(t, Term::Par(_) | Term::Contract(..))
}

fn contains_par(t: &Term) -> bool {
    all_positions(t).iter().any(|p| matches!(t.at(p).unwrap(), Term::Par(_) | Term::Contract(..) | Term::Mark(_)))
}

fn contains_active(t: &Term) -> bool {
    all_positions(t).iter().any(|p| matches!(t.at(p).unwrap(), Term::Par(q) if q.active))
}

fn strip(t: &Term) -> &Term {
    match t {
        Term::Mark(b) => b,
        t => t,
    }
}

/// One occurrence: its position inside the component, message, and whether the message uses
/// a variable bound inside the component.
struct Occ {
    pos: Path,
    arg: Option<Term>,
    open: bool,
}

fn occurrences_oracle(comp: &Term, a: &Name, bare: bool) -> Vec<Occ> {
    let comp = strip(comp);
    let mut out = Vec::new();
    for pos in all_positions(comp) {
        let node = comp.at(&pos).unwrap();
        let hit = match node {
            Term::App(f, arg) if !bare => matches!(&**f, Term::Chan(c) if c.name == *a).then(|| Some((**arg).clone())),
            Term::Chan(c) if bare && c.name == *a => Some(None),
            _ => None,
        };
        let Some(arg) = hit else { continue };
        // Binders strictly above the occurrence; a session for the same name hides it.
        let mut binders: Vec<Var> = Vec::new();
        let mut hidden = false;
        for k in 0..pos.len() {
            match comp.at(&pos[..k]).unwrap() {
                Term::Lam(x, _) => binders.push(x.clone()),
                Term::Case { left, .. } if pos[k] == 1 => binders.push(left.clone()),
                Term::Case { right, .. } if pos[k] == 2 => binders.push(right.clone()),
                Term::Par(p) if p.chan == *a => hidden = true,
                _ => {}
            }
        }
        if hidden {
            continue;
        }
        let open = arg.as_ref().is_some_and(|m| {
            let fv = m.free_vars();
            fv.vars.iter().any(|v| binders.iter().any(|b| b.name == v.name))
        });
        out.push(Occ { pos, arg, open });
    }
    out
}

fn shape_name(node: &Term, child: usize) -> Option<&'static str> {
    Some(match (node, child) {
        (Term::App(..), 0) => "Fun",
        (Term::App(..), 1) => "Arg",
        (Term::Proj(..), 0) => "Proj",
        (Term::Case { .. }, 0) => "Scrutinee",
        (Term::Case { .. }, 1) => "BranchLeft",
        (Term::Case { .. }, 2) => "BranchRight",
        (Term::Efq(..), 0) => "Efq",
        (Term::Lam(..), 0) => "Lam",
        (Term::Inj(..), 0) => "Inj",
        (Term::Pair(..), 0) => "PairLeft",
        (Term::Pair(..), 1) => "PairRight",
        _ => return None,
    })
}

pub fn brute_force_redexes(t: &Term) -> Vec<Found> {
    let mut out = Vec::new();
    for pos in all_positions(t) {
        let node = t.at(&pos).unwrap();
        let mut push = |rule: String, c: usize, group: &str| {
            out.push(Found { position: pos.clone(), rule, complexity: c, group: group.to_string() })
        };
        match node {
            Term::App(f, _) if matches!(**f, Term::Lam(..)) => {
                push("Beta".into(), complexity(&type_of(f).unwrap()), "One");
            }
            Term::Proj(a, _) if matches!(**a, Term::Pair(..)) => push("ProjPair".into(), vc_oracle(a), "Two"),
            Term::Case { scrut, .. } => {
                if let Term::Inj(_, ty, _) = &**scrut {
                    push("CaseInj".into(), complexity(ty), "One");
                }
            }
            _ => {}
        }
        let principal = match node {
            Term::App(f, _) => Some(&**f),
            Term::Proj(a, _) | Term::Efq(_, a) => Some(&**a),
            Term::Case { scrut, .. } => Some(&**scrut),
            _ => None,
        };
        if let Some(p @ Term::Case { .. }) = principal {
            push("CasePerm".into(), vc_oracle(p), "Two");
        }
        for (k, c) in node.children().into_iter().enumerate() {
            if is_par(c) {
                if let Some(s) = shape_name(node, k) {
                    push(format!("ParPerm({})", s), 0, "Other");
                }
            }
        }
        if let Term::Par(p) = node {
            session_oracle(p, &mut push);
        }
    }
    out.sort();
    out
}

fn session_oracle(p: &Par, push: &mut impl FnMut(String, usize, &str)) {
    let occ: Vec<Vec<Occ>> =
        p.comps.iter().enumerate().map(|(i, c)| occurrences_oracle(c, &p.chan, p.axiom.is_bare(i))).collect();
    let c = occ.iter().flatten().map(|o| o.arg.as_ref().map(vc_oracle).unwrap_or(0)).max().unwrap_or(0);
    let empty: Vec<String> = (0..p.comps.len()).filter(|&i| occ[i].is_empty()).map(|i| i.to_string()).collect();
    let garbage = format!("GarbageCross({})", empty.join(","));
    if !p.active {
        let activable = occ
            .iter()
            .flatten()
            .any(|o| o.arg.as_ref().is_some_and(|m| !contains_par(m) && is_value_oracle(m)));
        if activable {
            push("Activation".into(), c, "Two");
        }
        if !empty.is_empty() {
            push(garbage, c, "Two");
        }
        return;
    }
    if !p.comps.iter().any(contains_active) {
        for (i, comp) in p.comps.iter().enumerate() {
            if is_par(strip(comp)) {
                push(format!("ParParPerm({})", i), 0, "Other");
            }
        }
    }
    if !empty.is_empty() {
        push(garbage, c, "Two");
        return;
    }
    if p.comps.iter().any(|comp| contains_par(strip(comp))) {
        return;
    }
    // The message of a component is its last occurrence in preorder.
    let last = |i: usize| occ[i].iter().max_by(|x, y| x.pos.cmp(&y.pos)).unwrap();
    match p.axiom.mode() {
        AxiomMode::Em | AxiomMode::Broadcast(_) => {
            let s = last(0);
            if s.arg.is_none() {
                return;
            }
            let rule = match (s.open, p.axiom.mode()) {
                (true, _) => "FullCross".to_string(),
                (false, AxiomMode::Em) => "BasicCross(0->1)".to_string(),
                _ => "BroadcastCross".to_string(),
            };
            push(rule, c, "Two");
        }
        AxiomMode::General => {
            let m = p.comps.len();
            for i in 0..m {
                if last(i).open {
                    continue;
                }
                for j in 0..m {
                    // Receiver j expects what sender i produces.
                    if j != i && p.axiom.consequent(j) == p.axiom.antecedent(i) && p.axiom.source(j) == Some(i) {
                        push(format!("BasicCross({}->{})", i, j), c, "Two");
                    }
                }
            }
            if (0..m).any(|i| last(i).open) {
                push("FullCross".into(), c, "Two");
            }
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Subformula property by direct relation checks.

fn prime_split(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Conj(a, b) => {
            prime_split(a, out);
            prime_split(b, out);
        }
        other => out.push(other.clone()),
    }
}

fn occurs_in(f: &Formula, g: &Formula) -> bool {
    f == g
        || match g {
            Formula::Impl(a, b) | Formula::Conj(a, b) | Formula::Disj(a, b) => occurs_in(f, a) || occurs_in(f, b),
            _ => false,
        }
}

/// Whether every prime factor of every subterm type and of every session axiom formula of the
/// normal term `t : a` occurs in `a` or in one of `ctx`.
pub fn subformula_oracle(ctx: &[Formula], a: &Formula, t: &Term) -> bool {
    let admissible = |f: &Formula| {
        matches!(f, Formula::Top | Formula::Bot) || occurs_in(f, a) || ctx.iter().any(|g| occurs_in(f, g))
    };
    let mut formulas: Vec<Formula> = Vec::new();
    for pos in all_positions(t) {
        let node = t.at(&pos).unwrap();
        if let Term::Par(p) = node {
            for i in 0..p.axiom.len() {
                formulas.push(p.axiom.antecedent(i).clone());
                formulas.push(p.axiom.consequent(i).clone());
            }
        }
        if !matches!(node, Term::Chan(_) | Term::Mark(_)) {
            match type_of(node) {
                Some(ty) => formulas.push(ty),
                None => return false,
            }
        }
    }
    let mut primes = Vec::new();
    for f in &formulas {
        prime_split(f, &mut primes);
    }
    primes.iter().all(admissible)
}

// ---------------------------------------------------------------------------------------------
// Term sources.

/// Generated terms of size at most `max_size` from every preset, followed by all states their
/// normalization passes through that also fit the bound.
pub fn small_terms(seed: u64, count: usize, max_size: usize) -> Vec<Term> {
    let mut out = Vec::new();
    let per = count.div_ceil(Preset::ALL.len());
    for (k, preset) in Preset::ALL.into_iter().enumerate() {
        for t in corpus(seed + k as u64, per, max_size, preset).into_iter().map(|s| s.term) {
            if let Ok((_, trace)) = normalize(&t, &Config::default()) {
                for s in &trace.steps {
                    if s.term_after.size() <= max_size {
                        out.push(s.term_after.clone());
                    }
                }
            }
            out.push(t);
        }
    }
    out
}

/// A non-empty case-free stack applicable to `u`, with fresh variables as arguments.
pub fn random_case_free_stack(rng: &mut impl Rng, u: &Term) -> Option<Term> {
    let mut t = u.clone();
    let mut ty = type_of(u)?;
    let mut frames = 0;
    let mut fresh = 0;
    loop {
        let stop = frames > 0 && rng.gen_bool(0.4);
        let next = match &ty {
            _ if stop => None,
            Formula::Impl(a, b) => {
                fresh += 1;
                let arg = Term::Var(Var::new(&format!("sigma{}", fresh), (**a).clone()));
                t = Term::app(t, arg);
                Some((**b).clone())
            }
            Formula::Conj(a, b) => {
                let i = rng.gen_range(0..2u8);
                t = Term::proj(t, i);
                Some(if i == 0 { (**a).clone() } else { (**b).clone() })
            }
            Formula::Bot => {
                let target = Formula::atom(["P", "Q", "R"][rng.gen_range(0..3)]);
                t = Term::efq(target.clone(), t);
                Some(target)
            }
            _ => None,
        };
        match next {
            Some(n) => {
                ty = n;
                frames += 1;
            }
            None => return (frames > 0).then_some(t),
        }
    }
}

/// A random simply typed term together with a non-empty case-free stack for it.
pub fn random_stacked_term(rng: &mut impl Rng, max_size: usize) -> Term {
    loop {
        let u = random_simple_term(rng, max_size);
        if let Some(t) = random_case_free_stack(rng, &u) {
            return t;
        }
    }
}
