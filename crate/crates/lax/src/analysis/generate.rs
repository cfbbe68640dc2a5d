//! Random well-typed terms by type-directed synthesis.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::syntax::{AxiomScheme, Chan, Formula, Name, Par, Term, ValidatedAxiom, Var};
use crate::typing::{validate_axiom, TypingContext};

/// A generated term and the free variables it is typed under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub ctx: Vec<Var>,
    pub term: Term,
}

impl Sample {
    pub fn typing_context(&self) -> TypingContext {
        TypingContext::from_vars(&self.ctx)
    }
}

/// Axiom families the generator draws sessions from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Excluded middle `A \/ ~A`.
    Em,
    /// Broadcast excluded middle with three receivers.
    Em3,
    /// Cyclic scheduler axiom over three atoms.
    C3,
    /// `(A -> B) \/ ~B`.
    G2,
    /// `(A -> B) \/ (B -> A)`.
    Godel,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Em, Preset::Em3, Preset::C3, Preset::G2, Preset::Godel];

    fn salt(self) -> u64 {
        match self {
            Preset::Em => 0x11,
            Preset::Em3 => 0x23,
            Preset::C3 => 0x35,
            Preset::G2 => 0x47,
            Preset::Godel => 0x59,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Em => "EM",
            Preset::Em3 => "EM3",
            Preset::C3 => "C3",
            Preset::G2 => "G2",
            Preset::Godel => "Godel",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown axiom preset {0:?} (expected EM, EM3, C3, G2 or Godel)")]
pub struct UnknownPreset(pub String);

impl FromStr for Preset {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Preset, UnknownPreset> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(Preset::Em),
            "em3" => Ok(Preset::Em3),
            "c3" => Ok(Preset::C3),
            "g2" => Ok(Preset::G2),
            "godel" | "gödel" | "g" => Ok(Preset::Godel),
            _ => Err(UnknownPreset(s.to_string())),
        }
    }
}

const ATOMS: [&str; 3] = ["P", "Q", "R"];

fn random_atom(rng: &mut impl Rng) -> Formula {
    Formula::atom(ATOMS[rng.gen_range(0..ATOMS.len())])
}

/// A random formula over the atoms `P`, `Q`, `R` of nesting depth at most `depth`.
pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Bot,
            _ => random_atom(rng),
        };
    }
    let a = random_formula(rng, depth - 1);
    let b = random_formula(rng, depth - 1);
    match rng.gen_range(0..3) {
        0 => Formula::imp(a, b),
        1 => Formula::conj(a, b),
        _ => Formula::disj(a, b),
    }
}

// Something that can start an elimination spine.
#[derive(Clone, Debug)]
enum Head {
    Var(Var),
    /// A session channel. Non-bare channels must be applied.
    Chan { name: Name, ty: Formula, bare: bool },
}

impl Head {
    fn ty(&self) -> &Formula {
        match self {
            Head::Var(v) => &v.ty,
            Head::Chan { ty, .. } => ty,
        }
    }

    fn term(&self) -> Term {
        match self {
            Head::Var(v) => Term::Var(v.clone()),
            Head::Chan { name, ty, .. } => Term::Chan(Chan { name: name.clone(), ty: ty.clone(), active: false }),
        }
    }

    fn is_chan(&self) -> bool {
        matches!(self, Head::Chan { .. })
    }
}

#[derive(Clone, Debug)]
enum Elim {
    Arg(Formula),
    Proj(u8),
    Efq,
}

// Eliminations turning `from` into `goal`, preferring the shortest.
fn reach(from: &Formula, goal: &Formula, depth: usize) -> Option<Vec<Elim>> {
    if from == goal {
        return Some(Vec::new());
    }
    if depth == 0 {
        return None;
    }
    let mut best: Option<Vec<Elim>> = None;
    let mut consider = |first: Elim, rest: Option<Vec<Elim>>| {
        if let Some(mut r) = rest {
            r.insert(0, first);
            if best.as_ref().map_or(true, |b| r.len() < b.len()) {
                best = Some(r);
            }
        }
    };
    match from {
        Formula::Impl(a, b) => consider(Elim::Arg((**a).clone()), reach(b, goal, depth - 1)),
        Formula::Conj(a, b) => {
            consider(Elim::Proj(0), reach(a, goal, depth - 1));
            consider(Elim::Proj(1), reach(b, goal, depth - 1));
        }
        Formula::Bot if goal.is_efq_target() => consider(Elim::Efq, Some(Vec::new())),
        _ => {}
    }
    best
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    preset: Preset,
    heads: Vec<Head>,
    counter: usize,
    /// Proof of `Bot` always in scope, so every atomic goal has a fallback.
    bot: Var,
    sessions: bool,
    /// Converter hypotheses minted on demand, bound at the top of the sample.
    minted: Vec<Var>,
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self, base: &str) -> Name {
        self.counter += 1;
        Name::new(&format!("{}{}", base, self.counter))
    }

    fn fresh_var(&mut self, ty: Formula) -> Var {
        Var { name: self.fresh("x"), ty }
    }

    fn with_head<T>(&mut self, h: Head, f: impl FnOnce(&mut Self) -> T) -> T {
        self.heads.push(h);
        let r = f(self);
        self.heads.pop();
        r
    }

    /// Smallest term of type `goal`.
    fn minimal(&mut self, goal: &Formula) -> Term {
        if let Some(h) = self.heads.iter().rev().find(|h| h.ty() == goal && !matches!(h, Head::Chan { bare: false, .. })) {
            return h.term();
        }
        match goal {
            Formula::Top => Term::Unit,
            Formula::Bot => Term::Var(self.bot.clone()),
            Formula::Atom(_) => Term::efq(goal.clone(), Term::Var(self.bot.clone())),
            Formula::Impl(a, b) => {
                let x = self.fresh_var((**a).clone());
                let body = self.with_head(Head::Var(x.clone()), |g| g.minimal(b));
                Term::lam(x, body)
            }
            Formula::Conj(a, b) => {
                let l = self.minimal(a);
                let r = self.minimal(b);
                Term::pair(l, r)
            }
            Formula::Disj(a, _) => {
                let l = self.minimal(a);
                Term::inj(0, goal.clone(), l)
            }
        }
    }

    fn term(&mut self, goal: &Formula, budget: usize) -> Term {
        if budget <= 2 {
            return self.minimal(goal);
        }
        let mut moves: Vec<(u32, u8)> = vec![(3, 0), (2, 1), (1, 2), (1, 3), (1, 4), (1, 7), (1, 8)];
        match goal {
            Formula::Impl(..) | Formula::Conj(..) | Formula::Disj(..) => moves.push((4, 5)),
            Formula::Top => moves.push((1, 5)),
            _ => {}
        }
        if !self.sessions {
            moves.retain(|m| m.1 != 7);
        } else if budget >= 8 {
            moves.push((3, 6));
        }
        let total: u32 = moves.iter().map(|m| m.0).sum();
        let mut pick = self.rng.gen_range(0..total);
        let mut chosen = moves[0].1;
        for (w, m) in &moves {
            if pick < *w {
                chosen = *m;
                break;
            }
            pick -= w;
        }
        let attempt = match chosen {
            0 => self.eliminate(goal, budget),
            1 => Some(self.beta(goal, budget)),
            2 => Some(self.proj_pair(goal, budget)),
            3 => Some(self.case_inj(goal, budget)),
            4 => self.case_on_head(goal, budget),
            5 => Some(self.intro(goal, budget)),
            6 => Some(self.session(goal, budget)),
            7 => Some(self.contraction(goal, budget)),
            _ => Some(self.case_applied(goal, budget)),
        };
        attempt.unwrap_or_else(|| self.intro(goal, budget))
    }

    fn intro(&mut self, goal: &Formula, budget: usize) -> Term {
        let budget = budget.saturating_sub(1);
        match goal {
            Formula::Impl(a, b) => {
                let x = self.fresh_var((**a).clone());
                let body = self.with_head(Head::Var(x.clone()), |g| g.term(b, budget));
                Term::lam(x, body)
            }
            Formula::Conj(a, b) => {
                let l = self.term(a, budget / 2);
                let r = self.term(b, budget / 2);
                Term::pair(l, r)
            }
            Formula::Disj(a, b) => {
                let i = self.rng.gen_range(0..2u8);
                let side = if i == 0 { a } else { b };
                let t = self.term(side, budget);
                Term::inj(i, goal.clone(), t)
            }
            Formula::Top => Term::Unit,
            _ => self.eliminate(goal, budget + 1).unwrap_or_else(|| self.minimal(goal)),
        }
    }

    fn eliminate(&mut self, goal: &Formula, budget: usize) -> Option<Term> {
        let mut options: Vec<(Head, Vec<Elim>)> = Vec::new();
        for h in &self.heads {
            if let Some(path) = reach(h.ty(), goal, 4) {
                let must_apply = matches!(h, Head::Chan { bare: false, .. });
                if must_apply && !matches!(path.first(), Some(Elim::Arg(_))) {
                    continue;
                }
                options.push((h.clone(), path));
            }
        }
        if options.is_empty() {
            return None;
        }
        // Channel uses are what make sessions interesting.
        let chans: Vec<usize> = (0..options.len()).filter(|&i| options[i].0.is_chan()).collect();
        let idx = if !chans.is_empty() && self.rng.gen_bool(0.6) {
            *chans.choose(self.rng).unwrap()
        } else {
            self.rng.gen_range(0..options.len())
        };
        let (head, path) = options.swap_remove(idx);
        let args = path.iter().filter(|e| matches!(e, Elim::Arg(_))).count().max(1);
        let share = budget.saturating_sub(1 + path.len()) / args;
        let mut t = head.term();
        for e in path {
            t = match e {
                Elim::Arg(a) => {
                    let arg = self.term(&a, share);
                    Term::app(t, arg)
                }
                Elim::Proj(i) => Term::proj(t, i),
                Elim::Efq => Term::efq(goal.clone(), t),
            };
        }
        Some(t)
    }

    fn beta(&mut self, goal: &Formula, budget: usize) -> Term {
        let a = random_formula(self.rng, 1);
        let x = self.fresh_var(a.clone());
        let body = self.with_head(Head::Var(x.clone()), |g| g.term(goal, budget / 2));
        let arg = self.term(&a, budget / 2);
        Term::app(Term::lam(x, body), arg)
    }

    fn proj_pair(&mut self, goal: &Formula, budget: usize) -> Term {
        let other = random_formula(self.rng, 1);
        let left = self.term(goal, budget / 2);
        let right = self.term(&other, budget / 3);
        Term::proj(Term::pair(left, right), 0)
    }

    fn case_inj(&mut self, goal: &Formula, budget: usize) -> Term {
        let a = random_formula(self.rng, 1);
        let b = random_formula(self.rng, 1);
        let disj = Formula::disj(a.clone(), b.clone());
        let i = self.rng.gen_range(0..2u8);
        let payload = self.term(if i == 0 { &a } else { &b }, budget / 3);
        self.case_of(Term::inj(i, disj, payload), &a, &b, goal, budget)
    }

    fn case_of(&mut self, scrut: Term, a: &Formula, b: &Formula, goal: &Formula, budget: usize) -> Term {
        let x = self.fresh_var(a.clone());
        let y = self.fresh_var(b.clone());
        let l = self.with_head(Head::Var(x.clone()), |g| g.term(goal, budget / 3));
        let r = self.with_head(Head::Var(y.clone()), |g| g.term(goal, budget / 3));
        Term::case(scrut, x, l, y, r)
    }

    // `(case d of {x. s | y. t}) ξ` with a one-element stack `ξ`.
    fn case_applied(&mut self, goal: &Formula, budget: usize) -> Term {
        let a = random_formula(self.rng, 1);
        let b = random_formula(self.rng, 1);
        let disj = Formula::disj(a.clone(), b.clone());
        let scrut = self.term(&disj, budget / 4);
        if self.rng.gen_bool(0.5) {
            let arg_ty = random_formula(self.rng, 1);
            let fun = Formula::imp(arg_ty.clone(), goal.clone());
            let case = self.case_of(scrut, &a, &b, &fun, budget / 2);
            let arg = self.term(&arg_ty, budget / 4);
            Term::app(case, arg)
        } else {
            let other = random_formula(self.rng, 1);
            let pair = Formula::conj(goal.clone(), other);
            let case = self.case_of(scrut, &a, &b, &pair, budget / 2);
            Term::proj(case, 0)
        }
    }

    fn case_on_head(&mut self, goal: &Formula, budget: usize) -> Option<Term> {
        let disjs: Vec<Head> = self
            .heads
            .iter()
            .filter(|h| matches!(h.ty(), Formula::Disj(..)) && !matches!(h, Head::Chan { bare: false, .. }))
            .cloned()
            .collect();
        let h = disjs.choose(self.rng)?.clone();
        match h.ty().clone() {
            Formula::Disj(a, b) => Some(self.case_of(h.term(), &a, &b, goal, budget)),
            _ => None,
        }
    }

    fn contraction(&mut self, goal: &Formula, budget: usize) -> Term {
        let l = self.term(goal, budget / 2);
        let r = self.term(goal, budget / 2);
        Term::contract(l, r)
    }

    fn axiom(&mut self) -> ValidatedAxiom {
        let scheme = match self.preset {
            Preset::Em => AxiomScheme::em(random_formula(self.rng, 2)),
            Preset::Em3 => AxiomScheme::broadcast(random_formula(self.rng, 2), 3),
            Preset::C3 => {
                let mut atoms: Vec<Formula> = ATOMS.iter().map(|a| Formula::atom(a)).collect();
                atoms.shuffle(self.rng);
                AxiomScheme::cyclic(&atoms)
            }
            Preset::G2 | Preset::Godel => {
                let mut atoms: Vec<Formula> = ATOMS.iter().map(|a| Formula::atom(a)).collect();
                atoms.shuffle(self.rng);
                if self.preset == Preset::G2 {
                    AxiomScheme::godel_n(&atoms[..2])
                } else {
                    AxiomScheme::godel(atoms[0].clone(), atoms[1].clone())
                }
            }
        };
        validate_axiom(&scheme).expect("preset axioms are valid")
    }

    fn session(&mut self, goal: &Formula, budget: usize) -> Term {
        let axiom = self.axiom();
        let m = axiom.len();
        // When no consequent leads to the goal, run the session at a consequent type and
        // feed its result to an abstraction.
        let reachable = (0..m).any(|i| reach(axiom.consequent(i), goal, 3).is_some());
        if !reachable && self.rng.gen_bool(0.7) {
            let target = axiom.consequent(self.rng.gen_range(0..m)).clone();
            let x = self.fresh_var(target.clone());
            let body = self.with_head(Head::Var(x.clone()), |g| g.term(goal, budget / 3));
            let par = self.session_with(axiom, &target, budget * 2 / 3);
            return Term::app(Term::lam(x, body), par);
        }
        self.session_with(axiom, goal, budget)
    }

    fn session_with(&mut self, axiom: ValidatedAxiom, goal: &Formula, budget: usize) -> Term {
        let chan = self.fresh("a");
        let m = axiom.len();
        let share = budget.saturating_sub(1) / m;
        let mut comps = Vec::with_capacity(m);
        for i in 0..m {
            let head = Head::Chan { name: chan.clone(), ty: axiom.occurrence_type(i), bare: axiom.is_bare(i) };
            let c = self.with_head(head, |g| g.component(goal, share, i, &axiom));
            comps.push(c);
        }
        Term::Par(Par { chan, active: false, axiom: Arc::new(axiom), comps })
    }

    // A component body, using the channel directly when the goal allows it.
    fn component(&mut self, goal: &Formula, budget: usize, i: usize, axiom: &ValidatedAxiom) -> Term {
        if self.rng.gen_bool(0.8) || budget < 4 {
            let chan = self.heads.last().cloned().expect("channel in scope");
            let cod = axiom.consequent(i).clone();
            if axiom.is_bare(i) {
                if let Some(path) = reach(&cod, goal, 3) {
                    return self.spine_from(chan.term(), path, goal, budget);
                }
            } else {
                let arg_ty = axiom.antecedent(i).clone();
                let rest = if cod == *goal {
                    Some(Vec::new())
                } else if cod == Formula::Bot && goal.is_efq_target() {
                    Some(vec![Elim::Efq])
                } else {
                    reach(&cod, goal, 2)
                };
                if let Some(rest) = rest {
                    let mut path = vec![Elim::Arg(arg_ty)];
                    path.extend(rest);
                    return self.spine_from(chan.term(), path, goal, budget);
                }
                if let Some(t) = self.through_converter(&chan, &arg_ty, &cod, goal, budget) {
                    return t;
                }
            }
        }
        self.term(goal, budget)
    }

    // `h (a u) ...` for a hypothesis `h` whose first argument has the channel's consequent type.
    fn through_converter(&mut self, chan: &Head, arg_ty: &Formula, cod: &Formula, goal: &Formula, budget: usize) -> Option<Term> {
        let options: Vec<(Head, Vec<Elim>)> = self
            .heads
            .iter()
            .filter(|h| !h.is_chan())
            .filter_map(|h| {
                let path = reach(h.ty(), goal, 3)?;
                matches!(path.first(), Some(Elim::Arg(a)) if a == cod).then(|| (h.clone(), path))
            })
            .collect();
        let (h, path) = match options.choose(self.rng) {
            Some(o) => o.clone(),
            None if self.sessions && self.rng.gen_bool(0.7) => {
                let k = Var { name: self.fresh("k"), ty: Formula::imp(cod.clone(), goal.clone()) };
                self.minted.push(k.clone());
                (Head::Var(k), vec![Elim::Arg(cod.clone())])
            }
            None => return None,
        };
        let used = self.spine_from(chan.term(), vec![Elim::Arg(arg_ty.clone())], cod, budget / 2);
        Some(self.spine_from(Term::app(h.term(), used), path[1..].to_vec(), goal, budget / 2))
    }

    fn spine_from(&mut self, head: Term, path: Vec<Elim>, goal: &Formula, budget: usize) -> Term {
        let args = path.iter().filter(|e| matches!(e, Elim::Arg(_))).count().max(1);
        let share = budget.saturating_sub(1 + path.len()) / args;
        let mut t = head;
        for e in path {
            t = match e {
                Elim::Arg(a) => {
                    let arg = self.term(&a, share);
                    Term::app(t, arg)
                }
                Elim::Proj(i) => Term::proj(t, i),
                Elim::Efq => Term::efq(goal.clone(), t),
            };
        }
        t
    }
}

/// One well-typed term over the context `w:Bot, x1:A1, ...`, or `None` if no attempt fits in
/// `max_size` nodes. Half of the samples are closed by abstracting the context.
pub fn generate(rng: &mut impl Rng, preset: Preset, max_size: usize) -> Option<Sample> {
    for _ in 0..50 {
        // Hypotheses `atom -> B` let components pass a received message on.
        let hyps: Vec<Formula> = (0..rng.gen_range(0..4))
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Formula::imp(random_atom(rng), random_formula(rng, 1))
                } else {
                    random_formula(rng, 2)
                }
            })
            .collect();
        let goal = random_formula(rng, 2);
        let budget = rng.gen_range(max_size / 3..=max_size.max(1));
        let bot = Var::new("w", Formula::Bot);
        let mut g = Gen { rng: &mut *rng, preset, heads: vec![Head::Var(bot.clone())], counter: 0, bot: bot.clone(), sessions: true, minted: Vec::new() };
        let mut vars = Vec::new();
        for h in &hyps {
            let v = g.fresh_var(h.clone());
            g.heads.push(Head::Var(v.clone()));
            vars.push(v);
        }
        let body = g.term(&goal, budget.saturating_sub(1 + hyps.len()));
        vars.append(&mut g.minted);
        let sample = if rng.gen_bool(0.5) {
            let t = vars.into_iter().rev().fold(body, |acc, v| Term::lam(v, acc));
            Sample { ctx: Vec::new(), term: Term::lam(bot, t) }
        } else {
            let mut ctx = vec![bot];
            ctx.extend(vars);
            Sample { ctx, term: body }
        };
        if sample.term.size() <= max_size {
            return Some(sample);
        }
    }
    None
}

/// Deterministic corpus: the same seed, count, size and preset always give the same terms.
/// A size bound too small for any term yields an empty corpus.
pub fn corpus(seed: u64, count: usize, max_size: usize, preset: Preset) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ preset.salt());
    let mut out = Vec::with_capacity(count);
    if max_size == 0 {
        return out;
    }
    let mut misses = 0;
    while out.len() < count && misses < 10 {
        match generate(&mut rng, preset, max_size) {
            Some(t) => out.push(t),
            None => misses += 1,
        }
    }
    out
}

/// A random simply typed term (no sessions) of at most `max_size` nodes, possibly with free
/// variables `w:Bot` and hypotheses.
pub fn random_simple_term(rng: &mut impl Rng, max_size: usize) -> Term {
    loop {
        let bot = Var::new("w", Formula::Bot);
        let mut heads = vec![Head::Var(bot.clone())];
        let goal = random_formula(rng, 2);
        let mut g = Gen { rng: &mut *rng, preset: Preset::Em, heads: Vec::new(), counter: 0, bot, sessions: false, minted: Vec::new() };
        for k in 0..g.rng.gen_range(0..3) {
            let ty = random_formula(g.rng, 2);
            heads.push(Head::Var(Var::new(&format!("h{}", k), ty)));
        }
        g.heads = heads;
        let budget = g.rng.gen_range(1..=max_size.max(1));
        let t = g.term(&goal, budget);
        if t.size() <= max_size {
            return t;
        }
    }
}
