//! The master normalization strategy: parallel-form conversion, then cycles of intuitionistic,
//! activation and communication phases.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rewrite::{
    find_redexes, redexes_at, session_occurrences, step, Group, Redex, RedexKind, StepError,
};
use crate::syntax::{print_term, AxiomMode, Path, Term};
use crate::typing::show_path;

pub const DEFAULT_MAX_STEPS: usize = 100_000;
pub const DEFAULT_MAX_TRACE_SIZE: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    ParallelForm,
    Intuitionistic,
    Activation,
    Communication,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Which clause of the side strategy produced a communication-phase step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SideClause {
    ParPar,
    Cross,
    /// Projection or case permutation following a cross reduction.
    Chase,
    Garbage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub cycle: usize,
    pub phase: Phase,
    pub redex: Redex,
    pub clause: Option<SideClause>,
    pub term_after: Term,
}

/// Steps `start..end` of the trace belong to this phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseSpan {
    pub cycle: usize,
    pub phase: Phase,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: Term,
    pub steps: Vec<TraceStep>,
    pub phases: Vec<PhaseSpan>,
    pub limit_hit: bool,
}

/// One JSON line of a streamed trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub cycle: usize,
    pub phase: Phase,
    pub rule: String,
    pub position: Path,
    pub complexity: usize,
    pub term_after: String,
}

impl Trace {
    pub fn new(initial: Term) -> Trace {
        Trace { initial, steps: Vec::new(), phases: Vec::new(), limit_hit: false }
    }

    pub fn final_term(&self) -> &Term {
        self.steps.last().map(|s| &s.term_after).unwrap_or(&self.initial)
    }

    /// Term before step `k`.
    pub fn before(&self, k: usize) -> &Term {
        if k == 0 {
            &self.initial
        } else {
            &self.steps[k - 1].term_after
        }
    }

    pub fn records(&self) -> Vec<StepRecord> {
        self.steps
            .iter()
            .map(|s| StepRecord {
                cycle: s.cycle,
                phase: s.phase,
                rule: s.redex.kind.name(),
                position: s.redex.position.clone(),
                complexity: s.redex.complexity,
                term_after: print_term(&s.term_after),
            })
            .collect()
    }

    pub fn cycles(&self) -> usize {
        self.phases.iter().map(|p| p.cycle).max().unwrap_or(0)
    }

    pub fn phase_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for s in &self.steps {
            *out.entry(s.phase.to_string()).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub max_steps: usize,
    /// Bound on the total number of term nodes the trace may hold.
    pub max_trace_size: usize,
    /// Only the underlined component may send, and the underline moves to the receiver.
    pub underline: bool,
    /// Fault-injection switch; when off, broadcast sessions cannot communicate.
    pub broadcast: bool,
}

impl Default for Config {
    fn default() -> Config {
        Config { max_steps: DEFAULT_MAX_STEPS, max_trace_size: DEFAULT_MAX_TRACE_SIZE, underline: true, broadcast: true }
    }
}

impl Config {
    /// Default configuration with the step limit taken from `LAX_MAX_STEPS` when set.
    pub fn from_env() -> Config {
        let max_steps = std::env::var("LAX_MAX_STEPS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
            .unwrap_or(DEFAULT_MAX_STEPS);
        Config { max_steps, ..Config::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("step limit of {limit} exceeded")]
    StepLimit { limit: usize, trace: Box<Trace> },
    #[error("trace size limit of {limit} nodes exceeded")]
    SizeLimit { limit: usize, trace: Box<Trace> },
    #[error("communication step at {} did not decrease the progress measure", show_path(.position))]
    ProgressViolation { position: Path, trace: Box<Trace> },
    #[error("no strategy rule applies at {}, yet the term is not normal", show_path(.position))]
    NoRule { position: Path, trace: Box<Trace> },
    #[error("{error}")]
    Step { error: StepError, trace: Box<Trace> },
}

impl StrategyError {
    pub fn trace(&self) -> &Trace {
        match self {
            StrategyError::StepLimit { trace, .. }
            | StrategyError::SizeLimit { trace, .. }
            | StrategyError::ProgressViolation { trace, .. }
            | StrategyError::NoRule { trace, .. }
            | StrategyError::Step { trace, .. } => trace,
        }
    }

    /// The run stopped on a resource bound rather than a failure of the strategy.
    pub fn is_limit(&self) -> bool {
        matches!(self, StrategyError::StepLimit { .. } | StrategyError::SizeLimit { .. })
    }
}

// Internal failure, turned into a StrategyError once the trace is attached.
enum Fail {
    Limit,
    Size,
    Progress(Path),
    NoRule(Path),
    Step(StepError),
}

struct Runner<'a> {
    cfg: &'a Config,
    trace: Trace,
    term: Term,
    cycle: usize,
    /// Nodes held by the trace so far.
    stored: usize,
}

impl<'a> Runner<'a> {
    fn new(t: &Term, cfg: &'a Config) -> Runner<'a> {
        Runner { cfg, trace: Trace::new(t.clone()), term: t.clone(), cycle: 0, stored: t.size() }
    }

    fn finish(self, r: Result<(), Fail>) -> Result<(Term, Trace), StrategyError> {
        let mut trace = self.trace;
        match r {
            Ok(()) => Ok((self.term, trace)),
            Err(f) => {
                if matches!(f, Fail::Limit | Fail::Size) {
                    trace.limit_hit = true;
                }
                let trace = Box::new(trace);
                Err(match f {
                    Fail::Limit => StrategyError::StepLimit { limit: self.cfg.max_steps, trace },
                    Fail::Size => StrategyError::SizeLimit { limit: self.cfg.max_trace_size, trace },
                    Fail::Progress(position) => StrategyError::ProgressViolation { position, trace },
                    Fail::NoRule(position) => StrategyError::NoRule { position, trace },
                    Fail::Step(error) => StrategyError::Step { error, trace },
                })
            }
        }
    }

    fn fire(&mut self, phase: Phase, redex: Redex, clause: Option<SideClause>) -> Result<(), Fail> {
        if self.trace.steps.len() >= self.cfg.max_steps {
            return Err(Fail::Limit);
        }
        let next = step(&self.term, &redex).map_err(Fail::Step)?;
        self.stored += next.size();
        if self.stored > self.cfg.max_trace_size {
            return Err(Fail::Size);
        }
        self.term = next.clone();
        self.trace.steps.push(TraceStep { cycle: self.cycle, phase, redex, clause, term_after: next });
        Ok(())
    }

    fn phase(&mut self, phase: Phase, body: impl FnOnce(&mut Self) -> Result<(), Fail>) -> Result<(), Fail> {
        let start = self.trace.steps.len();
        let r = body(self);
        let end = self.trace.steps.len();
        self.trace.phases.push(PhaseSpan { cycle: self.cycle, phase, start, end });
        r
    }

    fn parallel_form(&mut self) -> Result<(), Fail> {
        while let Some(r) = first_postorder(&self.term, &mut Vec::new(), &|k| matches!(k, RedexKind::ParPerm(_))) {
            self.fire(Phase::ParallelForm, r, None)?;
        }
        Ok(())
    }

    fn intuitionistic(&mut self) -> Result<(), Fail> {
        while let Some(r) = first_postorder(&self.term, &mut Vec::new(), &RedexKind::is_intuitionistic) {
            self.fire(Phase::Intuitionistic, r, None)?;
        }
        Ok(())
    }

    fn activation(&mut self) -> Result<(), Fail> {
        while let Some(r) = find_redexes(&self.term).into_iter().find(|r| r.kind == RedexKind::Activation) {
            self.fire(Phase::Activation, r, None)?;
        }
        Ok(())
    }

    fn communication(&mut self) -> Result<(), Fail> {
        while let Some(pos) = uppermost_active(&self.term) {
            let before = progress_measure(&self.term);
            self.side_step(&pos)?;
            let after = progress_measure(&self.term);
            if after.cmp(&before) != Ordering::Less {
                return Err(Fail::Progress(pos));
            }
        }
        // Sessions that never became active may still have lost their channel in a component.
        while let Some(r) =
            find_redexes(&self.term).into_iter().find(|r| matches!(r.kind, RedexKind::GarbageCross { .. }))
        {
            self.fire(Phase::Communication, r, Some(SideClause::Garbage))?;
        }
        Ok(())
    }

    fn side_step(&mut self, pos: &Path) -> Result<(), Fail> {
        let node = self.term.at(pos).expect("session position");
        let p = match node {
            Term::Par(p) => p,
            _ => unreachable!(),
        };
        let local = redexes_at(node, pos);
        if let Some(r) = local.iter().find(|r| matches!(r.kind, RedexKind::ParParPerm { .. })) {
            return self.fire(Phase::Communication, r.clone(), Some(SideClause::ParPar));
        }
        if let Some(r) = local.iter().find(|r| matches!(r.kind, RedexKind::GarbageCross { .. })) {
            return self.fire(Phase::Communication, r.clone(), Some(SideClause::Garbage));
        }
        let crosses: Vec<&Redex> = local.iter().filter(|r| r.kind.is_cross()).collect();
        let chosen = match p.axiom.mode() {
            AxiomMode::Broadcast(_) if !self.cfg.broadcast => None,
            AxiomMode::Em | AxiomMode::Broadcast(_) => crosses.first().copied(),
            AxiomMode::General => {
                let basic = |r: &&&Redex| matches!(r.kind, RedexKind::BasicCross { .. });
                let full = crosses.iter().find(|r| r.kind == RedexKind::FullCross).copied();
                let first_basic = crosses.iter().find(basic).copied();
                if self.cfg.underline {
                    let marked = p.comps.iter().position(Term::is_marked);
                    let from_marked = crosses
                        .iter()
                        .find(|r| matches!(r.kind, RedexKind::BasicCross { sender, .. } if Some(sender) == marked))
                        .copied();
                    from_marked.or(full).or(first_basic)
                } else {
                    first_basic.or(full)
                }
            }
        };
        let r = match chosen {
            Some(r) => r.clone(),
            None => return Err(Fail::NoRule(pos.clone())),
        };
        self.fire(Phase::Communication, r, Some(SideClause::Cross))?;
        let chase = |k: &RedexKind| matches!(k, RedexKind::ProjPair | RedexKind::CasePerm);
        loop {
            let sub = self.term.at(pos).expect("contractum position");
            let mut path = pos.clone();
            match first_postorder(sub, &mut path, &chase) {
                Some(r) => self.fire(Phase::Communication, r, Some(SideClause::Chase))?,
                None => return Ok(()),
            }
        }
    }

    fn cycles(&mut self) -> Result<(), Fail> {
        loop {
            if find_redexes(&self.term).is_empty() {
                return Ok(());
            }
            self.cycle += 1;
            let start = self.trace.steps.len();
            self.phase(Phase::Intuitionistic, Self::intuitionistic)?;
            self.phase(Phase::Activation, Self::activation)?;
            self.phase(Phase::Communication, Self::communication)?;
            if self.trace.steps.len() == start {
                let pos = find_redexes(&self.term).first().map(|r| r.position.clone()).unwrap_or_default();
                return Err(Fail::NoRule(pos));
            }
        }
    }
}

/// First redex accepted by `keep` in leftmost-innermost order. `path` is the position of `t`.
fn first_postorder(t: &Term, path: &mut Path, keep: &dyn Fn(&RedexKind) -> bool) -> Option<Redex> {
    for (i, c) in t.children().into_iter().enumerate() {
        path.push(i);
        let found = first_postorder(c, path, keep);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    redexes_at(t, path).into_iter().find(|r| keep(&r.kind))
}

/// Active sessions of `t` with their positions, in preorder.
fn active_sessions(t: &Term) -> Vec<(Path, &Term)> {
    fn go<'t>(t: &'t Term, path: &mut Path, out: &mut Vec<(Path, &'t Term)>) {
        if matches!(t, Term::Par(p) if p.active) {
            out.push((path.clone(), t));
        }
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

fn is_uppermost(session: &Term) -> bool {
    session.children().iter().all(|c| !c.contains_active_session())
}

/// The active session, containing no other active session, of least depth; leftmost on ties.
pub fn uppermost_active(t: &Term) -> Option<Path> {
    active_sessions(t)
        .into_iter()
        .filter(|(_, s)| is_uppermost(s))
        .min_by_key(|(p, _)| p.len())
        .map(|(p, _)| p)
}

/// The `(n, h, g)` measure that every side-strategy step decreases: `n` counts active sessions
/// that are not uppermost, `h` maps each size ≥ 2 to the number of uppermost sessions of that
/// size, `g` maps each occurrence count to the number of uppermost sessions with that many
/// occurrences of their channel.
///
/// The size of a session is the number of parallel nodes on its spine. Indexing `h` by height
/// instead fails when a permuted component shares the session's height with a sibling: every
/// copy then keeps the original height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressMeasure {
    pub n: usize,
    pub h: BTreeMap<usize, usize>,
    pub g: BTreeMap<usize, usize>,
}

// Functions compared at the largest argument where they differ.
fn cmp_counts(a: &BTreeMap<usize, usize>, b: &BTreeMap<usize, usize>) -> Ordering {
    let mut keys: Vec<usize> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    for k in keys.into_iter().rev() {
        let x = a.get(&k).copied().unwrap_or(0);
        let y = b.get(&k).copied().unwrap_or(0);
        if x != y {
            return x.cmp(&y);
        }
    }
    Ordering::Equal
}

impl Ord for ProgressMeasure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| cmp_counts(&self.h, &other.h)).then_with(|| cmp_counts(&self.g, &other.g))
    }
}

impl PartialOrd for ProgressMeasure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Number of session and contraction nodes reachable from `t` through such nodes.
pub fn spine_size(t: &Term) -> usize {
    match t.unmarked() {
        Term::Par(p) => 1 + p.comps.iter().map(spine_size).sum::<usize>(),
        Term::Contract(a, b) => 1 + spine_size(a) + spine_size(b),
        _ => 0,
    }
}

pub fn progress_measure(t: &Term) -> ProgressMeasure {
    let sessions = active_sessions(t);
    let mut m = ProgressMeasure { n: 0, h: BTreeMap::new(), g: BTreeMap::new() };
    for (_, s) in sessions {
        if !is_uppermost(s) {
            m.n += 1;
            continue;
        }
        let size = spine_size(s);
        if size >= 2 {
            *m.h.entry(size).or_insert(0) += 1;
        }
        if let Term::Par(p) = s {
            let occ: usize = session_occurrences(p).iter().map(Vec::len).sum();
            *m.g.entry(occ).or_insert(0) += 1;
        }
    }
    m
}

/// Permutes every parallel node up to the spine, leftmost-innermost first.
pub fn to_parallel_form(t: &Term, cfg: &Config) -> Result<(Term, Trace), StrategyError> {
    let mut r = Runner::new(t, cfg);
    let res = r.phase(Phase::ParallelForm, Runner::parallel_form);
    r.finish(res)
}

pub fn run_phase_intuitionistic(t: &Term, cfg: &Config) -> Result<(Term, Trace), StrategyError> {
    let mut r = Runner::new(t, cfg);
    let res = r.phase(Phase::Intuitionistic, Runner::intuitionistic);
    r.finish(res)
}

pub fn run_phase_activation(t: &Term, cfg: &Config) -> Result<(Term, Trace), StrategyError> {
    let mut r = Runner::new(t, cfg);
    let res = r.phase(Phase::Activation, Runner::activation);
    r.finish(res)
}

pub fn run_phase_communication(t: &Term, cfg: &Config) -> Result<(Term, Trace), StrategyError> {
    let mut r = Runner::new(t, cfg);
    let res = r.phase(Phase::Communication, Runner::communication);
    r.finish(res)
}

/// Normal parallel form of `t` together with the full trace.
pub fn normalize(t: &Term, cfg: &Config) -> Result<(Term, Trace), StrategyError> {
    let mut r = Runner::new(t, cfg);
    let res = r.phase(Phase::ParallelForm, Runner::parallel_form).and_then(|()| r.cycles());
    r.finish(res)
}

/// Reapplies the recorded redexes to the initial term; `Err(k)` names the first step that fails
/// or produces a different term.
pub fn replay(trace: &Trace) -> Result<Term, usize> {
    let mut t = trace.initial.clone();
    for (k, s) in trace.steps.iter().enumerate() {
        t = step(&t, &s.redex).map_err(|_| k)?;
        if t != s.term_after {
            return Err(k);
        }
    }
    Ok(t)
}

/// Largest complexity among the redexes of `t` in `group`, or 0.
pub fn max_complexity(t: &Term, group: Group) -> usize {
    find_redexes(t).iter().filter(|r| r.group == group).map(|r| r.complexity).max().unwrap_or(0)
}
