//! Axiom validation and type checking.
//!
//! Checking is syntax directed: binders, injections, ex falso and session axioms carry their
//! formulas, so a single pass computes the type or the first violation.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::report::PropertyReport;
use crate::syntax::{AxiomMode, AxiomScheme, Formula, Name, Path, Term, ValidatedAxiom, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("an axiom needs at least two components")]
    TooFewComponents,
    #[error("component {index}: antecedent must be an atom or Top and consequent an atom or Bot")]
    NotAtomic { index: usize },
    #[error("antecedent {antecedent} occurs in more than one component")]
    DuplicateAntecedent { antecedent: Formula },
    #[error("consequent {consequent} of component {index} is not the antecedent of another component")]
    UnmatchedConsequent { index: usize, consequent: Formula },
    #[error("every consequent is Bot, so no component can receive")]
    NoReceiver,
    #[error("component {index}: routing does not match the component formulas")]
    RoutingMismatch { index: usize },
    #[error("malformed excluded-middle axiom")]
    MalformedEm,
}

/// Checks the restrictions on disjunctive axioms and computes the routing used by cross
/// reductions: component `i` receives from the component whose antecedent is its consequent.
pub fn validate_axiom(ax: &AxiomScheme) -> Result<ValidatedAxiom, AxiomError> {
    let comps = &ax.components;
    match ax.mode {
        AxiomMode::Em | AxiomMode::Broadcast(_) => {
            let receivers = match ax.mode {
                AxiomMode::Em => 1,
                AxiomMode::Broadcast(n) => n,
                AxiomMode::General => unreachable!(),
            };
            if receivers == 0 || comps.len() != receivers + 1 {
                return Err(AxiomError::MalformedEm);
            }
            let a = &comps[0].0;
            if comps[0].1 != Formula::Bot
                || comps[1..].iter().any(|(f, g)| *f != Formula::Top || g != a)
            {
                return Err(AxiomError::MalformedEm);
            }
            let mut sources = vec![None];
            sources.extend((1..comps.len()).map(|_| Some(0)));
            Ok(ValidatedAxiom::new_unchecked(ax.clone(), sources))
        }
        AxiomMode::General => {
            if comps.len() < 2 {
                return Err(AxiomError::TooFewComponents);
            }
            if let Some(routing) = &ax.routing {
                if routing.len() != comps.len() {
                    return Err(AxiomError::RoutingMismatch { index: routing.len().min(comps.len()) });
                }
                for (i, src) in routing.iter().enumerate() {
                    let ok = match src {
                        Some(j) => *j < comps.len() && *j != i && comps[i].1 == comps[*j].0,
                        None => comps[i].1 == Formula::Bot,
                    };
                    if !ok {
                        return Err(AxiomError::RoutingMismatch { index: i });
                    }
                }
                if routing.iter().all(|s| s.is_none()) {
                    return Err(AxiomError::NoReceiver);
                }
                return Ok(ValidatedAxiom::new_unchecked(ax.clone(), routing.clone()));
            }
            for (i, (f, g)) in comps.iter().enumerate() {
                let f_ok = matches!(f, Formula::Atom(_) | Formula::Top);
                let g_ok = matches!(g, Formula::Atom(_) | Formula::Bot);
                if !f_ok || !g_ok {
                    return Err(AxiomError::NotAtomic { index: i });
                }
            }
            for i in 0..comps.len() {
                for j in 0..i {
                    if comps[i].0 == comps[j].0 {
                        return Err(AxiomError::DuplicateAntecedent { antecedent: comps[i].0.clone() });
                    }
                }
            }
            let mut sources = Vec::with_capacity(comps.len());
            for (i, (_, g)) in comps.iter().enumerate() {
                if *g == Formula::Bot {
                    sources.push(None);
                    continue;
                }
                match (0..comps.len()).find(|&j| j != i && comps[j].0 == *g) {
                    Some(j) => sources.push(Some(j)),
                    None => {
                        return Err(AxiomError::UnmatchedConsequent { index: i, consequent: g.clone() })
                    }
                }
            }
            if sources.iter().all(|s| s.is_none()) {
                return Err(AxiomError::NoReceiver);
            }
            Ok(ValidatedAxiom::new_unchecked(ax.clone(), sources))
        }
    }
}

/// Hypotheses `x1:A1 ... xn:An` and free channels `a1:D1 ... am:Dm`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    pub vars: BTreeMap<Name, Formula>,
    /// Free channel name mapped to its occurrence type and activity.
    pub chans: BTreeMap<Name, (Formula, bool)>,
}

impl TypingContext {
    pub fn new() -> TypingContext {
        TypingContext::default()
    }

    /// The context declaring exactly `vars`, as returned by the parser.
    pub fn from_vars(vars: &[Var]) -> TypingContext {
        TypingContext { vars: vars.iter().map(|v| (v.name.clone(), v.ty.clone())).collect(), ..Default::default() }
    }

    pub fn with_var(mut self, name: &str, ty: Formula) -> TypingContext {
        self.vars.insert(Name::new(name), ty);
        self
    }

    pub fn with_chan(mut self, name: &str, ty: Formula, active: bool) -> TypingContext {
        self.chans.insert(Name::new(name), (ty, active));
        self
    }

    /// The context declaring exactly the free variables of `t` (first type seen wins).
    pub fn from_free_vars(t: &Term) -> TypingContext {
        let mut ctx = TypingContext::new();
        for v in t.free_vars().vars {
            ctx.vars.entry(v.name).or_insert(v.ty);
        }
        ctx
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type mismatch at {}: expected {expected}, found {found}", show_path(.position))]
    TypeMismatch { position: Path, expected: String, found: String },
    #[error("channel discipline violation at {}: {message}", show_path(.position))]
    ChannelDisciplineViolation { position: Path, message: String },
    #[error("ex falso target {target} at {} must be an atom or Top", show_path(.position))]
    EfqTargetNotAtomic { position: Path, target: Formula },
    #[error("unbound name {name} at {}", show_path(.position))]
    UnboundName { position: Path, name: Name },
    #[error("malformed session at {}: {message}", show_path(.position))]
    MalformedSession { position: Path, message: String },
}

pub(crate) fn show_path(p: &Path) -> String {
    let parts: Vec<String> = p.iter().map(|i| i.to_string()).collect();
    format!("[{}]", parts.join(","))
}

impl TypeError {
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::TypeMismatch { .. } => "TypeMismatch",
            TypeError::ChannelDisciplineViolation { .. } => "ChannelDisciplineViolation",
            TypeError::EfqTargetNotAtomic { .. } => "EfqTargetNotAtomic",
            TypeError::UnboundName { .. } => "UnboundName",
            TypeError::MalformedSession { .. } => "MalformedSession",
        }
    }

    pub fn position(&self) -> &Path {
        match self {
            TypeError::TypeMismatch { position, .. }
            | TypeError::ChannelDisciplineViolation { position, .. }
            | TypeError::EfqTargetNotAtomic { position, .. }
            | TypeError::UnboundName { position, .. }
            | TypeError::MalformedSession { position, .. } => position,
        }
    }
}

struct ChanScope {
    name: Name,
    ty: Formula,
    active: bool,
    bare: bool,
}

struct Checker<'a> {
    ctx: &'a TypingContext,
    vars: Vec<Var>,
    chans: Vec<ChanScope>,
    path: Path,
}

fn mismatch(path: &Path, expected: impl ToString, found: &Formula) -> TypeError {
    TypeError::TypeMismatch { position: path.clone(), expected: expected.to_string(), found: found.to_string() }
}

impl Checker<'_> {
    fn in_child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(i);
        let r = f(self);
        self.path.pop();
        r
    }

    fn child(&mut self, i: usize, t: &Term) -> Result<Formula, TypeError> {
        self.in_child(i, |c| c.infer(t))
    }

    fn channel(&mut self, name: &Name, ty: &Formula, active: bool, applied: bool) -> Result<(), TypeError> {
        let violation = |path: &Path, message: String| TypeError::ChannelDisciplineViolation {
            position: path.clone(),
            message,
        };
        if let Some(scope) = self.chans.iter().rev().find(|s| &s.name == name) {
            if scope.active != active {
                return Err(violation(&self.path, format!("activity of {} differs from its binder", name)));
            }
            if &scope.ty != ty {
                return Err(violation(
                    &self.path,
                    format!("occurrence of {} has type {} but its component assigns {}", name, ty, scope.ty),
                ));
            }
            if !scope.bare && !applied {
                return Err(violation(&self.path, format!("channel {} used outside an application", name)));
            }
            return Ok(());
        }
        match self.ctx.chans.get(name) {
            Some((d, act)) if d == ty && *act == active => Ok(()),
            Some((d, _)) => Err(violation(&self.path, format!("free channel {} declared as {}, used as {}", name, d, ty))),
            None => Err(TypeError::UnboundName { position: self.path.clone(), name: name.clone() }),
        }
    }

    fn infer(&mut self, t: &Term) -> Result<Formula, TypeError> {
        match t {
            Term::Var(v) => {
                let declared = match self.vars.iter().rev().find(|b| b.name == v.name) {
                    Some(b) => b.ty.clone(),
                    None => match self.ctx.vars.get(&v.name) {
                        Some(ty) => ty.clone(),
                        None => {
                            return Err(TypeError::UnboundName { position: self.path.clone(), name: v.name.clone() })
                        }
                    },
                };
                if declared != v.ty {
                    return Err(mismatch(&self.path, &declared, &v.ty));
                }
                Ok(v.ty.clone())
            }
            Term::Chan(c) => {
                self.channel(&c.name, &c.ty, c.active, false)?;
                Ok(c.ty.clone())
            }
            Term::Unit => Ok(Formula::Top),
            Term::Lam(x, b) => {
                self.vars.push(x.clone());
                let body = self.child(0, b);
                self.vars.pop();
                Ok(Formula::imp(x.ty.clone(), body?))
            }
            Term::App(f, a) => {
                let fty = match &**f {
                    Term::Chan(c) => {
                        self.in_child(0, |k| k.channel(&c.name, &c.ty, c.active, true))?;
                        c.ty.clone()
                    }
                    other => self.child(0, other)?,
                };
                let aty = self.child(1, a)?;
                match &fty {
                    Formula::Impl(dom, cod) => {
                        if **dom != aty {
                            self.path.push(1);
                            let e = mismatch(&self.path, &**dom, &aty);
                            self.path.pop();
                            return Err(e);
                        }
                        Ok((**cod).clone())
                    }
                    _ => {
                        self.path.push(0);
                        let e = mismatch(&self.path, "an implication", &fty);
                        self.path.pop();
                        Err(e)
                    }
                }
            }
            Term::Pair(a, b) => {
                let at = self.child(0, a)?;
                let bt = self.child(1, b)?;
                Ok(Formula::conj(at, bt))
            }
            Term::Proj(a, i) => {
                let at = self.child(0, a)?;
                match &at {
                    Formula::Conj(l, r) => Ok(if *i == 0 { (**l).clone() } else { (**r).clone() }),
                    _ => Err(mismatch(&self.path, "a conjunction", &at)),
                }
            }
            Term::Inj(i, ty, a) => {
                let at = self.child(0, a)?;
                match ty {
                    Formula::Disj(l, r) => {
                        let want = if *i == 0 { l } else { r };
                        if **want != at {
                            return Err(mismatch(&self.path, &**want, &at));
                        }
                        Ok(ty.clone())
                    }
                    _ => Err(mismatch(&self.path, "a disjunction annotation", ty)),
                }
            }
            Term::Case { scrut, left, lbody, right, rbody } => {
                let st = self.child(0, scrut)?;
                let (l, r) = match &st {
                    Formula::Disj(l, r) => (l.clone(), r.clone()),
                    _ => return Err(mismatch(&self.path, "a disjunction", &st)),
                };
                if left.ty != *l {
                    return Err(mismatch(&self.path, &*l, &left.ty));
                }
                if right.ty != *r {
                    return Err(mismatch(&self.path, &*r, &right.ty));
                }
                self.vars.push(left.clone());
                let lt = self.child(1, lbody);
                self.vars.pop();
                let lt = lt?;
                self.vars.push(right.clone());
                let rt = self.child(2, rbody);
                self.vars.pop();
                let rt = rt?;
                if lt != rt {
                    self.path.push(2);
                    let e = mismatch(&self.path, &lt, &rt);
                    self.path.pop();
                    return Err(e);
                }
                Ok(lt)
            }
            Term::Efq(p, a) => {
                if !p.is_efq_target() {
                    return Err(TypeError::EfqTargetNotAtomic { position: self.path.clone(), target: p.clone() });
                }
                let at = self.child(0, a)?;
                if at != Formula::Bot {
                    self.path.push(0);
                    let e = mismatch(&self.path, Formula::Bot, &at);
                    self.path.pop();
                    return Err(e);
                }
                Ok(p.clone())
            }
            Term::Par(p) => {
                let malformed = |path: &Path, message: &str| TypeError::MalformedSession {
                    position: path.clone(),
                    message: message.to_string(),
                };
                if p.comps.len() < 2 || p.comps.len() != p.axiom.len() {
                    return Err(malformed(&self.path, "component count differs from the axiom"));
                }
                if p.comps.iter().filter(|c| c.is_marked()).count() > 1 {
                    return Err(malformed(&self.path, "more than one underlined component"));
                }
                let mut ty: Option<Formula> = None;
                for (i, comp) in p.comps.iter().enumerate() {
                    self.chans.push(ChanScope {
                        name: p.chan.clone(),
                        ty: p.axiom.occurrence_type(i),
                        active: p.active,
                        bare: p.axiom.is_bare(i),
                    });
                    let ct = self.in_child(i, |k| match comp {
                        Term::Mark(inner) => k.child(0, inner),
                        other => k.infer(other),
                    });
                    self.chans.pop();
                    let ct = ct?;
                    match &ty {
                        None => ty = Some(ct),
                        Some(t0) if *t0 != ct => {
                            self.path.push(i);
                            let e = mismatch(&self.path, t0, &ct);
                            self.path.pop();
                            return Err(e);
                        }
                        _ => {}
                    }
                }
                Ok(ty.expect("at least two components"))
            }
            Term::Contract(a, b) => {
                let at = self.child(0, a)?;
                let bt = self.child(1, b)?;
                if at != bt {
                    self.path.push(1);
                    let e = mismatch(&self.path, &at, &bt);
                    self.path.pop();
                    return Err(e);
                }
                Ok(at)
            }
            Term::Mark(_) => Err(TypeError::MalformedSession {
                position: self.path.clone(),
                message: "underline outside a session component".to_string(),
            }),
        }
    }
}

/// Type of `t` under `ctx`, or the first violation found in a left-to-right traversal.
pub fn infer_type(ctx: &TypingContext, t: &Term) -> Result<Formula, TypeError> {
    Checker { ctx, vars: Vec::new(), chans: Vec::new(), path: Vec::new() }.infer(t)
}

/// Type of a term assumed well typed. Returns `None` when the shape is inconsistent.
pub fn type_of(t: &Term) -> Option<Formula> {
    Some(match t {
        Term::Var(v) => v.ty.clone(),
        Term::Chan(c) => c.ty.clone(),
        Term::Unit => Formula::Top,
        Term::Lam(x, b) => Formula::imp(x.ty.clone(), type_of(b)?),
        Term::App(f, _) => match type_of(f)? {
            Formula::Impl(_, cod) => (*cod).clone(),
            _ => return None,
        },
        Term::Pair(a, b) => Formula::conj(type_of(a)?, type_of(b)?),
        Term::Proj(a, i) => match type_of(a)? {
            Formula::Conj(l, r) => (*if *i == 0 { l } else { r }).clone(),
            _ => return None,
        },
        Term::Inj(_, ty, _) => ty.clone(),
        Term::Case { lbody, .. } => type_of(lbody)?,
        Term::Efq(p, _) => p.clone(),
        Term::Par(p) => type_of(p.comps.first()?)?,
        Term::Contract(a, _) => type_of(a)?,
        Term::Mark(a) => type_of(a)?,
    })
}

/// One entry of a machine-readable report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportError {
    pub code: String,
    pub position: Path,
    pub message: String,
}

/// `{ok, type, errors}` check report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub errors: Vec<ReportError>,
}

pub fn check(ctx: &TypingContext, t: &Term) -> CheckReport {
    match infer_type(ctx, t) {
        Ok(ty) => CheckReport { ok: true, ty: Some(ty.to_string()), errors: vec![] },
        Err(e) => CheckReport {
            ok: false,
            ty: None,
            errors: vec![ReportError { code: e.code().to_string(), position: e.position().clone(), message: e.to_string() }],
        },
    }
}

/// Type preservation and free-variable inclusion across one reduction step.
pub fn check_subject_reduction(ctx: &TypingContext, before: &Term, after: &Term) -> PropertyReport {
    let mut report = PropertyReport::new("subject-reduction");
    let tb = infer_type(ctx, before);
    let ta = infer_type(ctx, after);
    match (&tb, &ta) {
        (Ok(a), Ok(b)) if a == b => {}
        (Ok(a), Ok(b)) => report.fail(vec![], format!("type changed from {} to {}", a, b)),
        (Err(e), _) => report.fail(e.position().clone(), format!("term before the step is ill typed: {}", e)),
        (_, Err(e)) => report.fail(e.position().clone(), format!("term after the step is ill typed: {}", e)),
    }
    let fb = before.free_vars();
    let fa = after.free_vars();
    if !fa.is_subset(&fb) {
        report.fail(vec![], "the step introduced free variables".to_string());
    }
    report
}
