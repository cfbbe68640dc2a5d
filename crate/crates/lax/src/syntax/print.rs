use std::fmt::{self, Write};

use super::axiom::{AxiomMode, ValidatedAxiom};
use super::formula::Formula;
use super::term::Term;

// Formula levels: 0 implication, 1 disjunction, 2 conjunction, 3 prefix/atomic.
fn write_formula(f: &Formula, level: u8, out: &mut String) {
    if is_bool(f) {
        out.push_str("Bool");
        return;
    }
    let own = match f {
        Formula::Impl(_, b) if **b != Formula::Bot => 0,
        Formula::Disj(..) => 1,
        Formula::Conj(..) => 2,
        _ => 3,
    };
    if own < level {
        out.push('(');
    }
    match f {
        Formula::Atom(n) => out.push_str(n.as_str()),
        Formula::Top => out.push_str("Top"),
        Formula::Bot => out.push_str("Bot"),
        Formula::Impl(a, b) if **b == Formula::Bot => {
            out.push('~');
            write_formula(a, 3, out);
        }
        Formula::Impl(a, b) => {
            write_formula(a, 1, out);
            out.push_str(" -> ");
            write_formula(b, 0, out);
        }
        Formula::Disj(a, b) => {
            write_formula(a, 2, out);
            out.push_str(" \\/ ");
            write_formula(b, 1, out);
        }
        Formula::Conj(a, b) => {
            write_formula(a, 3, out);
            out.push_str(" /\\ ");
            write_formula(b, 2, out);
        }
    }
    if own < level {
        out.push(')');
    }
}

fn is_bool(f: &Formula) -> bool {
    matches!(f, Formula::Disj(a, b) if **a == Formula::Top && **b == Formula::Top)
}

pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, 0, &mut s);
    s
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

/// Axiom literal in the concrete syntax (`EM[A]`, `EMN[A;n]` or `AX{...}`).
pub fn print_axiom(ax: &ValidatedAxiom) -> String {
    match ax.mode() {
        AxiomMode::Em => format!("EM[{}]", ax.antecedent(0)),
        AxiomMode::Broadcast(n) => format!("EMN[{};{}]", ax.antecedent(0), n),
        AxiomMode::General => {
            let routed = ax.scheme().routing.is_some();
            let parts: Vec<String> = (0..ax.len())
                .map(|i| {
                    let c = print_formula(&ax.occurrence_type(i));
                    match (routed, ax.source(i)) {
                        (true, Some(j)) => format!("{} @{}", c, j + 1),
                        _ => c,
                    }
                })
                .collect();
            format!("AX{{{}}}", parts.join(", "))
        }
    }
}

// Term levels: 0 contraction, 1 lambda, 2 application, 3 atom.
fn write_term(t: &Term, level: u8, out: &mut String) {
    let own = match t {
        Term::Contract(..) => 0,
        Term::Lam(..) | Term::Mark(_) => 1,
        Term::App(..) | Term::Proj(..) => 2,
        _ => 3,
    };
    if own < level {
        out.push('(');
    }
    match t {
        Term::Var(v) => out.push_str(v.name.as_str()),
        Term::Chan(c) => out.push_str(c.name.as_str()),
        Term::Unit => out.push_str("tt"),
        Term::Lam(x, b) => {
            let _ = write!(out, "\\{}:{}. ", x.name, x.ty);
            write_term(b, 0, out);
        }
        Term::App(f, a) => {
            write_term(f, 2, out);
            out.push(' ');
            write_term(a, 3, out);
        }
        Term::Proj(a, i) => {
            write_term(a, 2, out);
            let _ = write!(out, " pi{}", i);
        }
        Term::Pair(a, b) => {
            out.push('<');
            write_term(a, 0, out);
            out.push_str(", ");
            write_term(b, 0, out);
            out.push('>');
        }
        Term::Inj(i, ty, a) => {
            let _ = write!(out, "inj{}[{}](", i, ty);
            write_term(a, 0, out);
            out.push(')');
        }
        Term::Efq(p, a) => {
            let _ = write!(out, "efq[{}](", p);
            write_term(a, 0, out);
            out.push(')');
        }
        Term::Case { scrut, left, lbody, right, rbody } => {
            out.push_str("case ");
            write_term(scrut, 0, out);
            let _ = write!(out, " of {{{}. ", left.name);
            write_term(lbody, 0, out);
            let _ = write!(out, " | {}. ", right.name);
            write_term(rbody, 0, out);
            out.push('}');
        }
        Term::Par(p) => {
            let _ = write!(
                out,
                "nu{} {}:{}. [",
                if p.active { "!" } else { "" },
                p.chan,
                print_axiom(&p.axiom)
            );
            for (i, c) in p.comps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                write_term(c, 0, out);
            }
            out.push(']');
        }
        Term::Contract(a, b) => {
            write_term(a, 2, out);
            out.push_str(" |+| ");
            write_term(b, 0, out);
        }
        Term::Mark(a) => {
            out.push('@');
            write_term(a, 0, out);
        }
    }
    if own < level {
        out.push(')');
    }
}

/// Prints a term, preceded by `x:A, ... |- ` when it has free variables.
///
/// The binders of the case branches carry no annotation in the syntax; their types are recovered
/// from the scrutinee when parsing.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    let fv = t.free_vars();
    if !fv.vars.is_empty() {
        let mut seen = Vec::new();
        let decls: Vec<String> = fv
            .vars
            .iter()
            .filter(|v| {
                if seen.contains(&v.name) {
                    false
                } else {
                    seen.push(v.name.clone());
                    true
                }
            })
            .map(|v| format!("{}:{}", v.name, v.ty))
            .collect();
        out.push_str(&decls.join(", "));
        out.push_str(" |- ");
    }
    write_term(t, 0, &mut out);
    out
}

/// Prints a term without the free-variable header.
pub fn print_term_body(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, 0, &mut out);
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}
