//! Formulas, proof terms, axiom schemes and their concrete syntax.

mod axiom;
mod formula;
mod parse;
mod print;
mod term;

pub use axiom::{AxiomMode, AxiomScheme, ValidatedAxiom};
pub use formula::{Formula, Name};
pub use parse::{parse_axiom, parse_formula, parse_term, parse_term_with_context, ParseError, ParseErrorKind};
pub use print::{print_axiom, print_formula, print_term, print_term_body};
pub use term::{alpha_eq, Chan, FreeVars, NameSupply, Par, Path, Term, Var};
