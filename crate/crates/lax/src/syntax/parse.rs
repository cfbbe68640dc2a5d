use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use super::axiom::{AxiomScheme, ValidatedAxiom};
use super::formula::{Formula, Name};
use super::term::{Chan, NameSupply, Par, Term, Var};
use crate::typing::{type_of, validate_axiom};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Unbound,
    /// A sending channel used without an argument.
    ChannelOutsideApplication,
    InvalidAxiom,
    /// Case binder types could not be recovered from the scrutinee.
    CaseScrutinee,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Turnstile,
    Bars,
    Plus,
    Bar,
    At,
    Bang,
    Semi,
    Arrow,
    And,
    Or,
    Tilde,
    Lambda,
    Dot,
    Comma,
    Colon,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{}`", s),
        Tok::Num(n) => format!("`{}`", n),
        Tok::Eof => "end of input".to_string(),
        other => {
            let s = match other {
                Tok::Turnstile => "|-",
                Tok::Bars => "||",
                Tok::Plus => "|+|",
                Tok::Bar => "|",
                Tok::At => "@",
                Tok::Bang => "!",
                Tok::Semi => ";",
                Tok::Arrow => "->",
                Tok::And => "/\\",
                Tok::Or => "\\/",
                Tok::Tilde => "~",
                Tok::Lambda => "\\",
                Tok::Dot => ".",
                Tok::Comma => ",",
                Tok::Colon => ":",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBrack => "[",
                Tok::RBrack => "]",
                Tok::LBrace => "{",
                Tok::RBrace => "}",
                Tok::Lt => "<",
                Tok::Gt => ">",
                _ => unreachable!(),
            };
            format!("`{}`", s)
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| ParseError { kind: ParseErrorKind::Syntax, line, column, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text.parse().map_err(|_| err(line, col, format!("number {} out of range", text)))?;
            (Tok::Num(n), j - i)
        } else {
            match (c, next, next2) {
                ('|', Some('+'), Some('|')) => (Tok::Plus, 3),
                ('|', Some('-'), _) => (Tok::Turnstile, 2),
                ('|', Some('|'), _) => (Tok::Bars, 2),
                ('|', _, _) => (Tok::Bar, 1),
                ('-', Some('>'), _) => (Tok::Arrow, 2),
                ('/', Some('\\'), _) => (Tok::And, 2),
                ('\\', Some('/'), _) => (Tok::Or, 2),
                ('\\', _, _) => (Tok::Lambda, 1),
                ('@', _, _) => (Tok::At, 1),
                ('!', _, _) => (Tok::Bang, 1),
                (';', _, _) => (Tok::Semi, 1),
                ('~', _, _) => (Tok::Tilde, 1),
                ('.', _, _) => (Tok::Dot, 1),
                (',', _, _) => (Tok::Comma, 1),
                (':', _, _) => (Tok::Colon, 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('[', _, _) => (Tok::LBrack, 1),
                (']', _, _) => (Tok::RBrack, 1),
                ('{', _, _) => (Tok::LBrace, 1),
                ('}', _, _) => (Tok::RBrace, 1),
                ('<', _, _) => (Tok::Lt, 1),
                ('>', _, _) => (Tok::Gt, 1),
                _ => return Err(err(line, col, format!("unexpected character `{}`", c))),
            }
        };
        out.push(Spanned { tok, line: start_line, column: start_col });
        i += len;
        col += len;
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const KEYWORDS: &[&str] = &["tt", "pi0", "pi1", "inj0", "inj1", "efq", "case", "of", "nu"];

#[derive(Clone)]
enum Binding {
    Var(Var),
    Chan { name: Name, ty: Formula, active: bool, bare: bool },
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scopes: Vec<(String, Binding)>,
    globals: Vec<Var>,
    taken: HashSet<Name>,
    supply: NameSupply,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        let toks = lex(src)?;
        let mut supply = NameSupply::new();
        for t in &toks {
            if let Tok::Ident(s) = &t.tok {
                supply.reserve(&Name::new(s));
            }
        }
        Ok(Parser { toks, pos: 0, scopes: Vec::new(), globals: Vec::new(), taken: HashSet::new(), supply })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }


    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind, message: String) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { kind, line: s.line, column: s.column, message }
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(self.error(ParseErrorKind::Syntax, format!("expected {}, found {}", wanted, describe(self.peek()))))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&describe(&t))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn number(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("a number"),
        }
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn end(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            Ok(Formula::imp(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self) -> PResult<Formula> {
        let lhs = self.conj()?;
        if *self.peek() == Tok::Or {
            self.bump();
            Ok(Formula::disj(lhs, self.disj()?))
        } else {
            Ok(lhs)
        }
    }

    fn conj(&mut self) -> PResult<Formula> {
        let lhs = self.prefix()?;
        if *self.peek() == Tok::And {
            self.bump();
            Ok(Formula::conj(lhs, self.conj()?))
        } else {
            Ok(lhs)
        }
    }

    fn prefix(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.prefix()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(match s.as_str() {
                    "Top" => Formula::Top,
                    "Bot" => Formula::Bot,
                    "Bool" => Formula::bool(),
                    _ => Formula::atom(&s),
                })
            }
            _ => self.unexpected("a formula"),
        }
    }

    // ---- axioms ----

    fn formula_list(&mut self, close: Tok) -> PResult<Vec<Formula>> {
        let mut out = vec![self.formula()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.formula()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    fn axiom(&mut self) -> PResult<ValidatedAxiom> {
        let head = self.ident()?;
        let scheme = match head.as_str() {
            "EM" => {
                self.expect(Tok::LBrack)?;
                let a = self.formula()?;
                self.expect(Tok::RBrack)?;
                AxiomScheme::em(a)
            }
            "EMN" => {
                self.expect(Tok::LBrack)?;
                let a = self.formula()?;
                self.expect(Tok::Semi)?;
                let n = self.number()?;
                self.expect(Tok::RBrack)?;
                if n == 0 {
                    return Err(self.error(ParseErrorKind::InvalidAxiom, "EMN needs at least one receiver".into()));
                }
                AxiomScheme::broadcast(a, n)
            }
            "C" | "G" | "GN" => {
                self.expect(Tok::LBrack)?;
                let fs = self.formula_list(Tok::RBrack)?;
                match head.as_str() {
                    "C" => AxiomScheme::cyclic(&fs),
                    "GN" => AxiomScheme::godel_n(&fs),
                    _ => {
                        if fs.len() != 2 {
                            return Err(self.error(ParseErrorKind::InvalidAxiom, "G takes exactly two formulas".into()));
                        }
                        AxiomScheme::godel(fs[0].clone(), fs[1].clone())
                    }
                }
            }
            "AX" => {
                self.expect(Tok::LBrace)?;
                let mut comps = Vec::new();
                let mut routing = Vec::new();
                loop {
                    let f = self.formula()?;
                    match f {
                        Formula::Impl(a, b) => comps.push(((*a).clone(), (*b).clone())),
                        _ => {
                            return Err(self.error(
                                ParseErrorKind::InvalidAxiom,
                                format!("axiom component {} is not an implication", f),
                            ))
                        }
                    }
                    if *self.peek() == Tok::At {
                        self.bump();
                        let j = self.number()?;
                        if j == 0 {
                            return Err(self.error(ParseErrorKind::InvalidAxiom, "sources are numbered from 1".into()));
                        }
                        routing.push(Some(j - 1));
                    } else {
                        routing.push(None);
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                if routing.iter().any(|r| r.is_some()) {
                    AxiomScheme::routed(comps, routing)
                } else {
                    AxiomScheme::general(comps)
                }
            }
            other => {
                return Err(self.error(ParseErrorKind::Syntax, format!("unknown axiom `{}`", other)));
            }
        };
        validate_axiom(&scheme).map_err(|e| self.error(ParseErrorKind::InvalidAxiom, e.to_string()))
    }

    // ---- terms ----

    fn bind_name(&mut self, src: &str) -> Name {
        let n = Name::new(src);
        if self.taken.insert(n.clone()) {
            n
        } else {
            let fresh = self.supply.fresh(src);
            self.taken.insert(fresh.clone());
            fresh
        }
    }

    fn lookup(&self, src: &str) -> Option<Binding> {
        if let Some((_, b)) = self.scopes.iter().rev().find(|(s, _)| s == src) {
            return Some(b.clone());
        }
        self.globals.iter().find(|v| v.name.as_str() == src).map(|v| Binding::Var(v.clone()))
    }

    fn context(&mut self) -> PResult<()> {
        let has_turnstile = self.toks.iter().any(|t| t.tok == Tok::Turnstile);
        if !has_turnstile {
            return Ok(());
        }
        loop {
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.formula()?;
            if self.globals.iter().any(|v| v.name.as_str() == name) {
                return Err(self.error(ParseErrorKind::Syntax, format!("`{}` declared twice", name)));
            }
            self.taken.insert(Name::new(&name));
            self.globals.push(Var::new(&name, ty));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Turnstile => {
                    self.bump();
                    return Ok(());
                }
                _ => return self.unexpected("`,` or `|-`"),
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let src = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.formula()?;
            self.expect(Tok::Dot)?;
            let name = self.bind_name(&src);
            let x = Var { name, ty };
            self.scopes.push((src, Binding::Var(x.clone())));
            let body = self.term();
            self.scopes.pop();
            return Ok(Term::lam(x, body?));
        }
        let lhs = self.app()?;
        if *self.peek() == Tok::Plus {
            self.bump();
            Ok(Term::contract(lhs, self.term()?))
        } else {
            Ok(lhs)
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !matches!(s.as_str(), "of" | "pi0" | "pi1"),
            Tok::LParen | Tok::Lt => true,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let (mut t, mut pending) = self.atom()?;
        loop {
            if self.is_ident("pi0") || self.is_ident("pi1") {
                if pending {
                    return Err(self.error(
                        ParseErrorKind::ChannelOutsideApplication,
                        "a sending channel must be applied to its message".into(),
                    ));
                }
                let i = if self.is_ident("pi0") { 0 } else { 1 };
                self.bump();
                t = Term::proj(t, i);
            } else if self.starts_atom() {
                let (arg, arg_pending) = self.atom()?;
                if arg_pending {
                    return Err(self.error(
                        ParseErrorKind::ChannelOutsideApplication,
                        "a sending channel cannot occur as an argument".into(),
                    ));
                }
                t = Term::app(t, arg);
                pending = false;
            } else {
                break;
            }
        }
        if pending {
            return Err(self.error(
                ParseErrorKind::ChannelOutsideApplication,
                "a sending channel must be applied to its message".into(),
            ));
        }
        Ok(t)
    }

    fn bracketed_formula(&mut self) -> PResult<Formula> {
        self.expect(Tok::LBrack)?;
        let f = self.formula()?;
        self.expect(Tok::RBrack)?;
        Ok(f)
    }

    fn parenthesized(&mut self) -> PResult<Term> {
        self.expect(Tok::LParen)?;
        let t = self.term()?;
        self.expect(Tok::RParen)?;
        Ok(t)
    }

    /// Returns the atom and whether it is a channel that still needs its argument.
    fn atom(&mut self) -> PResult<(Term, bool)> {
        match self.peek().clone() {
            Tok::LParen => Ok((self.parenthesized()?, false)),
            Tok::Lt => {
                self.bump();
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::Gt)?;
                Ok((Term::pair(a, b), false))
            }
            Tok::Ident(s) => match s.as_str() {
                "tt" => {
                    self.bump();
                    Ok((Term::Unit, false))
                }
                "inj0" | "inj1" => {
                    self.bump();
                    let ty = self.bracketed_formula()?;
                    let t = self.parenthesized()?;
                    Ok((Term::inj(if s == "inj0" { 0 } else { 1 }, ty, t), false))
                }
                "efq" => {
                    self.bump();
                    let ty = self.bracketed_formula()?;
                    let t = self.parenthesized()?;
                    Ok((Term::efq(ty, t), false))
                }
                "case" => {
                    self.bump();
                    Ok((self.case()?, false))
                }
                "nu" => {
                    self.bump();
                    Ok((self.session()?, false))
                }
                _ if KEYWORDS.contains(&s.as_str()) => self.unexpected("a term"),
                _ => {
                    self.bump();
                    match self.lookup(&s) {
                        Some(Binding::Var(v)) => Ok((Term::Var(v), false)),
                        Some(Binding::Chan { name, ty, active, bare }) => {
                            Ok((Term::Chan(Chan { name, ty, active }), !bare))
                        }
                        None => {
                            self.pos -= 1;
                            Err(self.error(ParseErrorKind::Unbound, format!("unbound identifier `{}`", s)))
                        }
                    }
                }
            },
            _ => self.unexpected("a term"),
        }
    }

    fn case(&mut self) -> PResult<Term> {
        let scrut = self.term()?;
        if !self.is_ident("of") {
            return self.unexpected("`of`");
        }
        self.bump();
        let (lt, rt) = match type_of(&scrut) {
            Some(Formula::Disj(l, r)) => ((*l).clone(), (*r).clone()),
            Some(other) => {
                return Err(self.error(
                    ParseErrorKind::CaseScrutinee,
                    format!("case scrutinee has type {}, not a disjunction", other),
                ))
            }
            None => {
                return Err(self.error(ParseErrorKind::CaseScrutinee, "cannot type the case scrutinee".into()))
            }
        };
        self.expect(Tok::LBrace)?;
        let ls = self.ident()?;
        self.expect(Tok::Dot)?;
        let left = Var { name: self.bind_name(&ls), ty: lt };
        self.scopes.push((ls, Binding::Var(left.clone())));
        let lbody = self.term();
        self.scopes.pop();
        let lbody = lbody?;
        self.expect(Tok::Bar)?;
        let rs = self.ident()?;
        self.expect(Tok::Dot)?;
        let right = Var { name: self.bind_name(&rs), ty: rt };
        self.scopes.push((rs, Binding::Var(right.clone())));
        let rbody = self.term();
        self.scopes.pop();
        let rbody = rbody?;
        self.expect(Tok::RBrace)?;
        Ok(Term::case(scrut, left, lbody, right, rbody))
    }

    fn session(&mut self) -> PResult<Term> {
        let active = if *self.peek() == Tok::Bang {
            self.bump();
            true
        } else {
            false
        };
        let src = self.ident()?;
        self.expect(Tok::Colon)?;
        let axiom = Arc::new(self.axiom()?);
        self.expect(Tok::Dot)?;
        self.expect(Tok::LBrack)?;
        let chan = self.bind_name(&src);
        let mut comps = Vec::new();
        loop {
            let i = comps.len();
            if i >= axiom.len() {
                return Err(self.error(
                    ParseErrorKind::Syntax,
                    format!("the axiom has only {} components", axiom.len()),
                ));
            }
            let binding = Binding::Chan {
                name: chan.clone(),
                ty: axiom.occurrence_type(i),
                active,
                bare: axiom.is_bare(i),
            };
            self.scopes.push((src.clone(), binding));
            let marked = if *self.peek() == Tok::At {
                self.bump();
                true
            } else {
                false
            };
            let c = self.term();
            self.scopes.pop();
            let c = c?;
            comps.push(if marked { Term::mark(c) } else { c });
            match self.peek() {
                Tok::Bars => {
                    self.bump();
                }
                Tok::RBrack => {
                    self.bump();
                    break;
                }
                _ => return self.unexpected("`||` or `]`"),
            }
        }
        if comps.len() != axiom.len() {
            return Err(self.error(
                ParseErrorKind::Syntax,
                format!("the axiom has {} components but {} were given", axiom.len(), comps.len()),
            ));
        }
        Ok(Term::Par(Par { chan, active, axiom, comps }))
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.end()?;
    Ok(f)
}

/// Parses an axiom literal such as `EM[A]`, `EMN[A;3]`, `C[A,B,C]`, `G[A,B]`, `GN[A,B]` or
/// `AX{A->B, B->Bot}`.
pub fn parse_axiom(text: &str) -> Result<ValidatedAxiom, ParseError> {
    let mut p = Parser::new(text)?;
    let a = p.axiom()?;
    p.end()?;
    Ok(a)
}

/// Parses a term, optionally preceded by a context `x:A, y:B |- `.
///
/// Binders are renamed apart so that no bound name repeats or shadows a free one.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_term_with_context(text).map(|(t, _)| t)
}

/// Like [`parse_term`], also returning the declared context.
pub fn parse_term_with_context(text: &str) -> Result<(Term, Vec<Var>), ParseError> {
    let mut p = Parser::new(text)?;
    p.context()?;
    let t = p.term()?;
    p.end()?;
    Ok((t, p.globals))
}
