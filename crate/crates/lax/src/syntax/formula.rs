use std::fmt;
use std::sync::Arc;

/// An identifier used for atoms, variables and channels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Propositional formulas over atoms, `Top` and `Bot`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Name),
    Top,
    Bot,
    Impl(Arc<Formula>, Arc<Formula>),
    Conj(Arc<Formula>, Arc<Formula>),
    Disj(Arc<Formula>, Arc<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Name::new(name))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Impl(Arc::new(a), Arc::new(b))
    }

    pub fn conj(a: Formula, b: Formula) -> Formula {
        Formula::Conj(Arc::new(a), Arc::new(b))
    }

    pub fn disj(a: Formula, b: Formula) -> Formula {
        Formula::Disj(Arc::new(a), Arc::new(b))
    }

    /// `~a`, i.e. `a -> Bot`.
    pub fn not(a: Formula) -> Formula {
        Formula::imp(a, Formula::Bot)
    }

    /// The boolean encoding `Top \/ Top`.
    pub fn bool() -> Formula {
        Formula::disj(Formula::Top, Formula::Top)
    }

    /// Right-nested conjunction of `parts`; the empty conjunction is `Top`.
    pub fn conjoin(parts: &[Formula]) -> Formula {
        match parts {
            [] => Formula::Top,
            [one] => one.clone(),
            [first, rest @ ..] => Formula::conj(first.clone(), Formula::conjoin(rest)),
        }
    }

    /// Number of connective occurrences.
    pub fn complexity(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => 0,
            Formula::Impl(a, b) | Formula::Conj(a, b) | Formula::Disj(a, b) => {
                1 + a.complexity() + b.complexity()
            }
        }
    }

    /// Atoms and `Top` may be the target of ex falso; `Bot` may not.
    pub fn is_efq_target(&self) -> bool {
        matches!(self, Formula::Atom(_) | Formula::Top)
    }

    pub fn is_prime(&self) -> bool {
        !matches!(self, Formula::Conj(..))
    }

    /// Splits every top-level conjunction, left to right.
    pub fn prime_factors(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        fn go(f: &Formula, out: &mut Vec<Formula>) {
            match f {
                Formula::Conj(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other.clone()),
            }
        }
        go(self, &mut out);
        out
    }

    /// Reflexive subformula relation.
    pub fn is_subformula_of(&self, other: &Formula) -> bool {
        if self == other {
            return true;
        }
        match other {
            Formula::Impl(a, b) | Formula::Conj(a, b) | Formula::Disj(a, b) => {
                self.is_subformula_of(a) || self.is_subformula_of(b)
            }
            _ => false,
        }
    }

    pub fn is_proper_subformula_of(&self, other: &Formula) -> bool {
        self != other && self.is_subformula_of(other)
    }

    /// All subformulas, including `self`, without duplicates.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        fn go(f: &Formula, out: &mut Vec<Formula>) {
            if !out.contains(f) {
                out.push(f.clone());
            }
            if let Formula::Impl(a, b) | Formula::Conj(a, b) | Formula::Disj(a, b) = f {
                go(a, out);
                go(b, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// Atom names in first-occurrence order.
    pub fn atoms(&self) -> Vec<Name> {
        let mut out = Vec::new();
        fn go(f: &Formula, out: &mut Vec<Name>) {
            match f {
                Formula::Atom(n) => {
                    if !out.contains(n) {
                        out.push(n.clone())
                    }
                }
                Formula::Top | Formula::Bot => {}
                Formula::Impl(a, b) | Formula::Conj(a, b) | Formula::Disj(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
