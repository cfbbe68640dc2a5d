use super::formula::Formula;

/// How the components of a session use their channel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AxiomMode {
    /// Every occurrence in component `i` is an application `a t` with `a : F_i -> G_i`.
    General,
    /// Excluded middle: component 0 sends through `a : ~A`, component 1 receives a bare `a : A`.
    Em,
    /// One sender through `a : ~A` and `n` receivers each using a bare `a : A`.
    Broadcast(usize),
}

/// An axiom as written, before validation.
///
/// Each component is a pair `(F, G)`, the channel type in that component being `F -> G`.
/// For `Em`/`Broadcast` the components are `(A, Bot)` followed by `(Top, A)` for every receiver.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxiomScheme {
    pub mode: AxiomMode,
    pub components: Vec<(Formula, Formula)>,
    /// Explicit routing `receiver -> sender`. Schemes minted by cross reductions carry it,
    /// since their antecedents need not be distinct.
    pub routing: Option<Vec<Option<usize>>>,
}

impl AxiomScheme {
    pub fn general(components: Vec<(Formula, Formula)>) -> AxiomScheme {
        AxiomScheme { mode: AxiomMode::General, components, routing: None }
    }

    pub fn routed(components: Vec<(Formula, Formula)>, routing: Vec<Option<usize>>) -> AxiomScheme {
        AxiomScheme { mode: AxiomMode::General, components, routing: Some(routing) }
    }

    /// `A \/ ~A`.
    pub fn em(a: Formula) -> AxiomScheme {
        AxiomScheme::broadcast_like(AxiomMode::Em, a, 1)
    }

    /// `~A \/ A \/ ... \/ A` with `n` receivers.
    pub fn broadcast(a: Formula, n: usize) -> AxiomScheme {
        AxiomScheme::broadcast_like(AxiomMode::Broadcast(n), a, n)
    }

    fn broadcast_like(mode: AxiomMode, a: Formula, n: usize) -> AxiomScheme {
        let mut components = vec![(a.clone(), Formula::Bot)];
        components.extend((0..n).map(|_| (Formula::Top, a.clone())));
        AxiomScheme { mode, components, routing: None }
    }

    /// `(A1 -> A2) \/ ... \/ (An -> A1)`.
    pub fn cyclic(atoms: &[Formula]) -> AxiomScheme {
        let n = atoms.len();
        AxiomScheme::general(
            (0..n).map(|i| (atoms[i].clone(), atoms[(i + 1) % n].clone())).collect(),
        )
    }

    /// `(A -> B) \/ (B -> A)`.
    pub fn godel(a: Formula, b: Formula) -> AxiomScheme {
        AxiomScheme::general(vec![(a.clone(), b.clone()), (b, a)])
    }

    /// `(A1 -> A2) \/ ... \/ (A(n-1) -> An) \/ ~An`.
    pub fn godel_n(atoms: &[Formula]) -> AxiomScheme {
        let n = atoms.len();
        let mut components: Vec<(Formula, Formula)> =
            (0..n.saturating_sub(1)).map(|i| (atoms[i].clone(), atoms[i + 1].clone())).collect();
        if let Some(last) = atoms.last() {
            components.push((last.clone(), Formula::Bot));
        }
        AxiomScheme::general(components)
    }
}

/// An axiom that passed validation, with the routing used by cross reductions:
/// component `i` receives from `source(i)`, the component whose antecedent is `G_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValidatedAxiom {
    scheme: AxiomScheme,
    sources: Vec<Option<usize>>,
}

impl ValidatedAxiom {
    pub(crate) fn new_unchecked(scheme: AxiomScheme, sources: Vec<Option<usize>>) -> ValidatedAxiom {
        ValidatedAxiom { scheme, sources }
    }

    pub fn scheme(&self) -> &AxiomScheme {
        &self.scheme
    }

    pub fn mode(&self) -> &AxiomMode {
        &self.scheme.mode
    }

    pub fn len(&self) -> usize {
        self.scheme.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scheme.components.is_empty()
    }

    pub fn antecedent(&self, i: usize) -> &Formula {
        &self.scheme.components[i].0
    }

    pub fn consequent(&self, i: usize) -> &Formula {
        &self.scheme.components[i].1
    }

    pub fn source(&self, i: usize) -> Option<usize> {
        self.sources[i]
    }

    pub fn sources(&self) -> &[Option<usize>] {
        &self.sources
    }

    /// Excluded-middle style scheme (one sender, bare receivers).
    pub fn is_em_like(&self) -> bool {
        !matches!(self.scheme.mode, AxiomMode::General)
    }

    /// Whether occurrences in component `i` are bare channel terms.
    pub fn is_bare(&self, i: usize) -> bool {
        self.is_em_like() && i > 0
    }

    /// Type carried by every channel occurrence in component `i`.
    pub fn occurrence_type(&self, i: usize) -> Formula {
        if self.is_bare(i) {
            self.consequent(i).clone()
        } else {
            Formula::imp(self.antecedent(i).clone(), self.consequent(i).clone())
        }
    }
}
