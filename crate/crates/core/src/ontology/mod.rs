//! EL++ ontology data model.
//!
//! Concepts are built from `Thing`, `Nothing`, concept names, nominals,
//! n-ary conjunction and existential restriction. [`ConceptExpr::ExistsAll`]
//! is an internal operator introduced by [`semantic_enhance`]: `ExistsAll(r, C)`
//! denotes the elements related by `r` to *every* element of `C`. It is
//! neither `∃r.C` nor `∀r.C`; the latter would mean "related by `r` only to
//! elements of `C`", which is not expressible in EL++ at all.

mod parser;
pub(crate) mod serialize;
mod transform;

use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

pub use parser::{parse_concept, parse_ontology, ParseError};
pub(crate) use parser::parse_axioms;
pub use transform::{
    concept_length, desugar_abox, erase_enhancement, semantic_enhance, validate_el, Violation,
};

/// An EL++ concept expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConceptExpr {
    Top,
    Bottom,
    Atomic(String),
    Nominal(String),
    /// Flattened, duplicate-free, at least two members. Build through
    /// [`ConceptExpr::and`] to keep those properties.
    Conjunction(Vec<ConceptExpr>),
    Exists(String, Box<ConceptExpr>),
    ExistsAll(String, Box<ConceptExpr>),
}

impl ConceptExpr {
    pub fn atomic(name: impl Into<String>) -> Self {
        ConceptExpr::Atomic(name.into())
    }

    pub fn nominal(name: impl Into<String>) -> Self {
        ConceptExpr::Nominal(name.into())
    }

    pub fn exists(role: impl Into<String>, filler: ConceptExpr) -> Self {
        ConceptExpr::Exists(role.into(), Box::new(filler))
    }

    pub fn exists_all(role: impl Into<String>, filler: ConceptExpr) -> Self {
        ConceptExpr::ExistsAll(role.into(), Box::new(filler))
    }

    /// Conjunction of `parts`, flattened and deduplicated in first-seen order.
    ///
    /// An empty conjunction is `Top`; a single surviving member is returned
    /// as-is.
    pub fn and(parts: impl IntoIterator<Item = ConceptExpr>) -> Self {
        let mut members: Vec<ConceptExpr> = Vec::new();
        for part in parts {
            match part {
                ConceptExpr::Conjunction(inner) => {
                    for m in inner {
                        if !members.contains(&m) {
                            members.push(m);
                        }
                    }
                }
                other => {
                    if !members.contains(&other) {
                        members.push(other);
                    }
                }
            }
        }
        match members.len() {
            0 => ConceptExpr::Top,
            1 => members.pop().unwrap(),
            _ => ConceptExpr::Conjunction(members),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, ConceptExpr::Atomic(_))
    }

    pub fn as_atomic(&self) -> Option<&str> {
        match self {
            ConceptExpr::Atomic(name) => Some(name),
            _ => None,
        }
    }

    /// Nesting depth; atoms have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            ConceptExpr::Top
            | ConceptExpr::Bottom
            | ConceptExpr::Atomic(_)
            | ConceptExpr::Nominal(_) => 1,
            ConceptExpr::Conjunction(parts) => {
                1 + parts.iter().map(ConceptExpr::depth).max().unwrap_or(0)
            }
            ConceptExpr::Exists(_, filler) | ConceptExpr::ExistsAll(_, filler) => {
                1 + filler.depth()
            }
        }
    }

    pub fn contains_exists_all(&self) -> bool {
        match self {
            ConceptExpr::ExistsAll(..) => true,
            ConceptExpr::Exists(_, filler) => filler.contains_exists_all(),
            ConceptExpr::Conjunction(parts) => parts.iter().any(ConceptExpr::contains_exists_all),
            _ => false,
        }
    }

    /// Calls `f` on every sub-expression, pre-order.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a ConceptExpr)) {
        f(self);
        match self {
            ConceptExpr::Conjunction(parts) => parts.iter().for_each(|p| p.visit(f)),
            ConceptExpr::Exists(_, filler) | ConceptExpr::ExistsAll(_, filler) => filler.visit(f),
            _ => {}
        }
    }
}

/// An EL++ axiom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    /// General concept inclusion `lhs ⊑ rhs`.
    Gci { lhs: ConceptExpr, rhs: ConceptExpr },
    RoleInclusion { sub: String, sup: String },
    /// `chain[0] ∘ chain[1] ⊑ sup`. Well-formed chains have exactly two
    /// links; longer ones parse but are reported by [`validate_el`].
    RoleChain { chain: Vec<String>, sup: String },
    ConceptAssertion { concept: String, individual: String },
    RoleAssertion { role: String, subject: String, object: String },
}

impl Axiom {
    pub fn gci(lhs: ConceptExpr, rhs: ConceptExpr) -> Self {
        Axiom::Gci { lhs, rhs }
    }

    pub fn role_inclusion(sub: impl Into<String>, sup: impl Into<String>) -> Self {
        Axiom::RoleInclusion { sub: sub.into(), sup: sup.into() }
    }

    pub fn role_chain(r1: impl Into<String>, r2: impl Into<String>, sup: impl Into<String>) -> Self {
        Axiom::RoleChain { chain: vec![r1.into(), r2.into()], sup: sup.into() }
    }

    pub fn concept_assertion(concept: impl Into<String>, individual: impl Into<String>) -> Self {
        Axiom::ConceptAssertion { concept: concept.into(), individual: individual.into() }
    }

    pub fn role_assertion(
        role: impl Into<String>,
        subject: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Axiom::RoleAssertion { role: role.into(), subject: subject.into(), object: object.into() }
    }

    pub fn is_abox(&self) -> bool {
        matches!(self, Axiom::ConceptAssertion { .. } | Axiom::RoleAssertion { .. })
    }

    /// Symbol count: concept names, individual names and role names.
    pub fn length(&self) -> usize {
        match self {
            Axiom::Gci { lhs, rhs } => concept_length(lhs) + concept_length(rhs),
            Axiom::RoleInclusion { .. } => 2,
            Axiom::RoleChain { chain, .. } => chain.len() + 1,
            Axiom::ConceptAssertion { .. } => 2,
            Axiom::RoleAssertion { .. } => 3,
        }
    }
}

/// Kind of a name in the signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NameKind {
    Concept,
    Role,
    Individual,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Concept => "concept",
            NameKind::Role => "role",
            NameKind::Individual => "individual",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("name `{name}` used both as {first} and as {second}")]
pub struct NameClash {
    pub name: String,
    pub first: NameKind,
    pub second: NameKind,
}

/// Concept, role and individual names, each in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub concepts: IndexSet<String>,
    pub roles: IndexSet<String>,
    pub individuals: IndexSet<String>,
}

impl Signature {
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.roles.is_empty() && self.individuals.is_empty()
    }

    pub fn kind_of(&self, name: &str) -> Option<NameKind> {
        if self.concepts.contains(name) {
            Some(NameKind::Concept)
        } else if self.roles.contains(name) {
            Some(NameKind::Role)
        } else if self.individuals.contains(name) {
            Some(NameKind::Individual)
        } else {
            None
        }
    }

    /// Adds `name` under `kind`, refusing names already registered under a
    /// different kind.
    pub fn insert(&mut self, name: &str, kind: NameKind) -> Result<(), NameClash> {
        match self.kind_of(name) {
            Some(existing) if existing != kind => Err(NameClash {
                name: name.to_string(),
                first: existing,
                second: kind,
            }),
            Some(_) => Ok(()),
            None => {
                let set = match kind {
                    NameKind::Concept => &mut self.concepts,
                    NameKind::Role => &mut self.roles,
                    NameKind::Individual => &mut self.individuals,
                };
                set.insert(name.to_string());
                Ok(())
            }
        }
    }

    pub fn extend_from_concept(&mut self, expr: &ConceptExpr) -> Result<(), NameClash> {
        let mut result = Ok(());
        expr.visit(&mut |e| {
            if result.is_err() {
                return;
            }
            result = match e {
                ConceptExpr::Atomic(a) => self.insert(a, NameKind::Concept),
                ConceptExpr::Nominal(i) => self.insert(i, NameKind::Individual),
                ConceptExpr::Exists(r, _) | ConceptExpr::ExistsAll(r, _) => {
                    self.insert(r, NameKind::Role)
                }
                _ => Ok(()),
            };
        });
        result
    }

    pub fn extend_from_axiom(&mut self, axiom: &Axiom) -> Result<(), NameClash> {
        match axiom {
            Axiom::Gci { lhs, rhs } => {
                self.extend_from_concept(lhs)?;
                self.extend_from_concept(rhs)
            }
            Axiom::RoleInclusion { sub, sup } => {
                self.insert(sub, NameKind::Role)?;
                self.insert(sup, NameKind::Role)
            }
            Axiom::RoleChain { chain, sup } => {
                for r in chain {
                    self.insert(r, NameKind::Role)?;
                }
                self.insert(sup, NameKind::Role)
            }
            Axiom::ConceptAssertion { concept, individual } => {
                self.insert(concept, NameKind::Concept)?;
                self.insert(individual, NameKind::Individual)
            }
            Axiom::RoleAssertion { role, subject, object } => {
                self.insert(role, NameKind::Role)?;
                self.insert(subject, NameKind::Individual)?;
                self.insert(object, NameKind::Individual)
            }
        }
    }

    /// Merges `other` into `self`.
    pub fn merge(&mut self, other: &Signature) -> Result<(), NameClash> {
        for c in &other.concepts {
            self.insert(c, NameKind::Concept)?;
        }
        for r in &other.roles {
            self.insert(r, NameKind::Role)?;
        }
        for i in &other.individuals {
            self.insert(i, NameKind::Individual)?;
        }
        Ok(())
    }

    /// Whether every name used by `axiom` is known here with the right kind.
    pub fn covers(&self, axiom: &Axiom) -> bool {
        let mut probe = self.clone();
        probe.extend_from_axiom(axiom).is_ok()
            && probe.concepts.len() == self.concepts.len()
            && probe.roles.len() == self.roles.len()
            && probe.individuals.len() == self.individuals.len()
    }
}

/// A finite set of axioms over a signature.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    axioms: Vec<Axiom>,
    signature: Signature,
}

impl Ontology {
    /// Builds an ontology from `axioms`, dropping duplicates (first
    /// occurrence wins) and collecting the signature.
    pub fn new(axioms: impl IntoIterator<Item = Axiom>) -> Result<Self, NameClash> {
        Self::with_signature(axioms, Signature::default())
    }

    /// Like [`Ontology::new`] but seeded with names that may not occur in any
    /// axiom.
    pub fn with_signature(
        axioms: impl IntoIterator<Item = Axiom>,
        mut signature: Signature,
    ) -> Result<Self, NameClash> {
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::new();
        for axiom in axioms {
            if seen.insert(axiom.clone()) {
                signature.extend_from_axiom(&axiom)?;
                kept.push(axiom);
            }
        }
        Ok(Ontology { axioms: kept, signature })
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn into_axioms(self) -> Vec<Axiom> {
        self.axioms
    }

    /// Rebuilds with the axioms mapped through `f`, keeping the signature.
    pub(crate) fn map_axioms(&self, f: impl FnMut(&Axiom) -> Axiom) -> Self {
        let axioms: Vec<Axiom> = self.axioms.iter().map(f).collect();
        Ontology::with_signature(axioms, self.signature.clone())
            .expect("axiom rewrite introduced no new names")
    }
}
