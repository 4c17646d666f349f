//! Indexed triple graph over the OASIS vocabulary.

mod iri;
mod kb;
pub mod vocab;

pub use iri::{is_valid_local_name, Iri, PrefixTable, EX_NS, OASIS_NS, RDF_NS, RDF_TYPE};
pub use kb::{AssertionMode, EntityRecord, KnowledgeBase, Pattern};
pub use vocab::{vocabulary, Class, ElementKind, Family, LayerRule, LayerTag, Prop, PropertySpec, Vocabulary};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KgError {
    #[error("invalid IRI `{0}`")]
    InvalidIri(String),
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(String),
    #[error("invalid local name `{0}`")]
    InvalidLocalName(String),
    #[error("unknown class {0}")]
    UnknownClass(Iri),
    #[error("unknown predicate {0}")]
    UnknownPredicate(Iri),
    #[error("{entity} cannot be both {existing} and {added}")]
    LayerMix { entity: Iri, existing: LayerTag, added: LayerTag },
    #[error("layer constraint of {predicate} violated by ({subject}, {object}): {reason}")]
    LayerConstraintViolated { subject: Iri, predicate: Iri, object: Term, reason: String },
    #[error("{0} is in the vocabulary namespace and cannot be declared as a domain term")]
    ReservedNamespace(Iri),
}

/// Object position of an assertion.
///
/// IRIs order before literals; within a variant, by codepoint.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal(String),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&str> {
        match self {
            Term::Literal(s) => Some(s),
            Term::Iri(_) => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<&Iri> for Term {
    fn from(iri: &Iri) -> Self {
        Term::Iri(iri.clone())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "{i}"),
            Term::Literal(s) => write!(f, "{s:?}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "{i:?}"),
            Term::Literal(s) => write!(f, "{s:?}"),
        }
    }
}

/// One (subject, predicate, object) edge.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assertion {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Assertion {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Assertion { subject, predicate, object: object.into() }
    }
}

impl fmt::Debug for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} {:?} {:?})", self.subject, self.predicate, self.object)
    }
}
