//! Executable model of agents, behaviours, plans, processes and procedures
//! over a typed triple graph.
//!
//! The layers are: [`kg`] (graph and vocabulary), [`model`] (builders),
//! [`validate`] (structural checks), [`engine`] (process realization and
//! stepping), [`rdfio`] (Turtle import / N-Triples export) and [`lab`]
//! (interleaving enumeration and race detection).

pub mod engine;
pub mod gen;
pub mod kg;
pub mod lab;
pub mod model;
pub mod par;
pub mod rdfio;
pub mod scenario;
pub mod validate;

pub use kg::{Assertion, Iri, KgError, KnowledgeBase, Term};
pub use par::ExecMode;
