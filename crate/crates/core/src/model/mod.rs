//! Builders emitting templates, behaviours, plans, processes, roles and
//! events into a [`KnowledgeBase`](crate::kg::KnowledgeBase).

mod build;
pub mod document;
mod spec;
pub mod structure;

pub use build::{
    attach_event, build_behaviour, build_plan, build_process, build_template, deprecate_role, derive_behaviour,
    derive_behaviour_with, grant_role, submit_plan, BUILD_PREFIX,
};
pub use document::{BuildDocument, BuildOutput, ConcreteBehaviour, DerivedBehaviour, RoleGrant, Submission};
pub use spec::{
    BehaviourSpec, EventSpec, GoalSpec, ProcedureSpec, ProcessSpec, RefMode, Reference, StateSpec, TaskSpec,
};

use thiserror::Error;

use crate::kg::{Iri, KgError, LayerTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("invalid spec: {0}")]
    SpecInvalid(String),
    #[error("{0} is not a Template-layer behaviour")]
    NotATemplate(Iri),
    #[error("agent {0} does not exist")]
    MissingAgent(Iri),
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("{entity} must be a {expected}-layer behaviour (found {found:?})")]
    LayerError { entity: Iri, expected: LayerTag, found: Option<LayerTag> },
    #[error("{0} is not a Role")]
    NotARole(Iri),
    #[error("{0} is not a ProcedureState")]
    NotAProcedureState(Iri),
    #[error("unknown name `{0}` in build document")]
    UnknownName(String),
    #[error(transparent)]
    Kg(#[from] KgError),
}
