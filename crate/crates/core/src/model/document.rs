//! A whole modelling session as one JSON document: agents, templates,
//! behaviours, roles, processes and plan submissions, applied in that order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::build::{
    build_behaviour, build_plan, build_process, build_template, deprecate_role, derive_behaviour_with, grant_role,
    submit_plan,
};
use super::spec::{BehaviourSpec, ProcessSpec};
use super::BuildError;
use crate::kg::{Class, Iri, KnowledgeBase};

/// A behaviour cloned from a named template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DerivedBehaviour {
    /// Local name for the clone root.
    pub name: String,
    /// Name of a template declared earlier in the document.
    pub template: String,
    /// Owning agent IRI; omitted for behaviours reached only through roles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
}

/// A behaviour built from scratch in the Behaviour layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConcreteBehaviour {
    pub spec: BehaviourSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RoleGrant {
    pub agent: String,
    pub role_type: String,
    /// Names of behaviours declared earlier in the document.
    pub behaviours: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub deprecated: bool,
}

/// Links a plan to the behaviour expected to realize it, both by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Submission {
    pub plan: String,
    pub behaviour: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BuildDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub templates: Vec<BehaviourSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derived: Vec<DerivedBehaviour>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub behaviours: Vec<ConcreteBehaviour>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<BehaviourSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roles: Vec<RoleGrant>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub processes: Vec<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub submissions: Vec<Submission>,
}

/// What [`BuildDocument::apply`] emitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildOutput {
    /// Every emitted root (templates, behaviours, plans, roles, processes) in
    /// emission order.
    pub roots: Vec<Iri>,
    /// Document name → emitted root. Plans inside processes are included
    /// under their plan name.
    pub names: BTreeMap<String, Iri>,
}

impl BuildOutput {
    pub fn get(&self, name: &str) -> Result<&Iri, BuildError> {
        self.names.get(name).ok_or_else(|| BuildError::UnknownName(name.to_string()))
    }

    fn record(&mut self, name: &str, iri: Iri) {
        self.names.insert(name.to_string(), iri.clone());
        self.roots.push(iri);
    }
}

impl BuildDocument {
    pub fn is_empty(&self) -> bool {
        *self == BuildDocument::default()
    }

    pub fn apply(&self, kb: &mut KnowledgeBase) -> Result<BuildOutput, BuildError> {
        let mut out = BuildOutput::default();
        for agent in &self.agents {
            let iri = kb.resolve(agent)?;
            kb.assert_class(&iri, Class::Agent)?;
        }
        let owner = |kb: &KnowledgeBase, o: &Option<String>| -> Result<Option<Iri>, BuildError> {
            o.as_deref().map(|s| kb.resolve(s)).transpose().map_err(BuildError::from)
        };
        for t in &self.templates {
            let root = build_template(kb, t)?;
            out.record(&t.name, root);
        }
        for d in &self.derived {
            let template = out.get(&d.template)?.clone();
            let agent = owner(kb, &d.owner)?;
            let root = derive_behaviour_with(kb, &template, agent.as_ref(), Some(&d.name))?;
            out.record(&d.name, root);
        }
        for b in &self.behaviours {
            let agent = owner(kb, &b.owner)?;
            let root = build_behaviour(kb, &b.spec, agent.as_ref())?;
            out.record(&b.spec.name, root);
        }
        for p in &self.plans {
            let root = build_plan(kb, p)?;
            out.record(&p.name, root);
        }
        for r in &self.roles {
            let agent = kb.resolve(&r.agent)?;
            let role_type = kb.resolve(&r.role_type)?;
            let behaviours = r.behaviours.iter().map(|n| out.get(n).cloned()).collect::<Result<Vec<_>, _>>()?;
            let role = grant_role(kb, &agent, &role_type, &behaviours)?;
            if r.deprecated {
                deprecate_role(kb, &role)?;
            }
            let name = role.local_name().to_string();
            out.record(&name, role);
        }
        for p in &self.processes {
            let root = build_process(kb, p)?;
            for proc in &p.procedures {
                for state in &proc.states {
                    let state_iri = kb.mint_iri(super::BUILD_PREFIX, &state.name)?;
                    let state_iri = find_state(kb, &root, &state_iri, &state.name).unwrap_or(state_iri);
                    if let Some(plan) = kb.object(&state_iri, crate::kg::Prop::IsDescribedBy) {
                        out.names.insert(state.plan.name.clone(), plan);
                    }
                    out.names.insert(state.name.clone(), state_iri);
                }
            }
            out.record(&p.name, root);
        }
        for s in &self.submissions {
            let plan = out.get(&s.plan)?.clone();
            let behaviour = out.get(&s.behaviour)?.clone();
            submit_plan(kb, &plan, &behaviour)?;
        }
        Ok(out)
    }
}

/// Locates the state emitted for `name` under `process`, which may carry a
/// collision-avoiding suffix.
fn find_state(kb: &KnowledgeBase, process: &Iri, preferred: &Iri, name: &str) -> Option<Iri> {
    use crate::kg::Prop;
    let mut candidates = Vec::new();
    for procedure in kb.objects(process, Prop::ConsistsOfProcedure) {
        for state in kb.objects_entailed(&procedure, Prop::ProcedureConsistsOfProcedureState) {
            if &state == preferred || state.local_name().starts_with(&format!("{name}__")) {
                candidates.push(state);
            }
        }
    }
    candidates.sort();
    candidates.into_iter().next()
}
