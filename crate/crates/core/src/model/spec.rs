//! Declarative descriptions accepted by the builders. Field names follow the
//! published JSON schema (camelCase).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::BuildError;
use crate::kg::is_valid_local_name;

/// How a task element points at the thing it describes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RefMode {
    /// `refersExactlyTo` a specific, existing individual.
    Exact,
    /// `refersAsNewTo` a fresh entity carrying the element's layer.
    New,
    /// As `New`, plus `refersAsInstanceOf` each listed class.
    NewWithInstanceOf(Vec<String>),
}

/// An IRI (prefixed or absolute) plus its reference mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub iri: String,
    pub mode: RefMode,
}

impl Reference {
    pub fn exact(iri: impl Into<String>) -> Self {
        Reference { iri: iri.into(), mode: RefMode::Exact }
    }

    pub fn new_entity(iri: impl Into<String>) -> Self {
        Reference { iri: iri.into(), mode: RefMode::New }
    }

    pub fn new_instance_of(iri: impl Into<String>, classes: &[&str]) -> Self {
        Reference { iri: iri.into(), mode: RefMode::NewWithInstanceOf(classes.iter().map(|c| c.to_string()).collect()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub operator_action: Reference,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_argument: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<Reference>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<Reference>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<Reference>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
}

impl TaskSpec {
    pub fn new(name: impl Into<String>, operator_action: Reference) -> Self {
        TaskSpec {
            name: name.into(),
            operator_action,
            operator_argument: None,
            object: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            depends_on: Vec::new(),
        }
    }

    pub fn argument(mut self, r: Reference) -> Self {
        self.operator_argument = Some(r);
        self
    }

    pub fn object(mut self, r: Reference) -> Self {
        self.object = Some(r);
        self
    }

    pub fn input(mut self, r: Reference) -> Self {
        self.inputs.push(r);
        self
    }

    pub fn output(mut self, r: Reference) -> Self {
        self.outputs.push(r);
        self
    }

    pub fn depends_on(mut self, task: impl Into<String>) -> Self {
        self.depends_on.push(task.into());
        self
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        check_name(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GoalSpec {
    pub name: String,
    pub tasks: Vec<TaskSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
}

impl GoalSpec {
    pub fn new(name: impl Into<String>, tasks: Vec<TaskSpec>) -> Self {
        GoalSpec { name: name.into(), tasks, depends_on: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BehaviourSpec {
    pub name: String,
    pub goals: Vec<GoalSpec>,
}

impl BehaviourSpec {
    pub fn new(name: impl Into<String>, goals: Vec<GoalSpec>) -> Self {
        BehaviourSpec { name: name.into(), goals }
    }

    /// One goal holding one task; the common case.
    pub fn single(name: impl Into<String>, goal: impl Into<String>, task: TaskSpec) -> Self {
        BehaviourSpec::new(name, vec![GoalSpec::new(goal, vec![task])])
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        check_name(&self.name)?;
        if self.goals.is_empty() {
            return Err(BuildError::SpecInvalid(format!("behaviour `{}` has no goals", self.name)));
        }
        let goal_deps: Vec<(&str, &[String])> =
            self.goals.iter().map(|g| (g.name.as_str(), g.depends_on.as_slice())).collect();
        check_dependencies("goal", &self.name, &goal_deps)?;
        for goal in &self.goals {
            check_name(&goal.name)?;
            if goal.tasks.is_empty() {
                return Err(BuildError::SpecInvalid(format!("goal `{}` has no tasks", goal.name)));
            }
            for task in &goal.tasks {
                task.validate()?;
            }
            let task_deps: Vec<(&str, &[String])> =
                goal.tasks.iter().map(|t| (t.name.as_str(), t.depends_on.as_slice())).collect();
            check_dependencies("task", &goal.name, &task_deps)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EventSpec {
    pub name: String,
    pub action: TaskSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
}

impl EventSpec {
    pub fn new(name: impl Into<String>, action: TaskSpec) -> Self {
        EventSpec { name: name.into(), action, kind: None, duration: None, window: None }
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        check_name(&self.name)?;
        self.action.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StateSpec {
    pub name: String,
    pub plan: BehaviourSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
}

impl StateSpec {
    pub fn new(name: impl Into<String>, plan: BehaviourSpec) -> Self {
        StateSpec { name: name.into(), plan, events: Vec::new() }
    }

    pub fn event(mut self, event: EventSpec) -> Self {
        self.events.push(event);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProcedureSpec {
    pub name: String,
    /// First is the initial state, last the final one.
    pub states: Vec<StateSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProcessSpec {
    pub name: String,
    pub procedures: Vec<ProcedureSpec>,
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<(), BuildError> {
        check_name(&self.name)?;
        if self.procedures.is_empty() {
            return Err(BuildError::SpecInvalid(format!("process `{}` has no procedures", self.name)));
        }
        for proc in &self.procedures {
            check_name(&proc.name)?;
            if proc.states.is_empty() {
                return Err(BuildError::SpecInvalid(format!("procedure `{}` has no states", proc.name)));
            }
            for state in &proc.states {
                check_name(&state.name)?;
                state.plan.validate()?;
                for ev in &state.events {
                    ev.validate()?;
                }
            }
        }
        Ok(())
    }
}

fn check_name(name: &str) -> Result<(), BuildError> {
    if is_valid_local_name(name) {
        Ok(())
    } else {
        Err(BuildError::SpecInvalid(format!("`{name}` is not a valid local name")))
    }
}

/// Names must be unique, dependencies must name siblings, and the dependency
/// graph must be acyclic.
fn check_dependencies(what: &str, scope: &str, nodes: &[(&str, &[String])]) -> Result<(), BuildError> {
    let mut index = BTreeMap::new();
    for (i, (name, _)) in nodes.iter().enumerate() {
        if index.insert(*name, i).is_some() {
            return Err(BuildError::SpecInvalid(format!("duplicate {what} `{name}` in `{scope}`")));
        }
    }
    let mut edges = vec![Vec::new(); nodes.len()];
    for (i, (name, deps)) in nodes.iter().enumerate() {
        for d in deps.iter() {
            let j = *index.get(d.as_str()).ok_or_else(|| {
                BuildError::SpecInvalid(format!("{what} `{name}` depends on unknown {what} `{d}` in `{scope}`"))
            })?;
            edges[i].push(j);
        }
    }
    // Kahn
    let mut indegree = vec![0usize; nodes.len()];
    for targets in &edges {
        for &j in targets {
            indegree[j] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop_first() {
        seen += 1;
        for &j in &edges[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if seen != nodes.len() {
        return Err(BuildError::SpecInvalid(format!("{what} dependency cycle in `{scope}`")));
    }
    Ok(())
}
