//! Process realization and execution. A Planning-layer process is cloned into
//! the Execution layer, each plan execution is tied to the behaviour and
//! agent that perform it, and a cursor walks the realized state chain.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{Class, ElementKind, Family, Iri, KgError, KnowledgeBase, LayerTag, Prop, Term};
use crate::model::structure::{self, clone_elements, copy_literals, copy_memberships};
use crate::validate::{self, check_capability, deprecated_providers, Violation, ViolationCode};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("validation failed: {reason}")]
    ValidationFailed { reason: String, violations: Vec<Violation> },
    #[error("PERFORMER_LACKS_CAPABILITY: {agent} cannot exhibit {behaviour} for state {state}")]
    PerformerLacksCapability { state: Iri, agent: Iri, behaviour: Iri },
    #[error(
        "ROLE_DEPRECATED_USE: {agent} could exhibit {behaviour} for state {state} only through deprecated role {role}"
    )]
    RoleDeprecatedUse { state: Iri, agent: Iri, behaviour: Iri, role: Iri },
    #[error("STRUCTURE_MISMATCH: plan of state {state} does not match the assigned behaviour: {detail}")]
    StructureMismatch { state: Iri, detail: String },
    #[error("{0} is not a Planning-layer process")]
    NotAProcess(Iri),
    #[error("{0} is not a process realization")]
    NotARealization(Iri),
    #[error("the process execution has already completed")]
    CursorCompleted,
    #[error("the process execution has already advanced past its initial state")]
    NotAtInitialState,
    #[error(transparent)]
    Kg(#[from] KgError),
}

impl EngineError {
    /// The violation code this error corresponds to, when there is one.
    pub fn code(&self) -> Option<ViolationCode> {
        match self {
            EngineError::ValidationFailed { violations, .. } => violations.first().map(|v| v.code),
            EngineError::PerformerLacksCapability { .. } => Some(ViolationCode::PerformerLacksCapability),
            EngineError::RoleDeprecatedUse { .. } => Some(ViolationCode::RoleDeprecatedUse),
            EngineError::StructureMismatch { .. } => Some(ViolationCode::StructureMismatch),
            _ => None,
        }
    }
}

/// Who performs a state's plan, and through which behaviour.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Performer {
    pub agent: Iri,
    pub behaviour: Iri,
}

/// Procedure state → performer, for every state of a process.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<Iri, Performer>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn assign(mut self, state: Iri, agent: Iri, behaviour: Iri) -> Self {
        self.0.insert(state, Performer { agent, behaviour });
        self
    }

    pub fn get(&self, state: &Iri) -> Option<&Performer> {
        self.0.get(state)
    }
}

/// One performed state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepRecord {
    /// The Planning-layer state that was performed.
    pub state: Iri,
    pub plan_exec: Iri,
    pub agent: Iri,
    /// Execution-layer event instances fired by this step.
    pub events: Vec<Iri>,
    pub index: usize,
    /// Task executions of the plan execution in dependency order.
    #[serde(skip)]
    pub tasks: Vec<Iri>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub steps: Vec<StepRecord>,
}

impl ExecutionTrace {
    /// One JSON object per line, keys `state`, `planExec`, `agent`, `events`,
    /// `index`; LF-terminated.
    pub fn to_json_lines(&self) -> String {
        self.steps.iter().map(|s| serde_json::to_string(s).expect("step records serialize") + "\n").collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cursor {
    /// The Execution-layer state performed by the next step.
    At(Iri),
    Completed,
}

/// A realized process and how far its execution has advanced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessExecutionHandle {
    pub root: Iri,
    pub cursor: Cursor,
    /// Number of steps performed so far.
    pub performed: usize,
}

impl ProcessExecutionHandle {
    /// Reattaches to a realization stored in `kb`; the cursor lands on the
    /// first state whose plan execution has not been performed.
    pub fn resume(kb: &KnowledgeBase, root: &Iri) -> Result<Self, EngineError> {
        if kb.layer(root) != Some(LayerTag::Execution)
            || !kb.is_instance(root, Class::Process)
            || kb.object(root, Prop::ProcessDrawnBy).is_none()
        {
            return Err(EngineError::NotARealization(root.clone()));
        }
        let states = chain_states(kb, root);
        let performed = states
            .iter()
            .take_while(|s| {
                kb.object(s, Prop::IsDescribedBy).is_some_and(|p| kb.literal(&p, Prop::PerformedAtStep).is_some())
            })
            .count();
        let cursor = states.get(performed).map_or(Cursor::Completed, |s| Cursor::At(s.clone()));
        Ok(ProcessExecutionHandle { root: root.clone(), cursor, performed })
    }

    pub fn is_completed(&self) -> bool {
        self.cursor == Cursor::Completed
    }
}

/// Procedures of `process` in hasNextProcedure order (ties and leftovers by
/// IRI).
pub fn procedures_in_order(kb: &KnowledgeBase, process: &Iri) -> Vec<Iri> {
    let procedures = kb.objects(process, Prop::ConsistsOfProcedure);
    let members: BTreeSet<&Iri> = procedures.iter().collect();
    let mut out: Vec<Iri> = Vec::new();
    let mut seen: BTreeSet<Iri> = BTreeSet::new();
    let heads =
        procedures.iter().filter(|p| !kb.subjects(Prop::HasNextProcedure, p).iter().any(|q| members.contains(q)));
    for head in heads.chain(procedures.iter()) {
        let mut current = Some(head.clone());
        while let Some(p) = current.take() {
            if !members.contains(&p) || !seen.insert(p.clone()) {
                break;
            }
            current = kb.object(&p, Prop::HasNextProcedure);
            out.push(p);
        }
    }
    out
}

/// States of one procedure in chain order: the initial state, then
/// successors along the hasNext family while the path stays simple.
pub fn procedure_chain(kb: &KnowledgeBase, procedure: &Iri) -> Vec<Iri> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut current = kb.object(procedure, Prop::ProcedureConsistsOfInitialProcedureState);
    while let Some(state) = current.take() {
        if !seen.insert(state.clone()) {
            break;
        }
        let next = kb.objects_entailed(&state, Prop::HasNext);
        out.push(state);
        if next.len() == 1 {
            current = next.into_iter().next();
        }
    }
    out
}

/// All states of a process in execution order.
pub fn chain_states(kb: &KnowledgeBase, process: &Iri) -> Vec<Iri> {
    procedures_in_order(kb, process).iter().flat_map(|p| procedure_chain(kb, p)).collect()
}

/// Plan element → behaviour element, preferring recorded submittedTo links
/// and falling back to structural pairing.
fn plan_to_behaviour(kb: &KnowledgeBase, plan: &Iri, behaviour: &Iri) -> Result<Vec<(ElementKind, Iri, Iri)>, String> {
    let plan_elements = structure::elements(kb, plan, ElementKind::Behaviour);
    let behaviour_elements: BTreeSet<Iri> =
        structure::elements(kb, behaviour, ElementKind::Behaviour).into_iter().map(|(_, i)| i).collect();
    let linked: Option<Vec<(ElementKind, Iri, Iri)>> = plan_elements
        .iter()
        .map(|(kind, p)| {
            kb.objects(p, kind.family_prop(Family::SubmittedTo))
                .into_iter()
                .find(|b| behaviour_elements.contains(b))
                .map(|b| (*kind, p.clone(), b))
        })
        .collect();
    match linked {
        Some(pairs) if pairs.len() == behaviour_elements.len() && pairs[0].2 == *behaviour => Ok(pairs),
        _ => structure::pair(kb, plan, behaviour, ElementKind::Behaviour),
    }
}

struct StatePlan {
    state: Iri,
    plan: Iri,
    performer: Performer,
    pairs: Vec<(ElementKind, Iri, Iri)>,
}

/// Realizes `process` in the Execution layer under `assignment`. Nothing is
/// written unless every precondition holds.
pub fn realize_process(
    kb: &mut KnowledgeBase,
    process: &Iri,
    assignment: &Assignment,
) -> Result<ProcessExecutionHandle, EngineError> {
    if kb.layer(process) != Some(LayerTag::Planning) || !kb.is_instance(process, Class::Process) {
        return Err(EngineError::NotAProcess(process.clone()));
    }
    let violations = validate::validate(kb);
    if !violations.is_empty() {
        return Err(EngineError::ValidationFailed {
            reason: format!("{} violation(s) in the knowledge base", violations.len()),
            violations,
        });
    }
    let procedures = procedures_in_order(kb, process);
    let states: Vec<Iri> = procedures.iter().flat_map(|p| procedure_chain(kb, p)).collect();
    let state_set: BTreeSet<&Iri> = states.iter().collect();
    let missing: Vec<String> = states.iter().filter(|s| assignment.get(s).is_none()).map(|s| s.to_string()).collect();
    let extra: Vec<String> = assignment.0.keys().filter(|s| !state_set.contains(s)).map(|s| s.to_string()).collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!("unassigned states: {}", missing.join(", ")));
        }
        if !extra.is_empty() {
            parts.push(format!("assigned states outside the process: {}", extra.join(", ")));
        }
        return Err(EngineError::ValidationFailed { reason: parts.join("; "), violations: Vec::new() });
    }

    let mut plans = Vec::with_capacity(states.len());
    for state in &states {
        let performer = assignment.get(state).expect("assignment is total").clone();
        let Performer { agent, behaviour } = &performer;
        if !check_capability(kb, agent, behaviour).is_capable() {
            return Err(match deprecated_providers(kb, agent, behaviour).into_iter().next() {
                Some(role) => EngineError::RoleDeprecatedUse {
                    state: state.clone(),
                    agent: agent.clone(),
                    behaviour: behaviour.clone(),
                    role,
                },
                None => EngineError::PerformerLacksCapability {
                    state: state.clone(),
                    agent: agent.clone(),
                    behaviour: behaviour.clone(),
                },
            });
        }
        let plan = kb.object(state, Prop::IsDescribedBy).expect("validated states have plans");
        let pairs = plan_to_behaviour(kb, &plan, behaviour)
            .map_err(|detail| EngineError::StructureMismatch { state: state.clone(), detail })?;
        plans.push(StatePlan { state: state.clone(), plan, performer, pairs });
    }

    let exec_layer = LayerTag::Execution;
    let root = kb.fresh_iri(process, exec_layer.slug());
    copy_memberships(kb, process, &root, exec_layer)?;
    kb.assert_edge(&root, Prop::ProcessDrawnBy, process)?;

    let mut clones: BTreeMap<Iri, Iri> = BTreeMap::new();
    for procedure in &procedures {
        let copy = kb.fresh_iri(procedure, exec_layer.slug());
        copy_memberships(kb, procedure, &copy, exec_layer)?;
        kb.assert_edge(&root, Prop::ConsistsOfProcedure, &copy)?;
        kb.assert_edge(&copy, Prop::ProcedureDrawnBy, procedure)?;
        clones.insert(procedure.clone(), copy);
    }
    for state in &states {
        let copy = kb.fresh_iri(state, exec_layer.slug());
        copy_memberships(kb, state, &copy, exec_layer)?;
        kb.assert_edge(&copy, Prop::ProcedureStateDrawnBy, state)?;
        clones.insert(state.clone(), copy);
    }
    // Chain structure between cloned nodes, with the exact original predicates.
    let structural = [
        Prop::HasNextProcedure,
        Prop::ProcedureConsistsOfProcedureState,
        Prop::ProcedureConsistsOfTerminatingProcedureState,
        Prop::ProcedureConsistsOfInitialProcedureState,
        Prop::ProcedureConsistsOfFinalProcedureState,
        Prop::ProcedureConsistsOfNonTerminatingProcedureState,
        Prop::HasNext,
        Prop::HasNextNonTerminatingProcedureState,
        Prop::HasFinalProcedureState,
    ];
    let originals: Vec<Iri> = clones.keys().cloned().collect();
    for orig in &originals {
        let edges: Vec<_> = kb.outgoing(orig).cloned().collect();
        for a in edges {
            let is_structural = structural.iter().any(|p| p.iri() == &a.predicate);
            if let (true, Some(o)) = (is_structural, a.object.as_iri().and_then(|o| clones.get(o))) {
                let o = o.clone();
                kb.assert_property(&clones[orig], &a.predicate, o)?;
            }
        }
    }

    for sp in &plans {
        let preferred =
            kb.mint_iri(crate::model::BUILD_PREFIX, &format!("{}Exec", sp.performer.behaviour.local_name()))?;
        let exec_root = kb.fresh_or(&preferred, exec_layer.slug());
        let elements: Vec<(ElementKind, Iri)> = sp.pairs.iter().map(|(k, p, _)| (*k, p.clone())).collect();
        let map = clone_elements(kb, &elements, exec_layer, Some(exec_root.clone()))?;
        for (kind, plan_el, behaviour_el) in &sp.pairs {
            let exec_el = &map[plan_el];
            kb.assert_edge(plan_el, kind.family_prop(Family::HasExecution), exec_el)?;
            kb.assert_edge(exec_el, kind.family_prop(Family::DrawnBy), behaviour_el)?;
        }
        debug_assert_eq!(map[&sp.plan], exec_root);
        kb.assert_edge(&sp.performer.agent, Prop::PerformsPlanExecution, &exec_root)?;
        kb.assert_edge(&clones[&sp.state], Prop::IsDescribedBy, &exec_root)?;
    }

    let cursor = states.first().map_or(Cursor::Completed, |s| Cursor::At(clones[s].clone()));
    Ok(ProcessExecutionHandle { root, cursor, performed: 0 })
}

/// Goals, then tasks within each goal, in dependsOn order with ties broken
/// by IRI.
pub fn task_order(kb: &KnowledgeBase, behaviour: &Iri) -> Vec<Iri> {
    let goals = topo_order(kb, kb.objects(behaviour, Prop::ConsistsOfGoalDescription));
    goals.iter().flat_map(|g| topo_order(kb, kb.objects(g, Prop::ConsistsOfTaskDescription))).collect()
}

fn topo_order(kb: &KnowledgeBase, nodes: Vec<Iri>) -> Vec<Iri> {
    let members: BTreeSet<Iri> = nodes.iter().cloned().collect();
    let deps = |n: &Iri| -> BTreeSet<Iri> {
        kb.objects(n, Prop::DependsOn).into_iter().filter(|d| members.contains(d)).collect()
    };
    let mut remaining: BTreeMap<Iri, BTreeSet<Iri>> = nodes.iter().map(|n| (n.clone(), deps(n))).collect();
    let mut out = Vec::with_capacity(nodes.len());
    while !remaining.is_empty() {
        let ready = remaining
            .iter()
            .find(|(_, d)| d.iter().all(|x| !remaining.contains_key(x)))
            .map(|(n, _)| n.clone())
            // A cycle (reported by the validator) falls back to IRI order.
            .unwrap_or_else(|| remaining.keys().next().expect("non-empty").clone());
        remaining.remove(&ready);
        out.push(ready);
    }
    out
}

/// Instantiates `event` (a Planning-layer event of the performed state) in
/// the Execution layer and attaches it to `exec_state`.
fn fire_event(kb: &mut KnowledgeBase, exec_state: &Iri, event: &Iri) -> Result<Iri, EngineError> {
    let layer = LayerTag::Execution;
    let copy = kb.fresh_iri(event, layer.slug());
    copy_memberships(kb, event, &copy, layer)?;
    copy_literals(kb, event, &copy)?;
    kb.assert_edge(&copy, Prop::DrawnBy, event)?;
    kb.assert_edge(exec_state, Prop::TriggersEvent, &copy)?;
    if let Some(action) = kb.object(event, Prop::EventDescribedByAction) {
        let elements = structure::elements(kb, &action, ElementKind::Task);
        let map = clone_elements(kb, &elements, layer, None)?;
        let action_layer = kb.layer(&action);
        for (kind, orig) in &elements {
            if action_layer == Some(LayerTag::Planning) {
                kb.assert_edge(orig, kind.family_prop(Family::HasExecution), &map[orig])?;
            }
        }
        kb.assert_edge(&copy, Prop::EventDescribedByAction, &map[&action])?;
    }
    Ok(copy)
}

/// Performs the state under the cursor: marks its plan execution performed,
/// fires the events of the planned state, and advances the cursor.
pub fn step(kb: &mut KnowledgeBase, handle: &mut ProcessExecutionHandle) -> Result<StepRecord, EngineError> {
    let Cursor::At(exec_state) = handle.cursor.clone() else { return Err(EngineError::CursorCompleted) };
    let not_realized = || EngineError::NotARealization(handle.root.clone());
    let planned_state = kb.object(&exec_state, Prop::ProcedureStateDrawnBy).ok_or_else(not_realized)?;
    let plan_exec = kb.object(&exec_state, Prop::IsDescribedBy).ok_or_else(not_realized)?;
    let agent = kb.subjects(Prop::PerformsPlanExecution, &plan_exec).into_iter().next().ok_or_else(not_realized)?;
    let tasks = task_order(kb, &plan_exec);
    let next = next_state(kb, &exec_state);

    let index = handle.performed;
    kb.assert_edge(&plan_exec, Prop::PerformedAtStep, Term::Literal(index.to_string()))?;
    let mut events = Vec::new();
    for event in kb.objects(&planned_state, Prop::TriggersEvent) {
        events.push(fire_event(kb, &exec_state, &event)?);
    }
    handle.performed += 1;
    handle.cursor = next.map_or(Cursor::Completed, Cursor::At);
    Ok(StepRecord { state: planned_state, plan_exec, agent, events, index, tasks })
}

fn next_state(kb: &KnowledgeBase, state: &Iri) -> Option<Iri> {
    let next = kb.objects_entailed(state, Prop::HasNext);
    if let Some(n) = next.into_iter().next() {
        return Some(n);
    }
    let procedure = kb.subjects_entailed(Prop::ProcedureConsistsOfProcedureState, state).into_iter().next()?;
    let following = kb.object(&procedure, Prop::HasNextProcedure)?;
    kb.object(&following, Prop::ProcedureConsistsOfInitialProcedureState)
}

/// Steps from the initial state until the process completes.
pub fn run_to_completion(
    kb: &mut KnowledgeBase,
    handle: &mut ProcessExecutionHandle,
) -> Result<ExecutionTrace, EngineError> {
    if handle.performed != 0 {
        return Err(EngineError::NotAtInitialState);
    }
    let mut trace = ExecutionTrace::default();
    while !handle.is_completed() {
        trace.steps.push(step(kb, handle)?);
    }
    Ok(trace)
}
