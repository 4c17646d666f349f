//! Exhaustive interleaving of realized processes over shared resources with
//! exclusive, non-reentrant locks, and race detection by replay.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{chain_states, task_order, EngineError, ProcessExecutionHandle};
use crate::kg::{Iri, KnowledgeBase, Prop};
use crate::par::{self, ExecMode};

/// Default cap on the total number of steps across all handles.
pub const DEFAULT_BOUND: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("{steps} total steps exceed the interleaving bound {bound}")]
    BoundExceeded { steps: usize, bound: usize },
    #[error("plan execution {plan_exec} has no operator action with a known step kind (found {found})")]
    UnknownStepKind { plan_exec: Iri, found: String },
    #[error("plan execution {0} does not name the resource it operates on")]
    NoResource(Iri),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StepKind {
    Request,
    Modify,
    Release,
}

impl std::str::FromStr for StepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "request" => Ok(StepKind::Request),
            "modify" => Ok(StepKind::Modify),
            "release" => Ok(StepKind::Release),
            other => Err(format!("unknown step kind `{other}` (expected request, modify or release)")),
        }
    }
}

/// Operator-action local name (case-insensitive) → step kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepKindMap(BTreeMap<String, StepKind>);

impl Default for StepKindMap {
    fn default() -> Self {
        StepKindMap(
            [("request", StepKind::Request), ("modify", StepKind::Modify), ("release", StepKind::Release)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }
}

impl StepKindMap {
    pub fn with(mut self, action_local_name: &str, kind: StepKind) -> Self {
        self.0.insert(action_local_name.to_ascii_lowercase(), kind);
        self
    }

    pub fn get(&self, action: &Iri) -> Option<StepKind> {
        self.0.get(&action.local_name().to_ascii_lowercase()).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResourceState {
    pub resource: Iri,
    pub lock_holder: Option<Iri>,
    /// (agent, global step index) of every modification so far.
    pub modified_by: Vec<(Iri, usize)>,
}

impl ResourceState {
    pub fn new(resource: Iri) -> Self {
        ResourceState { resource, lock_holder: None, modified_by: Vec::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RaceKind {
    UnlockedModify,
    DoubleLock,
}

impl fmt::Display for RaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Done(ResourceState),
    /// The lock is held; the step cannot run now.
    Blocked,
    /// The step runs but conflicts with `other`; `next` is the state after it.
    Race {
        kind: RaceKind,
        other: Iri,
        next: ResourceState,
    },
}

/// Applies one step by `agent` at global position `step` to a resource.
///
/// Request takes a free lock and blocks otherwise (also for the holder
/// itself: locks are not reentrant). Modify is legal for the holder; with
/// another holder, or with no holder after another agent's modification, it
/// is an unlocked modification. Release frees the agent's own lock; releasing
/// someone else's lock is a double-lock race; releasing a free lock does
/// nothing.
pub fn interpret_step(state: &ResourceState, kind: StepKind, agent: &Iri, step: usize) -> StepOutcome {
    let mut next = state.clone();
    match kind {
        StepKind::Request => match &state.lock_holder {
            None => {
                next.lock_holder = Some(agent.clone());
                StepOutcome::Done(next)
            }
            Some(_) => StepOutcome::Blocked,
        },
        StepKind::Modify => {
            next.modified_by.push((agent.clone(), step));
            match &state.lock_holder {
                Some(holder) if holder == agent => StepOutcome::Done(next),
                Some(holder) => StepOutcome::Race { kind: RaceKind::UnlockedModify, other: holder.clone(), next },
                None => match state.modified_by.iter().rev().find(|(a, _)| a != agent) {
                    Some((other, _)) => {
                        StepOutcome::Race { kind: RaceKind::UnlockedModify, other: other.clone(), next }
                    }
                    None => StepOutcome::Done(next),
                },
            }
        }
        StepKind::Release => match &state.lock_holder {
            Some(holder) if holder == agent => {
                next.lock_holder = None;
                StepOutcome::Done(next)
            }
            Some(holder) => StepOutcome::Race { kind: RaceKind::DoubleLock, other: holder.clone(), next },
            None => StepOutcome::Done(next),
        },
    }
}

/// One step of a program: what a state's plan execution does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramStep {
    pub plan_exec: Iri,
    pub agent: Iri,
    pub kind: StepKind,
    pub resource: Iri,
}

/// The steps of one process execution, in chain order.
pub type Program = Vec<ProgramStep>;

fn referent(kb: &KnowledgeBase, element: &Iri) -> Option<Iri> {
    kb.object(element, Prop::RefersExactlyTo).or_else(|| kb.object(element, Prop::RefersAsNewTo))
}

fn is_lock(kb: &KnowledgeBase, entity: &Iri) -> bool {
    let typed = kb.entity(entity).is_some_and(|e| e.memberships.iter().any(|m| m.local_name() == "Lock"));
    typed || kb.objects(entity, Prop::RefersAsInstanceOf).iter().any(|c| c.local_name() == "Lock")
}

/// Reads the program of a realized process from the graph: per state, the
/// first task whose operator action has a known kind, and the resource its
/// object (or, for lock objects, its first parameter) refers to.
pub fn program(kb: &KnowledgeBase, handle: &ProcessExecutionHandle, kinds: &StepKindMap) -> Result<Program, LabError> {
    let mut out = Vec::new();
    for state in chain_states(kb, &handle.root) {
        let plan_exec =
            kb.object(&state, Prop::IsDescribedBy).ok_or_else(|| EngineError::NotARealization(handle.root.clone()))?;
        let agent = kb
            .subjects(Prop::PerformsPlanExecution, &plan_exec)
            .into_iter()
            .next()
            .ok_or_else(|| EngineError::NotARealization(handle.root.clone()))?;
        let mut seen_actions = Vec::new();
        let mut chosen = None;
        for task in task_order(kb, &plan_exec) {
            for op in kb.objects(&task, Prop::HasTaskOperator) {
                if let Some(action) = referent(kb, &op) {
                    match kinds.get(&action) {
                        Some(kind) if chosen.is_none() => chosen = Some((task.clone(), kind)),
                        Some(_) => {}
                        None => seen_actions.push(action.local_name().to_string()),
                    }
                }
            }
        }
        let Some((task, kind)) = chosen else {
            let found =
                if seen_actions.is_empty() { "no operator action".to_string() } else { seen_actions.join(", ") };
            return Err(LabError::UnknownStepKind { plan_exec, found });
        };
        let params = || {
            kb.objects(&task, Prop::HasTaskInputParameter)
                .into_iter()
                .chain(kb.objects(&task, Prop::HasTaskOutputParameter))
                .filter_map(|p| referent(kb, &p))
                .find(|r| !is_lock(kb, r))
        };
        let resource = match kb.objects(&task, Prop::HasTaskObject).first().and_then(|o| referent(kb, o)) {
            Some(r) if !is_lock(kb, &r) => Some(r),
            _ => params(),
        };
        let resource = resource.ok_or_else(|| LabError::NoResource(plan_exec.clone()))?;
        out.push(ProgramStep { plan_exec, agent, kind, resource });
    }
    Ok(out)
}

pub fn programs(
    kb: &KnowledgeBase,
    handles: &[ProcessExecutionHandle],
    kinds: &StepKindMap,
) -> Result<Vec<Program>, LabError> {
    handles.iter().map(|h| program(kb, h, kinds)).collect()
}

/// A feasible interleaving: the handle index stepping at each position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Schedule {
    pub choices: Vec<usize>,
    /// Every unfinished handle was blocked when the schedule stopped.
    pub deadlock: bool,
}

type Resources = BTreeMap<Iri, ResourceState>;

fn apply(resources: &Resources, step: &ProgramStep, index: usize) -> StepOutcome {
    let state = resources.get(&step.resource).cloned().unwrap_or_else(|| ResourceState::new(step.resource.clone()));
    interpret_step(&state, step.kind, &step.agent, index)
}

fn with_state(resources: &Resources, next: ResourceState) -> Resources {
    let mut r = resources.clone();
    r.insert(next.resource.clone(), next);
    r
}

/// All feasible interleavings of `programs`, in lexicographic order of
/// handle choices.
pub fn enumerate_schedules(programs: &[Program], bound: usize) -> Result<Vec<Schedule>, LabError> {
    let steps: usize = programs.iter().map(Vec::len).sum();
    if steps > bound {
        return Err(LabError::BoundExceeded { steps, bound });
    }
    let mut out = Vec::new();
    let mut positions = vec![0; programs.len()];
    let mut choices = Vec::with_capacity(steps);
    explore(programs, &mut positions, &Resources::new(), &mut choices, &mut out);
    Ok(out)
}

fn explore(
    programs: &[Program],
    positions: &mut [usize],
    resources: &Resources,
    choices: &mut Vec<usize>,
    out: &mut Vec<Schedule>,
) {
    let mut advanced = false;
    let mut unfinished = false;
    for h in 0..programs.len() {
        let Some(step) = programs[h].get(positions[h]) else { continue };
        unfinished = true;
        let next = match apply(resources, step, choices.len()) {
            StepOutcome::Blocked => continue,
            StepOutcome::Done(next) | StepOutcome::Race { next, .. } => next,
        };
        advanced = true;
        positions[h] += 1;
        choices.push(h);
        explore(programs, positions, &with_state(resources, next), choices, out);
        choices.pop();
        positions[h] -= 1;
    }
    if !advanced {
        out.push(Schedule { choices: choices.clone(), deadlock: unfinished });
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Conflict {
    pub resource: Iri,
    /// The agent whose lock or modification was disregarded.
    pub agent_a: Iri,
    /// The agent performing the offending step.
    pub agent_b: Iri,
    /// Global position of the offending step in the schedule.
    pub step_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RaceReport {
    pub schedule: Vec<usize>,
    pub conflict: Conflict,
    pub kind: RaceKind,
}

impl RaceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("race reports serialize")
    }
}

/// Replays one schedule and returns every race it hits, in order.
pub fn replay(programs: &[Program], schedule: &Schedule) -> Vec<RaceReport> {
    let mut positions = vec![0; programs.len()];
    let mut resources = Resources::new();
    let mut out = Vec::new();
    for (index, &h) in schedule.choices.iter().enumerate() {
        let step = &programs[h][positions[h]];
        positions[h] += 1;
        match apply(&resources, step, index) {
            StepOutcome::Done(next) => resources = with_state(&resources, next),
            StepOutcome::Race { kind, other, next } => {
                out.push(RaceReport {
                    schedule: schedule.choices.clone(),
                    conflict: Conflict {
                        resource: step.resource.clone(),
                        agent_a: other,
                        agent_b: step.agent.clone(),
                        step_index: index,
                    },
                    kind,
                });
                resources = with_state(&resources, next);
            }
            StepOutcome::Blocked => unreachable!("enumerated schedules never schedule a blocked step"),
        }
    }
    out
}

/// Enumerates every interleaving of the handles' programs, replays each one,
/// and returns the races found, first occurrence of each (conflict, kind).
pub fn detect_races(
    kb: &KnowledgeBase,
    handles: &[ProcessExecutionHandle],
    bound: usize,
) -> Result<Vec<RaceReport>, LabError> {
    detect_races_with(kb, handles, bound, &StepKindMap::default(), ExecMode::default())
}

pub fn detect_races_with(
    kb: &KnowledgeBase,
    handles: &[ProcessExecutionHandle],
    bound: usize,
    kinds: &StepKindMap,
    mode: ExecMode,
) -> Result<Vec<RaceReport>, LabError> {
    let programs = programs(kb, handles, kinds)?;
    let schedules = enumerate_schedules(&programs, bound)?;
    Ok(races_in(&programs, &schedules, mode))
}

/// Replays `schedules` (in parallel under [`ExecMode::Parallel`]) and merges
/// the reports deterministically.
pub fn races_in(programs: &[Program], schedules: &[Schedule], mode: ExecMode) -> Vec<RaceReport> {
    let per_schedule = par::map(mode, schedules, |s| replay(programs, s));
    let mut seen: BTreeSet<(Conflict, RaceKind)> = BTreeSet::new();
    per_schedule.into_iter().flatten().filter(|r| seen.insert((r.conflict.clone(), r.kind))).collect()
}
