//! The resource-lock case study: an agent template for requesting a lock,
//! concrete behaviours provided through a role, a three-state process
//! (request lock → modify resource → release lock) with an incidental
//! message event, and its realization.

use std::collections::BTreeSet;

use crate::engine::{
    realize_process, run_to_completion, Assignment, EngineError, ExecutionTrace, ProcessExecutionHandle,
};
use crate::kg::{vocabulary, Assertion, Class, Iri, KnowledgeBase, Prop, OASIS_NS};
use crate::model::{
    BehaviourSpec, BuildDocument, BuildError, BuildOutput, ConcreteBehaviour, DerivedBehaviour, EventSpec,
    ProcedureSpec, ProcessSpec, Reference, RoleGrant, StateSpec, Submission, TaskSpec,
};
use crate::validate::ViolationCode;

pub const ALICE: &str = "ex:alice";
pub const BOB: &str = "ex:bob";
pub const ROLE_TYPE: &str = "ex:resource_consumer_role";
pub const SHARED_RESOURCE: &str = "ex:shared_resource";
pub const PROCESS: &str = "resourceModificationProcess";
pub const LOCKLESS_PROCESS: &str = "locklessModificationProcess";
pub const MODIFY_ONLY_PROCESS: &str = "modifyOnlyProcess";
pub const MODIFY_ONLY_STATES: [&str; 3] = ["modifyOnlyState1", "modifyOnlyState2", "modifyOnlyState3"];
pub const STATES: [&str; 3] = ["requestLockState", "modifyResourceState", "releaseLockState"];
pub const PLANS: [&str; 3] = ["requestLockPlan", "modifyResourcePlan", "releaseLockPlan"];
pub const BEHAVIOURS: [&str; 3] = ["requestLockBehaviour", "modifyResourceBehaviour", "releaseLockBehaviour"];
pub const EXEC_ROOTS: [&str; 3] =
    ["requestLockBehaviourExec", "modifyResourceBehaviourExec", "releaseLockBehaviourExec"];

/// The abstract "request a lock on a resource" agent template: one behaviour,
/// one goal, one task with operator, argument, object and output.
pub fn request_lock_template_spec() -> BehaviourSpec {
    BehaviourSpec::single(
        "request_lock_behaviour",
        "request_lock_goal",
        TaskSpec::new("request_lock", Reference::exact("ex:request"))
            .argument(Reference::exact("ex:lock"))
            .object(Reference::new_instance_of("ex:lock_template", &["ex:Lock"]))
            .output(Reference::new_instance_of("ex:resource_template", &["ex:Resource"])),
    )
}

fn modify_task(resource: Reference) -> TaskSpec {
    TaskSpec::new("modify_resource", Reference::exact("ex:modify")).object(resource)
}

fn release_task(resource: Reference) -> TaskSpec {
    TaskSpec::new("release_lock", Reference::exact("ex:release"))
        .argument(Reference::exact("ex:lock"))
        .object(Reference::new_instance_of("ex:lock", &["ex:Lock"]))
        .input(resource)
}

pub fn modify_behaviour_spec() -> BehaviourSpec {
    BehaviourSpec::single(
        BEHAVIOURS[1],
        "modifyResourceGoal",
        modify_task(Reference::new_instance_of("ex:resource", &["ex:Resource"])),
    )
}

pub fn release_behaviour_spec() -> BehaviourSpec {
    BehaviourSpec::single(
        BEHAVIOURS[2],
        "releaseLockGoal",
        release_task(Reference::new_instance_of("ex:resource", &["ex:Resource"])),
    )
}

/// The three plans, each shaped like the behaviour it is submitted to and
/// pointing at the concrete shared resource.
pub fn plan_specs() -> [BehaviourSpec; 3] {
    let resource = || Reference::exact(SHARED_RESOURCE);
    [
        BehaviourSpec::single(
            PLANS[0],
            "requestLockPlanGoal",
            TaskSpec::new("request_lock", Reference::exact("ex:request"))
                .argument(Reference::exact("ex:lock"))
                .object(Reference::new_instance_of("ex:lock", &["ex:Lock"]))
                .output(resource()),
        ),
        BehaviourSpec::single(PLANS[1], "modifyResourcePlanGoal", modify_task(resource())),
        BehaviourSpec::single(PLANS[2], "releaseLockPlanGoal", release_task(resource())),
    ]
}

/// The message sent when the resource is modified.
pub fn send_message_event() -> EventSpec {
    let mut event = EventSpec::new(
        "sendMessageEvent",
        TaskSpec::new("send_message", Reference::exact("ex:send"))
            .argument(Reference::exact("ex:message"))
            .object(Reference::new_instance_of("ex:message", &["ex:Message"]))
            .input(Reference::exact("ex:committer")),
    );
    event.kind = Some("incidental".into());
    event
}

pub fn process_spec() -> ProcessSpec {
    let [request, modify, release] = plan_specs();
    ProcessSpec {
        name: PROCESS.into(),
        procedures: vec![ProcedureSpec {
            name: "resourceModificationProcedure".into(),
            states: vec![
                StateSpec::new(STATES[0], request),
                StateSpec::new(STATES[1], modify).event(send_message_event()),
                StateSpec::new(STATES[2], release),
            ],
        }],
    }
}

/// A one-state process that modifies the resource without taking the lock.
pub fn lockless_process_spec() -> ProcessSpec {
    let mut plan = plan_specs()[1].clone();
    plan.name = "locklessModifyPlan".into();
    plan.goals[0].name = "locklessModifyPlanGoal".into();
    ProcessSpec {
        name: LOCKLESS_PROCESS.into(),
        procedures: vec![ProcedureSpec {
            name: "locklessModificationProcedure".into(),
            states: vec![StateSpec::new("locklessModifyState", plan)],
        }],
    }
}

/// Three consecutive modifications of the shared resource, never locking it.
pub fn modify_only_process_spec() -> ProcessSpec {
    let states = MODIFY_ONLY_STATES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut plan = plan_specs()[1].clone();
            plan.name = format!("modifyOnlyPlan{}", i + 1);
            plan.goals[0].name = format!("modifyOnlyPlan{}Goal", i + 1);
            StateSpec::new(*name, plan)
        })
        .collect();
    ProcessSpec {
        name: MODIFY_ONLY_PROCESS.into(),
        procedures: vec![ProcedureSpec { name: "modifyOnlyProcedure".into(), states }],
    }
}

/// The whole case study as a build document. `agents` each get their own
/// role providing the three behaviours. `with_lockless` adds the one-state
/// lockless process and the three-state modify-only process.
pub fn document_for(agents: &[&str], with_lockless: bool) -> BuildDocument {
    let mut processes = vec![process_spec()];
    let mut submissions: Vec<Submission> =
        PLANS.iter().zip(BEHAVIOURS).map(|(p, b)| Submission { plan: (*p).into(), behaviour: b.into() }).collect();
    if with_lockless {
        processes.push(lockless_process_spec());
        submissions.push(Submission { plan: "locklessModifyPlan".into(), behaviour: BEHAVIOURS[1].into() });
        processes.push(modify_only_process_spec());
        for i in 1..=MODIFY_ONLY_STATES.len() {
            submissions.push(Submission { plan: format!("modifyOnlyPlan{i}"), behaviour: BEHAVIOURS[1].into() });
        }
    }
    BuildDocument {
        agents: agents.iter().map(|a| a.to_string()).collect(),
        templates: vec![request_lock_template_spec()],
        derived: vec![DerivedBehaviour {
            name: BEHAVIOURS[0].into(),
            template: "request_lock_behaviour".into(),
            owner: None,
        }],
        behaviours: vec![
            ConcreteBehaviour { spec: modify_behaviour_spec(), owner: None },
            ConcreteBehaviour { spec: release_behaviour_spec(), owner: None },
        ],
        plans: Vec::new(),
        roles: agents
            .iter()
            .map(|a| RoleGrant {
                agent: a.to_string(),
                role_type: ROLE_TYPE.into(),
                behaviours: BEHAVIOURS.iter().map(|b| b.to_string()).collect(),
                deprecated: false,
            })
            .collect(),
        processes,
        submissions,
    }
}

/// The case study with the single role-holding agent `ex:alice`.
pub fn case_study_document() -> BuildDocument {
    document_for(&[ALICE], false)
}

/// Behaviour (by document name) performing each state (by document name).
pub fn state_behaviours(process: &str) -> Vec<(&'static str, &'static str)> {
    if process == LOCKLESS_PROCESS {
        vec![("locklessModifyState", BEHAVIOURS[1])]
    } else if process == MODIFY_ONLY_PROCESS {
        MODIFY_ONLY_STATES.iter().map(|s| (*s, BEHAVIOURS[1])).collect()
    } else {
        STATES.iter().copied().zip(BEHAVIOURS).collect()
    }
}

/// Assigns every state of the named process to `agent`.
pub fn assignment_for(output: &BuildOutput, process: &str, agent: &Iri) -> Result<Assignment, BuildError> {
    let mut assignment = Assignment::new();
    for (state, behaviour) in state_behaviours(process) {
        assignment = assignment.assign(output.get(state)?.clone(), agent.clone(), output.get(behaviour)?.clone());
    }
    Ok(assignment)
}

/// The built case study.
#[derive(Clone, Debug)]
pub struct CaseStudy {
    pub kb: KnowledgeBase,
    pub output: BuildOutput,
}

impl CaseStudy {
    pub fn build(document: &BuildDocument) -> Result<Self, BuildError> {
        let mut kb = KnowledgeBase::new();
        let output = document.apply(&mut kb)?;
        Ok(CaseStudy { kb, output })
    }

    pub fn iri(&self, name: &str) -> Iri {
        match self.output.get(name) {
            Ok(iri) => iri.clone(),
            Err(_) => self.kb.resolve(name).expect("known name or resolvable IRI"),
        }
    }

    /// Realizes the named process for `agent`.
    pub fn realize(&mut self, process: &str, agent: &str) -> Result<ProcessExecutionHandle, EngineError> {
        let agent = self.kb.resolve(agent)?;
        let assignment = assignment_for(&self.output, process, &agent).expect("case-study names exist");
        let process = self.iri(process);
        realize_process(&mut self.kb, &process, &assignment)
    }
}

/// The realized and executed case study: the corpus the mutation suite
/// perturbs.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub case: CaseStudy,
    pub handle: ProcessExecutionHandle,
    pub trace: ExecutionTrace,
}

impl Corpus {
    pub fn build() -> Result<Self, EngineError> {
        let mut case = CaseStudy::build(&case_study_document()).expect("case-study document is valid");
        let mut handle = case.realize(PROCESS, ALICE)?;
        let trace = run_to_completion(&mut case.kb, &mut handle)?;
        Ok(Corpus { case, handle, trace })
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.case.kb
    }

    /// A document name or prefixed IRI.
    pub fn iri(&self, name: &str) -> Iri {
        self.case.iri(name)
    }

    /// The Execution-layer clone of a Planning-layer node.
    pub fn exec_of(&self, name: &str) -> Iri {
        let planned = self.iri(name);
        let kb = self.kb();
        [Prop::ProcessDrawnBy, Prop::ProcedureDrawnBy, Prop::ProcedureStateDrawnBy, Prop::DrawnBy]
            .iter()
            .find_map(|p| kb.subjects(*p, &planned).into_iter().next())
            .unwrap_or_else(|| panic!("{name} has no execution clone"))
    }

    fn one(&self, subject: &Iri, prop: Prop) -> Iri {
        self.kb().object(subject, prop).unwrap_or_else(|| panic!("{subject} has no {}", prop.local_name()))
    }

    /// The single task of a single-goal behaviour-like root.
    pub fn task_of(&self, root: &Iri) -> Iri {
        let goal = self.one(root, Prop::ConsistsOfGoalDescription);
        self.one(&goal, Prop::ConsistsOfTaskDescription)
    }

    pub fn role(&self) -> Iri {
        self.one(&self.iri(ALICE), Prop::PlayRole)
    }
}

/// A single-assertion edit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Edit {
    Delete(Assertion),
    Insert(Assertion),
}

/// One seeded defect and the violation codes it must produce.
#[derive(Clone, Debug)]
pub struct Mutation {
    pub id: String,
    pub description: String,
    pub edit: Edit,
    pub expected: BTreeSet<ViolationCode>,
}

impl Mutation {
    /// Applies the edit; false if it changed nothing (a broken corpus).
    pub fn apply(&self, kb: &mut KnowledgeBase) -> bool {
        match &self.edit {
            Edit::Delete(a) => kb.retract(a),
            Edit::Insert(a) => kb.insert_raw(a.clone()),
        }
    }

    pub fn is_deletion(&self) -> bool {
        matches!(self.edit, Edit::Delete(_))
    }
}

/// The mutation corpus over [`Corpus`]: deletions (`D*`) and insertions (`I*`).
pub fn mutations(corpus: &Corpus) -> Vec<Mutation> {
    use ViolationCode as V;
    let c = corpus;
    let kb = c.kb();
    let edge = |s: &Iri, p: Prop, o: &Iri| Assertion::new(s.clone(), p.iri().clone(), o.clone());
    let typed = |s: &Iri, class: Class| Assertion::new(s.clone(), vocabulary().rdf_type().clone(), class.iri().clone());

    let [request, modify, release] = STATES.map(|s| c.iri(s));
    let [x_request, x_modify, x_release] = STATES.map(|s| c.exec_of(s));
    let procedure = c.iri("ex:resourceModificationProcedure");
    let x_procedure = c.exec_of("ex:resourceModificationProcedure");
    let x_process = c.exec_of(PROCESS);
    let [request_plan, _, _] = PLANS.map(|p| c.iri(p));
    let [request_behaviour, modify_behaviour, _] = BEHAVIOURS.map(|b| c.iri(b));
    let [x_request_plan, x_modify_plan, _] = EXEC_ROOTS.map(|e| c.iri(&format!("ex:{e}")));
    let template = c.iri("request_lock_behaviour");
    let event = c.iri("ex:sendMessageEvent");
    let action = c.one(&event, Prop::EventDescribedByAction);
    let x_event = c.exec_of("ex:sendMessageEvent");
    let x_action = c.one(&x_event, Prop::EventDescribedByAction);
    let alice = c.iri(ALICE);
    let role = c.role();
    let plan_task = c.task_of(&request_plan);
    let x_plan_task = c.task_of(&x_request_plan);
    let x_plan_goal = c.one(&x_request_plan, Prop::ConsistsOfGoalDescription);
    let behaviour_task = c.task_of(&request_behaviour);
    let template_task = c.task_of(&template);
    let plan_operator = c.one(&plan_task, Prop::HasTaskOperator);
    let behaviour_operator = c.one(&behaviour_task, Prop::HasTaskOperator);
    let bogus = Iri::new(format!("{OASIS_NS}bogusProperty")).expect("valid IRI");
    let elsewhere = c.iri("ex:elsewhere");

    let set = |codes: &[V]| codes.iter().copied().collect::<BTreeSet<_>>();
    let mut out = Vec::new();
    let mut push = |id: &str, description: &str, edit: Edit, expected: BTreeSet<V>| {
        out.push(Mutation { id: id.into(), description: description.into(), edit, expected });
    };
    use Edit::{Delete, Insert};

    push(
        "D1",
        "planned chain loses its final link",
        Delete(edge(&modify, Prop::HasFinalProcedureState, &release)),
        set(&[V::ChainNoFinal]),
    );
    push(
        "D2",
        "procedure loses its initial state",
        Delete(edge(&procedure, Prop::ProcedureConsistsOfInitialProcedureState, &request)),
        set(&[V::ChainNoInitial]),
    );
    push(
        "D3",
        "procedure loses its final state",
        Delete(edge(&procedure, Prop::ProcedureConsistsOfFinalProcedureState, &release)),
        set(&[V::ChainNoFinal]),
    );
    push(
        "D4",
        "planned chain loses its first link",
        Delete(edge(&request, Prop::HasNextNonTerminatingProcedureState, &modify)),
        set(&[V::ChainNoFinal, V::ChainUnreachableState]),
    );
    push(
        "D5",
        "planned state loses its plan",
        Delete(edge(&request, Prop::IsDescribedBy, &request_plan)),
        set(&[V::StateWithoutPlan]),
    );
    push(
        "D6",
        "planned event loses its action",
        Delete(edge(&event, Prop::EventDescribedByAction, &action)),
        set(&[V::EventWithoutAction]),
    );
    push(
        "D7",
        "fired event loses its action",
        Delete(edge(&x_event, Prop::EventDescribedByAction, &x_action)),
        set(&[V::EventWithoutAction]),
    );
    push(
        "D8",
        "plan execution loses its behaviour",
        Delete(edge(&x_request_plan, Prop::PlanExecutionDrawnBy, &request_behaviour)),
        set(&[V::ExecWithoutBehaviour]),
    );
    push(
        "D9",
        "plan execution loses its performer",
        Delete(edge(&alice, Prop::PerformsPlanExecution, &x_modify_plan)),
        set(&[V::ExecWithoutBehaviour]),
    );
    push(
        "D10",
        "plan execution loses its plan link",
        Delete(edge(&request_plan, Prop::HasPlanExecution, &x_request_plan)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D11",
        "task execution loses its plan-task link",
        Delete(edge(&plan_task, Prop::HasTaskExecution, &x_plan_task)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D12",
        "executed goal loses its task",
        Delete(edge(&x_plan_goal, Prop::ConsistsOfTaskDescription, &x_plan_task)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D13",
        "derived task loses its overload link",
        Delete(edge(&behaviour_task, Prop::OverloadsTaskDescription, &template_task)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D14",
        "planned operator loses its submission link",
        Delete(edge(&plan_operator, Prop::TaskOperatorSubmittedTo, &behaviour_operator)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D15",
        "planned state loses its layer",
        Delete(typed(&request, Class::PlanningThing)),
        set(&[V::LayerConstraint, V::DrawnbyCrossLayer]),
    );
    push(
        "D16",
        "realized process loses its origin",
        Delete(edge(&x_process, Prop::ProcessDrawnBy, &c.iri(PROCESS))),
        set(&[V::StructureMismatch]),
    );
    push(
        "D17",
        "realized procedure loses its origin",
        Delete(edge(&x_procedure, Prop::ProcedureDrawnBy, &procedure)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D18",
        "realized state loses its origin",
        Delete(edge(&x_modify, Prop::ProcedureStateDrawnBy, &modify)),
        set(&[V::StructureMismatch]),
    );
    push(
        "D19",
        "role stops providing a performed behaviour",
        Delete(edge(&role, Prop::ProvidesBehaviour, &modify_behaviour)),
        set(&[V::PerformerLacksCapability]),
    );
    push(
        "D20",
        "agent stops playing its role",
        Delete(edge(&alice, Prop::PlayRole, &role)),
        set(&[V::PerformerLacksCapability]),
    );
    push(
        "D21",
        "realized state loses its plan execution",
        Delete(edge(&x_modify, Prop::IsDescribedBy, &x_modify_plan)),
        set(&[V::StateWithoutPlan]),
    );
    push(
        "D22",
        "realized chain loses its final link",
        Delete(edge(&x_modify, Prop::HasFinalProcedureState, &x_release)),
        set(&[V::ChainNoFinal]),
    );
    push(
        "D23",
        "plan loses its Behaviour membership",
        Delete(typed(&request_plan, Class::Behaviour)),
        set(&[V::DanglingReference]),
    );
    push("D24", "event loses its Event membership", Delete(typed(&event, Class::Event)), set(&[V::DanglingReference]));
    push(
        "D25",
        "realized chain loses its first link",
        Delete(edge(&x_request, Prop::HasNextNonTerminatingProcedureState, &x_modify)),
        set(&[V::ChainNoFinal, V::ChainUnreachableState]),
    );

    push(
        "I1",
        "planned state also tagged as executed",
        Insert(typed(&modify, Class::ExecutionThing)),
        set(&[V::LayerMix]),
    );
    push(
        "I2",
        "the performing role is deprecated",
        Insert(typed(&role, Class::DeprecatedThing)),
        set(&[V::RoleDeprecatedUse]),
    );
    push(
        "I3",
        "second initial state",
        Insert(edge(&procedure, Prop::ProcedureConsistsOfInitialProcedureState, &modify)),
        set(&[V::ChainMultipleInitial, V::DanglingReference]),
    );
    push(
        "I4",
        "chain loops back",
        Insert(edge(&release, Prop::HasNextNonTerminatingProcedureState, &modify)),
        set(&[V::ChainCycle]),
    );
    push(
        "I5",
        "predicate outside the vocabulary",
        Insert(Assertion::new(alice.clone(), bogus, elsewhere)),
        set(&[V::UnknownPredicate]),
    );
    push(
        "I6",
        "behaviour overloads a plan",
        Insert(edge(&request_behaviour, Prop::OverloadsBehaviour, &request_plan)),
        set(&[V::OverloadCrossLayer]),
    );
    push(
        "I7",
        "plan submitted to a template",
        Insert(edge(&request_plan, Prop::PlanDescriptionSubmittedTo, &template)),
        set(&[V::SubmitCrossLayer]),
    );
    push("I8", "task depends on itself", Insert(edge(&plan_task, Prop::DependsOn, &plan_task)), set(&[V::ChainCycle]));
    push(
        "I9",
        "realization drawn by a template",
        Insert(edge(&x_request_plan, Prop::PlanExecutionDrawnBy, &template)),
        set(&[V::DrawnbyCrossLayer, V::PerformerLacksCapability]),
    );
    push(
        "I10",
        "second final state",
        Insert(edge(&procedure, Prop::ProcedureConsistsOfFinalProcedureState, &modify)),
        set(&[V::ChainMultipleFinal, V::DanglingReference]),
    );
    debug_assert!(out.iter().all(|m| match &m.edit {
        Edit::Delete(a) => kb.contains_assertion(a),
        Edit::Insert(a) => !kb.contains_assertion(a),
    }));
    out
}
