use super::spec::{BehaviourSpec, EventSpec, ProcessSpec, RefMode, Reference, TaskSpec};
use super::structure::{self, clone_elements};
use super::BuildError;
use crate::kg::{Class, ElementKind, Family, Iri, KnowledgeBase, LayerTag, Prop};

/// Prefix under which builder-emitted nodes are named.
pub const BUILD_PREFIX: &str = "ex";

fn name_iri(kb: &mut KnowledgeBase, local: &str, layer: LayerTag) -> Result<Iri, BuildError> {
    let preferred = kb.mint_iri(BUILD_PREFIX, local)?;
    Ok(kb.fresh_or(&preferred, layer.slug()))
}

fn new_node(kb: &mut KnowledgeBase, local: &str, class: Class, layer: LayerTag) -> Result<Iri, BuildError> {
    let iri = name_iri(kb, local, layer)?;
    kb.assert_class(&iri, layer.class())?;
    kb.assert_class(&iri, class)?;
    Ok(iri)
}

fn link_reference(
    kb: &mut KnowledgeBase,
    element: &Iri,
    reference: &Reference,
    layer: LayerTag,
    is_action: bool,
) -> Result<(), BuildError> {
    let target = kb.resolve(&reference.iri)?;
    match &reference.mode {
        RefMode::Exact => {
            if is_action {
                kb.assert_class(&target, Class::Action)?;
            }
            kb.assert_edge(element, Prop::RefersExactlyTo, &target)?;
        }
        RefMode::New | RefMode::NewWithInstanceOf(_) => {
            let fresh = kb.fresh_or(&target, layer.slug());
            kb.assert_class(&fresh, layer.class())?;
            if is_action {
                kb.assert_class(&fresh, Class::Action)?;
            }
            kb.assert_edge(element, Prop::RefersAsNewTo, &fresh)?;
            if let RefMode::NewWithInstanceOf(classes) = &reference.mode {
                for c in classes {
                    let class = kb.resolve(c)?;
                    kb.assert_edge(&fresh, Prop::RefersAsInstanceOf, &class)?;
                }
            }
        }
    }
    Ok(())
}

/// Emits one task and its operator, argument, object and parameters.
fn emit_task(kb: &mut KnowledgeBase, task: &TaskSpec, layer: LayerTag) -> Result<Iri, BuildError> {
    let base = format!("{}_task", task.name);
    let suffix = if layer == LayerTag::Template { "_template" } else { "" };
    let task_iri = new_node(kb, &base, Class::TaskDescription, layer)?;

    let op = new_node(kb, &format!("{base}_operator"), Class::TaskOperator, layer)?;
    kb.assert_edge(&task_iri, Prop::HasTaskOperator, &op)?;
    link_reference(kb, &op, &task.operator_action, layer, true)?;

    if let Some(arg) = &task.operator_argument {
        let node = new_node(kb, &format!("{base}_operator_argument"), Class::TaskOperatorArgument, layer)?;
        kb.assert_edge(&task_iri, Prop::HasTaskOperatorArgument, &node)?;
        link_reference(kb, &node, arg, layer, false)?;
    }
    if let Some(obj) = &task.object {
        let node = new_node(kb, &format!("{base}_object{suffix}"), Class::TaskObject, layer)?;
        kb.assert_edge(&task_iri, Prop::HasTaskObject, &node)?;
        link_reference(kb, &node, obj, layer, false)?;
    }
    let params = [
        (&task.inputs, "input", Class::TaskInputParameter, Prop::HasTaskInputParameter),
        (&task.outputs, "output", Class::TaskOutputParameter, Prop::HasTaskOutputParameter),
    ];
    for (refs, word, class, prop) in params {
        for (i, r) in refs.iter().enumerate() {
            let local = if refs.len() == 1 {
                format!("{base}_{word}{suffix}")
            } else {
                format!("{base}_{word}{}{suffix}", i + 1)
            };
            let node = new_node(kb, &local, class, layer)?;
            kb.assert_edge(&task_iri, prop, &node)?;
            link_reference(kb, &node, r, layer, false)?;
        }
    }
    Ok(task_iri)
}

fn emit_behaviour(kb: &mut KnowledgeBase, spec: &BehaviourSpec, layer: LayerTag) -> Result<Iri, BuildError> {
    spec.validate()?;
    let root = new_node(kb, &spec.name, Class::Behaviour, layer)?;
    let mut goals = Vec::with_capacity(spec.goals.len());
    for goal in &spec.goals {
        let g = new_node(kb, &goal.name, Class::GoalDescription, layer)?;
        kb.assert_edge(&root, Prop::ConsistsOfGoalDescription, &g)?;
        let mut tasks = Vec::with_capacity(goal.tasks.len());
        for task in &goal.tasks {
            let t = emit_task(kb, task, layer)?;
            kb.assert_edge(&g, Prop::ConsistsOfTaskDescription, &t)?;
            tasks.push((task.name.as_str(), t));
        }
        for task in &goal.tasks {
            let from = &lookup(&tasks, &task.name).clone();
            for dep in &task.depends_on {
                kb.assert_edge(from, Prop::DependsOn, lookup(&tasks, dep))?;
            }
        }
        goals.push((goal.name.as_str(), g));
    }
    for goal in &spec.goals {
        let from = lookup(&goals, &goal.name).clone();
        for dep in &goal.depends_on {
            kb.assert_edge(&from, Prop::DependsOn, lookup(&goals, dep))?;
        }
    }
    Ok(root)
}

fn lookup<'a>(table: &'a [(&str, Iri)], name: &str) -> &'a Iri {
    &table.iter().find(|(n, _)| *n == name).expect("validated dependency").1
}

/// Emits a Template-layer behaviour graph. Returns the behaviour root.
pub fn build_template(kb: &mut KnowledgeBase, spec: &BehaviourSpec) -> Result<Iri, BuildError> {
    emit_behaviour(kb, spec, LayerTag::Template)
}

/// Emits a Planning-layer behaviour graph (a plan). Returns the plan root.
pub fn build_plan(kb: &mut KnowledgeBase, spec: &BehaviourSpec) -> Result<Iri, BuildError> {
    emit_behaviour(kb, spec, LayerTag::Planning)
}

/// Emits a concrete Behaviour-layer behaviour from scratch, optionally owned
/// by `owner` through `hasBehaviour`.
pub fn build_behaviour(kb: &mut KnowledgeBase, spec: &BehaviourSpec, owner: Option<&Iri>) -> Result<Iri, BuildError> {
    if let Some(agent) = owner {
        if !kb.contains(agent) {
            return Err(BuildError::MissingAgent(agent.clone()));
        }
    }
    let root = emit_behaviour(kb, spec, LayerTag::Behaviour)?;
    if let Some(agent) = owner {
        kb.assert_edge(agent, Prop::HasBehaviour, &root)?;
    }
    Ok(root)
}

/// Clones a template into a concrete behaviour owned by `agent`, linking each
/// clone node to its template counterpart through the `overloads` family.
pub fn derive_behaviour(kb: &mut KnowledgeBase, template: &Iri, agent: &Iri) -> Result<Iri, BuildError> {
    derive_behaviour_with(kb, template, Some(agent), None)
}

/// [`derive_behaviour`] with an optional owner (role-provided behaviours have
/// none) and an optional local name for the clone root.
pub fn derive_behaviour_with(
    kb: &mut KnowledgeBase,
    template: &Iri,
    owner: Option<&Iri>,
    name: Option<&str>,
) -> Result<Iri, BuildError> {
    if !kb.is_instance(template, Class::Behaviour) || kb.layer(template) != Some(LayerTag::Template) {
        return Err(BuildError::NotATemplate(template.clone()));
    }
    if let Some(agent) = owner {
        if !kb.contains(agent) {
            return Err(BuildError::MissingAgent(agent.clone()));
        }
    }
    let elements = structure::elements(kb, template, ElementKind::Behaviour);
    let root_iri = match name {
        Some(n) => Some(name_iri(kb, n, LayerTag::Behaviour)?),
        None => None,
    };
    let map = clone_elements(kb, &elements, LayerTag::Behaviour, root_iri)?;
    for (kind, orig) in &elements {
        kb.assert_edge(&map[orig], kind.family_prop(Family::Overloads), orig)?;
    }
    let root = map[template].clone();
    if let Some(agent) = owner {
        kb.assert_edge(agent, Prop::HasBehaviour, &root)?;
    }
    Ok(root)
}

fn require_behaviour_layer(kb: &KnowledgeBase, iri: &Iri, layer: LayerTag) -> Result<(), BuildError> {
    let found = kb.layer(iri);
    if found != Some(layer) || !kb.is_instance(iri, Class::Behaviour) {
        return Err(BuildError::LayerError { entity: iri.clone(), expected: layer, found });
    }
    Ok(())
}

/// Links every node of `plan` to its counterpart in `behaviour` through the
/// `submittedTo` family.
pub fn submit_plan(kb: &mut KnowledgeBase, plan: &Iri, behaviour: &Iri) -> Result<(), BuildError> {
    require_behaviour_layer(kb, plan, LayerTag::Planning)?;
    require_behaviour_layer(kb, behaviour, LayerTag::Behaviour)?;
    let pairs = structure::pair(kb, plan, behaviour, ElementKind::Behaviour).map_err(BuildError::StructureMismatch)?;
    for (kind, p, b) in pairs {
        kb.assert_edge(&p, kind.family_prop(Family::SubmittedTo), &b)?;
    }
    Ok(())
}

/// Emits a process, its procedures and their state chains, with one plan per
/// state and the events attached to each state. All nodes are Planning-layer.
pub fn build_process(kb: &mut KnowledgeBase, spec: &ProcessSpec) -> Result<Iri, BuildError> {
    spec.validate()?;
    let layer = LayerTag::Planning;
    let process = new_node(kb, &spec.name, Class::Process, layer)?;
    let mut previous_procedure: Option<Iri> = None;
    for proc in &spec.procedures {
        let procedure = new_node(kb, &proc.name, Class::Procedure, layer)?;
        kb.assert_edge(&process, Prop::ConsistsOfProcedure, &procedure)?;
        if let Some(prev) = &previous_procedure {
            kb.assert_edge(prev, Prop::HasNextProcedure, &procedure)?;
        }
        let last = proc.states.len() - 1;
        let mut states = Vec::with_capacity(proc.states.len());
        for (i, state) in proc.states.iter().enumerate() {
            let iri = name_iri(kb, &state.name, layer)?;
            kb.assert_class(&iri, layer.class())?;
            if i == 0 {
                kb.assert_class(&iri, Class::InitialProcedureState)?;
            }
            if i == last {
                kb.assert_class(&iri, Class::FinalProcedureState)?;
            }
            if i != 0 && i != last {
                kb.assert_class(&iri, Class::NonTerminatingProcedureState)?;
            }
            if i == 0 {
                kb.assert_edge(&procedure, Prop::ProcedureConsistsOfInitialProcedureState, &iri)?;
            }
            if i == last {
                kb.assert_edge(&procedure, Prop::ProcedureConsistsOfFinalProcedureState, &iri)?;
            }
            if i != 0 && i != last {
                kb.assert_edge(&procedure, Prop::ProcedureConsistsOfNonTerminatingProcedureState, &iri)?;
            }
            states.push(iri);
        }
        for (i, pair) in states.windows(2).enumerate() {
            let prop =
                if i + 1 == last { Prop::HasFinalProcedureState } else { Prop::HasNextNonTerminatingProcedureState };
            kb.assert_edge(&pair[0], prop, &pair[1])?;
        }
        for (state, iri) in proc.states.iter().zip(&states) {
            let plan = build_plan(kb, &state.plan)?;
            kb.assert_edge(iri, Prop::IsDescribedBy, &plan)?;
            for event in &state.events {
                attach_event(kb, iri, event)?;
            }
        }
        previous_procedure = Some(procedure);
    }
    Ok(process)
}

/// Creates a fresh `Role` typed by `role_type`, played by `agent` and
/// providing each of `behaviours`.
pub fn grant_role(kb: &mut KnowledgeBase, agent: &Iri, role_type: &Iri, behaviours: &[Iri]) -> Result<Iri, BuildError> {
    for b in behaviours {
        require_behaviour_layer(kb, b, LayerTag::Behaviour)?;
    }
    let preferred = kb.mint_iri(BUILD_PREFIX, &format!("{}_of_{}", role_type.local_name(), agent.local_name()))?;
    let role = kb.fresh_or(&preferred, "role");
    kb.assert_class(&role, Class::Role)?;
    kb.assert_class(role_type, Class::RoleType)?;
    kb.assert_edge(&role, Prop::HasRoleType, role_type)?;
    kb.assert_edge(agent, Prop::PlayRole, &role)?;
    for b in behaviours {
        kb.assert_edge(&role, Prop::ProvidesBehaviour, b)?;
    }
    Ok(role)
}

/// Marks `role` as deprecated. There is no way back.
pub fn deprecate_role(kb: &mut KnowledgeBase, role: &Iri) -> Result<(), BuildError> {
    if !kb.is_instance(role, Class::Role) {
        return Err(BuildError::NotARole(role.clone()));
    }
    kb.assert_class(role, Class::DeprecatedThing)?;
    Ok(())
}

/// Attaches an event to a procedure state. The event and its task-shaped
/// action take the state's layer.
pub fn attach_event(kb: &mut KnowledgeBase, state: &Iri, spec: &EventSpec) -> Result<Iri, BuildError> {
    if !kb.is_instance(state, Class::ProcedureState) {
        return Err(BuildError::NotAProcedureState(state.clone()));
    }
    spec.validate()?;
    let layer = kb.layer(state).unwrap_or(LayerTag::Planning);
    let event = new_node(kb, &spec.name, Class::Event, layer)?;
    let action = emit_task(kb, &spec.action, layer)?;
    kb.assert_edge(state, Prop::TriggersEvent, &event)?;
    kb.assert_edge(&event, Prop::EventDescribedByAction, &action)?;
    for (prop, value) in
        [(Prop::EventKind, &spec.kind), (Prop::EventDuration, &spec.duration), (Prop::EventWindow, &spec.window)]
    {
        if let Some(v) = value {
            kb.assert_edge(&event, prop, crate::kg::Term::Literal(v.clone()))?;
        }
    }
    Ok(event)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{AssertionMode, Pattern};
    use crate::model::spec::{GoalSpec, ProcedureSpec, StateSpec};

    fn fig2() -> BehaviourSpec {
        crate::scenario::request_lock_template_spec()
    }

    fn layer_count(kb: &KnowledgeBase, layer: LayerTag) -> usize {
        kb.entities().filter(|e| e.layer == Some(layer)).count()
    }

    #[test]
    fn fig2_template_names() {
        let mut kb = KnowledgeBase::with_mode(AssertionMode::Strict);
        let root = build_template(&mut kb, &fig2()).unwrap();
        for local in [
            "request_lock_task_operator",
            "request_lock_task_operator_argument",
            "request_lock_task_object_template",
            "request_lock_task_output_template",
        ] {
            let iri = kb.mint_iri("ex", local).unwrap();
            assert_eq!(kb.layer(&iri), Some(LayerTag::Template), "{local}");
        }
        assert_eq!(kb.layer(&root), Some(LayerTag::Template));
    }

    #[test]
    fn minimal_template_has_four_nodes() {
        let mut kb = KnowledgeBase::new();
        let spec = BehaviourSpec::single("b", "g", TaskSpec::new("t", Reference::exact("ex:do")));
        build_template(&mut kb, &spec).unwrap();
        assert_eq!(layer_count(&kb, LayerTag::Template), 4);
    }

    #[test]
    fn derive_creates_overload_edges() {
        let mut kb = KnowledgeBase::with_mode(AssertionMode::Strict);
        let t = build_template(&mut kb, &fig2()).unwrap();
        let alice = kb.mint_iri("ex", "alice").unwrap();
        kb.assert_class(&alice, Class::Agent).unwrap();
        let b = derive_behaviour(&mut kb, &t, &alice).unwrap();
        assert!(kb.has(&alice, Prop::HasBehaviour, &b));
        let pat = Pattern::new(None, Some(Prop::Overloads.iri()), None);
        assert_eq!(kb.query(&pat, true).len(), 7);

        let bob = kb.mint_iri("ex", "bob").unwrap();
        kb.assert_class(&bob, Class::Agent).unwrap();
        let b2 = derive_behaviour(&mut kb, &t, &bob).unwrap();
        assert_ne!(b, b2);
        assert_eq!(kb.query(&pat, true).len(), 14);
    }

    #[test]
    fn derive_rejects_non_templates_and_missing_agents() {
        let mut kb = KnowledgeBase::new();
        let plan = build_plan(&mut kb, &fig2()).unwrap();
        let alice = kb.mint_iri("ex", "alice").unwrap();
        assert!(matches!(derive_behaviour(&mut kb, &plan, &alice), Err(BuildError::NotATemplate(_))));
        let t = build_template(&mut kb, &fig2()).unwrap();
        assert!(matches!(derive_behaviour(&mut kb, &t, &alice), Err(BuildError::MissingAgent(_))));
    }

    #[test]
    fn submit_plan_checks_layer_and_shape() {
        let mut kb = KnowledgeBase::new();
        let t = build_template(&mut kb, &fig2()).unwrap();
        let b = derive_behaviour_with(&mut kb, &t, None, Some("requestLockBehaviour")).unwrap();
        let plan = build_plan(&mut kb, &fig2()).unwrap();
        assert!(matches!(submit_plan(&mut kb, &t, &b), Err(BuildError::LayerError { .. })));
        submit_plan(&mut kb, &plan, &b).unwrap();
        let pat = Pattern::new(None, Some(Prop::SubmittedTo.iri()), None);
        assert_eq!(kb.query(&pat, true).len(), 7);

        let two = BehaviourSpec::new(
            "two",
            vec![GoalSpec::new(
                "g2",
                vec![TaskSpec::new("x", Reference::exact("ex:a")), TaskSpec::new("y", Reference::exact("ex:b"))],
            )],
        );
        let plan2 = build_plan(&mut kb, &two).unwrap();
        assert!(matches!(submit_plan(&mut kb, &plan2, &b), Err(BuildError::StructureMismatch(_))));
    }

    #[test]
    fn single_state_procedure_is_initial_and_final() {
        let mut kb = KnowledgeBase::with_mode(AssertionMode::Strict);
        let spec = ProcessSpec {
            name: "p".into(),
            procedures: vec![ProcedureSpec { name: "proc".into(), states: vec![StateSpec::new("only", fig2())] }],
        };
        build_process(&mut kb, &spec).unwrap();
        let only = kb.mint_iri("ex", "only").unwrap();
        assert!(kb.is_instance(&only, Class::InitialProcedureState));
        assert!(kb.is_instance(&only, Class::FinalProcedureState));
    }

    #[test]
    fn two_procedures_are_ordered() {
        let mut kb = KnowledgeBase::new();
        let state = |n: &str| {
            StateSpec::new(
                n,
                BehaviourSpec::single(
                    format!("{n}_plan"),
                    format!("{n}_goal"),
                    TaskSpec::new(n, Reference::exact("ex:do")),
                ),
            )
        };
        let spec = ProcessSpec {
            name: "p".into(),
            procedures: vec![
                ProcedureSpec { name: "first".into(), states: vec![state("a")] },
                ProcedureSpec { name: "second".into(), states: vec![state("b")] },
            ],
        };
        build_process(&mut kb, &spec).unwrap();
        assert_eq!(kb.edges(Prop::HasNextProcedure).len(), 1);
    }

    #[test]
    fn roles_and_events_preconditions() {
        let mut kb = KnowledgeBase::new();
        let t = build_template(&mut kb, &fig2()).unwrap();
        let alice = kb.mint_iri("ex", "alice").unwrap();
        kb.assert_class(&alice, Class::Agent).unwrap();
        let rt = kb.mint_iri("ex", "resource_consumer_role").unwrap();
        assert!(matches!(
            grant_role(&mut kb, &alice, &rt, std::slice::from_ref(&t)),
            Err(BuildError::LayerError { .. })
        ));
        let role = grant_role(&mut kb, &alice, &rt, &[]).unwrap();
        assert!(kb.has(&alice, Prop::PlayRole, &role));
        assert!(kb.objects(&role, Prop::ProvidesBehaviour).is_empty());
        deprecate_role(&mut kb, &role).unwrap();
        deprecate_role(&mut kb, &role).unwrap();
        assert!(kb.is_deprecated(&role));
        assert!(matches!(deprecate_role(&mut kb, &alice), Err(BuildError::NotARole(_))));
        let ev = EventSpec::new("e", TaskSpec::new("send", Reference::exact("ex:send")));
        assert!(matches!(attach_event(&mut kb, &alice, &ev), Err(BuildError::NotAProcedureState(_))));
    }
}
