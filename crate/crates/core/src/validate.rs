//! Whole-graph structural verification. Findings are data: every check
//! returns [`Violation`]s, merged and sorted into one deterministic list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kg::{vocabulary, Class, ElementKind, Family, Iri, KnowledgeBase, Prop, Term};
use crate::model::structure::root_kind;
use crate::par::{self, ExecMode};

macro_rules! codes {
    ($($variant:ident => $s:literal),* $(,)?) => {
        /// Violation codes. Declared in lexical order of their rendering so
        /// the derived ordering matches string ordering.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        pub enum ViolationCode { $($variant),* }

        impl ViolationCode {
            pub const ALL: &'static [ViolationCode] = &[$(ViolationCode::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self { $(ViolationCode::$variant => $s),* }
            }

            pub fn parse(s: &str) -> Option<ViolationCode> {
                match s { $($s => Some(ViolationCode::$variant),)* _ => None }
            }
        }
    };
}

codes! {
    ChainCycle => "CHAIN_CYCLE",
    ChainMultipleFinal => "CHAIN_MULTIPLE_FINAL",
    ChainMultipleInitial => "CHAIN_MULTIPLE_INITIAL",
    ChainNoFinal => "CHAIN_NO_FINAL",
    ChainNoInitial => "CHAIN_NO_INITIAL",
    ChainUnreachableState => "CHAIN_UNREACHABLE_STATE",
    DanglingReference => "DANGLING_REFERENCE",
    DrawnbyCrossLayer => "DRAWNBY_CROSS_LAYER",
    EventWithoutAction => "EVENT_WITHOUT_ACTION",
    ExecWithoutBehaviour => "EXEC_WITHOUT_BEHAVIOUR",
    LayerConstraint => "LAYER_CONSTRAINT",
    LayerMix => "LAYER_MIX",
    OverloadCrossLayer => "OVERLOAD_CROSS_LAYER",
    PerformerLacksCapability => "PERFORMER_LACKS_CAPABILITY",
    RoleDeprecatedUse => "ROLE_DEPRECATED_USE",
    StateWithoutPlan => "STATE_WITHOUT_PLAN",
    StructureMismatch => "STRUCTURE_MISMATCH",
    SubmitCrossLayer => "SUBMIT_CROSS_LAYER",
    UnknownPredicate => "UNKNOWN_PREDICATE",
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One finding.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub subjects: Vec<Iri>,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, subjects: Vec<Iri>, message: impl Into<String>) -> Self {
        let message: String = message.into();
        let message = message.replace(['\t', '\n', '\r'], " ");
        Violation { code, subjects, message }
    }
}

/// `CODE<TAB>subject1[,subject2…]<TAB>message`
impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subjects: Vec<&str> = self.subjects.iter().map(Iri::as_str).collect();
        write!(f, "{}\t{}\t{}", self.code, subjects.join(","), self.message)
    }
}

/// Renders violations one per line, each line LF-terminated.
pub fn render(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("{v}\n")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidateError {
    #[error("root {0} does not exist")]
    DanglingRoot(Iri),
}

/// How an agent is able to exhibit a behaviour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CapabilitySource {
    Intrinsic,
    ViaRole(Iri),
    None,
}

impl CapabilitySource {
    pub fn is_capable(&self) -> bool {
        !matches!(self, CapabilitySource::None)
    }
}

/// Intrinsic if the agent owns the behaviour; else the smallest non-deprecated
/// role played by the agent that provides it; else `None`.
pub fn check_capability(kb: &KnowledgeBase, agent: &Iri, behaviour: &Iri) -> CapabilitySource {
    if kb.has(agent, Prop::HasBehaviour, behaviour) {
        return CapabilitySource::Intrinsic;
    }
    kb.objects(agent, Prop::PlayRole)
        .into_iter()
        .find(|r| !kb.is_deprecated(r) && kb.has(r, Prop::ProvidesBehaviour, behaviour))
        .map_or(CapabilitySource::None, CapabilitySource::ViaRole)
}

/// Deprecated roles of `agent` that provide `behaviour`.
pub fn deprecated_providers(kb: &KnowledgeBase, agent: &Iri, behaviour: &Iri) -> Vec<Iri> {
    kb.objects(agent, Prop::PlayRole)
        .into_iter()
        .filter(|r| kb.is_deprecated(r) && kb.has(r, Prop::ProvidesBehaviour, behaviour))
        .collect()
}

type Check = fn(&KnowledgeBase) -> Vec<Violation>;

const CHECKS: &[Check] = &[
    check_layer_mix,
    check_edges,
    check_mirrors,
    check_chains,
    check_dependencies,
    check_states_and_events,
    check_executions,
    check_capabilities,
];

/// Runs every check and returns the sorted findings.
pub fn validate(kb: &KnowledgeBase) -> Vec<Violation> {
    validate_with(kb, ExecMode::default())
}

pub fn validate_with(kb: &KnowledgeBase, mode: ExecMode) -> Vec<Violation> {
    let mut all: Vec<Violation> = par::map(mode, CHECKS, |check| check(kb)).into_iter().flatten().collect();
    all.sort();
    all.dedup();
    all
}

fn check_layer_mix(kb: &KnowledgeBase) -> Vec<Violation> {
    kb.entities()
        .filter(|e| e.has_layer_mix())
        .map(|e| {
            let names: Vec<String> = e.layers().iter().map(|l| l.to_string()).collect();
            Violation::new(ViolationCode::LayerMix, vec![e.iri.clone()], format!("carries {}", names.join(" and ")))
        })
        .collect()
}

fn has_mix(kb: &KnowledgeBase, iri: &Iri) -> bool {
    kb.entity(iri).is_some_and(|e| e.has_layer_mix())
}

fn layer_name(kb: &KnowledgeBase, iri: &Iri) -> String {
    kb.layer(iri).map_or_else(|| "no layer".to_string(), |l| l.to_string())
}

fn cross_layer_code(prop: Prop) -> ViolationCode {
    match vocabulary().family_of(prop) {
        Some(Family::Overloads) => ViolationCode::OverloadCrossLayer,
        Some(Family::SubmittedTo) => ViolationCode::SubmitCrossLayer,
        Some(Family::DrawnBy) => ViolationCode::DrawnbyCrossLayer,
        _ => ViolationCode::LayerConstraint,
    }
}

/// Per-assertion checks: unknown vocabulary terms, literal/IRI kinds, layer
/// rules and domain/range classes.
fn check_edges(kb: &KnowledgeBase) -> Vec<Violation> {
    let vocab = vocabulary();
    let mut out = Vec::new();
    for a in kb.assertions() {
        if &a.predicate == vocab.rdf_type() {
            if let Term::Iri(class) = &a.object {
                if class.is_oasis() && vocab.class(class).is_none() {
                    out.push(Violation::new(
                        ViolationCode::DanglingReference,
                        vec![a.subject.clone(), class.clone()],
                        format!("typed with undeclared vocabulary class {}", class.local_name()),
                    ));
                }
            }
            continue;
        }
        let Some(prop) = vocab.prop(&a.predicate) else {
            if a.predicate.is_oasis() {
                out.push(Violation::new(
                    ViolationCode::UnknownPredicate,
                    vec![a.subject.clone()],
                    format!("predicate {} is not in the vocabulary", a.predicate.local_name()),
                ));
            }
            continue;
        };
        let spec = vocab.spec(prop);
        let object = match (&a.object, spec.literal) {
            (Term::Iri(o), false) => o,
            (Term::Literal(_), true) => continue,
            (_, literal) => {
                let want = if literal { "a literal" } else { "an IRI" };
                out.push(Violation::new(
                    ViolationCode::DanglingReference,
                    vec![a.subject.clone()],
                    format!("{} expects {want} object", prop.local_name()),
                ));
                continue;
            }
        };
        if !has_mix(kb, &a.subject) && !has_mix(kb, object) {
            let (sl, ol) = (kb.layer(&a.subject), kb.layer(object));
            if !spec.layers_ok(sl, ol) {
                out.push(Violation::new(
                    cross_layer_code(prop),
                    vec![a.subject.clone(), object.clone()],
                    format!(
                        "{} links {} to {}; allowed {} to {}{}",
                        prop.local_name(),
                        layer_name(kb, &a.subject),
                        layer_name(kb, object),
                        spec.subject_layer,
                        spec.object_layer,
                        if spec.same_layer { " within one layer" } else { "" }
                    ),
                ));
            }
        }
        for (end, class, role) in [(&a.subject, spec.subject_class, "subject"), (object, spec.object_class, "object")] {
            if let Some(class) = class {
                if !kb.is_instance(end, class) {
                    out.push(Violation::new(
                        ViolationCode::DanglingReference,
                        vec![end.clone()],
                        format!("{role} of {} is not a {}", prop.local_name(), class.local_name()),
                    ));
                }
            }
        }
    }
    out
}

/// Mirror checks rooted at every behaviour-level family edge whose layers
/// are admissible.
fn check_mirrors(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    for family in [Family::Overloads, Family::SubmittedTo, Family::DrawnBy, Family::HasExecution] {
        for kind in [ElementKind::Behaviour, ElementKind::Task] {
            let prop = kind.family_prop(family);
            for a in kb.edges(prop) {
                let Some(target) = a.object.as_iri() else { continue };
                if kind == ElementKind::Task && kb.subjects(Prop::ConsistsOfTaskDescription, &a.subject).len() == 1 {
                    continue; // reached from its behaviour
                }
                if !vocabulary().spec(prop).layers_ok(kb.layer(&a.subject), kb.layer(target)) {
                    continue;
                }
                if let Ok(found) = check_mirror(kb, &a.subject, target, family) {
                    out.extend(found);
                }
            }
        }
    }
    out
}

/// Verifies that every element below `source` has a counterpart below
/// `target` linked by the member of `family` matching its kind, and that
/// every element below `target` is such a counterpart. Roots given against
/// the family's edge direction are swapped.
pub fn check_mirror(
    kb: &KnowledgeBase,
    source: &Iri,
    target: &Iri,
    family: Family,
) -> Result<Vec<Violation>, ValidateError> {
    for root in [source, target] {
        if !kb.contains(root) {
            return Err(ValidateError::DanglingRoot(root.clone()));
        }
    }
    let kind = root_kind(kb, source).or_else(|| root_kind(kb, target)).unwrap_or(ElementKind::Behaviour);
    let root_prop = kind.family_prop(family);
    let (s, t) = if !kb.has(source, root_prop, target) && kb.has(target, root_prop, source) {
        (target, source)
    } else {
        (source, target)
    };
    let mut out = Vec::new();
    if !kb.has(s, root_prop, t) {
        out.push(Violation::new(
            ViolationCode::StructureMismatch,
            vec![s.clone(), t.clone()],
            format!("roots are not linked by {}", root_prop.local_name()),
        ));
    }
    mirror_walk(kb, s, t, kind, family, &mut out);
    Ok(out)
}

fn mirror_walk(kb: &KnowledgeBase, s: &Iri, t: &Iri, kind: ElementKind, family: Family, out: &mut Vec<Violation>) {
    for &child in kind.children() {
        let child_prop = child.child_prop().expect("child kinds have a linking property");
        let link = child.family_prop(family);
        let targets: BTreeSet<Iri> = kb.objects(t, child_prop).into_iter().collect();
        let mut matched: BTreeSet<Iri> = BTreeSet::new();
        for c in kb.objects(s, child_prop) {
            let counterparts: Vec<Iri> = kb.objects(&c, link).into_iter().filter(|x| targets.contains(x)).collect();
            match counterparts.first() {
                Some(ct) => {
                    matched.extend(counterparts.iter().cloned());
                    mirror_walk(kb, &c, ct, child, family, out);
                }
                None => out.push(Violation::new(
                    ViolationCode::StructureMismatch,
                    vec![c.clone()],
                    format!("no {} counterpart under {t} via {}", child.class().local_name(), link.local_name()),
                )),
            }
        }
        for orphan in targets.difference(&matched) {
            out.push(Violation::new(
                ViolationCode::StructureMismatch,
                vec![orphan.clone()],
                format!("not mirrored by any {} under {s}", child.class().local_name()),
            ));
        }
    }
}

/// Every procedure has one initial and one final state and its hasNext chain
/// is a simple path from the initial state through every state to a final one.
fn check_chains(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    for procedure in kb.instances_of(Class::Procedure) {
        let initials = kb.objects(&procedure, Prop::ProcedureConsistsOfInitialProcedureState);
        let finals = kb.objects(&procedure, Prop::ProcedureConsistsOfFinalProcedureState);
        let states = kb.objects_entailed(&procedure, Prop::ProcedureConsistsOfProcedureState);
        let with =
            |extra: &[Iri]| -> Vec<Iri> { std::iter::once(procedure.clone()).chain(extra.iter().cloned()).collect() };
        let mut no_final = false;
        match finals.len() {
            0 => {
                no_final = true;
                out.push(Violation::new(ViolationCode::ChainNoFinal, with(&[]), "procedure declares no final state"));
            }
            1 => {}
            _ => out.push(Violation::new(
                ViolationCode::ChainMultipleFinal,
                with(&finals),
                "procedure declares several final states",
            )),
        }
        let initial = match initials.len() {
            0 => {
                out.push(Violation::new(
                    ViolationCode::ChainNoInitial,
                    with(&[]),
                    "procedure declares no initial state",
                ));
                continue;
            }
            1 => initials[0].clone(),
            _ => {
                out.push(Violation::new(
                    ViolationCode::ChainMultipleInitial,
                    with(&initials),
                    "procedure declares several initial states",
                ));
                continue;
            }
        };
        let mut visited: BTreeSet<Iri> = BTreeSet::new();
        let mut current = initial;
        let mut broken = false;
        loop {
            visited.insert(current.clone());
            let next = kb.objects_entailed(&current, Prop::HasNext);
            match next.as_slice() {
                [] => break,
                [n] if visited.contains(n) => {
                    out.push(Violation::new(
                        ViolationCode::ChainCycle,
                        vec![current.clone(), n.clone()],
                        "hasNext chain revisits a state",
                    ));
                    broken = true;
                    break;
                }
                [n] => current = n.clone(),
                many => {
                    let subjects: Vec<Iri> = std::iter::once(current.clone()).chain(many.iter().cloned()).collect();
                    out.push(Violation::new(ViolationCode::ChainCycle, subjects, "state has several successors"));
                    broken = true;
                    break;
                }
            }
        }
        if !broken && !no_final && !finals.contains(&current) {
            no_final = true;
            out.push(Violation::new(
                ViolationCode::ChainNoFinal,
                with(&[current.clone()]),
                "chain from the initial state ends before a final state",
            ));
        }
        for state in states.iter().filter(|s| !visited.contains(*s)) {
            if no_final && finals.contains(state) {
                continue;
            }
            out.push(Violation::new(
                ViolationCode::ChainUnreachableState,
                vec![state.clone()],
                format!("not reachable from the initial state of {procedure}"),
            ));
        }
    }
    out
}

/// dependsOn must be acyclic.
fn check_dependencies(kb: &KnowledgeBase) -> Vec<Violation> {
    let edges = kb.edges(Prop::DependsOn);
    if edges.is_empty() {
        return Vec::new();
    }
    let mut succ: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    let mut pred: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for a in &edges {
        if let Some(o) = a.object.as_iri() {
            succ.entry(a.subject.clone()).or_default().insert(o.clone());
            pred.entry(o.clone()).or_default().insert(a.subject.clone());
            succ.entry(o.clone()).or_default();
            pred.entry(a.subject.clone()).or_default();
        }
    }
    // Peel sources and sinks; what remains lies on or between cycles.
    loop {
        let removable: Vec<Iri> = succ.keys().filter(|n| succ[*n].is_empty() || pred[*n].is_empty()).cloned().collect();
        if removable.is_empty() {
            break;
        }
        for n in removable {
            for s in succ.remove(&n).unwrap_or_default() {
                if let Some(p) = pred.get_mut(&s) {
                    p.remove(&n);
                }
            }
            for p in pred.remove(&n).unwrap_or_default() {
                if let Some(s) = succ.get_mut(&p) {
                    s.remove(&n);
                }
            }
        }
    }
    if succ.is_empty() {
        return Vec::new();
    }
    vec![Violation::new(ViolationCode::ChainCycle, succ.into_keys().collect(), "dependsOn relation is cyclic")]
}

fn check_states_and_events(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    for state in kb.instances_of(Class::ProcedureState) {
        if kb.objects(&state, Prop::IsDescribedBy).is_empty() {
            out.push(Violation::new(
                ViolationCode::StateWithoutPlan,
                vec![state],
                "procedure state is not described by a plan",
            ));
        }
    }
    for event in kb.instances_of(Class::Event) {
        if kb.objects(&event, Prop::EventDescribedByAction).is_empty() {
            out.push(Violation::new(
                ViolationCode::EventWithoutAction,
                vec![event],
                "event is not described by an action",
            ));
        }
    }
    out
}

/// Execution-layer records must trace back to what they realize.
fn check_executions(kb: &KnowledgeBase) -> Vec<Violation> {
    use crate::kg::LayerTag;
    let mut out = Vec::new();
    let executed = |iri: &Iri| kb.layer(iri) == Some(LayerTag::Execution);
    for exec in kb.instances_of(Class::Behaviour).into_iter().filter(|b| executed(b)) {
        if kb.objects(&exec, Prop::PlanExecutionDrawnBy).is_empty() {
            out.push(Violation::new(
                ViolationCode::ExecWithoutBehaviour,
                vec![exec.clone()],
                "plan execution is not drawn by a behaviour",
            ));
        }
        if kb.subjects(Prop::HasPlanExecution, &exec).is_empty() {
            out.push(Violation::new(
                ViolationCode::StructureMismatch,
                vec![exec.clone()],
                "plan execution is not linked from a plan by hasPlanExecution",
            ));
        }
        if kb.subjects(Prop::PerformsPlanExecution, &exec).is_empty() {
            out.push(Violation::new(
                ViolationCode::ExecWithoutBehaviour,
                vec![exec],
                "plan execution has no performing agent",
            ));
        }
    }
    for (class, prop) in [
        (Class::Process, Prop::ProcessDrawnBy),
        (Class::Procedure, Prop::ProcedureDrawnBy),
        (Class::ProcedureState, Prop::ProcedureStateDrawnBy),
    ] {
        for node in kb.instances_of(class).into_iter().filter(|n| executed(n)) {
            if kb.objects(&node, prop).is_empty() {
                out.push(Violation::new(
                    ViolationCode::StructureMismatch,
                    vec![node],
                    format!("realized {} lacks {}", class.local_name(), prop.local_name()),
                ));
            }
        }
    }
    out
}

/// Every performer must currently be able to exhibit the behaviour its plan
/// execution is drawn by.
fn check_capabilities(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    for a in kb.edges(Prop::PerformsPlanExecution) {
        let Some(exec) = a.object.as_iri() else { continue };
        for behaviour in kb.objects(exec, Prop::PlanExecutionDrawnBy) {
            if check_capability(kb, &a.subject, &behaviour).is_capable() {
                continue;
            }
            let deprecated = deprecated_providers(kb, &a.subject, &behaviour);
            if let Some(role) = deprecated.first() {
                out.push(Violation::new(
                    ViolationCode::RoleDeprecatedUse,
                    vec![a.subject.clone(), exec.clone()],
                    format!("{behaviour} is only provided through deprecated role {role}"),
                ));
            } else {
                out.push(Violation::new(
                    ViolationCode::PerformerLacksCapability,
                    vec![a.subject.clone(), exec.clone()],
                    format!("agent cannot exhibit {behaviour}"),
                ));
            }
        }
    }
    out
}
