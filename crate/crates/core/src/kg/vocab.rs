//! The fixed OASIS vocabulary: classes, object-properties, the subproperty
//! hierarchy and the layer / class rules attached to each property.
//!
//! Properties marked `extension` are not named by the ontology itself; they
//! fill gaps in the families (task operator arguments) or connect nodes the
//! ontology relates without naming the property.

use std::collections::HashMap;
use std::fmt;
use std::sync::LazyLock;

use super::iri::{Iri, OASIS_NS};

/// The four mutually exclusive layers of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum LayerTag {
    Template,
    Behaviour,
    Planning,
    Execution,
}

impl LayerTag {
    pub const ALL: [LayerTag; 4] = [LayerTag::Template, LayerTag::Behaviour, LayerTag::Planning, LayerTag::Execution];

    pub fn class(self) -> Class {
        match self {
            LayerTag::Template => Class::TemplateThing,
            LayerTag::Behaviour => Class::BehaviourThing,
            LayerTag::Planning => Class::PlanningThing,
            LayerTag::Execution => Class::ExecutionThing,
        }
    }

    pub fn from_class(class: Class) -> Option<LayerTag> {
        LayerTag::ALL.into_iter().find(|l| l.class() == class)
    }

    /// Lower-case word used in minted IRIs.
    pub fn slug(self) -> &'static str {
        match self {
            LayerTag::Template => "template",
            LayerTag::Behaviour => "behaviour",
            LayerTag::Planning => "planning",
            LayerTag::Execution => "execution",
        }
    }
}

impl fmt::Display for LayerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

macro_rules! vocabulary_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $local:literal),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),* }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn local_name(self) -> &'static str {
                match self { $($name::$variant => $local),* }
            }
        }
    };
}

vocabulary_enum! {
    /// Vocabulary classes.
    Class {
        Agent => "Agent",
        Behaviour => "Behaviour",
        GoalDescription => "GoalDescription",
        TaskDescription => "TaskDescription",
        TaskOperator => "TaskOperator",
        TaskOperatorArgument => "TaskOperatorArgument",
        TaskObject => "TaskObject",
        TaskParameter => "TaskParameter",
        TaskInputParameter => "TaskInputParameter",
        TaskOutputParameter => "TaskOutputParameter",
        Action => "Action",
        Activity => "Activity",
        Process => "Process",
        Procedure => "Procedure",
        ProcedureState => "ProcedureState",
        TerminatingProcedureState => "TerminatingProcedureState",
        InitialProcedureState => "InitialProcedureState",
        FinalProcedureState => "FinalProcedureState",
        NonTerminatingProcedureState => "NonTerminatingProcedureState",
        Event => "Event",
        Role => "Role",
        RoleType => "RoleType",
        TemplateThing => "TemplateThing",
        BehaviourThing => "BehaviourThing",
        PlanningThing => "PlanningThing",
        ExecutionThing => "ExecutionThing",
        DeprecatedThing => "DeprecatedThing",
    }
}

vocabulary_enum! {
    /// Vocabulary object-properties (plus a few literal-valued extensions).
    Prop {
        HasBehaviour => "hasBehaviour",
        ConsistsOfGoalDescription => "consistsOfGoalDescription",
        ConsistsOfTaskDescription => "consistsOfTaskDescription",
        DependsOn => "dependsOn",
        RefersExactlyTo => "refersExactlyTo",
        RefersAsNewTo => "refersAsNewTo",
        RefersAsInstanceOf => "refersAsInstanceOf",
        HasTaskOperator => "hasTaskOperator",
        HasTaskOperatorArgument => "hasTaskOperatorArgument",
        HasTaskObject => "hasTaskObject",
        HasTaskInputParameter => "hasTaskInputParameter",
        HasTaskOutputParameter => "hasTaskOutputParameter",

        Overloads => "overloads",
        OverloadsBehaviour => "overloadsBehaviour",
        OverloadsGoalDescription => "overloadsGoalDescription",
        OverloadsTaskDescription => "overloadsTaskDescription",
        OverloadsTaskObject => "overloadsTaskObject",
        OverloadsTaskOperator => "overloadsTaskOperator",
        OverloadsTaskOperatorArgument => "overloadsTaskOperatorArgument",
        OverloadsTaskInputParameter => "overloadsTaskInputParameter",
        OverloadsTaskOutputParameter => "overloadsTaskOutputParameter",

        SubmittedTo => "submittedTo",
        PlanDescriptionSubmittedTo => "planDescriptionSubmittedTo",
        GoalDescriptionSubmittedTo => "goalDescriptionSubmittedTo",
        TaskDescriptionSubmittedTo => "taskDescriptionSubmittedTo",
        TaskObjectSubmittedTo => "taskObjectSubmittedTo",
        TaskOperatorSubmittedTo => "taskOperatorSubmittedTo",
        TaskOperatorArgumentSubmittedTo => "taskOperatorArgumentSubmittedTo",
        TaskInputParameterSubmittedTo => "taskInputParameterSubmittedTo",
        TaskOutputParameterSubmittedTo => "taskOutputParameterSubmittedTo",

        DrawnBy => "drawnBy",
        ExecutionDrawnBy => "executionDrawnBy",
        PlanExecutionDrawnBy => "planExecutionDrawnBy",
        GoalExecutionDrawnBy => "goalExecutionDrawnBy",
        TaskExecutionDrawnBy => "taskExecutionDrawnBy",
        TaskObjectDrawnBy => "taskObjectDrawnBy",
        TaskOperatorDrawnBy => "taskOperatorDrawnBy",
        TaskOperatorArgumentDrawnBy => "taskOperatorArgumentDrawnBy",
        TaskInputParameterDrawnBy => "taskInputParameterDrawnBy",
        TaskOutputParameterDrawnBy => "taskOutputParameterDrawnBy",
        ProcessDrawnBy => "processDrawnBy",
        ProcedureDrawnBy => "procedureDrawnBy",
        ProcedureStateDrawnBy => "procedureStateDrawnBy",

        HasExecution => "hasExecution",
        HasPlanExecution => "hasPlanExecution",
        HasGoalExecution => "hasGoalExecution",
        HasTaskExecution => "hasTaskExecution",
        HasTaskObjectExecution => "hasTaskObjectExecution",
        HasTaskOperatorExecution => "hasTaskOperatorExecution",
        HasTaskOperatorArgumentExecution => "hasTaskOperatorArgumentExecution",
        HasTaskInputParameterExecution => "hasTaskInputParameterExecution",
        HasTaskOutputParameterExecution => "hasTaskOutputParameterExecution",

        Performs => "performs",
        PerformsPlanExecution => "performsPlanExecution",

        ProcedureConsistsOfProcedureState => "procedureConsistsOfProcedureState",
        ProcedureConsistsOfTerminatingProcedureState => "procedureConsistsOfTerminatingProcedureState",
        ProcedureConsistsOfInitialProcedureState => "procedureConsistsOfInitialProcedureState",
        ProcedureConsistsOfFinalProcedureState => "procedureConsistsOfFinalProcedureState",
        ProcedureConsistsOfNonTerminatingProcedureState => "procedureConsistsOfNonTerminatingProcedureState",
        HasNext => "hasNext",
        HasNextNonTerminatingProcedureState => "hasNextNonTerminatingProcedureState",
        HasFinalProcedureState => "hasFinalProcedureState",
        HasNextProcedure => "hasNextProcedure",
        ConsistsOfProcedure => "consistsOfProcedure",
        IsDescribedBy => "isDescribedBy",
        TriggersEvent => "triggersEvent",
        EventDescribedByAction => "eventDescribedByAction",
        ProvidesBehaviour => "providesBehaviour",
        PlayRole => "playRole",
        HasRoleType => "hasRoleType",

        EventKind => "eventKind",
        EventDuration => "eventDuration",
        EventWindow => "eventWindow",
        PerformedAtStep => "performedAtStep",
    }
}

/// Which layers an end of a property may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerRule {
    Any,
    OneOf(&'static [LayerTag]),
}

impl LayerRule {
    pub fn admits(self, layer: Option<LayerTag>) -> bool {
        match self {
            LayerRule::Any => true,
            LayerRule::OneOf(allowed) => layer.is_some_and(|l| allowed.contains(&l)),
        }
    }
}

impl fmt::Display for LayerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerRule::Any => f.write_str("any"),
            LayerRule::OneOf(ls) => {
                let names: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
                f.write_str(&names.join("|"))
            }
        }
    }
}

/// The declaration of one property.
#[derive(Clone, Debug)]
pub struct PropertySpec {
    pub prop: Prop,
    pub iri: Iri,
    pub super_property: Option<Prop>,
    pub subject_layer: LayerRule,
    pub object_layer: LayerRule,
    /// Subject and object must carry the same (single) layer tag.
    pub same_layer: bool,
    pub subject_class: Option<Class>,
    pub object_class: Option<Class>,
    pub extension: bool,
    /// Object is a plain literal.
    pub literal: bool,
}

impl PropertySpec {
    pub fn layers_ok(&self, subject: Option<LayerTag>, object: Option<LayerTag>) -> bool {
        self.subject_layer.admits(subject)
            && self.object_layer.admits(object)
            && (!self.same_layer || (subject.is_some() && subject == object))
    }
}

/// Broad family a property belongs to, used to pick the violation code for
/// cross-layer edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Overloads,
    SubmittedTo,
    DrawnBy,
    HasExecution,
}

impl Family {
    pub fn root(self) -> Prop {
        match self {
            Family::Overloads => Prop::Overloads,
            Family::SubmittedTo => Prop::SubmittedTo,
            Family::DrawnBy => Prop::DrawnBy,
            Family::HasExecution => Prop::HasExecution,
        }
    }
}

const TEMPLATE: &[LayerTag] = &[LayerTag::Template];
const BEHAVIOUR: &[LayerTag] = &[LayerTag::Behaviour];
const PLANNING: &[LayerTag] = &[LayerTag::Planning];
const EXECUTION: &[LayerTag] = &[LayerTag::Execution];
const TEMPLATE_OR_BEHAVIOUR: &[LayerTag] = &[LayerTag::Template, LayerTag::Behaviour];
const PROCESS_LAYERS: &[LayerTag] = &[LayerTag::Planning, LayerTag::Execution];

struct Decl {
    prop: Prop,
    sup: Option<Prop>,
    subject: LayerRule,
    object: LayerRule,
    same: bool,
    classes: (Option<Class>, Option<Class>),
    extension: bool,
    literal: bool,
}

fn decl(prop: Prop, sup: Option<Prop>) -> Decl {
    Decl {
        prop,
        sup,
        subject: LayerRule::Any,
        object: LayerRule::Any,
        same: false,
        classes: (None, None),
        extension: false,
        literal: false,
    }
}

impl Decl {
    fn layers(mut self, subject: LayerRule, object: LayerRule) -> Self {
        self.subject = subject;
        self.object = object;
        self
    }
    fn same(mut self) -> Self {
        self.same = true;
        self
    }
    fn process_layer(self) -> Self {
        self.layers(LayerRule::OneOf(PROCESS_LAYERS), LayerRule::OneOf(PROCESS_LAYERS)).same()
    }
    fn classes(mut self, s: Class, o: Class) -> Self {
        self.classes = (Some(s), Some(o));
        self
    }
    fn ext(mut self) -> Self {
        self.extension = true;
        self
    }
    fn literal(mut self) -> Self {
        self.literal = true;
        self
    }
}

/// Element kinds of a behaviour-shaped graph and the classes they carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Behaviour,
    Goal,
    Task,
    Operator,
    Argument,
    Object,
    Input,
    Output,
}

impl ElementKind {
    pub const ALL: [ElementKind; 8] = [
        ElementKind::Behaviour,
        ElementKind::Goal,
        ElementKind::Task,
        ElementKind::Operator,
        ElementKind::Argument,
        ElementKind::Object,
        ElementKind::Input,
        ElementKind::Output,
    ];

    pub fn class(self) -> Class {
        match self {
            ElementKind::Behaviour => Class::Behaviour,
            ElementKind::Goal => Class::GoalDescription,
            ElementKind::Task => Class::TaskDescription,
            ElementKind::Operator => Class::TaskOperator,
            ElementKind::Argument => Class::TaskOperatorArgument,
            ElementKind::Object => Class::TaskObject,
            ElementKind::Input => Class::TaskInputParameter,
            ElementKind::Output => Class::TaskOutputParameter,
        }
    }

    /// The property linking a parent element to a child of this kind.
    pub fn child_prop(self) -> Option<Prop> {
        match self {
            ElementKind::Behaviour => None,
            ElementKind::Goal => Some(Prop::ConsistsOfGoalDescription),
            ElementKind::Task => Some(Prop::ConsistsOfTaskDescription),
            ElementKind::Operator => Some(Prop::HasTaskOperator),
            ElementKind::Argument => Some(Prop::HasTaskOperatorArgument),
            ElementKind::Object => Some(Prop::HasTaskObject),
            ElementKind::Input => Some(Prop::HasTaskInputParameter),
            ElementKind::Output => Some(Prop::HasTaskOutputParameter),
        }
    }

    /// Child kinds, in emission order.
    pub fn children(self) -> &'static [ElementKind] {
        match self {
            ElementKind::Behaviour => &[ElementKind::Goal],
            ElementKind::Goal => &[ElementKind::Task],
            ElementKind::Task => &[
                ElementKind::Operator,
                ElementKind::Argument,
                ElementKind::Object,
                ElementKind::Input,
                ElementKind::Output,
            ],
            _ => &[],
        }
    }

    /// The member of `family` linking elements of this kind.
    pub fn family_prop(self, family: Family) -> Prop {
        use ElementKind as K;
        use Prop as P;
        match (family, self) {
            (Family::Overloads, K::Behaviour) => P::OverloadsBehaviour,
            (Family::Overloads, K::Goal) => P::OverloadsGoalDescription,
            (Family::Overloads, K::Task) => P::OverloadsTaskDescription,
            (Family::Overloads, K::Operator) => P::OverloadsTaskOperator,
            (Family::Overloads, K::Argument) => P::OverloadsTaskOperatorArgument,
            (Family::Overloads, K::Object) => P::OverloadsTaskObject,
            (Family::Overloads, K::Input) => P::OverloadsTaskInputParameter,
            (Family::Overloads, K::Output) => P::OverloadsTaskOutputParameter,
            (Family::SubmittedTo, K::Behaviour) => P::PlanDescriptionSubmittedTo,
            (Family::SubmittedTo, K::Goal) => P::GoalDescriptionSubmittedTo,
            (Family::SubmittedTo, K::Task) => P::TaskDescriptionSubmittedTo,
            (Family::SubmittedTo, K::Operator) => P::TaskOperatorSubmittedTo,
            (Family::SubmittedTo, K::Argument) => P::TaskOperatorArgumentSubmittedTo,
            (Family::SubmittedTo, K::Object) => P::TaskObjectSubmittedTo,
            (Family::SubmittedTo, K::Input) => P::TaskInputParameterSubmittedTo,
            (Family::SubmittedTo, K::Output) => P::TaskOutputParameterSubmittedTo,
            (Family::DrawnBy, K::Behaviour) => P::PlanExecutionDrawnBy,
            (Family::DrawnBy, K::Goal) => P::GoalExecutionDrawnBy,
            (Family::DrawnBy, K::Task) => P::TaskExecutionDrawnBy,
            (Family::DrawnBy, K::Operator) => P::TaskOperatorDrawnBy,
            (Family::DrawnBy, K::Argument) => P::TaskOperatorArgumentDrawnBy,
            (Family::DrawnBy, K::Object) => P::TaskObjectDrawnBy,
            (Family::DrawnBy, K::Input) => P::TaskInputParameterDrawnBy,
            (Family::DrawnBy, K::Output) => P::TaskOutputParameterDrawnBy,
            (Family::HasExecution, K::Behaviour) => P::HasPlanExecution,
            (Family::HasExecution, K::Goal) => P::HasGoalExecution,
            (Family::HasExecution, K::Task) => P::HasTaskExecution,
            (Family::HasExecution, K::Operator) => P::HasTaskOperatorExecution,
            (Family::HasExecution, K::Argument) => P::HasTaskOperatorArgumentExecution,
            (Family::HasExecution, K::Object) => P::HasTaskObjectExecution,
            (Family::HasExecution, K::Input) => P::HasTaskInputParameterExecution,
            (Family::HasExecution, K::Output) => P::HasTaskOutputParameterExecution,
        }
    }
}

fn declarations() -> Vec<Decl> {
    use Class as C;
    use LayerRule::{Any, OneOf};
    use Prop as P;

    let mut out = vec![
        decl(P::HasBehaviour, None).layers(Any, OneOf(TEMPLATE_OR_BEHAVIOUR)).classes(C::Agent, C::Behaviour),
        decl(P::ConsistsOfGoalDescription, None).same().classes(C::Behaviour, C::GoalDescription),
        decl(P::ConsistsOfTaskDescription, None).same().classes(C::GoalDescription, C::TaskDescription),
        decl(P::DependsOn, None).same(),
        decl(P::RefersExactlyTo, None),
        decl(P::RefersAsNewTo, None).same(),
        decl(P::RefersAsInstanceOf, None),
        decl(P::HasTaskOperator, None).same().classes(C::TaskDescription, C::TaskOperator),
        decl(P::HasTaskOperatorArgument, None).same().classes(C::TaskDescription, C::TaskOperatorArgument),
        decl(P::HasTaskObject, None).same().classes(C::TaskDescription, C::TaskObject),
        decl(P::HasTaskInputParameter, None).same().classes(C::TaskDescription, C::TaskInputParameter),
        decl(P::HasTaskOutputParameter, None).same().classes(C::TaskDescription, C::TaskOutputParameter),
        decl(P::Overloads, None).layers(OneOf(BEHAVIOUR), OneOf(TEMPLATE)),
        decl(P::SubmittedTo, None).layers(OneOf(PLANNING), OneOf(BEHAVIOUR)),
        decl(P::DrawnBy, None).layers(OneOf(EXECUTION), Any),
        decl(P::ExecutionDrawnBy, Some(P::DrawnBy)).layers(OneOf(EXECUTION), OneOf(BEHAVIOUR)),
        decl(P::ProcessDrawnBy, Some(P::DrawnBy))
            .layers(OneOf(EXECUTION), OneOf(PLANNING))
            .classes(C::Process, C::Process),
        decl(P::ProcedureDrawnBy, Some(P::DrawnBy))
            .layers(OneOf(EXECUTION), OneOf(PLANNING))
            .classes(C::Procedure, C::Procedure),
        decl(P::ProcedureStateDrawnBy, Some(P::DrawnBy))
            .layers(OneOf(EXECUTION), OneOf(PLANNING))
            .classes(C::ProcedureState, C::ProcedureState)
            .ext(),
        decl(P::HasExecution, None).layers(OneOf(PLANNING), OneOf(EXECUTION)),
        decl(P::Performs, None).layers(Any, OneOf(EXECUTION)),
        decl(P::PerformsPlanExecution, Some(P::Performs)).layers(Any, OneOf(EXECUTION)).classes(C::Agent, C::Behaviour),
        decl(P::ProcedureConsistsOfProcedureState, None).process_layer().classes(C::Procedure, C::ProcedureState),
        decl(P::ProcedureConsistsOfTerminatingProcedureState, Some(P::ProcedureConsistsOfProcedureState))
            .process_layer()
            .classes(C::Procedure, C::TerminatingProcedureState),
        decl(P::ProcedureConsistsOfInitialProcedureState, Some(P::ProcedureConsistsOfTerminatingProcedureState))
            .process_layer()
            .classes(C::Procedure, C::InitialProcedureState),
        decl(P::ProcedureConsistsOfFinalProcedureState, Some(P::ProcedureConsistsOfTerminatingProcedureState))
            .process_layer()
            .classes(C::Procedure, C::FinalProcedureState),
        decl(P::ProcedureConsistsOfNonTerminatingProcedureState, Some(P::ProcedureConsistsOfProcedureState))
            .process_layer()
            .classes(C::Procedure, C::NonTerminatingProcedureState),
        decl(P::HasNext, None).process_layer().classes(C::ProcedureState, C::ProcedureState),
        decl(P::HasNextNonTerminatingProcedureState, Some(P::HasNext))
            .process_layer()
            .classes(C::ProcedureState, C::NonTerminatingProcedureState),
        decl(P::HasFinalProcedureState, Some(P::HasNext))
            .process_layer()
            .classes(C::ProcedureState, C::FinalProcedureState),
        decl(P::HasNextProcedure, None).process_layer().classes(C::Procedure, C::Procedure),
        decl(P::ConsistsOfProcedure, None).process_layer().classes(C::Process, C::Procedure).ext(),
        decl(P::IsDescribedBy, None).process_layer().classes(C::ProcedureState, C::Behaviour),
        decl(P::TriggersEvent, None).process_layer().classes(C::ProcedureState, C::Event),
        decl(P::EventDescribedByAction, None).same().classes(C::Event, C::TaskDescription).ext(),
        decl(P::ProvidesBehaviour, None).layers(Any, OneOf(BEHAVIOUR)).classes(C::Role, C::Behaviour),
        decl(P::PlayRole, None).classes(C::Agent, C::Role),
        decl(P::HasRoleType, None).classes(C::Role, C::RoleType).ext(),
        decl(P::EventKind, None).ext().literal(),
        decl(P::EventDuration, None).ext().literal(),
        decl(P::EventWindow, None).ext().literal(),
        decl(P::PerformedAtStep, None).ext().literal(),
    ];

    let families: [(Family, Option<Prop>, LayerRule, LayerRule); 4] = [
        (Family::Overloads, Some(P::Overloads), OneOf(BEHAVIOUR), OneOf(TEMPLATE)),
        (Family::SubmittedTo, Some(P::SubmittedTo), OneOf(PLANNING), OneOf(BEHAVIOUR)),
        (Family::DrawnBy, Some(P::ExecutionDrawnBy), OneOf(EXECUTION), OneOf(BEHAVIOUR)),
        (Family::HasExecution, Some(P::HasExecution), OneOf(PLANNING), OneOf(EXECUTION)),
    ];
    for (family, sup, subject, object) in families {
        for kind in ElementKind::ALL {
            let mut d = decl(kind.family_prop(family), sup).layers(subject, object).classes(kind.class(), kind.class());
            if kind == ElementKind::Argument {
                d = d.ext();
            }
            out.push(d);
        }
    }
    out
}

fn class_parent(class: Class) -> Option<Class> {
    match class {
        Class::TaskInputParameter | Class::TaskOutputParameter => Some(Class::TaskParameter),
        Class::Procedure => Some(Class::Activity),
        Class::TerminatingProcedureState | Class::NonTerminatingProcedureState => Some(Class::ProcedureState),
        Class::InitialProcedureState | Class::FinalProcedureState => Some(Class::TerminatingProcedureState),
        _ => None,
    }
}

/// The assembled vocabulary with precomputed closures.
pub struct Vocabulary {
    props: Vec<PropertySpec>,
    prop_by_iri: HashMap<Iri, Prop>,
    class_iris: Vec<Iri>,
    class_by_iri: HashMap<Iri, Class>,
    /// Reflexive-transitive subproperties, sorted.
    descendants: Vec<Vec<Prop>>,
    /// Reflexive-transitive superproperties, nearest first.
    ancestors: Vec<Vec<Prop>>,
    rdf_type: Iri,
}

static VOCABULARY: LazyLock<Vocabulary> = LazyLock::new(Vocabulary::build);

pub fn vocabulary() -> &'static Vocabulary {
    &VOCABULARY
}

impl Vocabulary {
    fn build() -> Self {
        let mut decls = declarations();
        decls.sort_by_key(|d| d.prop);
        assert_eq!(decls.len(), Prop::ALL.len(), "every property declared exactly once");
        let props: Vec<PropertySpec> = decls
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                assert_eq!(d.prop as usize, i);
                PropertySpec {
                    prop: d.prop,
                    iri: Iri::new(format!("{OASIS_NS}{}", d.prop.local_name())).expect("vocabulary iri"),
                    super_property: d.sup,
                    subject_layer: d.subject,
                    object_layer: d.object,
                    same_layer: d.same,
                    subject_class: d.classes.0,
                    object_class: d.classes.1,
                    extension: d.extension,
                    literal: d.literal,
                }
            })
            .collect();
        let prop_by_iri = props.iter().map(|p| (p.iri.clone(), p.prop)).collect();
        let class_iris: Vec<Iri> = Class::ALL
            .iter()
            .map(|c| Iri::new(format!("{OASIS_NS}{}", c.local_name())).expect("vocabulary iri"))
            .collect();
        let class_by_iri = class_iris.iter().cloned().zip(Class::ALL.iter().copied()).collect();

        let mut ancestors = Vec::with_capacity(props.len());
        for p in &props {
            let mut chain = vec![p.prop];
            let mut cur = p.super_property;
            while let Some(s) = cur {
                assert!(!chain.contains(&s), "subproperty cycle at {}", s.local_name());
                chain.push(s);
                cur = props[s as usize].super_property;
            }
            ancestors.push(chain);
        }
        let mut descendants = vec![Vec::new(); props.len()];
        for chain in &ancestors {
            for &a in chain {
                descendants[a as usize].push(chain[0]);
            }
        }
        for d in &mut descendants {
            d.sort();
        }
        Vocabulary {
            props,
            prop_by_iri,
            class_iris,
            class_by_iri,
            descendants,
            ancestors,
            rdf_type: Iri::new(super::iri::RDF_TYPE).expect("rdf:type"),
        }
    }

    pub fn spec(&self, prop: Prop) -> &PropertySpec {
        &self.props[prop as usize]
    }

    pub fn properties(&self) -> &[PropertySpec] {
        &self.props
    }

    pub fn prop(&self, iri: &Iri) -> Option<Prop> {
        self.prop_by_iri.get(iri).copied()
    }

    pub fn class(&self, iri: &Iri) -> Option<Class> {
        self.class_by_iri.get(iri).copied()
    }

    pub fn prop_iri(&self, prop: Prop) -> &Iri {
        &self.props[prop as usize].iri
    }

    pub fn class_iri(&self, class: Class) -> &Iri {
        &self.class_iris[class as usize]
    }

    pub fn rdf_type(&self) -> &Iri {
        &self.rdf_type
    }

    /// `prop` and all its transitive subproperties.
    pub fn descendants(&self, prop: Prop) -> &[Prop] {
        &self.descendants[prop as usize]
    }

    /// `prop` and all its transitive superproperties, nearest first.
    pub fn ancestors(&self, prop: Prop) -> &[Prop] {
        &self.ancestors[prop as usize]
    }

    pub fn is_subproperty(&self, sub: Prop, sup: Prop) -> bool {
        self.ancestors(sub).contains(&sup)
    }

    pub fn family_of(&self, prop: Prop) -> Option<Family> {
        let anc = self.ancestors(prop);
        [Family::Overloads, Family::SubmittedTo, Family::DrawnBy, Family::HasExecution]
            .into_iter()
            .find(|f| anc.contains(&f.root()))
    }

    /// `class` and its superclasses.
    pub fn class_ancestors(&self, class: Class) -> Vec<Class> {
        let mut out = vec![class];
        let mut cur = class_parent(class);
        while let Some(c) = cur {
            out.push(c);
            cur = class_parent(c);
        }
        out
    }

    pub fn class_parent(&self, class: Class) -> Option<Class> {
        class_parent(class)
    }

    /// Reflexive-transitive subclass test.
    pub fn is_subclass(&self, class: Class, sup: Class) -> bool {
        let mut cur = Some(class);
        while let Some(c) = cur {
            if c == sup {
                return true;
            }
            cur = class_parent(c);
        }
        false
    }

    /// Every (sub, super) pair of the transitive subproperty relation, excluding reflexive pairs.
    pub fn subproperty_pairs(&self) -> Vec<(Prop, Prop)> {
        let mut out = Vec::new();
        for p in Prop::ALL {
            for &a in &self.ancestors(*p)[1..] {
                out.push((*p, a));
            }
        }
        out
    }

    /// Markdown listing of every class and property IRI.
    pub fn render_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# Vocabulary\n\n");
        out.push_str("Generated by `oasis vocab`. Do not edit by hand.\n\n");
        out.push_str(&format!("Namespace: `{OASIS_NS}`\n\n"));
        out.push_str("## Classes\n\n| Class | IRI | Subclass of |\n|---|---|---|\n");
        for c in Class::ALL {
            let parent = class_parent(*c).map(|p| p.local_name()).unwrap_or("");
            out.push_str(&format!("| {} | `{}` | {} |\n", c.local_name(), self.class_iri(*c), parent));
        }
        out.push_str(
            "\n## Properties\n\n| Property | IRI | Subproperty of | Subject layer | Object layer | Same layer | Domain | Range | Extension |\n|---|---|---|---|---|---|---|---|---|\n",
        );
        for p in &self.props {
            let range = if p.literal {
                "literal".to_string()
            } else {
                p.object_class.map(|c| c.local_name().to_string()).unwrap_or_default()
            };
            out.push_str(&format!(
                "| {} | `{}` | {} | {} | {} | {} | {} | {} | {} |\n",
                p.prop.local_name(),
                p.iri,
                p.super_property.map(|s| s.local_name()).unwrap_or(""),
                p.subject_layer,
                p.object_layer,
                if p.same_layer { "yes" } else { "" },
                p.subject_class.map(|c| c.local_name()).unwrap_or(""),
                range,
                if p.extension { "yes" } else { "" },
            ));
        }
        out
    }
}

impl Prop {
    pub fn iri(self) -> &'static Iri {
        vocabulary().prop_iri(self)
    }
}

impl Class {
    pub fn iri(self) -> &'static Iri {
        vocabulary().class_iri(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hierarchy_is_acyclic_and_complete() {
        let v = vocabulary();
        for p in Prop::ALL {
            if let Some(s) = v.spec(*p).super_property {
                assert!(v.descendants(s).contains(p));
            }
        }
        assert!(v.subproperty_pairs().len() >= 35);
    }

    #[test]
    fn drawn_by_family_reaches_root() {
        let v = vocabulary();
        assert!(v.is_subproperty(Prop::PlanExecutionDrawnBy, Prop::DrawnBy));
        assert!(v.is_subproperty(Prop::PlanExecutionDrawnBy, Prop::ExecutionDrawnBy));
        assert!(v.is_subproperty(Prop::ProcessDrawnBy, Prop::DrawnBy));
        assert!(!v.is_subproperty(Prop::ProcessDrawnBy, Prop::ExecutionDrawnBy));
        assert!(
            v.is_subproperty(Prop::ProcedureConsistsOfInitialProcedureState, Prop::ProcedureConsistsOfProcedureState)
        );
        assert_eq!(v.family_of(Prop::TaskObjectDrawnBy), Some(Family::DrawnBy));
        assert_eq!(v.family_of(Prop::HasNext), None);
    }

    #[test]
    fn argument_members_are_flagged_extensions() {
        let v = vocabulary();
        for p in [
            Prop::OverloadsTaskOperatorArgument,
            Prop::TaskOperatorArgumentSubmittedTo,
            Prop::TaskOperatorArgumentDrawnBy,
            Prop::HasTaskOperatorArgumentExecution,
        ] {
            assert!(v.spec(p).extension, "{}", p.local_name());
        }
        assert!(!v.spec(Prop::OverloadsTaskOperator).extension);
    }

    #[test]
    fn class_closure() {
        let v = vocabulary();
        assert_eq!(
            v.class_ancestors(Class::InitialProcedureState),
            vec![Class::InitialProcedureState, Class::TerminatingProcedureState, Class::ProcedureState]
        );
        assert_eq!(v.class(Class::Role.iri()), Some(Class::Role));
    }
}
