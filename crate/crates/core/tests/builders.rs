//! Builder invariants: soundness over random documents, template/plan
//! isomorphism, overload bijections, simple procedure chains and the
//! lock-request template shape.

mod common;

use std::collections::BTreeSet;

use oasis_core::gen::{random_kb, Generator};
use oasis_core::kg::{vocabulary, Class, ElementKind, Family, LayerTag, Pattern, Prop};
use oasis_core::model::structure::elements;
use oasis_core::model::{build_plan, build_process, build_template, derive_behaviour, BuildError};
use oasis_core::scenario::{case_study_document, request_lock_template_spec, CaseStudy};
use oasis_core::validate::{render, validate};
use oasis_core::{Iri, KnowledgeBase, Term};
use proptest::prelude::*;

#[test]
fn builder_output_validates_clean_for_200_random_documents() {
    for seed in 0..200 {
        let kb = random_kb(seed, false).unwrap();
        let found = validate(&kb);
        assert!(found.is_empty(), "seed {seed}:\n{}", render(&found));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn template_and_plan_from_one_spec_are_isomorphic(seed in any::<u64>()) {
        let spec = Generator::new(seed).behaviour_spec();
        let mut tkb = KnowledgeBase::new();
        let template = build_template(&mut tkb, &spec).unwrap();
        let mut pkb = KnowledgeBase::new();
        let plan = build_plan(&mut pkb, &spec).unwrap();
        let a = common::shape(&tkb, &template, &common::skip_families);
        let b = common::shape(&pkb, &plan, &common::skip_families);
        prop_assert!(common::isomorphism(&a, &b).is_some(), "{spec:?}");
        prop_assert_eq!(tkb.layer(&template), Some(LayerTag::Template));
        prop_assert_eq!(pkb.layer(&plan), Some(LayerTag::Planning));

        // Also when both live in one graph and names collide.
        let plan2 = build_plan(&mut tkb, &spec).unwrap();
        let c = common::shape(&tkb, &plan2, &common::skip_families);
        prop_assert!(common::isomorphism(&a, &c).is_some());
        prop_assert!(validate(&tkb).is_empty());
    }

    #[test]
    fn derived_behaviour_overloads_its_template_one_to_one(seed in any::<u64>()) {
        let spec = Generator::new(seed).behaviour_spec();
        let mut kb = KnowledgeBase::new();
        let template = build_template(&mut kb, &spec).unwrap();
        let agent = kb.mint_iri("ex", "agent").unwrap();
        kb.assert_class(&agent, Class::Agent).unwrap();
        let derived = derive_behaviour(&mut kb, &template, &agent).unwrap();

        let originals: BTreeSet<Iri> = elements(&kb, &template, ElementKind::Behaviour).into_iter().map(|(_, i)| i).collect();
        let clones = elements(&kb, &derived, ElementKind::Behaviour);
        prop_assert_eq!(clones.len(), originals.len());
        let mut images = BTreeSet::new();
        for (kind, clone) in &clones {
            let targets = kb.objects(clone, kind.family_prop(Family::Overloads));
            prop_assert_eq!(targets.len(), 1, "{} overloads {:?}", clone, targets);
            prop_assert!(originals.contains(&targets[0]));
            prop_assert!(images.insert(targets[0].clone()), "two clones overload {}", targets[0]);
            prop_assert_eq!(kb.layer(clone), Some(LayerTag::Behaviour));
        }
        prop_assert_eq!(&images, &originals);
        let overloads = kb.query(&Pattern::new(None, Some(Prop::Overloads.iri()), None), true);
        prop_assert_eq!(overloads.len(), originals.len());
        prop_assert!(kb.has(&agent, Prop::HasBehaviour, &derived));
        prop_assert!(validate(&kb).is_empty());
    }

    #[test]
    fn procedure_chains_are_simple_paths(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let plans = (0..4).map(|_| g.behaviour_spec()).collect();
        let spec = g.process_spec(plans);
        let mut kb = KnowledgeBase::new();
        let process = build_process(&mut kb, &spec).unwrap();
        let procedures = kb.objects(&process, Prop::ConsistsOfProcedure);
        prop_assert_eq!(procedures.len(), spec.procedures.len());
        let mut total = 0;
        for procedure in &procedures {
            let members: BTreeSet<Iri> = kb.objects_entailed(procedure, Prop::ProcedureConsistsOfProcedureState).into_iter().collect();
            let initial = kb.objects(procedure, Prop::ProcedureConsistsOfInitialProcedureState);
            prop_assert_eq!(initial.len(), 1);
            let mut visited = BTreeSet::new();
            let mut cur = Some(initial[0].clone());
            while let Some(state) = cur {
                prop_assert!(visited.insert(state.clone()), "{} visited twice", state);
                let next: Vec<Iri> = [Prop::HasNextNonTerminatingProcedureState, Prop::HasFinalProcedureState]
                    .iter()
                    .flat_map(|p| kb.objects(&state, *p))
                    .collect();
                prop_assert!(next.len() <= 1, "{} has {} successors", state, next.len());
                cur = next.into_iter().next();
            }
            prop_assert_eq!(&visited, &members);
            total += visited.len();
        }
        prop_assert_eq!(total, spec.procedures.iter().map(|p| p.states.len()).sum::<usize>());
        prop_assert!(validate(&kb).is_empty());
    }
}

fn ex(local: &str) -> Iri {
    Iri::new(format!("http://example.org/{local}")).unwrap()
}

#[test]
fn lock_request_template_has_the_four_task_elements() {
    let mut kb = KnowledgeBase::new();
    let root = build_template(&mut kb, &request_lock_template_spec()).unwrap();
    let task = ex("request_lock_task");
    assert!(kb.is_instance(&task, Class::TaskDescription));
    assert!(kb.objects_entailed(&root, Prop::ConsistsOfGoalDescription).iter().any(|g| kb.has(
        g,
        Prop::ConsistsOfTaskDescription,
        &task
    )));

    let operator = ex("request_lock_task_operator");
    let argument = ex("request_lock_task_operator_argument");
    let object = ex("request_lock_task_object_template");
    let output = ex("request_lock_task_output_template");
    assert!(kb.has(&task, Prop::HasTaskOperator, &operator));
    assert!(kb.has(&task, Prop::HasTaskOperatorArgument, &argument));
    assert!(kb.has(&task, Prop::HasTaskObject, &object));
    assert!(kb.has(&task, Prop::HasTaskOutputParameter, &output));
    assert!(kb.has(&operator, Prop::RefersExactlyTo, &ex("request")));
    assert!(kb.has(&argument, Prop::RefersExactlyTo, &ex("lock")));
    let lock = kb.object(&object, Prop::RefersAsNewTo).expect("object refers to a new lock");
    assert!(kb.has(&lock, Prop::RefersAsInstanceOf, &ex("Lock")));
    for node in [&root, &task, &operator, &argument, &object, &output] {
        assert_eq!(kb.layer(node), Some(LayerTag::Template), "{node}");
    }
    assert!(validate(&kb).is_empty());
}

#[test]
fn deriving_from_the_lock_template_creates_seven_overload_edges() {
    let mut kb = KnowledgeBase::new();
    let template = build_template(&mut kb, &request_lock_template_spec()).unwrap();
    let agent = ex("alice");
    kb.assert_class(&agent, Class::Agent).unwrap();
    derive_behaviour(&mut kb, &template, &agent).unwrap();
    let edges = kb.query(&Pattern::new(None, Some(Prop::Overloads.iri()), None), true);
    assert_eq!(edges.len(), 7);
    let used: BTreeSet<&Iri> = edges.iter().map(|a| &a.predicate).collect();
    assert_eq!(used.len(), 7, "one edge per overloads subproperty");
}

#[test]
fn case_study_document_builds_a_clean_graph() {
    let case = CaseStudy::build(&case_study_document()).unwrap();
    assert!(validate(&case.kb).is_empty(), "{}", render(&validate(&case.kb)));
    let agents = case
        .kb
        .query(&Pattern::new(None, Some(vocabulary().rdf_type()), Some(Term::Iri(Class::Agent.iri().clone()))), false);
    assert_eq!(agents.iter().map(|a| &a.subject).collect::<Vec<_>>(), vec![&ex("alice")]);
}

#[test]
fn deriving_from_a_non_template_is_rejected() {
    let mut kb = KnowledgeBase::new();
    let plan = build_plan(&mut kb, &request_lock_template_spec()).unwrap();
    let agent = ex("alice");
    kb.assert_class(&agent, Class::Agent).unwrap();
    assert!(matches!(derive_behaviour(&mut kb, &plan, &agent), Err(BuildError::NotATemplate(_))));
}

#[test]
fn isomorphism_oracle_rejects_different_shapes() {
    let spec = request_lock_template_spec();
    let mut changed = spec.clone();
    changed.goals[0].tasks[0].inputs.push(oasis_core::model::Reference::exact("ex:extra"));
    let mut akb = KnowledgeBase::new();
    let a = build_template(&mut akb, &spec).unwrap();
    let mut bkb = KnowledgeBase::new();
    let b = build_plan(&mut bkb, &changed).unwrap();
    let sa = common::shape(&akb, &a, &common::skip_families);
    let sb = common::shape(&bkb, &b, &common::skip_families);
    assert!(common::isomorphism(&sa, &sb).is_none());

    // Same size, different referent.
    let mut renamed = spec.clone();
    renamed.goals[0].tasks[0].operator_action = oasis_core::model::Reference::exact("ex:demand");
    let mut ckb = KnowledgeBase::new();
    let c = build_plan(&mut ckb, &renamed).unwrap();
    let sc = common::shape(&ckb, &c, &common::skip_families);
    assert_eq!(sa.len(), sc.len());
    assert!(common::isomorphism(&sa, &sc).is_none());
}
