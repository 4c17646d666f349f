//! Validator behaviour beyond the mutation corpus: purity, parallel and
//! sequential agreement, mirror checks, capability gating and rendering.

use oasis_core::gen::{random_kb, Generator};
use oasis_core::kg::{Class, ElementKind, Family, LayerTag, Prop};
use oasis_core::model::structure::elements;
use oasis_core::model::{
    build_template, deprecate_role, derive_behaviour, grant_role, BehaviourSpec, GoalSpec, Reference, TaskSpec,
};
use oasis_core::rdfio::export_ntriples;
use oasis_core::scenario::{case_study_document, mutations, CaseStudy, Corpus, BEHAVIOURS};
use oasis_core::validate::{
    check_capability, check_mirror, render, validate, validate_with, CapabilitySource, ValidateError, Violation,
    ViolationCode,
};
use oasis_core::{Assertion, ExecMode, Iri, KnowledgeBase};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ex(local: &str) -> Iri {
    Iri::new(format!("http://example.org/{local}")).unwrap()
}

#[test]
fn validation_is_pure_and_idempotent_on_mutated_graphs() {
    let corpus = Corpus::build().unwrap();
    for m in mutations(&corpus) {
        let mut kb = corpus.kb().clone();
        m.apply(&mut kb);
        let before = export_ntriples(&kb);
        let first = validate(&kb);
        let second = validate(&kb);
        assert_eq!(first, second, "{}", m.id);
        assert_eq!(export_ntriples(&kb), before, "{} changed the graph", m.id);
        assert_eq!(validate_with(&kb, ExecMode::Sequential), first, "{}", m.id);
        let mut sorted = first.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, first, "findings are sorted and unique");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequential_and_parallel_validation_agree(seed in any::<u64>(), execute in any::<bool>()) {
        let kb = random_kb(seed, execute).unwrap();
        prop_assert_eq!(validate_with(&kb, ExecMode::Sequential), validate_with(&kb, ExecMode::Parallel));
    }

    /// Once a role is deprecated, no later graph state lets it justify a
    /// capability.
    #[test]
    fn deprecation_is_monotone(seed in any::<u64>(), extra in 0..4usize) {
        let case = Generator::new(seed).case();
        let mut kb = KnowledgeBase::new();
        case.document.apply(&mut kb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let roles = kb.instances_of(Class::Role);
        prop_assume!(!roles.is_empty());
        let role = roles.choose(&mut rng).unwrap().clone();
        deprecate_role(&mut kb, &role).unwrap();

        let agents = kb.instances_of(Class::Agent);
        let behaviours: Vec<Iri> =
            kb.instances_of(Class::Behaviour).into_iter().filter(|b| kb.layer(b) == Some(LayerTag::Behaviour)).collect();
        let never_via = |kb: &KnowledgeBase| {
            agents.iter().all(|a| behaviours.iter().all(|b| check_capability(kb, a, b) != CapabilitySource::ViaRole(role.clone())))
        };
        prop_assert!(never_via(&kb));
        for i in 0..extra {
            // Later changes: new roles, repeated deprecation, renewed grants.
            let agent = agents.choose(&mut rng).unwrap().clone();
            let granted: Vec<Iri> = behaviours.choose_multiple(&mut rng, 2).cloned().collect();
            grant_role(&mut kb, &agent, &ex(&format!("laterType{i}")), &granted).unwrap();
            deprecate_role(&mut kb, &role).unwrap();
            for b in &granted {
                kb.assert_edge(&role, Prop::ProvidesBehaviour, b).unwrap();
            }
            prop_assert!(never_via(&kb));
        }
    }
}

fn two_task_template() -> BehaviourSpec {
    let task = |name: &str, action: &str| {
        TaskSpec::new(name, Reference::exact(action))
            .object(Reference::new_instance_of("ex:thing", &["ex:Thing"]))
            .input(Reference::exact("ex:a"))
            .input(Reference::exact("ex:b"))
    };
    BehaviourSpec::new(
        "pair_behaviour",
        vec![
            GoalSpec::new("first_goal", vec![task("push", "ex:push"), task("pull", "ex:pull")]),
            GoalSpec::new("second_goal", vec![task("poke", "ex:poke")]),
        ],
    )
}

fn derived_graph() -> (KnowledgeBase, Iri, Iri) {
    let mut kb = KnowledgeBase::new();
    let template = build_template(&mut kb, &two_task_template()).unwrap();
    let agent = ex("agent");
    kb.assert_class(&agent, Class::Agent).unwrap();
    let derived = derive_behaviour(&mut kb, &template, &agent).unwrap();
    (kb, derived, template)
}

#[test]
fn mirror_of_a_derived_behaviour_is_clean_in_both_argument_orders() {
    let (kb, derived, template) = derived_graph();
    assert_eq!(check_mirror(&kb, &derived, &template, Family::Overloads).unwrap(), vec![]);
    assert_eq!(check_mirror(&kb, &template, &derived, Family::Overloads).unwrap(), vec![]);
    assert!(validate(&kb).is_empty());
}

#[test]
fn mirror_check_ignores_insertion_order() {
    let (kb, derived, template) = derived_graph();
    let mut assertions: Vec<Assertion> = kb.assertions().cloned().collect();
    for seed in 0..10 {
        assertions.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut shuffled = KnowledgeBase::new();
        for a in &assertions {
            shuffled.insert_raw(a.clone());
        }
        assert_eq!(check_mirror(&shuffled, &derived, &template, Family::Overloads).unwrap(), vec![]);
        assert_eq!(validate(&shuffled), validate(&kb));
    }
}

#[test]
fn orphan_child_in_the_clone_is_a_structure_mismatch() {
    let (mut kb, derived, template) = derived_graph();
    let goal = kb.objects(&derived, Prop::ConsistsOfGoalDescription)[0].clone();
    let orphan = ex("orphan_task");
    kb.assert_class(&orphan, Class::TaskDescription).unwrap();
    kb.assert_class(&orphan, Class::BehaviourThing).unwrap();
    kb.assert_edge(&goal, Prop::ConsistsOfTaskDescription, &orphan).unwrap();
    let found = check_mirror(&kb, &derived, &template, Family::Overloads).unwrap();
    assert_eq!(found.len(), 1, "{}", render(&found));
    assert_eq!(found[0].code, ViolationCode::StructureMismatch);
    assert_eq!(found[0].subjects, vec![orphan]);
}

#[test]
fn missing_counterpart_in_the_template_direction_is_reported() {
    let (mut kb, derived, template) = derived_graph();
    let (_, input) =
        elements(&kb, &derived, ElementKind::Behaviour).into_iter().find(|(k, _)| *k == ElementKind::Input).unwrap();
    let original = kb.object(&input, ElementKind::Input.family_prop(Family::Overloads)).unwrap();
    kb.retract(&Assertion::new(
        input.clone(),
        ElementKind::Input.family_prop(Family::Overloads).iri().clone(),
        original.clone(),
    ));
    let found = check_mirror(&kb, &derived, &template, Family::Overloads).unwrap();
    let subjects: Vec<&Iri> = found.iter().flat_map(|v| &v.subjects).collect();
    assert!(found.iter().all(|v| v.code == ViolationCode::StructureMismatch));
    assert!(subjects.contains(&&input) && subjects.contains(&&original), "{}", render(&found));
}

#[test]
fn mirror_check_rejects_unknown_roots() {
    let (kb, derived, _) = derived_graph();
    assert_eq!(
        check_mirror(&kb, &derived, &ex("nowhere"), Family::Overloads),
        Err(ValidateError::DanglingRoot(ex("nowhere")))
    );
}

#[test]
fn capability_sources_follow_ownership_roles_and_deprecation() {
    let mut case = CaseStudy::build(&case_study_document()).unwrap();
    let alice = ex("alice");
    let role = case.kb.object(&alice, Prop::PlayRole).unwrap();
    for b in BEHAVIOURS {
        assert_eq!(check_capability(&case.kb, &alice, &case.iri(b)), CapabilitySource::ViaRole(role.clone()));
    }
    let owned = case.iri(BEHAVIOURS[1]);
    case.kb.assert_edge(&alice, Prop::HasBehaviour, &owned).unwrap();
    assert_eq!(check_capability(&case.kb, &alice, &owned), CapabilitySource::Intrinsic);
    deprecate_role(&mut case.kb, &role).unwrap();
    assert_eq!(check_capability(&case.kb, &alice, &owned), CapabilitySource::Intrinsic);
    assert_eq!(check_capability(&case.kb, &alice, &case.iri(BEHAVIOURS[0])), CapabilitySource::None);
    assert_eq!(check_capability(&case.kb, &ex("bob"), &owned), CapabilitySource::None);
}

#[test]
fn violations_render_as_tab_separated_lines() {
    let v = Violation::new(ViolationCode::ChainNoFinal, vec![ex("a"), ex("b")], "no\tfinal\nstate");
    assert_eq!(v.to_string(), "CHAIN_NO_FINAL\thttp://example.org/a,http://example.org/b\tno final state");
    let w = Violation::new(ViolationCode::LayerMix, vec![ex("c")], "two layers");
    assert_eq!(render(&[v, w]), "CHAIN_NO_FINAL\thttp://example.org/a,http://example.org/b\tno final state\nLAYER_MIX\thttp://example.org/c\ttwo layers\n");
    assert_eq!(render(&[]), "");
}

#[test]
fn violation_codes_parse_back_and_sort_by_name() {
    let names: Vec<&str> = ViolationCode::ALL.iter().map(|c| c.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for &code in ViolationCode::ALL {
        assert_eq!(ViolationCode::parse(code.as_str()), Some(code));
    }
    assert_eq!(ViolationCode::parse("NOT_A_CODE"), None);
}

#[test]
fn empty_graph_is_valid() {
    assert!(validate(&KnowledgeBase::new()).is_empty());
}
