//! Shape of behaviour-like subgraphs (behaviour → goals → tasks → task
//! elements): traversal, shape signatures, pairing of two equally shaped
//! graphs and layer-changing clones.

use std::collections::BTreeMap;

use crate::kg::{Class, ElementKind, Iri, KgError, KnowledgeBase, LayerTag, Prop, Term};

/// The element kind of a subgraph root, judged by class membership.
pub fn root_kind(kb: &KnowledgeBase, root: &Iri) -> Option<ElementKind> {
    if kb.is_instance(root, Class::Behaviour) {
        Some(ElementKind::Behaviour)
    } else if kb.is_instance(root, Class::TaskDescription) {
        Some(ElementKind::Task)
    } else {
        None
    }
}

/// A canonical description of the shape below `node`, independent of IRIs.
pub fn signature(kb: &KnowledgeBase, node: &Iri, kind: ElementKind) -> String {
    match kind {
        ElementKind::Behaviour | ElementKind::Goal => {
            let child = kind.children()[0];
            let mut sigs: Vec<String> =
                kb.objects(node, child.child_prop().expect("child")).iter().map(|c| signature(kb, c, child)).collect();
            sigs.sort();
            let tag = if kind == ElementKind::Behaviour { 'B' } else { 'G' };
            format!("{tag}[{}]", sigs.join(","))
        }
        ElementKind::Task => {
            let counts: Vec<String> = kind
                .children()
                .iter()
                .map(|k| kb.objects(node, k.child_prop().expect("child")).len().to_string())
                .collect();
            format!("T({})", counts.join("."))
        }
        other => format!("{other:?}"),
    }
}

/// The operator actions referred to below `node`, sorted; a tie-breaker
/// that lets equally shaped tasks pair up by what they do.
fn action_key(kb: &KnowledgeBase, node: &Iri, kind: ElementKind) -> String {
    let mut actions: Vec<String> = match kind {
        ElementKind::Task => kb
            .objects(node, Prop::HasTaskOperator)
            .iter()
            .flat_map(|op| kb.objects(op, Prop::RefersExactlyTo))
            .map(|a| a.as_str().to_string())
            .collect(),
        ElementKind::Goal => kb
            .objects(node, Prop::ConsistsOfTaskDescription)
            .iter()
            .map(|t| action_key(kb, t, ElementKind::Task))
            .collect(),
        _ => Vec::new(),
    };
    actions.sort();
    actions.join(" ")
}

/// Children of `node` of kind `child`, ordered by (signature, operator
/// actions, IRI).
pub fn ordered_children(kb: &KnowledgeBase, node: &Iri, child: ElementKind) -> Vec<Iri> {
    let Some(prop) = child.child_prop() else { return Vec::new() };
    let mut keyed: Vec<(String, String, Iri)> =
        kb.objects(node, prop).into_iter().map(|c| (signature(kb, &c, child), action_key(kb, &c, child), c)).collect();
    keyed.sort();
    keyed.into_iter().map(|(_, _, c)| c).collect()
}

/// Pre-order listing of every element below (and including) `root`.
pub fn elements(kb: &KnowledgeBase, root: &Iri, kind: ElementKind) -> Vec<(ElementKind, Iri)> {
    let mut out = Vec::new();
    walk(kb, root, kind, &mut out);
    out
}

fn walk(kb: &KnowledgeBase, node: &Iri, kind: ElementKind, out: &mut Vec<(ElementKind, Iri)>) {
    out.push((kind, node.clone()));
    for &child in kind.children() {
        for c in ordered_children(kb, node, child) {
            walk(kb, &c, child, out);
        }
    }
}

/// Matches the elements of two equally shaped subgraphs. Fails with a
/// description of the first difference.
pub fn pair(kb: &KnowledgeBase, a: &Iri, b: &Iri, kind: ElementKind) -> Result<Vec<(ElementKind, Iri, Iri)>, String> {
    let (sa, sb) = (signature(kb, a, kind), signature(kb, b, kind));
    if sa != sb {
        return Err(format!("{a} has shape {sa} but {b} has shape {sb}"));
    }
    let mut out = Vec::new();
    pair_walk(kb, a, b, kind, &mut out);
    Ok(out)
}

fn pair_walk(kb: &KnowledgeBase, a: &Iri, b: &Iri, kind: ElementKind, out: &mut Vec<(ElementKind, Iri, Iri)>) {
    out.push((kind, a.clone(), b.clone()));
    for &child in kind.children() {
        let ca = ordered_children(kb, a, child);
        let cb = ordered_children(kb, b, child);
        for (x, y) in ca.iter().zip(cb.iter()) {
            pair_walk(kb, x, y, child, out);
        }
    }
}

/// Entities an element `refersAsNewTo`; they belong to the element's layer.
pub fn new_referents(kb: &KnowledgeBase, element: &Iri) -> Vec<Iri> {
    kb.objects(element, Prop::RefersAsNewTo)
}

fn is_layer_class(iri: &Iri) -> bool {
    LayerTag::ALL.iter().any(|l| l.class().iri() == iri)
}

/// Copies the listed elements (and the entities they refer to as new) into
/// `layer` under fresh IRIs. `root_iri`, when given, names the clone of the
/// first element. Returns original → clone for every copied node.
pub(crate) fn clone_elements(
    kb: &mut KnowledgeBase,
    elements: &[(ElementKind, Iri)],
    layer: LayerTag,
    root_iri: Option<Iri>,
) -> Result<BTreeMap<Iri, Iri>, KgError> {
    let mut map: BTreeMap<Iri, Iri> = BTreeMap::new();
    let mut originals: Vec<Iri> = Vec::new();
    for (i, (_, orig)) in elements.iter().enumerate() {
        let copy = match (&root_iri, i) {
            (Some(r), 0) => r.clone(),
            _ => kb.fresh_iri(orig, layer.slug()),
        };
        copy_memberships(kb, orig, &copy, layer)?;
        map.insert(orig.clone(), copy);
        originals.push(orig.clone());
    }
    for (_, orig) in elements {
        for referent in new_referents(kb, orig) {
            if map.contains_key(&referent) {
                continue;
            }
            let copy = kb.fresh_iri(&referent, layer.slug());
            copy_memberships(kb, &referent, &copy, layer)?;
            map.insert(referent.clone(), copy);
            originals.push(referent);
        }
    }
    let child_props: Vec<&Iri> = ElementKind::ALL.iter().filter_map(|k| k.child_prop()).map(|p| p.iri()).collect();
    for orig in &originals {
        let copy = map[orig].clone();
        let outgoing: Vec<_> = kb.outgoing(orig).cloned().collect();
        for a in outgoing {
            let mapped_object = a.object.as_iri().and_then(|o| map.get(o)).cloned();
            let internal = child_props.contains(&&a.predicate)
                || &a.predicate == Prop::DependsOn.iri()
                || &a.predicate == Prop::RefersAsNewTo.iri();
            if internal {
                if let Some(o) = mapped_object {
                    kb.assert_property(&copy, &a.predicate, o)?;
                }
            } else if &a.predicate == Prop::RefersExactlyTo.iri() || &a.predicate == Prop::RefersAsInstanceOf.iri() {
                kb.assert_property(&copy, &a.predicate, a.object.clone())?;
            }
        }
    }
    Ok(map)
}

/// Copies non-layer memberships of `orig` to `copy` and tags it with `layer`.
pub(crate) fn copy_memberships(kb: &mut KnowledgeBase, orig: &Iri, copy: &Iri, layer: LayerTag) -> Result<(), KgError> {
    let memberships: Vec<Iri> = kb
        .entity(orig)
        .map(|e| {
            e.memberships.iter().filter(|m| !is_layer_class(m) && *m != Class::DeprecatedThing.iri()).cloned().collect()
        })
        .unwrap_or_default();
    kb.assert_class(copy, layer.class())?;
    for m in memberships {
        kb.assert_membership(copy, &m)?;
    }
    Ok(())
}

/// Copies the literal-valued outgoing edges of `orig` onto `copy`.
pub(crate) fn copy_literals(kb: &mut KnowledgeBase, orig: &Iri, copy: &Iri) -> Result<(), KgError> {
    let literals: Vec<_> = kb.outgoing(orig).filter(|a| matches!(a.object, Term::Literal(_))).cloned().collect();
    for a in literals {
        kb.assert_property(copy, &a.predicate, a.object)?;
    }
    Ok(())
}
