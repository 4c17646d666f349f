//! Test-only oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use oasis_core::kg::{vocabulary, KnowledgeBase, LayerTag, Prop};
use oasis_core::Iri;

/// A rooted, labelled, directed subgraph.
#[derive(Clone, Debug)]
pub struct Shape {
    /// Nodes in discovery order from the root.
    pub order: Vec<Iri>,
    pub labels: BTreeMap<Iri, String>,
    pub edges: BTreeSet<(Iri, Iri, Iri)>,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.order.len()
    }
}

/// Layered nodes are labelled by their non-layer memberships; anything else
/// must map to itself and is labelled by its IRI.
fn label(kb: &KnowledgeBase, node: &Iri) -> String {
    match kb.entity(node) {
        Some(e) if e.layer.is_some() => {
            let layers: Vec<&Iri> = LayerTag::ALL.iter().map(|l| l.class().iri()).collect();
            let kept: Vec<&str> = e.memberships.iter().filter(|m| !layers.contains(m)).map(|m| m.as_str()).collect();
            kept.join(",")
        }
        _ => format!("={node}"),
    }
}

/// Everything reachable from `root` over vocabulary predicates not rejected
/// by `skip`.
pub fn shape(kb: &KnowledgeBase, root: &Iri, skip: &dyn Fn(Prop) -> bool) -> Shape {
    let mut order = vec![root.clone()];
    let mut seen: BTreeSet<Iri> = order.iter().cloned().collect();
    let mut edges = BTreeSet::new();
    let mut i = 0;
    while i < order.len() {
        let node = order[i].clone();
        i += 1;
        let out: Vec<_> = kb.outgoing(&node).cloned().collect();
        for a in out {
            let (Some(o), Some(p)) = (a.object.as_iri(), vocabulary().prop(&a.predicate)) else { continue };
            if skip(p) {
                continue;
            }
            edges.insert((node.clone(), a.predicate.clone(), o.clone()));
            if seen.insert(o.clone()) {
                order.push(o.clone());
            }
        }
    }
    let labels = order.iter().map(|n| (n.clone(), label(kb, n))).collect();
    Shape { order, labels, edges }
}

/// Skips the cross-layer link families.
pub fn skip_families(p: Prop) -> bool {
    vocabulary().family_of(p).is_some()
}

/// Brute-force search for a label- and edge-preserving bijection.
pub fn isomorphism(a: &Shape, b: &Shape) -> Option<BTreeMap<Iri, Iri>> {
    if a.len() != b.len() || a.edges.len() != b.edges.len() {
        return None;
    }
    let mut la: Vec<&String> = a.labels.values().collect();
    let mut lb: Vec<&String> = b.labels.values().collect();
    la.sort();
    lb.sort();
    if la != lb {
        return None;
    }
    let mut map = BTreeMap::new();
    let mut used = BTreeSet::new();
    search(a, b, 0, &mut map, &mut used).then_some(map)
}

fn consistent(a: &Shape, b: &Shape, x: &Iri, y: &Iri, map: &BTreeMap<Iri, Iri>) -> bool {
    let image = |n: &Iri| if n == x { Some(y) } else { map.get(n) };
    a.edges.iter().filter(|(s, _, o)| s == x || o == x).all(|(s, p, o)| match (image(s), image(o)) {
        (Some(s2), Some(o2)) => b.edges.contains(&(s2.clone(), p.clone(), o2.clone())),
        _ => true,
    })
}

fn search(a: &Shape, b: &Shape, i: usize, map: &mut BTreeMap<Iri, Iri>, used: &mut BTreeSet<Iri>) -> bool {
    let Some(x) = a.order.get(i) else {
        // Injective and edge-preserving with equal edge counts: a bijection on edges.
        return a.edges.iter().all(|(s, p, o)| b.edges.contains(&(map[s].clone(), p.clone(), map[o].clone())));
    };
    for y in &b.order {
        if used.contains(y) || a.labels[x] != b.labels[y] || !consistent(a, b, x, y, map) {
            continue;
        }
        map.insert(x.clone(), y.clone());
        used.insert(y.clone());
        if search(a, b, i + 1, map, used) {
            return true;
        }
        map.remove(x);
        used.remove(y);
    }
    false
}

/// Independent transitive closure of the declared super-property links.
pub fn super_closure(p: Prop) -> Vec<Prop> {
    let mut out = Vec::new();
    let mut cur = vocabulary().spec(p).super_property;
    while let Some(s) = cur {
        out.push(s);
        cur = vocabulary().spec(s).super_property;
    }
    out
}

/// Every (sub, super) pair, transitively.
pub fn subproperty_pairs() -> BTreeSet<(Prop, Prop)> {
    Prop::ALL.iter().flat_map(|&p| super_closure(p).into_iter().map(move |s| (p, s))).collect()
}
