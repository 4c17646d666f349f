use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::iri::{Iri, PrefixTable};
use super::vocab::{vocabulary, Class, LayerTag, Prop};
use super::{Assertion, KgError, Term};

/// When layer rules of a property are enforced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AssertionMode {
    /// Accept everything; the validator reports layer problems.
    #[default]
    Lax,
    /// Reject edges violating the property's layer rules at assertion time.
    Strict,
}

/// A node with its class memberships.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityRecord {
    pub iri: Iri,
    pub memberships: BTreeSet<Iri>,
    /// The layer tag, when exactly one is present.
    pub layer: Option<LayerTag>,
    pub deprecated: bool,
}

impl EntityRecord {
    fn new(iri: Iri) -> Self {
        EntityRecord { iri, memberships: BTreeSet::new(), layer: None, deprecated: false }
    }

    /// All layer tags carried, normally zero or one.
    pub fn layers(&self) -> Vec<LayerTag> {
        LayerTag::ALL.into_iter().filter(|l| self.memberships.contains(l.class().iri())).collect()
    }

    pub fn has_layer_mix(&self) -> bool {
        self.layers().len() > 1
    }

    fn recompute(&mut self) {
        let layers = self.layers();
        self.layer = if layers.len() == 1 { Some(layers[0]) } else { None };
        self.deprecated = self.memberships.contains(Class::DeprecatedThing.iri());
    }
}

/// A triple pattern; `None` positions are wildcards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pattern {
    pub subject: Option<Iri>,
    pub predicate: Option<Iri>,
    pub object: Option<Term>,
}

impl Pattern {
    pub fn new(subject: Option<&Iri>, predicate: Option<&Iri>, object: Option<Term>) -> Self {
        Pattern { subject: subject.cloned(), predicate: predicate.cloned(), object }
    }
}

type Index<K> = HashMap<K, BTreeSet<Assertion>>;

/// The indexed set of entities and assertions.
///
/// Single writer; any number of readers between mutations.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    mode: AssertionMode,
    prefixes: PrefixTable,
    entities: BTreeMap<Iri, EntityRecord>,
    assertions: BTreeSet<Assertion>,
    by_subject: Index<Iri>,
    by_predicate: Index<Iri>,
    by_object: Index<Term>,
    domain_classes: BTreeSet<Iri>,
    domain_properties: BTreeSet<Iri>,
    fresh_counter: u64,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities && self.assertions == other.assertions
    }
}

fn index_insert<K: std::hash::Hash + Eq>(index: &mut Index<K>, key: K, a: &Assertion) {
    index.entry(key).or_default().insert(a.clone());
}

fn index_remove<K: std::hash::Hash + Eq>(index: &mut Index<K>, key: &K, a: &Assertion) {
    if let Some(set) = index.get_mut(key) {
        set.remove(a);
        if set.is_empty() {
            index.remove(key);
        }
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mode(mode: AssertionMode) -> Self {
        KnowledgeBase { mode, ..Self::default() }
    }

    pub fn mode(&self) -> AssertionMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: AssertionMode) {
        self.mode = mode;
    }

    pub fn prefixes(&self) -> &PrefixTable {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixTable {
        &mut self.prefixes
    }

    pub fn mint_iri(&self, prefix: &str, local: &str) -> Result<Iri, KgError> {
        self.prefixes.mint(prefix, local)
    }

    pub fn resolve(&self, text: &str) -> Result<Iri, KgError> {
        self.prefixes.resolve(text)
    }

    pub fn declare_class(&mut self, iri: Iri) -> Result<(), KgError> {
        if iri.is_oasis() {
            return Err(KgError::ReservedNamespace(iri));
        }
        self.domain_classes.insert(iri);
        Ok(())
    }

    pub fn declare_property(&mut self, iri: Iri) -> Result<(), KgError> {
        if iri.is_oasis() {
            return Err(KgError::ReservedNamespace(iri));
        }
        self.domain_properties.insert(iri);
        Ok(())
    }

    pub fn is_known_predicate(&self, iri: &Iri) -> bool {
        iri == vocabulary().rdf_type() || vocabulary().prop(iri).is_some() || self.domain_properties.contains(iri)
    }

    pub fn is_known_class(&self, iri: &Iri) -> bool {
        vocabulary().class(iri).is_some() || self.domain_classes.contains(iri)
    }

    // ---- mutation -------------------------------------------------------

    /// Records `entity rdf:type class`. Returns whether the kb changed.
    pub fn assert_membership(&mut self, entity: &Iri, class: &Iri) -> Result<bool, KgError> {
        if !self.is_known_class(class) {
            return Err(KgError::UnknownClass(class.clone()));
        }
        if let Some(added) = vocabulary().class(class).and_then(LayerTag::from_class) {
            if let Some(existing) = self.entities.get(entity).and_then(|e| e.layers().into_iter().find(|l| *l != added))
            {
                return Err(KgError::LayerMix { entity: entity.clone(), existing, added });
            }
        }
        Ok(self.insert(Assertion::new(entity.clone(), vocabulary().rdf_type().clone(), class)))
    }

    pub fn assert_class(&mut self, entity: &Iri, class: Class) -> Result<bool, KgError> {
        self.assert_membership(entity, class.iri())
    }

    /// Records an edge. `rdf:type` edges are routed to [`Self::assert_membership`].
    pub fn assert_property(
        &mut self,
        subject: &Iri,
        predicate: &Iri,
        object: impl Into<Term>,
    ) -> Result<bool, KgError> {
        let object = object.into();
        if predicate == vocabulary().rdf_type() {
            if let Term::Iri(class) = &object {
                return self.assert_membership(subject, class);
            }
        }
        if let Some(prop) = vocabulary().prop(predicate) {
            if self.mode == AssertionMode::Strict {
                let spec = vocabulary().spec(prop);
                let s_layer = self.layer(subject);
                let o_layer = object.as_iri().and_then(|o| self.layer(o));
                if !spec.layers_ok(s_layer, o_layer) {
                    return Err(KgError::LayerConstraintViolated {
                        subject: subject.clone(),
                        predicate: predicate.clone(),
                        object,
                        reason: format!(
                            "subject layer {} / object layer {} not admitted (subject {}, object {}{})",
                            fmt_layer(s_layer),
                            fmt_layer(o_layer),
                            spec.subject_layer,
                            spec.object_layer,
                            if spec.same_layer { ", same layer" } else { "" }
                        ),
                    });
                }
            }
        } else if !self.domain_properties.contains(predicate) {
            return Err(KgError::UnknownPredicate(predicate.clone()));
        }
        Ok(self.insert(Assertion::new(subject.clone(), predicate.clone(), object)))
    }

    pub fn assert_edge(&mut self, subject: &Iri, prop: Prop, object: impl Into<Term>) -> Result<bool, KgError> {
        self.assert_property(subject, prop.iri(), object)
    }

    /// Inserts without any vocabulary check. Predicates and classes outside the
    /// vocabulary namespace are declared as domain terms on the fly.
    pub fn insert_raw(&mut self, assertion: Assertion) -> bool {
        if !assertion.predicate.is_oasis() && vocabulary().prop(&assertion.predicate).is_none() {
            if &assertion.predicate == vocabulary().rdf_type() {
                if let Term::Iri(class) = &assertion.object {
                    if !class.is_oasis() {
                        self.domain_classes.insert(class.clone());
                    }
                }
            } else {
                self.domain_properties.insert(assertion.predicate.clone());
            }
        }
        self.insert(assertion)
    }

    fn insert(&mut self, a: Assertion) -> bool {
        if self.assertions.contains(&a) {
            return false;
        }
        self.entities.entry(a.subject.clone()).or_insert_with(|| EntityRecord::new(a.subject.clone()));
        if let Term::Iri(o) = &a.object {
            self.entities.entry(o.clone()).or_insert_with(|| EntityRecord::new(o.clone()));
        }
        if &a.predicate == vocabulary().rdf_type() {
            if let Term::Iri(class) = &a.object {
                let rec = self.entities.get_mut(&a.subject).expect("subject record");
                rec.memberships.insert(class.clone());
                rec.recompute();
            }
        }
        index_insert(&mut self.by_subject, a.subject.clone(), &a);
        index_insert(&mut self.by_predicate, a.predicate.clone(), &a);
        index_insert(&mut self.by_object, a.object.clone(), &a);
        self.assertions.insert(a);
        true
    }

    /// Removes one assertion. Entity records left without any assertion are dropped.
    pub fn retract(&mut self, a: &Assertion) -> bool {
        if !self.assertions.remove(a) {
            return false;
        }
        index_remove(&mut self.by_subject, &a.subject, a);
        index_remove(&mut self.by_predicate, &a.predicate, a);
        index_remove(&mut self.by_object, &a.object, a);
        if &a.predicate == vocabulary().rdf_type() {
            if let (Term::Iri(class), Some(rec)) = (&a.object, self.entities.get_mut(&a.subject)) {
                rec.memberships.remove(class);
                rec.recompute();
            }
        }
        self.drop_if_orphan(&a.subject);
        if let Term::Iri(o) = &a.object {
            self.drop_if_orphan(o);
        }
        true
    }

    /// Removes every assertion mentioning `entity`.
    pub fn remove_entity(&mut self, entity: &Iri) -> usize {
        let mut doomed: Vec<Assertion> = self.by_subject.get(entity).into_iter().flatten().cloned().collect();
        doomed.extend(self.by_object.get(&Term::Iri(entity.clone())).into_iter().flatten().cloned());
        doomed.into_iter().filter(|a| self.retract(a)).count()
    }

    fn drop_if_orphan(&mut self, iri: &Iri) {
        if !self.by_subject.contains_key(iri) && !self.by_object.contains_key(&Term::Iri(iri.clone())) {
            self.entities.remove(iri);
        }
    }

    /// A fresh IRI `<base>__<tag>__<n>` not yet used in the kb. `tag` is
    /// usually a [`LayerTag::slug`].
    pub fn fresh_iri(&mut self, base: &Iri, tag: &str) -> Iri {
        loop {
            let n = self.fresh_counter;
            self.fresh_counter += 1;
            let candidate = Iri::new(format!("{base}__{tag}__{n}")).expect("suffix keeps IRI valid");
            if !self.contains(&candidate) {
                return candidate;
            }
        }
    }

    /// `preferred` if unused, else a fresh IRI derived from it.
    pub fn fresh_or(&mut self, preferred: &Iri, tag: &str) -> Iri {
        if self.contains(preferred) {
            self.fresh_iri(preferred, tag)
        } else {
            preferred.clone()
        }
    }

    // ---- reads ----------------------------------------------------------

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn contains(&self, iri: &Iri) -> bool {
        self.entities.contains_key(iri)
    }

    pub fn contains_assertion(&self, a: &Assertion) -> bool {
        self.assertions.contains(a)
    }

    pub fn entity(&self, iri: &Iri) -> Option<&EntityRecord> {
        self.entities.get(iri)
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityRecord> {
        self.entities.values()
    }

    /// All assertions in (subject, predicate, object) order.
    pub fn assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter()
    }

    pub fn layer(&self, iri: &Iri) -> Option<LayerTag> {
        self.entities.get(iri).and_then(|e| e.layer)
    }

    pub fn is_deprecated(&self, iri: &Iri) -> bool {
        self.entities.get(iri).is_some_and(|e| e.deprecated)
    }

    /// Membership in `class` or any of its subclasses.
    pub fn is_instance(&self, iri: &Iri, class: Class) -> bool {
        let Some(rec) = self.entities.get(iri) else { return false };
        rec.memberships.iter().any(|m| vocabulary().class(m).is_some_and(|c| vocabulary().is_subclass(c, class)))
    }

    /// Instances of `class` including its subclasses, sorted.
    pub fn instances_of(&self, class: Class) -> Vec<Iri> {
        let mut out: BTreeSet<Iri> = BTreeSet::new();
        for c in Class::ALL {
            if vocabulary().is_subclass(*c, class) {
                if let Some(set) = self.by_object.get(&Term::Iri(c.iri().clone())) {
                    out.extend(
                        set.iter().filter(|a| &a.predicate == vocabulary().rdf_type()).map(|a| a.subject.clone()),
                    );
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn has(&self, subject: &Iri, prop: Prop, object: &Iri) -> bool {
        self.assertions.contains(&Assertion::new(subject.clone(), prop.iri().clone(), object))
    }

    /// IRI objects of `(subject, prop, ?)`, exact predicate, sorted.
    pub fn objects(&self, subject: &Iri, prop: Prop) -> Vec<Iri> {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .filter(|a| &a.predicate == prop.iri())
            .filter_map(|a| a.object.as_iri().cloned())
            .collect()
    }

    pub fn object(&self, subject: &Iri, prop: Prop) -> Option<Iri> {
        self.objects(subject, prop).into_iter().next()
    }

    /// IRI objects through `prop` or any subproperty.
    pub fn objects_entailed(&self, subject: &Iri, prop: Prop) -> Vec<Iri> {
        let preds = vocabulary().descendants(prop);
        let mut out: Vec<Iri> = self
            .by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .filter(|a| vocabulary().prop(&a.predicate).is_some_and(|p| preds.contains(&p)))
            .filter_map(|a| a.object.as_iri().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn literal(&self, subject: &Iri, prop: Prop) -> Option<String> {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .find(|a| &a.predicate == prop.iri() && a.object.as_literal().is_some())
            .and_then(|a| a.object.as_literal().map(str::to_string))
    }

    /// Subjects of `(?, prop, object)`, exact predicate, sorted.
    pub fn subjects(&self, prop: Prop, object: &Iri) -> Vec<Iri> {
        self.by_object
            .get(&Term::Iri(object.clone()))
            .into_iter()
            .flatten()
            .filter(|a| &a.predicate == prop.iri())
            .map(|a| a.subject.clone())
            .collect()
    }

    pub fn subjects_entailed(&self, prop: Prop, object: &Iri) -> Vec<Iri> {
        let preds = vocabulary().descendants(prop);
        let mut out: Vec<Iri> = self
            .by_object
            .get(&Term::Iri(object.clone()))
            .into_iter()
            .flatten()
            .filter(|a| vocabulary().prop(&a.predicate).is_some_and(|p| preds.contains(&p)))
            .map(|a| a.subject.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// All assertions whose predicate is exactly `prop`.
    pub fn edges(&self, prop: Prop) -> Vec<Assertion> {
        self.by_predicate.get(prop.iri()).into_iter().flatten().cloned().collect()
    }

    pub fn edges_entailed(&self, prop: Prop) -> Vec<Assertion> {
        let mut out: Vec<Assertion> = vocabulary().descendants(prop).iter().flat_map(|p| self.edges(*p)).collect();
        out.sort();
        out
    }

    /// Assertions with `iri` as subject.
    pub fn outgoing(&self, iri: &Iri) -> impl Iterator<Item = &Assertion> {
        self.by_subject.get(iri).into_iter().flatten()
    }

    /// Assertions with `iri` as object.
    pub fn incoming(&self, iri: &Iri) -> impl Iterator<Item = &Assertion> {
        self.by_object.get(&Term::Iri(iri.clone())).into_iter().flatten()
    }

    /// True iff `(subject, p, object)` is asserted for `predicate` or one of its
    /// transitive subproperties.
    pub fn entails(&self, subject: &Iri, predicate: &Iri, object: &Iri) -> Result<bool, KgError> {
        if !self.is_known_predicate(predicate) {
            return Err(KgError::UnknownPredicate(predicate.clone()));
        }
        let object = Term::Iri(object.clone());
        Ok(self.predicate_closure(predicate).iter().any(|p| {
            self.assertions.contains(&Assertion {
                subject: subject.clone(),
                predicate: p.clone(),
                object: object.clone(),
            })
        }))
    }

    fn predicate_closure(&self, predicate: &Iri) -> Vec<Iri> {
        match vocabulary().prop(predicate) {
            Some(p) => vocabulary().descendants(p).iter().map(|d| d.iri().clone()).collect(),
            None => vec![predicate.clone()],
        }
    }

    /// Matching assertions in (subject, predicate, object) order. With `entail`,
    /// a bound predicate also matches its subproperties.
    pub fn query(&self, pattern: &Pattern, entail: bool) -> Vec<Assertion> {
        let preds: Option<Vec<Iri>> =
            pattern.predicate.as_ref().map(|p| if entail { self.predicate_closure(p) } else { vec![p.clone()] });
        let matches = |a: &Assertion| {
            pattern.subject.as_ref().is_none_or(|s| &a.subject == s)
                && pattern.object.as_ref().is_none_or(|o| &a.object == o)
                && preds.as_ref().is_none_or(|ps| ps.contains(&a.predicate))
        };
        let mut out: Vec<Assertion> = if let Some(s) = &pattern.subject {
            self.by_subject.get(s).into_iter().flatten().filter(|a| matches(a)).cloned().collect()
        } else if let Some(o) = &pattern.object {
            self.by_object.get(o).into_iter().flatten().filter(|a| matches(a)).cloned().collect()
        } else if let Some(ps) = &preds {
            ps.iter().flat_map(|p| self.by_predicate.get(p).into_iter().flatten()).cloned().collect()
        } else {
            return self.assertions.iter().cloned().collect();
        };
        out.sort();
        out.dedup();
        out
    }
}

fn fmt_layer(layer: Option<LayerTag>) -> String {
    layer.map(|l| l.to_string()).unwrap_or_else(|| "none".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(kb: &KnowledgeBase, local: &str) -> Iri {
        kb.mint_iri("ex", local).unwrap()
    }

    #[test]
    fn membership_derives_layer() {
        let mut kb = KnowledgeBase::new();
        let op = ex(&kb, "op");
        assert!(kb.assert_class(&op, Class::TaskOperator).unwrap());
        assert!(kb.assert_class(&op, Class::TemplateThing).unwrap());
        assert_eq!(kb.layer(&op), Some(LayerTag::Template));
        let before = kb.clone();
        assert!(!kb.assert_class(&op, Class::TemplateThing).unwrap());
        assert_eq!(kb, before);
    }

    #[test]
    fn every_pair_of_distinct_layers_is_a_mix() {
        for a in LayerTag::ALL {
            for b in LayerTag::ALL {
                let mut kb = KnowledgeBase::new();
                let x = ex(&kb, "x");
                kb.assert_class(&x, a.class()).unwrap();
                let r = kb.assert_class(&x, b.class());
                if a == b {
                    assert_eq!(r, Ok(false));
                } else {
                    assert!(matches!(r, Err(KgError::LayerMix { .. })), "{a:?}/{b:?}");
                    assert_eq!(kb.layer(&x), Some(a));
                }
            }
        }
    }

    #[test]
    fn unknown_class_and_predicate_rejected() {
        let mut kb = KnowledgeBase::new();
        let x = ex(&kb, "x");
        let lock = ex(&kb, "Lock");
        assert!(matches!(kb.assert_membership(&x, &lock), Err(KgError::UnknownClass(_))));
        kb.declare_class(lock.clone()).unwrap();
        assert!(kb.assert_membership(&x, &lock).is_ok());
        let bogus = Iri::new(format!("{}bogus", super::super::OASIS_NS)).unwrap();
        assert!(matches!(kb.assert_property(&x, &bogus, &x), Err(KgError::UnknownPredicate(_))));
        assert!(kb.declare_class(bogus).is_err());
    }

    #[test]
    fn strict_mode_rejects_cross_layer_overload() {
        let mut kb = KnowledgeBase::with_mode(AssertionMode::Strict);
        let plan = ex(&kb, "plan");
        let templ = ex(&kb, "templ");
        kb.assert_class(&plan, Class::PlanningThing).unwrap();
        kb.assert_class(&templ, Class::TemplateThing).unwrap();
        let r = kb.assert_edge(&plan, Prop::OverloadsBehaviour, &templ);
        assert!(matches!(r, Err(KgError::LayerConstraintViolated { .. })));
        kb.set_mode(AssertionMode::Lax);
        assert!(kb.assert_edge(&plan, Prop::OverloadsBehaviour, &templ).unwrap());
    }

    #[test]
    fn entailment_through_subproperties() {
        let mut kb = KnowledgeBase::new();
        let (x, y) = (ex(&kb, "x"), ex(&kb, "y"));
        kb.assert_edge(&x, Prop::HasNextNonTerminatingProcedureState, &y).unwrap();
        assert!(kb.entails(&x, Prop::HasNext.iri(), &y).unwrap());
        assert!(kb.entails(&x, Prop::HasNextNonTerminatingProcedureState.iri(), &y).unwrap());
        assert!(!kb.entails(&x, Prop::HasFinalProcedureState.iri(), &y).unwrap());
        let unknown = ex(&kb, "nope");
        assert!(kb.entails(&x, &unknown, &y).is_err());
    }

    #[test]
    fn retract_drops_orphans_and_membership() {
        let mut kb = KnowledgeBase::new();
        let (x, y) = (ex(&kb, "x"), ex(&kb, "y"));
        kb.assert_class(&x, Class::PlanningThing).unwrap();
        kb.assert_edge(&x, Prop::DependsOn, &y).unwrap();
        let edge = Assertion::new(x.clone(), Prop::DependsOn.iri().clone(), &y);
        assert!(kb.retract(&edge));
        assert!(!kb.contains(&y));
        assert!(kb.contains(&x));
        let ty = Assertion::new(x.clone(), vocabulary().rdf_type().clone(), Class::PlanningThing.iri());
        assert!(kb.retract(&ty));
        assert!(kb.is_empty());
        assert_eq!(kb.entities().count(), 0);
    }

    #[test]
    fn query_orders_and_entails() {
        let mut kb = KnowledgeBase::new();
        assert!(kb.query(&Pattern::default(), true).is_empty());
        let (b, t, g) = (ex(&kb, "b"), ex(&kb, "t"), ex(&kb, "g"));
        kb.assert_edge(&b, Prop::OverloadsGoalDescription, &g).unwrap();
        kb.assert_edge(&b, Prop::OverloadsBehaviour, &t).unwrap();
        let pat = Pattern::new(None, Some(Prop::Overloads.iri()), None);
        assert!(kb.query(&pat, false).is_empty());
        let hits = kb.query(&pat, true);
        assert_eq!(hits.len(), 2);
        assert!(hits.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fresh_iris_skip_used_names() {
        let mut kb = KnowledgeBase::new();
        let base = ex(&kb, "root");
        let first = kb.fresh_iri(&base, "behaviour");
        assert_eq!(first.as_str(), "http://example.org/root__behaviour__0");
        kb.assert_class(&first, Class::Behaviour).unwrap();
        let second = kb.fresh_iri(&base, "behaviour");
        assert_ne!(first, second);
        assert_eq!(kb.fresh_or(&base, "behaviour"), base);
    }
}
