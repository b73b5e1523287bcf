//! The class-diagram model: entities, their owned properties and the
//! single-inheritance generalization forest connecting them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(EntityId, "e");
id_type!(PropertyId, "p");
id_type!(GeneralizationId, "g");

/// A named attribute type such as `Integer` or `String`.
///
/// Types compare by name only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeRef {
    pub name: String,
}

impl TypeRef {
    pub fn new(name: impl Into<String>) -> Self {
        TypeRef { name: name.into() }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
    /// Set for entities introduced by a rule application.
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub id: PropertyId,
    pub owner: EntityId,
    pub name: String,
    pub ty: TypeRef,
}

/// An inheritance link: `specific` is a subclass of `general`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generalization {
    pub id: GeneralizationId,
    pub specific: EntityId,
    pub general: EntityId,
}

/// A class diagram.
///
/// Identifiers are allocated from monotonically increasing counters and are
/// never handed out twice by the same diagram, even after the element they
/// named has been removed. Mutators do not enforce the model invariants;
/// use [`validate`] to check a diagram before handing it to the rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassDiagram {
    entities: BTreeMap<EntityId, Entity>,
    properties: BTreeMap<PropertyId, Property>,
    generalizations: BTreeMap<GeneralizationId, Generalization>,
    types: BTreeSet<TypeRef>,
    next_entity: u32,
    next_property: u32,
    next_generalization: u32,
}

impl ClassDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, name: impl Into<String>, synthetic: bool) -> EntityId {
        let id = EntityId(self.next_entity);
        self.insert_entity(id, name.into(), synthetic);
        id
    }

    /// Inserts an entity under a caller-chosen id. Used by readers that
    /// preserve identifiers; the id counter is bumped past `id`.
    pub fn insert_entity(&mut self, id: EntityId, name: String, synthetic: bool) {
        self.next_entity = self.next_entity.max(id.0 + 1);
        self.entities.insert(id, Entity { id, name, synthetic });
    }

    /// Adds a property, registering its type if it is not known yet.
    pub fn add_property(
        &mut self,
        owner: EntityId,
        name: impl Into<String>,
        ty: impl Into<String>,
    ) -> PropertyId {
        let id = PropertyId(self.next_property);
        self.insert_property(id, owner, name.into(), TypeRef::new(ty));
        id
    }

    pub fn insert_property(&mut self, id: PropertyId, owner: EntityId, name: String, ty: TypeRef) {
        self.next_property = self.next_property.max(id.0 + 1);
        if !self.types.contains(&ty) {
            self.types.insert(ty.clone());
        }
        self.properties.insert(id, Property { id, owner, name, ty });
    }

    pub fn add_generalization(&mut self, specific: EntityId, general: EntityId) -> GeneralizationId {
        let id = GeneralizationId(self.next_generalization);
        self.insert_generalization(id, specific, general);
        id
    }

    pub fn insert_generalization(&mut self, id: GeneralizationId, specific: EntityId, general: EntityId) {
        self.next_generalization = self.next_generalization.max(id.0 + 1);
        self.generalizations.insert(
            id,
            Generalization {
                id,
                specific,
                general,
            },
        );
    }

    /// Registers a type that no property refers to (yet).
    pub fn add_type(&mut self, name: impl Into<String>) {
        self.types.insert(TypeRef::new(name));
    }

    pub fn remove_property(&mut self, id: PropertyId) -> Option<Property> {
        self.properties.remove(&id)
    }

    pub fn remove_generalization(&mut self, id: GeneralizationId) -> Option<Generalization> {
        self.generalizations.remove(&id)
    }

    pub fn entity(&self, id: EntityId) -> Option<&Entity> {
        self.entities.get(&id)
    }

    pub fn property(&self, id: PropertyId) -> Option<&Property> {
        self.properties.get(&id)
    }

    pub fn generalization(&self, id: GeneralizationId) -> Option<&Generalization> {
        self.generalizations.get(&id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> + '_ {
        self.entities.values()
    }

    pub fn properties(&self) -> impl Iterator<Item = &Property> + '_ {
        self.properties.values()
    }

    pub fn generalizations(&self) -> impl Iterator<Item = &Generalization> + '_ {
        self.generalizations.values()
    }

    pub fn types(&self) -> impl Iterator<Item = &TypeRef> + '_ {
        self.types.iter()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn property_count(&self) -> usize {
        self.properties.len()
    }

    pub fn generalization_count(&self) -> usize {
        self.generalizations.len()
    }

    /// Combined number of classes and attributes.
    pub fn size(&self) -> usize {
        self.entities.len() + self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entity_by_name(&self, name: &str) -> Option<&Entity> {
        self.entities.values().find(|e| e.name == name)
    }

    pub fn name_of(&self, id: EntityId) -> &str {
        self.entities.get(&id).map_or("?", |e| e.name.as_str())
    }

    /// Properties owned directly by `owner`, in id order.
    pub fn owned_properties(&self, owner: EntityId) -> impl Iterator<Item = &Property> + '_ {
        self.properties.values().filter(move |p| p.owner == owner)
    }

    /// The generalization whose specific end is `id`, if any.
    pub fn superclass_link(&self, id: EntityId) -> Option<&Generalization> {
        self.generalizations.values().find(|g| g.specific == id)
    }

    pub fn superclass(&self, id: EntityId) -> Option<EntityId> {
        self.superclass_link(id).map(|g| g.general)
    }

    fn require(&self, id: EntityId) -> Result<()> {
        if self.entities.contains_key(&id) {
            Ok(())
        } else {
            Err(Error::NoSuchEntity(id))
        }
    }
}

/// Which invariant a [`Violation`] breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyTypeName,
    DuplicateEntityName(String),
    UnknownOwner(EntityId),
    UnknownType(String),
    DuplicatePropertyName(String),
    SelfGeneralization,
    UnknownEntity(EntityId),
    MultipleInheritance,
    Cycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::EmptyTypeName => f.write_str("empty type name"),
            ViolationKind::DuplicateEntityName(n) => write!(f, "duplicate entity name {n:?}"),
            ViolationKind::UnknownOwner(id) => write!(f, "owner {id} does not exist"),
            ViolationKind::UnknownType(n) => write!(f, "type {n:?} is not declared"),
            ViolationKind::DuplicatePropertyName(n) => write!(f, "duplicate property name {n:?}"),
            ViolationKind::SelfGeneralization => f.write_str("specific equals general"),
            ViolationKind::UnknownEntity(id) => write!(f, "entity {id} does not exist"),
            ViolationKind::MultipleInheritance => f.write_str("multiple inheritance"),
            ViolationKind::Cycle => f.write_str("cycle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementRef {
    Type(String),
    Entity(EntityId),
    Property(PropertyId),
    Generalization(GeneralizationId),
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Type(n) => write!(f, "type {n:?}"),
            ElementRef::Entity(id) => write!(f, "entity {id}"),
            ElementRef::Property(id) => write!(f, "property {id}"),
            ElementRef::Generalization(id) => write!(f, "generalization {id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub element: ElementRef,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.kind)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.violations.iter().any(|v| pred(&v.kind))
    }

    /// Converts a failed report into an error.
    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of the model and reports all
/// violations found. Never fails: a broken diagram yields a non-empty report.
pub fn validate(d: &ClassDiagram) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |element, kind| violations.push(Violation { element, kind });

    for t in &d.types {
        if t.name.is_empty() {
            push(ElementRef::Type(t.name.clone()), ViolationKind::EmptyTypeName);
        }
    }

    let mut seen_names: HashSet<&str> = HashSet::new();
    for e in d.entities.values() {
        if !seen_names.insert(&e.name) {
            push(
                ElementRef::Entity(e.id),
                ViolationKind::DuplicateEntityName(e.name.clone()),
            );
        }
    }

    let mut owned: HashSet<(EntityId, &str)> = HashSet::new();
    for p in d.properties.values() {
        if !d.entities.contains_key(&p.owner) {
            push(ElementRef::Property(p.id), ViolationKind::UnknownOwner(p.owner));
        }
        if !d.types.contains(&p.ty) {
            push(
                ElementRef::Property(p.id),
                ViolationKind::UnknownType(p.ty.name.clone()),
            );
        }
        if !owned.insert((p.owner, &p.name)) {
            push(
                ElementRef::Property(p.id),
                ViolationKind::DuplicatePropertyName(p.name.clone()),
            );
        }
    }

    let mut parent: HashMap<EntityId, EntityId> = HashMap::new();
    for g in d.generalizations.values() {
        if g.specific == g.general {
            push(
                ElementRef::Generalization(g.id),
                ViolationKind::SelfGeneralization,
            );
            continue;
        }
        let mut dangling = false;
        for end in [g.specific, g.general] {
            if !d.entities.contains_key(&end) {
                push(
                    ElementRef::Generalization(g.id),
                    ViolationKind::UnknownEntity(end),
                );
                dangling = true;
            }
        }
        if dangling {
            continue;
        }
        if parent.insert(g.specific, g.general).is_some() {
            push(
                ElementRef::Generalization(g.id),
                ViolationKind::MultipleInheritance,
            );
        }
    }

    // Each entity has at most one recorded parent, so cycles show up as a
    // parent walk that re-enters the current path.
    let mut done: HashSet<EntityId> = HashSet::new();
    for &start in d.entities.keys() {
        let mut path: Vec<EntityId> = Vec::new();
        let mut cur = start;
        while !done.contains(&cur) {
            if let Some(pos) = path.iter().position(|&e| e == cur) {
                let smallest = *path[pos..].iter().min().unwrap_or(&cur);
                push(ElementRef::Entity(smallest), ViolationKind::Cycle);
                break;
            }
            path.push(cur);
            match parent.get(&cur) {
                Some(&next) => cur = next,
                None => break,
            }
        }
        done.extend(path);
    }

    ValidationReport { violations }
}

/// Entities whose generalization points directly at `e`.
pub fn direct_subclasses(d: &ClassDiagram, e: EntityId) -> Result<BTreeSet<EntityId>> {
    d.require(e)?;
    Ok(d.generalizations
        .values()
        .filter(|g| g.general == e)
        .map(|g| g.specific)
        .collect())
}

/// Entities without a superclass.
pub fn root_entities(d: &ClassDiagram) -> BTreeSet<EntityId> {
    let specifics: HashSet<EntityId> = d.generalizations.values().map(|g| g.specific).collect();
    d.entities
        .keys()
        .copied()
        .filter(|id| !specifics.contains(id))
        .collect()
}

/// An attribute as seen through inheritance: `(name, type name)`.
pub type Attribute = (String, String);

/// Own properties of `e` plus everything it inherits, with set semantics.
///
/// Requires a valid diagram; on a cyclic one the walk stops when it revisits
/// an entity.
pub fn flattened_attributes(d: &ClassDiagram, e: EntityId) -> Result<BTreeSet<Attribute>> {
    d.require(e)?;
    let parent: HashMap<EntityId, EntityId> = d
        .generalizations
        .values()
        .map(|g| (g.specific, g.general))
        .collect();
    let mut visited: HashSet<EntityId> = HashSet::from([e]);
    let mut cur = e;
    while let Some(&p) = parent.get(&cur) {
        if !visited.insert(p) {
            break;
        }
        cur = p;
    }
    Ok(d.properties
        .values()
        .filter(|p| visited.contains(&p.owner))
        .map(|p| (p.name.clone(), p.ty.name.clone()))
        .collect())
}

/// Flattened attribute sets of every entity, keyed by entity name.
pub type SemanticSignature = BTreeMap<String, BTreeSet<Attribute>>;

pub fn semantic_signature(d: &ClassDiagram) -> SemanticSignature {
    let parent: HashMap<EntityId, EntityId> = d
        .generalizations
        .values()
        .map(|g| (g.specific, g.general))
        .collect();
    let mut own: HashMap<EntityId, Vec<Attribute>> = HashMap::new();
    for p in d.properties.values() {
        own.entry(p.owner)
            .or_default()
            .push((p.name.clone(), p.ty.name.clone()));
    }
    let mut sig = SemanticSignature::new();
    for e in d.entities.values() {
        let mut attrs = BTreeSet::new();
        let mut visited = HashSet::new();
        let mut cur = Some(e.id);
        while let Some(id) = cur {
            if !visited.insert(id) {
                break;
            }
            if let Some(list) = own.get(&id) {
                attrs.extend(list.iter().cloned());
            }
            cur = parent.get(&id).copied();
        }
        sig.insert(e.name.clone(), attrs);
    }
    sig
}

/// Returns `hint` if no entity carries that name, else `hint_k` for the
/// smallest positive `k` that is free.
pub fn fresh_entity_name(d: &ClassDiagram, hint: &str) -> String {
    let names: HashSet<&str> = d.entities.values().map(|e| e.name.as_str()).collect();
    if !names.contains(hint) {
        return hint.to_string();
    }
    (1..)
        .map(|k| format!("{hint}_{k}"))
        .find(|candidate| !names.contains(candidate.as_str()))
        .expect("unbounded suffix search")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn chain() -> (ClassDiagram, [EntityId; 3]) {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let b = d.add_entity("B", false);
        let c = d.add_entity("C", false);
        d.add_generalization(b, a);
        d.add_generalization(c, b);
        d.add_property(a, "x", "Int");
        d.add_property(b, "y", "Str");
        d.add_property(c, "z", "Int");
        (d, [a, b, c])
    }

    fn attrs(list: &[(&str, &str)]) -> BTreeSet<Attribute> {
        list.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect()
    }

    #[test]
    fn empty_diagram_is_valid() {
        assert!(validate(&ClassDiagram::new()).is_ok());
    }

    #[test]
    fn two_cycle_is_reported() {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let b = d.add_entity("B", false);
        d.add_generalization(a, b);
        d.add_generalization(b, a);
        let report = validate(&d);
        assert!(report.has(|k| *k == ViolationKind::Cycle), "{report}");
        assert_eq!(
            report
                .violations
                .iter()
                .filter(|v| v.kind == ViolationKind::Cycle)
                .count(),
            1
        );
        assert!(report.to_string().contains("cycle"));
    }

    #[test]
    fn longer_cycle_behind_a_tail() {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let b = d.add_entity("B", false);
        let c = d.add_entity("C", false);
        let tail = d.add_entity("T", false);
        d.add_generalization(a, b);
        d.add_generalization(b, c);
        d.add_generalization(c, a);
        d.add_generalization(tail, a);
        let report = validate(&d);
        let cycles: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Cycle)
            .collect();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].element, ElementRef::Entity(a));
    }

    #[test]
    fn multiple_inheritance_is_reported() {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let c = d.add_entity("C", false);
        let b = d.add_entity("B", false);
        d.add_generalization(b, a);
        d.add_generalization(b, c);
        let report = validate(&d);
        assert!(report.has(|k| *k == ViolationKind::MultipleInheritance));
        assert!(report.to_string().contains("multiple inheritance"));
    }

    #[test]
    fn element_level_violations() {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        d.add_entity("A", false);
        d.add_property(a, "x", "Int");
        d.add_property(a, "x", "String");
        d.add_property(EntityId(99), "y", "Int");
        d.add_generalization(a, a);
        d.add_generalization(a, EntityId(42));
        d.add_type("");
        let report = validate(&d);
        for expected in [
            ViolationKind::DuplicateEntityName("A".into()),
            ViolationKind::DuplicatePropertyName("x".into()),
            ViolationKind::UnknownOwner(EntityId(99)),
            ViolationKind::SelfGeneralization,
            ViolationKind::UnknownEntity(EntityId(42)),
            ViolationKind::EmptyTypeName,
        ] {
            assert!(report.has(|k| *k == expected), "missing {expected}: {report}");
        }
    }

    #[test]
    fn unknown_type_is_reported() {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        d.insert_property(PropertyId(0), a, "x".into(), TypeRef::new("Int"));
        d.types.clear();
        assert!(validate(&d).has(|k| matches!(k, ViolationKind::UnknownType(_))));
    }

    #[test]
    fn ids_are_never_reused() {
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let p = d.add_property(a, "x", "Int");
        d.remove_property(p);
        let q = d.add_property(a, "x", "Int");
        assert_ne!(p, q);
        let b = d.add_entity("B", false);
        let g = d.add_generalization(b, a);
        d.remove_generalization(g);
        assert_ne!(g, d.add_generalization(b, a));
    }

    #[test]
    fn direct_subclasses_examples() {
        let (d, [a, b, c]) = chain();
        assert_eq!(direct_subclasses(&d, a).unwrap(), BTreeSet::from([b]));
        assert_eq!(direct_subclasses(&d, c).unwrap(), BTreeSet::new());

        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let b = d.add_entity("B", false);
        let c = d.add_entity("C", false);
        d.add_generalization(b, a);
        d.add_generalization(c, a);
        assert_eq!(direct_subclasses(&d, a).unwrap(), BTreeSet::from([b, c]));
        assert!(matches!(
            direct_subclasses(&d, EntityId(7)),
            Err(Error::NoSuchEntity(EntityId(7)))
        ));
    }

    #[test]
    fn root_entities_examples() {
        assert!(root_entities(&ClassDiagram::new()).is_empty());
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let b = d.add_entity("B", false);
        assert_eq!(root_entities(&d), BTreeSet::from([a, b]));
        d.add_generalization(b, a);
        assert_eq!(root_entities(&d), BTreeSet::from([a]));
    }

    #[test]
    fn flattened_attributes_examples() {
        let (d, [a, b, c]) = chain();
        assert_eq!(
            flattened_attributes(&d, c).unwrap(),
            attrs(&[("x", "Int"), ("y", "Str"), ("z", "Int")])
        );
        assert_eq!(flattened_attributes(&d, a).unwrap(), attrs(&[("x", "Int")]));
        assert_eq!(
            flattened_attributes(&d, b).unwrap(),
            attrs(&[("x", "Int"), ("y", "Str")])
        );

        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        let b = d.add_entity("B", false);
        d.add_generalization(b, a);
        d.add_property(b, "x", "Int");
        assert!(flattened_attributes(&d, a).unwrap().is_empty());
        d.add_property(a, "x", "Int");
        assert_eq!(flattened_attributes(&d, b).unwrap(), attrs(&[("x", "Int")]));
        assert!(flattened_attributes(&d, EntityId(9)).is_err());
    }

    #[test]
    fn signature_of_f1() {
        let sig = semantic_signature(&fixtures::f1());
        assert_eq!(sig["A"], attrs(&[]));
        assert_eq!(sig["B"], attrs(&[("x", "Int")]));
        assert_eq!(sig["C"], attrs(&[("x", "Int")]));
        assert!(semantic_signature(&ClassDiagram::new()).is_empty());
    }

    #[test]
    fn signature_agrees_with_flattened_attributes() {
        let (d, ids) = chain();
        let sig = semantic_signature(&d);
        for id in ids {
            assert_eq!(sig[d.name_of(id)], flattened_attributes(&d, id).unwrap());
        }
    }

    #[test]
    fn fresh_names() {
        let mut d = ClassDiagram::new();
        assert_eq!(fresh_entity_name(&d, "x_Class"), "x_Class");
        d.add_entity("x_Class", false);
        assert_eq!(fresh_entity_name(&d, "x_Class"), "x_Class_1");
        d.add_entity("x_Class_1", true);
        assert_eq!(fresh_entity_name(&d, "x_Class"), "x_Class_2");
        assert_eq!(fresh_entity_name(&d, "x_Class"), fresh_entity_name(&d, "x_Class"));
    }
}
