//! The three restructuring rules.
//!
//! * **Pull-up**: a property `(name, type)` owned by *every* direct subclass
//!   of a class (at least two of them) moves into that class.
//! * **Extract subclass**: a property shared by some (at least two) direct
//!   subclasses of a class is moved into a new intermediate class inserted
//!   between them and their superclass.
//! * **Extract root**: a property shared by at least two root classes is
//!   moved into a new root class above them.
//!
//! Each rule is matched and applied as one atomic step. Every step deletes
//! `count` properties and creates one, so property count strictly decreases.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::diagram::{fresh_entity_name, ClassDiagram, EntityId, GeneralizationId, TypeRef};
use crate::engine::{Mode, Policy};
use crate::error::{Error, Result};

/// A pull-up site.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PullUpMatch {
    pub superclass: EntityId,
    pub name: String,
    pub ty: TypeRef,
    /// All direct subclasses of `superclass`.
    pub members: BTreeSet<EntityId>,
}

impl PullUpMatch {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtractKind {
    Subclass,
    Root,
}

/// An extraction site: the full set of entities under `anchor` (or among
/// the roots) that own `(name, ty)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtractCandidate {
    pub kind: ExtractKind,
    /// The shared superclass; `None` for root extraction.
    pub anchor: Option<EntityId>,
    pub name: String,
    pub ty: TypeRef,
    pub members: BTreeSet<EntityId>,
}

impl ExtractCandidate {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    PullUp(PullUpMatch),
    ExtractSub(ExtractCandidate),
    ExtractRoot(ExtractCandidate),
}

impl Step {
    pub fn count(&self) -> usize {
        match self {
            Step::PullUp(m) => m.count(),
            Step::ExtractSub(c) | Step::ExtractRoot(c) => c.count(),
        }
    }

    pub fn rule_name(&self) -> &'static str {
        match self {
            Step::PullUp(_) => "pull-up",
            Step::ExtractSub(_) => "extract-subclass",
            Step::ExtractRoot(_) => "extract-root",
        }
    }

    /// Human-readable form, resolving ids against the diagram the step was
    /// computed from.
    pub fn describe(&self, d: &ClassDiagram) -> String {
        let names = |members: &BTreeSet<EntityId>| {
            members
                .iter()
                .map(|&m| d.name_of(m))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Step::PullUp(m) => format!(
                "pull-up {}: {} into {} from {{{}}}",
                m.name,
                m.ty,
                d.name_of(m.superclass),
                names(&m.members)
            ),
            Step::ExtractSub(c) => format!(
                "extract-subclass {}: {} under {} over {{{}}}",
                c.name,
                c.ty,
                c.anchor.map_or("?", |a| d.name_of(a)),
                names(&c.members)
            ),
            Step::ExtractRoot(c) => {
                format!("extract-root {}: {} over {{{}}}", c.name, c.ty, names(&c.members))
            }
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, ty, members) = match self {
            Step::PullUp(m) => (&m.name, &m.ty, &m.members),
            Step::ExtractSub(c) | Step::ExtractRoot(c) => (&c.name, &c.ty, &c.members),
        };
        write!(f, "{} {}: {} x{}", self.rule_name(), name, ty, members.len())
    }
}

/// Lookup tables shared by all matchers, built in one pass.
struct Index<'a> {
    parent: HashMap<EntityId, EntityId>,
    child_count: HashMap<EntityId, usize>,
    owned_names: HashSet<(EntityId, &'a str)>,
}

impl<'a> Index<'a> {
    fn new(d: &'a ClassDiagram) -> Self {
        let mut parent = HashMap::new();
        let mut child_count: HashMap<EntityId, usize> = HashMap::new();
        for g in d.generalizations() {
            parent.insert(g.specific, g.general);
            *child_count.entry(g.general).or_default() += 1;
        }
        let owned_names = d.properties().map(|p| (p.owner, p.name.as_str())).collect();
        Index {
            parent,
            child_count,
            owned_names,
        }
    }

    fn children(&self, e: EntityId) -> usize {
        self.child_count.get(&e).copied().unwrap_or(0)
    }

    /// Owners grouped by (superclass, name, type) for subclass sites, or by
    /// (name, type) among roots.
    fn groups(
        &self,
        d: &'a ClassDiagram,
        roots: bool,
    ) -> HashMap<(Option<EntityId>, &'a str, &'a str), BTreeSet<EntityId>> {
        let mut groups: HashMap<_, BTreeSet<EntityId>> = HashMap::new();
        for p in d.properties() {
            let anchor = self.parent.get(&p.owner).copied();
            if anchor.is_none() == roots {
                groups
                    .entry((anchor, p.name.as_str(), p.ty.name.as_str()))
                    .or_default()
                    .insert(p.owner);
            }
        }
        groups
    }

    /// The site is a pull-up: every child shares it and the anchor has no
    /// property of that name.
    fn is_pullup_site(&self, anchor: EntityId, name: &str, members: usize) -> bool {
        members >= 2 && members == self.children(anchor) && !self.owned_names.contains(&(anchor, name))
    }
}

fn sort_key<'a>(
    d: &'a ClassDiagram,
    anchor: Option<EntityId>,
    name: &'a str,
    ty: &'a TypeRef,
) -> (&'a str, &'a str, &'a str) {
    (anchor.map_or("", |a| d.name_of(a)), name, ty.name.as_str())
}

fn pullups_with(d: &ClassDiagram, index: &Index<'_>) -> Vec<PullUpMatch> {
    let mut out: Vec<PullUpMatch> = index
        .groups(d, false)
        .into_iter()
        .filter_map(|((anchor, name, ty), members)| {
            let anchor = anchor?;
            index
                .is_pullup_site(anchor, name, members.len())
                .then(|| PullUpMatch {
                    superclass: anchor,
                    name: name.to_string(),
                    ty: TypeRef::new(ty),
                    members,
                })
        })
        .collect();
    out.sort_by(|a, b| {
        sort_key(d, Some(a.superclass), &a.name, &a.ty).cmp(&sort_key(d, Some(b.superclass), &b.name, &b.ty))
    });
    out
}

fn candidates_with(d: &ClassDiagram, index: &Index<'_>, kind: ExtractKind) -> Vec<ExtractCandidate> {
    let roots = kind == ExtractKind::Root;
    let mut out: Vec<ExtractCandidate> = index
        .groups(d, roots)
        .into_iter()
        .filter(|((anchor, name, _), members)| {
            members.len() >= 2
                && match anchor {
                    Some(a) => !index.is_pullup_site(*a, name, members.len()),
                    None => true,
                }
        })
        .map(|((anchor, name, ty), members)| ExtractCandidate {
            kind,
            anchor,
            name: name.to_string(),
            ty: TypeRef::new(ty),
            members,
        })
        .collect();
    out.sort_by(|a, b| sort_key(d, a.anchor, &a.name, &a.ty).cmp(&sort_key(d, b.anchor, &b.name, &b.ty)));
    out
}

/// All pull-up sites, sorted by (superclass name, property name, type name).
pub fn find_pullup_matches(d: &ClassDiagram) -> Vec<PullUpMatch> {
    pullups_with(d, &Index::new(d))
}

/// All extraction sites of the given kind with at least two members,
/// sorted by (anchor name, property name, type name). Subclass sites that
/// are really pull-up sites are left out.
pub fn find_extract_candidates(d: &ClassDiagram, kind: ExtractKind) -> Vec<ExtractCandidate> {
    candidates_with(d, &Index::new(d), kind)
}

/// Keeps the candidates whose count equals the largest count, in order.
pub fn maximal_candidates(cs: Vec<ExtractCandidate>) -> Vec<ExtractCandidate> {
    let Some(max) = cs.iter().map(ExtractCandidate::count).max() else {
        return cs;
    };
    cs.into_iter().filter(|c| c.count() == max).collect()
}

/// Steps enabled under `policy`, in deterministic order.
///
/// `Priority` offers pull-ups if there are any, otherwise the maximal
/// subclass extractions, otherwise the maximal root extractions. `Free`
/// offers all three groups together.
pub fn applicable_steps(d: &ClassDiagram, policy: &Policy) -> Vec<Step> {
    let index = Index::new(d);
    let mut steps: Vec<Step> = pullups_with(d, &index).into_iter().map(Step::PullUp).collect();
    if policy.mode == Mode::Priority && !steps.is_empty() {
        return steps;
    }
    let subs = maximal_candidates(candidates_with(d, &index, ExtractKind::Subclass));
    steps.extend(subs.into_iter().map(Step::ExtractSub));
    if policy.mode == Mode::Priority && !steps.is_empty() {
        return steps;
    }
    let roots = maximal_candidates(candidates_with(d, &index, ExtractKind::Root));
    steps.extend(roots.into_iter().map(Step::ExtractRoot));
    steps
}

fn owns(d: &ClassDiagram, owner: EntityId, name: &str, ty: &TypeRef) -> bool {
    d.owned_properties(owner).any(|p| p.name == name && p.ty == *ty)
}

fn check_pullup(d: &ClassDiagram, m: &PullUpMatch) -> Result<()> {
    if d.entity(m.superclass).is_none() {
        return Err(Error::StaleMatch);
    }
    let index = Index::new(d);
    let subs: BTreeSet<EntityId> = d
        .generalizations()
        .filter(|g| g.general == m.superclass)
        .map(|g| g.specific)
        .collect();
    let valid = subs == m.members
        && index.is_pullup_site(m.superclass, &m.name, m.count())
        && m.members.iter().all(|&s| owns(d, s, &m.name, &m.ty));
    if valid {
        Ok(())
    } else {
        Err(Error::StaleMatch)
    }
}

fn check_extract(d: &ClassDiagram, c: &ExtractCandidate) -> Result<()> {
    let index = Index::new(d);
    let qualifying: BTreeSet<EntityId> = d
        .properties()
        .filter(|p| p.name == c.name && p.ty == c.ty)
        .map(|p| p.owner)
        .filter(|owner| index.parent.get(owner).copied() == c.anchor)
        .collect();
    let kind_ok = match (c.kind, c.anchor) {
        (ExtractKind::Subclass, Some(a)) => {
            d.entity(a).is_some() && !index.is_pullup_site(a, &c.name, c.count())
        }
        (ExtractKind::Root, None) => true,
        _ => false,
    };
    if kind_ok && c.count() >= 2 && qualifying == c.members {
        Ok(())
    } else {
        Err(Error::StaleMatch)
    }
}

/// Moves the matched property from all members into the superclass.
pub fn apply_pullup(d: &ClassDiagram, m: &PullUpMatch) -> Result<ClassDiagram> {
    check_pullup(d, m)?;
    let mut out = d.clone();
    pullup_in_place(&mut out, m);
    Ok(out)
}

/// Inserts a new synthetic class named `<name>_<type>` (made unique) that
/// owns the matched property and becomes the superclass of all members.
pub fn apply_extract(d: &ClassDiagram, c: &ExtractCandidate) -> Result<ClassDiagram> {
    check_extract(d, c)?;
    let mut out = d.clone();
    extract_in_place(&mut out, c);
    Ok(out)
}

/// Applies any step after checking it still matches `d`.
pub fn apply_step(d: &ClassDiagram, step: &Step) -> Result<ClassDiagram> {
    match step {
        Step::PullUp(m) => apply_pullup(d, m),
        Step::ExtractSub(c) | Step::ExtractRoot(c) => apply_extract(d, c),
    }
}

/// Applies a step known to match `d`, skipping the staleness check.
pub(crate) fn apply_step_in_place(d: &mut ClassDiagram, step: &Step) {
    match step {
        Step::PullUp(m) => pullup_in_place(d, m),
        Step::ExtractSub(c) | Step::ExtractRoot(c) => extract_in_place(d, c),
    }
}

fn remove_member_properties(d: &mut ClassDiagram, members: &BTreeSet<EntityId>, name: &str, ty: &TypeRef) {
    let doomed: Vec<_> = d
        .properties()
        .filter(|p| p.name == name && p.ty == *ty && members.contains(&p.owner))
        .map(|p| p.id)
        .collect();
    for id in doomed {
        d.remove_property(id);
    }
}

fn pullup_in_place(d: &mut ClassDiagram, m: &PullUpMatch) {
    remove_member_properties(d, &m.members, &m.name, &m.ty);
    d.add_property(m.superclass, m.name.clone(), m.ty.name.clone());
}

fn extract_in_place(d: &mut ClassDiagram, c: &ExtractCandidate) {
    let name = fresh_entity_name(d, &format!("{}_{}", c.name, c.ty));
    let new = d.add_entity(name, true);
    d.add_property(new, c.name.clone(), c.ty.name.clone());
    if let Some(anchor) = c.anchor {
        let links: Vec<GeneralizationId> = d
            .generalizations()
            .filter(|g| g.general == anchor && c.members.contains(&g.specific))
            .map(|g| g.id)
            .collect();
        for id in links {
            d.remove_generalization(id);
        }
        d.add_generalization(new, anchor);
    }
    for &member in &c.members {
        d.add_generalization(member, new);
    }
    remove_member_properties(d, &c.members, &c.name, &c.ty);
}
