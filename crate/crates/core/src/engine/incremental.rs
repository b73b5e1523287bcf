//! Incremental site index for the deterministic normalizer.
//!
//! A rule application only changes the sites of the anchors it touches, so
//! instead of rescanning the whole diagram after every step the index keeps
//! per-anchor property groups and ordered queues of the current sites, and
//! re-derives only the dirty parts. The step it selects is always the first
//! element [`applicable_steps`](crate::rules::applicable_steps) would
//! return, and it mutates the diagram with the same id allocation order as
//! the rules module, so results are identical to the naive loop.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::diagram::{ClassDiagram, EntityId, GeneralizationId, PropertyId, TypeRef};
use crate::rules::{ExtractCandidate, ExtractKind, PullUpMatch, Step};

type Attr = (String, String);
/// (anchor name, property name, type name, anchor)
type PullUpKey = (String, String, String, EntityId);
/// (count, anchor name or "", property name, type name, anchor)
type ExtractKey = (Reverse<usize>, String, String, String, Option<EntityId>);

pub(crate) struct Workspace {
    d: ClassDiagram,
    parent: HashMap<EntityId, (EntityId, GeneralizationId)>,
    children: HashMap<EntityId, BTreeSet<EntityId>>,
    /// Own properties by owner, keyed by property name.
    props: HashMap<EntityId, BTreeMap<String, (PropertyId, String)>>,
    names: HashSet<String>,
    /// Lowest suffix that may still be free, per hint. Names are never
    /// released, so the first free suffix only grows.
    next_suffix: HashMap<String, usize>,
    /// Per anchor: owners among its children grouped by (name, type).
    child_groups: HashMap<EntityId, HashMap<Attr, BTreeSet<EntityId>>>,
    root_groups: HashMap<Attr, BTreeSet<EntityId>>,
    dirty_anchors: HashSet<EntityId>,
    dirty_roots: HashSet<Attr>,
    anchor_entries: HashMap<EntityId, (Vec<PullUpKey>, Vec<ExtractKey>)>,
    pullups: BTreeSet<PullUpKey>,
    subs: BTreeSet<ExtractKey>,
    roots: BTreeSet<ExtractKey>,
    root_entries: HashMap<Attr, ExtractKey>,
}

impl Workspace {
    pub(crate) fn new(d: ClassDiagram) -> Self {
        let mut ws = Workspace {
            d: ClassDiagram::new(),
            parent: HashMap::new(),
            children: HashMap::new(),
            props: HashMap::new(),
            names: HashSet::new(),
            next_suffix: HashMap::new(),
            child_groups: HashMap::new(),
            root_groups: HashMap::new(),
            dirty_anchors: HashSet::new(),
            dirty_roots: HashSet::new(),
            anchor_entries: HashMap::new(),
            pullups: BTreeSet::new(),
            subs: BTreeSet::new(),
            roots: BTreeSet::new(),
            root_entries: HashMap::new(),
        };
        for e in d.entities() {
            ws.names.insert(e.name.clone());
        }
        for g in d.generalizations() {
            ws.parent.insert(g.specific, (g.general, g.id));
            ws.children.entry(g.general).or_default().insert(g.specific);
        }
        for p in d.properties() {
            ws.props
                .entry(p.owner)
                .or_default()
                .insert(p.name.clone(), (p.id, p.ty.name.clone()));
            ws.group_insert(p.owner, (p.name.clone(), p.ty.name.clone()));
        }
        ws.dirty_anchors.extend(ws.children.keys().copied());
        ws.d = d;
        ws
    }

    pub(crate) fn diagram(&self) -> &ClassDiagram {
        &self.d
    }

    pub(crate) fn into_diagram(self) -> ClassDiagram {
        self.d
    }

    fn group_insert(&mut self, owner: EntityId, attr: Attr) {
        match self.parent.get(&owner) {
            Some(&(anchor, _)) => {
                self.child_groups
                    .entry(anchor)
                    .or_default()
                    .entry(attr)
                    .or_default()
                    .insert(owner);
                self.dirty_anchors.insert(anchor);
            }
            None => {
                self.root_groups.entry(attr.clone()).or_default().insert(owner);
                self.dirty_roots.insert(attr);
            }
        }
    }

    fn group_remove(&mut self, owner: EntityId, attr: &Attr) {
        match self.parent.get(&owner) {
            Some(&(anchor, _)) => {
                if let Some(groups) = self.child_groups.get_mut(&anchor) {
                    if let Some(members) = groups.get_mut(attr) {
                        members.remove(&owner);
                        if members.is_empty() {
                            groups.remove(attr);
                        }
                    }
                }
                self.dirty_anchors.insert(anchor);
            }
            None => {
                if let Some(members) = self.root_groups.get_mut(attr) {
                    members.remove(&owner);
                    if members.is_empty() {
                        self.root_groups.remove(attr);
                    }
                }
                self.dirty_roots.insert(attr.clone());
            }
        }
    }

    fn attrs_of(&self, owner: EntityId) -> Vec<Attr> {
        self.props
            .get(&owner)
            .map(|m| m.iter().map(|(n, (_, t))| (n.clone(), t.clone())).collect())
            .unwrap_or_default()
    }

    fn add_property(&mut self, owner: EntityId, name: &str, ty: &str) {
        let id = self.d.add_property(owner, name, ty);
        self.props
            .entry(owner)
            .or_default()
            .insert(name.to_string(), (id, ty.to_string()));
        self.group_insert(owner, (name.to_string(), ty.to_string()));
        // The owner's own names guard pull-ups into it.
        self.dirty_anchors.insert(owner);
    }

    fn remove_property(&mut self, owner: EntityId, name: &str) {
        let Some((id, ty)) = self.props.get_mut(&owner).and_then(|m| m.remove(name)) else {
            return;
        };
        self.d.remove_property(id);
        self.group_remove(owner, &(name.to_string(), ty));
        self.dirty_anchors.insert(owner);
    }

    fn link(&mut self, child: EntityId, general: EntityId) {
        let attrs = self.attrs_of(child);
        for attr in &attrs {
            self.group_remove(child, attr);
        }
        let id = self.d.add_generalization(child, general);
        self.parent.insert(child, (general, id));
        self.children.entry(general).or_default().insert(child);
        self.dirty_anchors.insert(general);
        for attr in attrs {
            self.group_insert(child, attr);
        }
    }

    fn unlink(&mut self, child: EntityId) {
        let Some(&(general, id)) = self.parent.get(&child) else {
            return;
        };
        let attrs = self.attrs_of(child);
        for attr in &attrs {
            self.group_remove(child, attr);
        }
        self.d.remove_generalization(id);
        self.parent.remove(&child);
        if let Some(kids) = self.children.get_mut(&general) {
            kids.remove(&child);
        }
        self.dirty_anchors.insert(general);
        for attr in attrs {
            self.group_insert(child, attr);
        }
    }

    fn fresh_name(&mut self, hint: &str) -> String {
        if !self.names.contains(hint) {
            return hint.to_string();
        }
        let start = self.next_suffix.get(hint).copied().unwrap_or(1);
        let (k, name) = (start..)
            .map(|k| (k, format!("{hint}_{k}")))
            .find(|(_, n)| !self.names.contains(n))
            .expect("unbounded suffix search");
        self.next_suffix.insert(hint.to_string(), k + 1);
        name
    }

    fn refresh(&mut self) {
        for anchor in std::mem::take(&mut self.dirty_anchors) {
            if let Some((pulls, subs)) = self.anchor_entries.remove(&anchor) {
                for k in pulls {
                    self.pullups.remove(&k);
                }
                for k in subs {
                    self.subs.remove(&k);
                }
            }
            let Some(groups) = self.child_groups.get(&anchor) else {
                continue;
            };
            let child_count = self.children.get(&anchor).map_or(0, BTreeSet::len);
            let own = self.props.get(&anchor);
            let anchor_name = self.d.name_of(anchor).to_string();
            let mut pulls = Vec::new();
            let mut subs = Vec::new();
            for ((name, ty), members) in groups {
                let count = members.len();
                if count < 2 {
                    continue;
                }
                let owns_name = own.is_some_and(|m| m.contains_key(name));
                if count == child_count && !owns_name {
                    pulls.push((anchor_name.clone(), name.clone(), ty.clone(), anchor));
                } else {
                    subs.push((
                        Reverse(count),
                        anchor_name.clone(),
                        name.clone(),
                        ty.clone(),
                        Some(anchor),
                    ));
                }
            }
            self.pullups.extend(pulls.iter().cloned());
            self.subs.extend(subs.iter().cloned());
            self.anchor_entries.insert(anchor, (pulls, subs));
        }
        for attr in std::mem::take(&mut self.dirty_roots) {
            if let Some(k) = self.root_entries.remove(&attr) {
                self.roots.remove(&k);
            }
            let count = self.root_groups.get(&attr).map_or(0, BTreeSet::len);
            if count >= 2 {
                let key = (
                    Reverse(count),
                    String::new(),
                    attr.0.clone(),
                    attr.1.clone(),
                    None,
                );
                self.roots.insert(key.clone());
                self.root_entries.insert(attr, key);
            }
        }
    }

    /// The step the deterministic schedule takes next, if any.
    pub(crate) fn next_step(&mut self) -> Option<Step> {
        self.refresh();
        if let Some((_, name, ty, anchor)) = self.pullups.first() {
            let members = self.child_groups[anchor][&(name.clone(), ty.clone())].clone();
            return Some(Step::PullUp(PullUpMatch {
                superclass: *anchor,
                name: name.clone(),
                ty: TypeRef::new(ty.as_str()),
                members,
            }));
        }
        let (kind, key) = match self.subs.first() {
            Some(k) => (ExtractKind::Subclass, k),
            None => (ExtractKind::Root, self.roots.first()?),
        };
        let (_, _, name, ty, anchor) = key;
        let attr = (name.clone(), ty.clone());
        let members = match anchor {
            Some(a) => self.child_groups[a][&attr].clone(),
            None => self.root_groups[&attr].clone(),
        };
        let candidate = ExtractCandidate {
            kind,
            anchor: *anchor,
            name: name.clone(),
            ty: TypeRef::new(ty.as_str()),
            members,
        };
        Some(match kind {
            ExtractKind::Subclass => Step::ExtractSub(candidate),
            ExtractKind::Root => Step::ExtractRoot(candidate),
        })
    }

    /// Applies a step produced by [`next_step`](Self::next_step). Elements
    /// are created in the same order as in the rules module.
    pub(crate) fn apply(&mut self, step: &Step) {
        match step {
            Step::PullUp(m) => {
                for &member in &m.members {
                    self.remove_property(member, &m.name);
                }
                self.add_property(m.superclass, &m.name, &m.ty.name);
            }
            Step::ExtractSub(c) | Step::ExtractRoot(c) => {
                let name = self.fresh_name(&format!("{}_{}", c.name, c.ty));
                self.names.insert(name.clone());
                let new = self.d.add_entity(name, true);
                self.add_property(new, &c.name, &c.ty.name);
                if let Some(anchor) = c.anchor {
                    for &member in &c.members {
                        self.unlink(member);
                    }
                    self.link(new, anchor);
                }
                for &member in &c.members {
                    self.link(member, new);
                }
                for &member in &c.members {
                    self.remove_property(member, &c.name);
                }
            }
        }
    }
}
