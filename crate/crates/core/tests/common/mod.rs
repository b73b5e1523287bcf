//! Test oracles that share no code with the library beyond the diagram
//! container: a random diagram generator, an exhaustive isomorphism search,
//! attribute flattening by parent walks, and a rule matcher that enumerates
//! every (superclass, name, type) triple.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use redraft::{ClassDiagram, EntityId};

pub const NAMES: [&str; 4] = ["a", "b", "c", "d"];
pub const TYPES: [&str; 2] = ["Int", "Str"];

/// A valid diagram with `1..=max_entities` entities, each owning at most
/// `max_props` properties drawn from small pools so that rule sites are
/// common. Every entity after the first picks an earlier parent with
/// probability 0.7, which rules out cycles.
pub fn random_diagram(rng: &mut impl Rng, max_entities: usize, max_props: usize) -> ClassDiagram {
    let mut d = ClassDiagram::new();
    let n = rng.gen_range(1..=max_entities);
    let ids: Vec<EntityId> = (0..n)
        .map(|i| {
            let synthetic = rng.gen_bool(0.15);
            d.add_entity(format!("E{i}"), synthetic)
        })
        .collect();
    for i in 1..n {
        if rng.gen_bool(0.7) {
            d.add_generalization(ids[i], ids[rng.gen_range(0..i)]);
        }
    }
    for &e in &ids {
        let k = rng.gen_range(0..=max_props.min(NAMES.len()));
        for name in NAMES.choose_multiple(rng, k) {
            d.add_property(e, *name, *TYPES.choose(rng).unwrap());
        }
    }
    d
}

/// A copy of `d` built in shuffled order, with synthetic entities renamed.
/// Isomorphic to `d` by construction.
pub fn shuffled_copy(rng: &mut impl Rng, d: &ClassDiagram) -> ClassDiagram {
    let mut out = ClassDiagram::new();
    let mut entities: Vec<_> = d.entities().collect();
    entities.shuffle(rng);
    let mut map = HashMap::new();
    for (i, e) in entities.iter().enumerate() {
        let name = if e.synthetic {
            format!("syn{i}_{}", rng.gen::<u16>())
        } else {
            e.name.clone()
        };
        map.insert(e.id, out.add_entity(name, e.synthetic));
    }
    let mut props: Vec<_> = d.properties().collect();
    props.shuffle(rng);
    for p in props {
        out.add_property(map[&p.owner], p.name.clone(), p.ty.name.clone());
    }
    let mut gens: Vec<_> = d.generalizations().collect();
    gens.shuffle(rng);
    for g in gens {
        out.add_generalization(map[&g.specific], map[&g.general]);
    }
    out
}

/// `d` with one property's type flipped, if it has any property.
pub fn mutated_copy(rng: &mut impl Rng, d: &ClassDiagram) -> ClassDiagram {
    let mut out = shuffled_copy(rng, d);
    let props: Vec<_> = out
        .properties()
        .map(|p| (p.id, p.owner, p.name.clone(), p.ty.name.clone()))
        .collect();
    if let Some((id, owner, name, ty)) = props.choose(rng).cloned() {
        out.remove_property(id);
        let flipped = if ty == TYPES[0] { TYPES[1] } else { TYPES[0] };
        out.add_property(owner, name, flipped);
    }
    out
}

struct Shape {
    ids: Vec<EntityId>,
    synthetic: Vec<bool>,
    names: Vec<String>,
    props: Vec<BTreeSet<(String, String)>>,
    parent: Vec<Option<usize>>,
}

fn shape(d: &ClassDiagram) -> Shape {
    let ids: Vec<EntityId> = d.entities().map(|e| e.id).collect();
    let pos: HashMap<EntityId, usize> = ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut props = vec![BTreeSet::new(); ids.len()];
    for p in d.properties() {
        props[pos[&p.owner]].insert((p.name.clone(), p.ty.name.clone()));
    }
    let mut parent = vec![None; ids.len()];
    for g in d.generalizations() {
        parent[pos[&g.specific]] = Some(pos[&g.general]);
    }
    Shape {
        synthetic: d.entities().map(|e| e.synthetic).collect(),
        names: d.entities().map(|e| e.name.clone()).collect(),
        ids,
        props,
        parent,
    }
}

/// Exhaustive search for a bijection between entities that preserves the
/// synthetic flag, names of non-synthetic entities, owned (name, type)
/// sets and the superclass relation. Unused types are not compared.
pub fn brute_isomorphic(a: &ClassDiagram, b: &ClassDiagram) -> bool {
    if a.entity_count() != b.entity_count()
        || a.property_count() != b.property_count()
        || a.generalization_count() != b.generalization_count()
    {
        return false;
    }
    let (sa, sb) = (shape(a), shape(b));
    let compatible = |i: usize, j: usize| {
        sa.synthetic[i] == sb.synthetic[j]
            && (sa.synthetic[i] || sa.names[i] == sb.names[j])
            && sa.props[i] == sb.props[j]
    };
    let n = sa.ids.len();
    let mut image: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];

    fn search(
        i: usize,
        n: usize,
        image: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        sa: &Shape,
        sb: &Shape,
        compatible: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if i == n {
            return (0..n).all(|k| sa.parent[k].map(|p| image[p].unwrap()) == sb.parent[image[k].unwrap()]);
        }
        for j in 0..n {
            if used[j] || !compatible(i, j) {
                continue;
            }
            image[i] = Some(j);
            used[j] = true;
            if search(i + 1, n, image, used, sa, sb, compatible) {
                return true;
            }
            used[j] = false;
            image[i] = None;
        }
        false
    }
    search(0, n, &mut image, &mut used, &sa, &sb, &compatible)
}

/// Own plus inherited (name, type) pairs of every entity, keyed by name.
pub fn flattened(d: &ClassDiagram) -> BTreeMap<String, BTreeSet<(String, String)>> {
    let parent: HashMap<EntityId, EntityId> = d.generalizations().map(|g| (g.specific, g.general)).collect();
    let mut own: HashMap<EntityId, Vec<(String, String)>> = HashMap::new();
    for p in d.properties() {
        own.entry(p.owner)
            .or_default()
            .push((p.name.clone(), p.ty.name.clone()));
    }
    let mut out = BTreeMap::new();
    for e in d.entities() {
        let mut set = BTreeSet::new();
        let mut cur = Some(e.id);
        let mut hops = 0;
        while let Some(c) = cur {
            set.extend(own.get(&c).into_iter().flatten().cloned());
            cur = parent.get(&c).copied();
            hops += 1;
            assert!(hops <= d.entity_count(), "cycle through {}", e.name);
        }
        out.insert(e.name.clone(), set);
    }
    out
}

/// Names of entities without subclasses.
pub fn leaves(d: &ClassDiagram) -> BTreeSet<String> {
    let generals: BTreeSet<EntityId> = d.generalizations().map(|g| g.general).collect();
    d.entities()
        .filter(|e| !generals.contains(&e.id))
        .map(|e| e.name.clone())
        .collect()
}

/// Pull-up sites found by checking every (superclass, name, type) triple:
/// at least two direct subclasses, all of which own the property, and a
/// superclass without a property of that name.
pub fn brute_pullup_sites(d: &ClassDiagram) -> Vec<(EntityId, String, String)> {
    let mut sites = Vec::new();
    let attrs: BTreeSet<(String, String)> = d
        .properties()
        .map(|p| (p.name.clone(), p.ty.name.clone()))
        .collect();
    for sup in d.entities() {
        let subs: Vec<EntityId> = d
            .generalizations()
            .filter(|g| g.general == sup.id)
            .map(|g| g.specific)
            .collect();
        if subs.len() < 2 {
            continue;
        }
        for (name, ty) in &attrs {
            let owned_by = |e: EntityId| {
                d.properties()
                    .any(|p| p.owner == e && &p.name == name && &p.ty.name == ty)
            };
            let sup_has_name = d.properties().any(|p| p.owner == sup.id && &p.name == name);
            if !sup_has_name && subs.iter().all(|&s| owned_by(s)) {
                sites.push((sup.id, name.clone(), ty.clone()));
            }
        }
    }
    sites
}

/// Extraction sites of either kind found by brute force: groups of at least
/// two siblings (or roots) owning the same (name, type) that are not
/// pull-up sites.
pub fn brute_extract_sites(d: &ClassDiagram) -> usize {
    let parent: HashMap<EntityId, EntityId> = d.generalizations().map(|g| (g.specific, g.general)).collect();
    let mut groups: HashMap<(Option<EntityId>, String, String), usize> = HashMap::new();
    for p in d.properties() {
        *groups
            .entry((parent.get(&p.owner).copied(), p.name.clone(), p.ty.name.clone()))
            .or_default() += 1;
    }
    let pullups: BTreeSet<_> = brute_pullup_sites(d)
        .into_iter()
        .map(|(s, n, t)| (Some(s), n, t))
        .collect();
    groups
        .into_iter()
        .filter(|(k, n)| *n >= 2 && !pullups.contains(k))
        .count()
}

/// Number of pull-ups applied until no pull-up site is left, applying the
/// first site found each time.
pub fn brute_pullup_count(d: &ClassDiagram) -> usize {
    let mut d = d.clone();
    let mut steps = 0;
    while let Some((sup, name, ty)) = brute_pullup_sites(&d).into_iter().next() {
        let subs: BTreeSet<EntityId> = d
            .generalizations()
            .filter(|g| g.general == sup)
            .map(|g| g.specific)
            .collect();
        let doomed: Vec<_> = d
            .properties()
            .filter(|p| subs.contains(&p.owner) && p.name == name && p.ty.name == ty)
            .map(|p| p.id)
            .collect();
        for id in doomed {
            d.remove_property(id);
        }
        d.add_property(sup, name, ty);
        steps += 1;
    }
    assert_eq!(brute_extract_sites(&d), 0, "ladder left extraction sites");
    steps
}
