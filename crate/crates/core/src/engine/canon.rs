//! Canonical keys for class diagrams.
//!
//! Two diagrams are isomorphic when a bijection between their entities
//! preserves generalization edges, the multiset of owned `(name, type)`
//! properties, the synthetic flag, and the names of non-synthetic entities.
//! Synthetic entities may be renamed freely.
//!
//! Single inheritance makes every valid diagram a forest, so the classic
//! bottom-up tree encoding is an exact canonical form: each node's code is
//! its label followed by the sorted codes of its children, and the forest's
//! code is the sorted sequence of root codes.

use std::collections::HashMap;

use crate::diagram::{root_entities, ClassDiagram, EntityId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<u8>);

impl StateKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn label(d: &ClassDiagram, id: EntityId, props: Option<&Vec<(&str, &str)>>, out: &mut Vec<u8>) {
    let e = d.entity(id).expect("entity of this diagram");
    if e.synthetic {
        out.push(b'S');
    } else {
        out.push(b'N');
        put_str(out, &e.name);
    }
    let props = props.map_or(&[][..], |p| p.as_slice());
    out.extend_from_slice(&(props.len() as u32).to_le_bytes());
    for (name, ty) in props {
        put_str(out, name);
        put_str(out, ty);
    }
}

/// Byte string equal for exactly the isomorphic diagrams. Requires a valid
/// diagram.
pub fn canonical_key(d: &ClassDiagram) -> StateKey {
    let mut children: HashMap<EntityId, Vec<EntityId>> = HashMap::new();
    for g in d.generalizations() {
        children.entry(g.general).or_default().push(g.specific);
    }
    let mut props: HashMap<EntityId, Vec<(&str, &str)>> = HashMap::new();
    for p in d.properties() {
        props
            .entry(p.owner)
            .or_default()
            .push((p.name.as_str(), p.ty.name.as_str()));
    }
    for list in props.values_mut() {
        list.sort_unstable();
    }

    // Breadth-first order from the roots; codes are built in reverse so
    // children are always finished before their parent.
    let roots: Vec<EntityId> = root_entities(d).into_iter().collect();
    let mut order = roots.clone();
    let mut i = 0;
    while i < order.len() {
        if let Some(kids) = children.get(&order[i]) {
            order.extend_from_slice(kids);
        }
        i += 1;
    }

    let mut codes: HashMap<EntityId, Vec<u8>> = HashMap::with_capacity(order.len());
    for &id in order.iter().rev() {
        let mut kid_codes: Vec<Vec<u8>> = children
            .get(&id)
            .map(|kids| kids.iter().filter_map(|k| codes.remove(k)).collect())
            .unwrap_or_default();
        kid_codes.sort_unstable();
        let mut code = vec![b'('];
        label(d, id, props.get(&id), &mut code);
        for kid in kid_codes {
            code.extend_from_slice(&kid);
        }
        code.push(b')');
        codes.insert(id, code);
    }

    let mut root_codes: Vec<Vec<u8>> = roots.iter().filter_map(|r| codes.remove(r)).collect();
    root_codes.sort_unstable();
    let mut key = Vec::with_capacity(root_codes.iter().map(Vec::len).sum::<usize>() + 8);
    key.extend_from_slice(&(d.entity_count() as u32).to_le_bytes());
    for code in root_codes {
        key.extend_from_slice(&code);
    }
    StateKey(key)
}

pub fn isomorphic(a: &ClassDiagram, b: &ClassDiagram) -> bool {
    a.entity_count() == b.entity_count() && canonical_key(a) == canonical_key(b)
}
