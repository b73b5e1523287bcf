//! Line-oriented text format.
//!
//! ```text
//! # comment
//! entity A @0
//! entity x_Int synthetic @3
//! prop B.x: Int @1
//! gen B -> A @0
//! type Unused
//! ```
//!
//! The trailing `@N` id annotations are optional on input; when present
//! they are kept, so writing and re-reading a diagram is exact. `type`
//! lines declare types no property uses. Declarations may appear in any
//! order and refer to entities by name.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::diagram::{validate, ClassDiagram, EntityId, GeneralizationId, PropertyId, TypeRef};
use crate::error::{Error, Result};

pub fn write_native(d: &ClassDiagram) -> Vec<u8> {
    let mut out = String::new();
    for e in d.entities() {
        let flag = if e.synthetic { " synthetic" } else { "" };
        let _ = writeln!(out, "entity {}{flag} @{}", e.name, e.id.0);
    }
    for p in d.properties() {
        let _ = writeln!(
            out,
            "prop {}.{}: {} @{}",
            d.name_of(p.owner),
            p.name,
            p.ty,
            p.id.0
        );
    }
    for g in d.generalizations() {
        let _ = writeln!(
            out,
            "gen {} -> {} @{}",
            d.name_of(g.specific),
            d.name_of(g.general),
            g.id.0
        );
    }
    let used: HashSet<&TypeRef> = d.properties().map(|p| &p.ty).collect();
    for t in d.types().filter(|t| !used.contains(t)) {
        let _ = writeln!(out, "type {t}");
    }
    out.into_bytes()
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits off a trailing `@N` annotation.
fn split_id(rest: &str, line: usize, column: usize) -> Result<(&str, Option<u32>)> {
    match rest.rsplit_once(" @") {
        Some((head, id)) => {
            let id = id
                .trim()
                .parse()
                .map_err(|_| err(line, column + head.len() + 2, format!("bad id {id:?}")))?;
            Ok((head.trim_end(), Some(id)))
        }
        None => Ok((rest.trim_end(), None)),
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '#' | '@'))
}

enum Decl<'a> {
    Prop {
        owner: &'a str,
        name: &'a str,
        ty: &'a str,
        id: Option<u32>,
    },
    Gen {
        specific: &'a str,
        general: &'a str,
        id: Option<u32>,
    },
}

pub fn parse_native(bytes: &[u8]) -> Result<ClassDiagram> {
    let text = super::utf8(bytes)?;
    let mut d = ClassDiagram::new();
    let mut by_name: HashMap<&str, EntityId> = HashMap::new();
    let mut pending: Vec<(usize, usize, Decl<'_>)> = Vec::new();
    let mut implicit_entities = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let indent = content.len() - content.trim_start().len();
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let col = indent + 1;
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest_col = col + keyword.len() + 1;
        let rest = rest.trim_start();
        match keyword {
            "entity" => {
                let (head, id) = split_id(rest, line, rest_col)?;
                let mut words = head.split_whitespace();
                let name = words
                    .next()
                    .ok_or_else(|| err(line, rest_col, "missing entity name"))?;
                let synthetic = match words.next() {
                    None => false,
                    Some("synthetic") => true,
                    Some(other) => return Err(err(line, rest_col, format!("unexpected {other:?}"))),
                };
                if let Some(extra) = words.next() {
                    return Err(err(line, rest_col, format!("unexpected {extra:?}")));
                }
                if !is_name(name) {
                    return Err(err(line, rest_col, format!("bad entity name {name:?}")));
                }
                if by_name.contains_key(name) {
                    return Err(Error::DuplicateName(name.to_string()));
                }
                let eid = match id {
                    Some(id) => {
                        if d.entity(EntityId(id)).is_some() {
                            return Err(err(line, rest_col, format!("duplicate id @{id}")));
                        }
                        d.insert_entity(EntityId(id), name.to_string(), synthetic);
                        EntityId(id)
                    }
                    None => {
                        implicit_entities.push((name, synthetic));
                        continue;
                    }
                };
                by_name.insert(name, eid);
            }
            "prop" => {
                let (head, id) = split_id(rest, line, rest_col)?;
                let (target, ty) = head
                    .split_once(':')
                    .ok_or_else(|| err(line, rest_col, "expected `<entity>.<name>: <type>`"))?;
                let (owner, name) = target
                    .trim()
                    .rsplit_once('.')
                    .ok_or_else(|| err(line, rest_col, "expected `<entity>.<name>`"))?;
                let ty = ty.trim();
                for part in [owner, name, ty] {
                    if !is_name(part) {
                        return Err(err(line, rest_col, format!("bad name {part:?}")));
                    }
                }
                pending.push((line, rest_col, Decl::Prop { owner, name, ty, id }));
            }
            "gen" => {
                let (head, id) = split_id(rest, line, rest_col)?;
                let (specific, general) = head
                    .split_once("->")
                    .ok_or_else(|| err(line, rest_col, "expected `<specific> -> <general>`"))?;
                let (specific, general) = (specific.trim(), general.trim());
                for part in [specific, general] {
                    if !is_name(part) {
                        return Err(err(line, rest_col, format!("bad name {part:?}")));
                    }
                }
                pending.push((
                    line,
                    rest_col,
                    Decl::Gen {
                        specific,
                        general,
                        id,
                    },
                ));
            }
            "type" => {
                if !is_name(rest) {
                    return Err(err(line, rest_col, format!("bad type name {rest:?}")));
                }
                d.add_type(rest);
            }
            other => return Err(err(line, col, format!("unknown declaration {other:?}"))),
        }
    }

    for (name, synthetic) in implicit_entities {
        if by_name.contains_key(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        let id = d.add_entity(name, synthetic);
        by_name.insert(name, id);
    }

    let resolve = |name: &str| {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::DanglingRef(name.to_string()))
    };
    // Annotated declarations first, so implicit ids never collide with them.
    pending.sort_by_key(|(_, _, decl)| match decl {
        Decl::Prop { id, .. } | Decl::Gen { id, .. } => id.is_none(),
    });
    for (line, col, decl) in pending {
        match decl {
            Decl::Prop { owner, name, ty, id } => {
                let owner = resolve(owner)?;
                match id {
                    Some(id) if d.property(PropertyId(id)).is_some() => {
                        return Err(err(line, col, format!("duplicate id @{id}")));
                    }
                    Some(id) => d.insert_property(PropertyId(id), owner, name.to_string(), TypeRef::new(ty)),
                    None => {
                        d.add_property(owner, name, ty);
                    }
                }
            }
            Decl::Gen {
                specific,
                general,
                id,
            } => {
                let (s, g) = (resolve(specific)?, resolve(general)?);
                match id {
                    Some(id) if d.generalization(GeneralizationId(id)).is_some() => {
                        return Err(err(line, col, format!("duplicate id @{id}")));
                    }
                    Some(id) => d.insert_generalization(GeneralizationId(id), s, g),
                    None => {
                        d.add_generalization(s, g);
                    }
                }
            }
        }
    }

    validate(&d).into_result()?;
    Ok(d)
}
