//! XMI-style XML subset.
//!
//! ```xml
//! <?xml version="1.0" encoding="UTF-8"?>
//! <model>
//!   <entity id="e1" name="A"/>
//!   <entity id="e2" name="x_Int" synthetic="true"/>
//!   <property id="p1" owner="e2" name="x" type="Int"/>
//!   <generalization id="g1" specific="e2" general="e1"/>
//! </model>
//! ```
//!
//! Inheritance is stored once, as a directed reference from the specific
//! to the general entity. The writer orders elements by name and numbers
//! ids in output order, so its output is a fixed point of read-then-write.

use std::collections::HashMap;
use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::diagram::{validate, ClassDiagram, EntityId};
use crate::error::{Error, Result};

use super::line_col;

pub fn write_xmi(d: &ClassDiagram) -> Vec<u8> {
    let mut entities: Vec<_> = d.entities().collect();
    entities.sort_by(|a, b| a.name.cmp(&b.name));
    let xml_ids: HashMap<EntityId, String> = entities
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id, format!("e{}", i + 1)))
        .collect();

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<model>\n");
    for e in &entities {
        let _ = write!(
            out,
            "  <entity id=\"{}\" name=\"{}\"",
            xml_ids[&e.id],
            escape(e.name.as_str())
        );
        if e.synthetic {
            out.push_str(" synthetic=\"true\"");
        }
        out.push_str("/>\n");
    }

    let mut props: Vec<_> = d.properties().collect();
    props.sort_by(|a, b| (d.name_of(a.owner), &a.name, &a.ty).cmp(&(d.name_of(b.owner), &b.name, &b.ty)));
    for (i, p) in props.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <property id=\"p{}\" owner=\"{}\" name=\"{}\" type=\"{}\"/>",
            i + 1,
            xml_ids[&p.owner],
            escape(p.name.as_str()),
            escape(p.ty.name.as_str())
        );
    }

    let mut gens: Vec<_> = d.generalizations().collect();
    gens.sort_by(|a, b| {
        (d.name_of(a.specific), d.name_of(a.general)).cmp(&(d.name_of(b.specific), d.name_of(b.general)))
    });
    for (i, g) in gens.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <generalization id=\"g{}\" specific=\"{}\" general=\"{}\"/>",
            i + 1,
            xml_ids[&g.specific],
            xml_ids[&g.general]
        );
    }
    out.push_str("</model>\n");
    out.into_bytes()
}

struct Attrs {
    values: HashMap<String, String>,
}

impl Attrs {
    fn take(&mut self, key: &str, at: (usize, usize), element: &str) -> Result<String> {
        self.values.remove(key).ok_or_else(|| Error::Parse {
            line: at.0,
            column: at.1,
            message: format!("<{element}> lacks attribute `{key}`"),
        })
    }
}

fn attributes(start: &BytesStart<'_>, at: (usize, usize)) -> Result<Attrs> {
    let mut values = HashMap::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| Error::Parse {
            line: at.0,
            column: at.1,
            message: e.to_string(),
        })?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| Error::Parse {
                line: at.0,
                column: at.1,
                message: e.to_string(),
            })?
            .into_owned();
        values.insert(key, value);
    }
    Ok(Attrs { values })
}

enum Raw {
    Entity {
        id: String,
        name: String,
        synthetic: bool,
    },
    Property {
        owner: String,
        name: String,
        ty: String,
    },
    Generalization {
        specific: String,
        general: String,
    },
}

/// Reads the XML subset. Element ids are only used to resolve references;
/// internal ids follow document order.
pub fn parse_xmi(bytes: &[u8]) -> Result<ClassDiagram> {
    let text = super::utf8(bytes)?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut raws: Vec<Raw> = Vec::new();
    let mut depth = 0usize;
    let mut seen_root = false;
    let mut open_child: Option<String> = None;

    loop {
        let event = reader.read_event().map_err(|e| {
            let (line, column) = line_col(text, reader.error_position() as usize);
            Error::Parse {
                line,
                column,
                message: e.to_string(),
            }
        })?;
        // Start of the markup just read.
        let end = (reader.buffer_position() as usize).min(text.len());
        let at = line_col(text, text[..end].rfind('<').unwrap_or(0));
        let (start, empty) = match event {
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => continue,
            Event::Text(t) if t.iter().all(u8::is_ascii_whitespace) => continue,
            Event::Text(_) | Event::CData(_) => {
                return Err(Error::Parse {
                    line: at.0,
                    column: at.1,
                    message: "unexpected text content".into(),
                })
            }
            Event::End(_) => {
                if open_child.take().is_none() {
                    depth = depth.saturating_sub(1);
                }
                continue;
            }
            Event::Start(s) => (s, false),
            Event::Empty(s) => (s, true),
        };
        let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        if open_child.is_some() {
            return Err(Error::UnsupportedElement(name));
        }
        if depth == 0 {
            if name != "model" || seen_root {
                return Err(Error::UnsupportedElement(name));
            }
            seen_root = true;
            if !empty {
                depth = 1;
            }
            continue;
        }
        let mut attrs = attributes(&start, at)?;
        let raw = match name.as_str() {
            "entity" => Raw::Entity {
                id: attrs.take("id", at, &name)?,
                name: attrs.take("name", at, &name)?,
                synthetic: match attrs.values.remove("synthetic").as_deref() {
                    None | Some("false") => false,
                    Some("true") => true,
                    Some(other) => {
                        return Err(Error::Parse {
                            line: at.0,
                            column: at.1,
                            message: format!("bad synthetic flag {other:?}"),
                        })
                    }
                },
            },
            "property" => {
                attrs.take("id", at, &name)?;
                Raw::Property {
                    owner: attrs.take("owner", at, &name)?,
                    name: attrs.take("name", at, &name)?,
                    ty: attrs.take("type", at, &name)?,
                }
            }
            "generalization" => {
                attrs.take("id", at, &name)?;
                Raw::Generalization {
                    specific: attrs.take("specific", at, &name)?,
                    general: attrs.take("general", at, &name)?,
                }
            }
            _ => return Err(Error::UnsupportedElement(name)),
        };
        raws.push(raw);
        if !empty {
            open_child = Some(name);
        }
    }
    if !seen_root {
        let (line, column) = line_col(text, text.len());
        return Err(Error::Parse {
            line,
            column,
            message: "missing <model> root".into(),
        });
    }

    let mut d = ClassDiagram::new();
    let mut ids: HashMap<String, EntityId> = HashMap::new();
    for raw in &raws {
        if let Raw::Entity { id, name, synthetic } = raw {
            let eid = d.add_entity(name.clone(), *synthetic);
            if ids.insert(id.clone(), eid).is_some() {
                return Err(Error::DuplicateName(id.clone()));
            }
        }
    }
    let resolve = |r: &str| {
        ids.get(r)
            .copied()
            .ok_or_else(|| Error::DanglingRef(r.to_string()))
    };
    for raw in &raws {
        match raw {
            Raw::Entity { .. } => {}
            Raw::Property { owner, name, ty } => {
                let owner = resolve(owner)?;
                d.add_property(owner, name.clone(), ty.clone());
            }
            Raw::Generalization { specific, general } => {
                d.add_generalization(resolve(specific)?, resolve(general)?);
            }
        }
    }
    validate(&d).into_result()?;
    Ok(d)
}
