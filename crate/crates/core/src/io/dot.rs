//! Graphviz export: one record node per entity listing its own
//! properties, one hollow-arrow edge per generalization.

use std::fmt::Write as _;

use crate::diagram::ClassDiagram;

fn quote(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn record_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\' | ' ') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

pub fn export_dot(d: &ClassDiagram) -> String {
    let mut out = String::from("digraph ClassDiagram {\n");
    if d.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  rankdir=BT;\n  node [shape=record];\n");

    let mut entities: Vec<_> = d.entities().collect();
    entities.sort_by(|a, b| a.name.cmp(&b.name));
    for e in &entities {
        let mut props: Vec<_> = d.owned_properties(e.id).collect();
        props.sort_by(|a, b| (&a.name, &a.ty).cmp(&(&b.name, &b.ty)));
        let mut fields = String::new();
        for p in props {
            let _ = write!(
                fields,
                "{}\\ :\\ {}\\l",
                record_field(&p.name),
                record_field(&p.ty.name)
            );
        }
        let style = if e.synthetic { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{{{}|{}}}\"{style}];",
            quote(&e.name),
            quote(&record_field(&e.name)),
            quote(&fields)
        );
    }

    let mut edges: Vec<_> = d
        .generalizations()
        .map(|g| (d.name_of(g.specific), d.name_of(g.general)))
        .collect();
    edges.sort_unstable();
    for (specific, general) in edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [arrowhead=empty];",
            quote(specific),
            quote(general)
        );
    }
    out.push_str("}\n");
    out
}
