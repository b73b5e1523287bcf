//! Parametric benchmark cases.

use std::collections::HashMap;

use crate::diagram::ClassDiagram;
use crate::fixtures;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseSpec {
    /// `classes` subclasses that all own the same `attrs_per_class`
    /// properties, optionally under one common root `C0000`.
    PullUpLadder {
        classes: usize,
        attrs_per_class: usize,
        with_root: bool,
    },
    /// `copies` disjoint copies of `base`. Entity names get a `_NNNN`
    /// suffix; property names and types are shared between copies.
    Replicate { base: ClassDiagram, copies: usize },
}

impl CaseSpec {
    pub fn ladder(classes: usize, attrs_per_class: usize) -> Self {
        CaseSpec::PullUpLadder {
            classes,
            attrs_per_class,
            with_root: true,
        }
    }

    pub fn replicate(base: ClassDiagram, copies: usize) -> Self {
        CaseSpec::Replicate { base, copies }
    }
}

fn width(n: usize, min: usize) -> usize {
    n.to_string().len().max(min)
}

/// Builds the diagram described by `spec`. Output is deterministic and
/// valid for every spec whose `base` is valid.
pub fn generate_case(spec: &CaseSpec) -> ClassDiagram {
    match spec {
        CaseSpec::PullUpLadder {
            classes,
            attrs_per_class,
            with_root,
        } => ladder(*classes, *attrs_per_class, *with_root),
        CaseSpec::Replicate { base, copies } => replicate(base, *copies),
    }
}

fn ladder(classes: usize, attrs: usize, with_root: bool) -> ClassDiagram {
    let cw = width(classes, 4);
    let aw = width(attrs, 2);
    let mut d = ClassDiagram::new();
    let root = with_root.then(|| d.add_entity(format!("C{:0cw$}", 0), false));
    for c in 1..=classes {
        let class = d.add_entity(format!("C{c:0cw$}"), false);
        if let Some(root) = root {
            d.add_generalization(class, root);
        }
        for a in 1..=attrs {
            let ty = if a % 2 == 1 { "Int" } else { "String" };
            d.add_property(class, format!("a{a:0aw$}"), ty);
        }
    }
    d
}

fn replicate(base: &ClassDiagram, copies: usize) -> ClassDiagram {
    let w = width(copies, 4);
    let mut d = ClassDiagram::new();
    for t in base.types() {
        d.add_type(t.name.clone());
    }
    // The suffix has a fixed width, so distinct (name, copy) pairs never
    // produce the same name.
    for k in 1..=copies {
        let mut map = HashMap::new();
        for e in base.entities() {
            map.insert(e.id, d.add_entity(format!("{}_{k:0w$}", e.name), e.synthetic));
        }
        for p in base.properties() {
            d.add_property(map[&p.owner], p.name.clone(), p.ty.name.clone());
        }
        for g in base.generalizations() {
            d.add_generalization(map[&g.specific], map[&g.general]);
        }
    }
    d
}

/// Named benchmark presets.
pub const PRESETS: [&str; 4] = ["testcase1", "testcase2", "testcase3", "testcase2_1000"];

/// `testcase1`/`testcase2` are the bundled small cases, `testcase3` pulls
/// ten attributes up from 500 classes, and `testcase2_1000` is a 1000-fold
/// copy of `testcase2`.
pub fn preset(name: &str) -> Option<ClassDiagram> {
    match name {
        "testcase1" => Some(fixtures::testcase1()),
        "testcase2" => Some(fixtures::testcase2()),
        "testcase3" => Some(generate_case(&CaseSpec::ladder(500, 10))),
        "testcase2_1000" => Some(generate_case(&CaseSpec::replicate(fixtures::testcase2(), 1000))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::validate;
    use crate::engine::{isomorphic, normalize, Policy};
    use crate::io::native::write_native;
    use crate::rules::Step;

    #[test]
    fn smallest_ladder_is_f1() {
        let d = generate_case(&CaseSpec::ladder(2, 1));
        let text = String::from_utf8(write_native(&d))
            .unwrap()
            .replace("C0000", "A")
            .replace("C0001", "B")
            .replace("C0002", "C")
            .replace("a01", "x");
        assert_eq!(text.as_bytes(), write_native(&fixtures::f1()));
    }

    #[test]
    fn ladder_500_by_10() {
        let d = generate_case(&CaseSpec::ladder(500, 10));
        assert!(validate(&d).is_ok());
        assert_eq!(d.entity_count(), 501);
        assert_eq!(d.property_count(), 5000);
        assert_eq!(d.size(), 5501);
        let rootless = generate_case(&CaseSpec::PullUpLadder {
            classes: 500,
            attrs_per_class: 10,
            with_root: false,
        });
        assert_eq!(rootless.size(), 5500);
    }

    #[test]
    fn ladder_normalizes_in_k_pullups() {
        for (c, k) in [(2, 1), (3, 4), (5, 2)] {
            let (out, trace) =
                normalize(&generate_case(&CaseSpec::ladder(c, k)), &Policy::priority()).unwrap();
            assert_eq!(trace.len(), k);
            assert!(trace.steps().all(|s| matches!(s, Step::PullUp(_))));
            let root = out.entity_by_name("C0000").unwrap().id;
            assert_eq!(out.owned_properties(root).count(), k);
            assert_eq!(out.property_count(), k);
        }
    }

    #[test]
    fn rootless_ladder_also_takes_k_steps() {
        let spec = CaseSpec::PullUpLadder {
            classes: 4,
            attrs_per_class: 3,
            with_root: false,
        };
        let (_, trace) = normalize(&generate_case(&spec), &Policy::priority()).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(matches!(trace.entries[0].step, Step::ExtractRoot(_)));
    }

    #[test]
    fn replicate_copies() {
        let base = fixtures::testcase2();
        let d = generate_case(&CaseSpec::replicate(base.clone(), 3));
        assert!(validate(&d).is_ok());
        assert_eq!(d.size(), 3 * base.size());
        assert!(d.entity_by_name("Dog_0002").is_some());
        let one = generate_case(&CaseSpec::replicate(base.clone(), 1));
        assert_eq!(one.size(), base.size());
        assert!(!isomorphic(&one, &base));
    }

    #[test]
    fn replicate_names_stay_distinct() {
        let mut base = ClassDiagram::new();
        base.add_entity("A", false);
        base.add_entity("A_0001", false);
        let d = generate_case(&CaseSpec::replicate(base, 2));
        assert!(validate(&d).is_ok());
        assert_eq!(d.entity_count(), 4);
    }

    #[test]
    fn presets_exist() {
        for name in PRESETS {
            assert!(preset(name).is_some(), "{name}");
        }
        assert!(preset("nope").is_none());
        assert_eq!(preset("testcase2_1000").unwrap().size(), 18_000);
    }
}
