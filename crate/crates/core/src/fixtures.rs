//! Small hand-built diagrams used throughout the tests, the guide and the
//! benchmark presets.

use crate::diagram::ClassDiagram;

fn build(entities: &[&str], props: &[(&str, &str, &str)], gens: &[(&str, &str)]) -> ClassDiagram {
    let mut d = ClassDiagram::new();
    let ids: Vec<_> = entities.iter().map(|n| d.add_entity(*n, false)).collect();
    let id = |name: &str| ids[entities.iter().position(|n| *n == name).expect("declared")];
    for &(owner, name, ty) in props {
        d.add_property(id(owner), name, ty);
    }
    for &(specific, general) in gens {
        d.add_generalization(id(specific), id(general));
    }
    d
}

/// `B` and `C` both own `x: Int` under `A`: one pull-up.
pub fn f1() -> ClassDiagram {
    build(
        &["A", "B", "C"],
        &[("B", "x", "Int"), ("C", "x", "Int")],
        &[("B", "A"), ("C", "A")],
    )
}

/// Like [`f1`] with an extra subclass `D` lacking `x`: one subclass extraction.
pub fn f2() -> ClassDiagram {
    build(
        &["A", "B", "C", "D"],
        &[("B", "x", "Int"), ("C", "x", "Int")],
        &[("B", "A"), ("C", "A"), ("D", "A")],
    )
}

/// Three roots, two of which share `x: Str`: one root extraction.
pub fn f3() -> ClassDiagram {
    build(&["B", "C", "D"], &[("B", "x", "Str"), ("C", "x", "Str")], &[])
}

/// Two equally large, disjoint extraction sites under `A`. The choice does
/// not matter: both orders meet in isomorphic results.
pub fn f4() -> ClassDiagram {
    build(
        &["A", "B", "C", "D", "E"],
        &[
            ("B", "x", "Int"),
            ("C", "x", "Int"),
            ("D", "y", "Str"),
            ("E", "y", "Str"),
        ],
        &[("B", "A"), ("C", "A"), ("D", "A"), ("E", "A")],
    )
}

/// Two equally large extraction sites sharing the member `C`. Whichever is
/// taken first consumes `C`, so the two normal forms are not isomorphic.
pub fn f5() -> ClassDiagram {
    build(
        &["A", "B", "C", "D"],
        &[
            ("B", "x", "Int"),
            ("C", "x", "Int"),
            ("C", "y", "Str"),
            ("D", "y", "Str"),
        ],
        &[("B", "A"), ("C", "A"), ("D", "A")],
    )
}

/// Size-14 case (6 classes, 8 attributes) exercising pull-up and root
/// extraction on independent sites.
pub fn testcase1() -> ClassDiagram {
    build(
        &["Vehicle", "Car", "Bike", "Truck", "Person", "Company"],
        &[
            ("Car", "wheels", "Integer"),
            ("Car", "brand", "String"),
            ("Bike", "wheels", "Integer"),
            ("Bike", "brand", "String"),
            ("Truck", "wheels", "Integer"),
            ("Truck", "brand", "String"),
            ("Person", "email", "String"),
            ("Company", "email", "String"),
        ],
        &[("Car", "Vehicle"), ("Bike", "Vehicle"), ("Truck", "Vehicle")],
    )
}

/// Size-18 case (7 classes, 11 attributes) exercising all three rules,
/// including tied root extractions and a nested subclass extraction.
pub fn testcase2() -> ClassDiagram {
    build(
        &["Animal", "Dog", "Cat", "Fish", "Bird", "Employee", "Customer"],
        &[
            ("Dog", "legs", "Integer"),
            ("Dog", "fur", "String"),
            ("Cat", "legs", "Integer"),
            ("Cat", "fur", "String"),
            ("Fish", "fins", "Integer"),
            ("Bird", "legs", "Integer"),
            ("Bird", "wings", "Integer"),
            ("Employee", "id", "Integer"),
            ("Employee", "name", "String"),
            ("Customer", "id", "Integer"),
            ("Customer", "name", "String"),
        ],
        &[
            ("Dog", "Animal"),
            ("Cat", "Animal"),
            ("Fish", "Animal"),
            ("Bird", "Animal"),
        ],
    )
}

/// Every bundled fixture with its name.
pub fn all() -> Vec<(&'static str, ClassDiagram)> {
    vec![
        ("f1", f1()),
        ("f2", f2()),
        ("f3", f3()),
        ("f4", f4()),
        ("f5", f5()),
        ("testcase1", testcase1()),
        ("testcase2", testcase2()),
    ]
}
