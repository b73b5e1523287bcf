//! Running the rules: deterministic normalization, exhaustive exploration
//! of all rule orders, and confluence checking over the explored space.

mod canon;
mod explore;
mod incremental;

pub use canon::{canonical_key, isomorphic, StateKey};
pub use explore::{
    check_confluence, explore, ConfluenceReport, ExploreStats, Limits, StateSpace, Transition,
};

use crate::diagram::{validate, ClassDiagram};
use crate::error::{Error, Result};
use crate::rules::Step;

use incremental::Workspace;

/// Which rules are offered at each state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Pull-ups first, then subclass extractions, then root extractions.
    #[default]
    Priority,
    /// All enabled steps of every kind.
    Free,
}

/// What to do when several steps are offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieHandling {
    /// Take the first step in the canonical order.
    #[default]
    Deterministic,
    /// Follow every offered step (exploration only).
    BranchAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Policy {
    pub mode: Mode,
    pub ties: TieHandling,
}

impl Policy {
    pub fn new(mode: Mode, ties: TieHandling) -> Self {
        Policy { mode, ties }
    }

    pub fn priority() -> Self {
        Policy::new(Mode::Priority, TieHandling::Deterministic)
    }

    pub fn free() -> Self {
        Policy::new(Mode::Free, TieHandling::Deterministic)
    }

    pub fn with_ties(self, ties: TieHandling) -> Self {
        Policy { ties, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub step: Step,
    /// Classes plus attributes after the step.
    pub size_after: usize,
}

/// The steps taken by a normalization run, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> + '_ {
        self.entries.iter().map(|e| &e.step)
    }
}

/// Applies the first offered step until none is left.
///
/// Both modes take the same path under deterministic ties: the first step
/// `Free` offers is the one `Priority` would take. Sites are tracked
/// incrementally, so a step costs time proportional to the part of the
/// diagram it touches.
///
/// Terminates after at most as many steps as `d` has properties, since
/// every step removes at least one.
pub fn normalize(d: &ClassDiagram, policy: &Policy) -> Result<(ClassDiagram, Trace)> {
    if policy.ties != TieHandling::Deterministic {
        return Err(Error::NondeterministicPolicy);
    }
    validate(d).into_result()?;
    let mut ws = Workspace::new(d.clone());
    let mut trace = Trace::default();
    while let Some(step) = ws.next_step() {
        ws.apply(&step);
        trace.entries.push(TraceEntry {
            step,
            size_after: ws.diagram().size(),
        });
    }
    Ok((ws.into_diagram(), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::semantic_signature;
    use crate::fixtures;
    use crate::rules::{applicable_steps, apply_step_in_place};

    /// Rescans the whole diagram before every step.
    fn naive(d: &ClassDiagram, policy: &Policy) -> (ClassDiagram, Vec<Step>) {
        let mut current = d.clone();
        let mut steps = Vec::new();
        while let Some(step) = applicable_steps(&current, policy).into_iter().next() {
            apply_step_in_place(&mut current, &step);
            steps.push(step);
        }
        (current, steps)
    }

    #[test]
    fn incremental_matches_naive_on_fixtures() {
        for (name, d) in fixtures::all() {
            for policy in [Policy::priority(), Policy::free()] {
                let (out, trace) = normalize(&d, &policy).unwrap();
                let (expected, steps) = naive(&d, &policy);
                assert_eq!(out, expected, "{name}");
                assert_eq!(trace.steps().cloned().collect::<Vec<_>>(), steps, "{name}");
            }
        }
    }

    #[test]
    fn incremental_matches_naive_on_random_forests() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let mut d = ClassDiagram::new();
            let n = rng.gen_range(1..=12);
            let ids: Vec<_> = (0..n).map(|i| d.add_entity(format!("E{i}"), false)).collect();
            for i in 1..n {
                if rng.gen_bool(0.7) {
                    d.add_generalization(ids[i], ids[rng.gen_range(0..i)]);
                }
            }
            for &e in &ids {
                for name in ["a", "b", "c"] {
                    if rng.gen_bool(0.5) {
                        d.add_property(e, name, ["Int", "Str"][rng.gen_range(0..2)]);
                    }
                }
            }
            let (out, trace) = normalize(&d, &Policy::priority()).unwrap();
            let (expected, steps) = naive(&d, &Policy::priority());
            assert_eq!(out, expected);
            assert_eq!(trace.steps().cloned().collect::<Vec<_>>(), steps);
        }
    }

    #[test]
    fn incremental_matches_naive_on_copies() {
        let d = crate::io::generate::preset("testcase2").unwrap();
        let d = crate::io::generate_case(&crate::io::CaseSpec::replicate(d, 12));
        let (out, trace) = normalize(&d, &Policy::priority()).unwrap();
        let (expected, steps) = naive(&d, &Policy::priority());
        assert_eq!(out, expected);
        assert_eq!(trace.len(), steps.len());
    }

    #[test]
    fn normalize_f1() {
        let (out, trace) = normalize(&fixtures::f1(), &Policy::priority()).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(matches!(trace.entries[0].step, Step::PullUp(_)));
        assert_eq!(trace.entries[0].size_after, 4);
        let a = out.entity_by_name("A").unwrap().id;
        assert_eq!(out.owned_properties(a).count(), 1);
        assert_eq!(out.property_count(), 1);
    }

    #[test]
    fn normalize_f2() {
        let (out, trace) = normalize(&fixtures::f2(), &Policy::priority()).unwrap();
        assert_eq!(trace.len(), 1);
        let n = out.entity_by_name("x_Int").unwrap();
        assert!(n.synthetic);
        assert_eq!(out.superclass(n.id), out.entity_by_name("A").map(|e| e.id));
    }

    #[test]
    fn normal_form_is_fixed_point() {
        let (once, _) = normalize(&fixtures::f2(), &Policy::priority()).unwrap();
        let (twice, trace) = normalize(&once, &Policy::priority()).unwrap();
        assert!(trace.is_empty());
        assert_eq!(once, twice);
    }

    #[test]
    fn normalize_testcases_preserves_leaves() {
        for d in [fixtures::testcase1(), fixtures::testcase2()] {
            let (out, trace) = normalize(&d, &Policy::priority()).unwrap();
            assert!(trace.len() <= d.property_count());
            assert!(validate(&out).is_ok());
            let before = semantic_signature(&d);
            let after = semantic_signature(&out);
            for (name, attrs) in &before {
                assert!(attrs.is_subset(&after[name]), "{name}");
            }
        }
    }

    #[test]
    fn rejects_branching_policy_and_invalid_input() {
        let branching = Policy::priority().with_ties(TieHandling::BranchAll);
        assert!(matches!(
            normalize(&fixtures::f1(), &branching),
            Err(Error::NondeterministicPolicy)
        ));
        let mut d = ClassDiagram::new();
        let a = d.add_entity("A", false);
        d.add_generalization(a, a);
        assert!(matches!(
            normalize(&d, &Policy::priority()),
            Err(Error::Invalid(_))
        ));
    }
}
