use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rayon::prelude::*;

use super::canon::{canonical_key, StateKey};
use super::{Policy, TieHandling};
use crate::diagram::{validate, ClassDiagram};
use crate::error::{Error, Result};
use crate::rules::{applicable_steps, apply_step_in_place, Step};

/// Bounds on an exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_time: Option<Duration>,
}

impl Limits {
    pub const DEFAULT_MAX_STATES: usize = 100_000;
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: Self::DEFAULT_MAX_STATES,
            max_time: None,
        }
    }
}

/// A labelled edge between two states, given as indices into
/// [`StateSpace::states`]. The step refers to the source representative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub source: usize,
    pub step: Step,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExploreStats {
    pub states: usize,
    pub transitions: usize,
    pub elapsed: Duration,
}

/// States reachable from a diagram, one representative per isomorphism
/// class, in breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub states: IndexMap<StateKey, ClassDiagram>,
    pub transitions: BTreeSet<Transition>,
    pub initial: usize,
    /// States that were expanded and offered no step.
    pub finals: BTreeSet<usize>,
    /// False when a limit stopped the search early.
    pub complete: bool,
    pub stats: ExploreStats,
}

impl StateSpace {
    pub fn state(&self, index: usize) -> &ClassDiagram {
        &self.states[index]
    }

    pub fn key(&self, index: usize) -> &StateKey {
        self.states.get_index(index).expect("state index").0
    }

    pub fn final_states(&self) -> impl Iterator<Item = &ClassDiagram> + '_ {
        self.finals.iter().map(|&i| &self.states[i])
    }

    pub fn outgoing(&self, index: usize) -> impl Iterator<Item = &Transition> + '_ {
        self.transitions.iter().filter(move |t| t.source == index)
    }
}

type Successor = (Step, ClassDiagram, StateKey);

fn successors(d: &ClassDiagram, policy: &Policy) -> Vec<Successor> {
    let mut steps = applicable_steps(d, policy);
    if policy.ties == TieHandling::Deterministic {
        steps.truncate(1);
    }
    steps
        .into_iter()
        .map(|step| {
            let mut next = d.clone();
            apply_step_in_place(&mut next, &step);
            let key = canonical_key(&next);
            (step, next, key)
        })
        .collect()
}

/// Breadth-first closure of the rules from `d`, with states identified up
/// to isomorphism. Each frontier level is expanded in parallel and merged
/// in frontier order, so the result does not depend on thread scheduling.
///
/// Hitting a limit is not an error: the partial space comes back with
/// `complete == false`.
pub fn explore(d: &ClassDiagram, policy: &Policy, limits: &Limits) -> Result<StateSpace> {
    validate(d).into_result()?;
    let start = Instant::now();
    let mut states = IndexMap::new();
    states.insert(canonical_key(d), d.clone());
    let mut transitions = BTreeSet::new();
    let mut finals = BTreeSet::new();
    let mut complete = true;
    let mut frontier = vec![0usize];

    'search: while !frontier.is_empty() {
        if limits.max_time.is_some_and(|t| start.elapsed() > t) {
            complete = false;
            break;
        }
        let expanded: Vec<(usize, Vec<Successor>)> = frontier
            .par_iter()
            .map(|&i| (i, successors(&states[i], policy)))
            .collect();
        let mut next = Vec::new();
        for (source, succs) in expanded {
            if succs.is_empty() {
                finals.insert(source);
            }
            for (step, diagram, key) in succs {
                let target = match states.get_index_of(&key) {
                    Some(t) => t,
                    None => {
                        if states.len() >= limits.max_states {
                            complete = false;
                            break 'search;
                        }
                        let (t, _) = states.insert_full(key, diagram);
                        next.push(t);
                        t
                    }
                };
                transitions.insert(Transition { source, step, target });
            }
        }
        frontier = next;
    }

    let stats = ExploreStats {
        states: states.len(),
        transitions: transitions.len(),
        elapsed: start.elapsed(),
    };
    Ok(StateSpace {
        states,
        transitions,
        initial: 0,
        finals,
        complete,
        stats,
    })
}

#[derive(Debug, Clone)]
pub struct ConfluenceReport {
    pub confluent: bool,
    pub final_count: usize,
    /// Two non-isomorphic final diagrams when not confluent.
    pub witnesses: Vec<ClassDiagram>,
}

/// Confluent iff the complete space has exactly one final state. Since
/// states are deduplicated by canonical key, distinct finals are pairwise
/// non-isomorphic.
pub fn check_confluence(s: &StateSpace) -> Result<ConfluenceReport> {
    if !s.complete {
        return Err(Error::IncompleteExploration);
    }
    let final_count = s.finals.len();
    let confluent = final_count == 1;
    let witnesses = if confluent {
        Vec::new()
    } else {
        s.final_states().take(2).cloned().collect()
    };
    Ok(ConfluenceReport {
        confluent,
        final_count,
        witnesses,
    })
}
