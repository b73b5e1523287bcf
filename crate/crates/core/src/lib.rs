//! Restructuring of class diagrams by graph rewriting.
//!
//! A [`ClassDiagram`] holds entities (classes), the properties they own and
//! single-inheritance generalizations. Three rules remove duplicated
//! properties:
//!
//! 1. pull a property shared by *all* direct subclasses up into their
//!    superclass,
//! 2. extract a new intermediate subclass for a property shared by *some*
//!    direct subclasses,
//! 3. extract a new root class for a property shared by several roots.
//!
//! [`normalize`] runs them to a fixed point along one deterministic path.
//! [`explore`] follows every order the rules allow, merging isomorphic
//! states, and [`check_confluence`] tells whether all paths meet.
//!
//! ```
//! use redraft::{fixtures, normalize, Policy};
//!
//! let (result, trace) = normalize(&fixtures::f1(), &Policy::priority()).unwrap();
//! assert_eq!(trace.len(), 1);
//! let a = result.entity_by_name("A").unwrap();
//! assert_eq!(result.owned_properties(a.id).count(), 1);
//! ```

pub mod diagram;
pub mod engine;
mod error;
pub mod fixtures;
pub mod io;
pub mod rules;

pub use diagram::{
    direct_subclasses, flattened_attributes, fresh_entity_name, root_entities, semantic_signature, validate,
    ClassDiagram, Entity, EntityId, Generalization, GeneralizationId, Property, PropertyId,
    SemanticSignature, TypeRef, ValidationReport,
};
pub use engine::{
    canonical_key, check_confluence, explore, isomorphic, normalize, ConfluenceReport, Limits, Mode, Policy,
    StateKey, StateSpace, TieHandling, Trace,
};
pub use error::{Error, Result};
pub use rules::{
    applicable_steps, apply_extract, apply_pullup, apply_step, find_extract_candidates, find_pullup_matches,
    maximal_candidates, ExtractCandidate, ExtractKind, PullUpMatch, Step,
};

// The guide's code listings run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/diagrams.md")]
    mod diagrams {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/exploration.md")]
    mod exploration {}
    #[doc = include_str!("../../../book/src/isomorphism.md")]
    mod isomorphism {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/generator.md")]
    mod generator {}
}
