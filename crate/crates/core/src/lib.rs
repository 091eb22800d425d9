//! First-order logic toolkit: parsing, well-formedness scoring, finite-domain
//! entailment with counterexamples, and NL-to-FOL conversion metrics.

pub mod corpus;
pub mod engine;
pub mod label;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod sat;
pub mod semantics;
pub mod syntax;
pub mod wellformed;
