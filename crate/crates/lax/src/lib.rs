//! Proof terms for intuitionistic logic extended with disjunctive axioms, read as
//! concurrent programs whose sessions communicate through typed channels.

pub mod report;
pub mod rewrite;
pub mod syntax;
pub mod typing;
pub mod strategy;
pub mod analysis;
pub mod examples;
