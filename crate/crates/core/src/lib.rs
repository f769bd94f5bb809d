//! Trust derivation for labeled self-authenticating web addresses.
//!
//! A client's trust store (initial trust, local axiom schemata and the
//! says-statements gathered from sattestation headers) is saturated under a
//! fixed set of axioms. Every derived statement carries a proof, delegation
//! chains can be read back out of those proofs, and a finite Kripke-model
//! checker is included to test the axioms against the semantics.

pub mod chains;
pub mod engine;
pub mod ingest;
pub mod labels;
pub mod lang;
pub mod semantics;
