//! Axioms, local schemata and the saturation procedure.
//!
//! Saturation starts from a store's assumptions and applies every rule
//! instance whose premises are present until nothing new appears. All
//! conclusions are confined to the store's limited universe, which is
//! finite, so the loop terminates.

mod proof;
mod rules;
mod store;
mod universe;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::lang::Form;

pub use proof::{check_step, Axiom, Justification, ProofError, ProofTree, SideCondition, Source, Step};
pub use store::{SchemaInstance, SchemaParseError, StoreError, TrustStore};
pub use universe::{labels_of, lalc, limited_universe, names_of, Universe};

/// Statements of `v` derivable from `u` by a single rule application.
pub fn one_step(u: &BTreeSet<Form>, v: &BTreeSet<Form>, store: &TrustStore) -> BTreeSet<Form> {
    let universe = Universe::of_store(store);
    rules::derive_all(u, store, &universe)
        .into_keys()
        .filter(|f| v.contains(f))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Passes over the present set, including the final one that found nothing.
    pub iterations: usize,
    pub universe_size: usize,
}

#[derive(Debug, Clone)]
pub struct SaturationResult {
    store: TrustStore,
    universe: Universe,
    resulta: BTreeSet<Form>,
    resultb: BTreeSet<Form>,
    steps: BTreeMap<Form, Step>,
    stats: Stats,
}

pub fn saturate(store: &TrustStore) -> SaturationResult {
    let universe = Universe::of_store(store);
    let mut steps = rules::assumption_steps(store);
    let mut present: BTreeSet<Form> = steps.keys().cloned().collect();
    let mut stats = Stats {
        iterations: 0,
        universe_size: universe.size(),
    };

    if !present.is_empty() {
        loop {
            stats.iterations += 1;
            let fresh: Vec<(Form, Step)> = rules::derive_all(&present, store, &universe)
                .into_iter()
                .filter(|(f, _)| !present.contains(f))
                .collect();
            if fresh.is_empty() {
                break;
            }
            for (f, step) in fresh {
                present.insert(f.clone());
                steps.insert(f, step);
            }
        }
    }

    let resultb = present.iter().filter(|f| f.is_sattestor_free()).cloned().collect();
    SaturationResult {
        store: store.clone(),
        universe,
        resulta: present,
        resultb,
        steps,
        stats,
    }
}

impl SaturationResult {
    pub fn store(&self) -> &TrustStore {
        &self.store
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Every derived statement, assumptions included.
    pub fn resulta(&self) -> &BTreeSet<Form> {
        &self.resulta
    }

    /// The sattestor-free part of `resulta`.
    pub fn resultb(&self) -> &BTreeSet<Form> {
        &self.resultb
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn contains(&self, f: &Form) -> bool {
        self.resulta.contains(f)
    }

    pub fn step(&self, f: &Form) -> Option<&Step> {
        self.steps.get(f)
    }

    pub fn proof(&self, f: &Form) -> Option<ProofTree> {
        let step = self.steps.get(f)?;
        let premises = step
            .premises
            .iter()
            .map(|p| self.proof(p).expect("premise of a recorded step is derived"))
            .collect();
        Some(ProofTree {
            conclusion: f.clone(),
            rule: step.rule.clone(),
            premises,
            side_conditions: step.side_conditions.clone(),
        })
    }

    /// Re-checks every recorded step, independently of the matcher.
    pub fn validate(&self) -> Result<(), ProofError> {
        for (f, step) in &self.steps {
            check_step(&self.store, f, step)?;
            if let Some(missing) = step.premises.iter().find(|p| !self.resulta.contains(p)) {
                return Err(ProofError {
                    conclusion: f.to_string(),
                    rule: step.rule.to_string(),
                    reason: format!("premise `{missing}` is not derived"),
                });
            }
        }
        Ok(())
    }

    /// Statements sorted by their rendering, as printed by the CLI.
    pub fn sorted(set: &BTreeSet<Form>) -> Vec<String> {
        let mut out: Vec<String> = set.iter().map(|f| f.to_string()).collect();
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query must be a says- or trusts-statement, found `{0}`")]
    IllFormedQuery(String),
}

/// Proof of `f` from `store`, if it is derivable.
pub fn query(store: &TrustStore, f: &Form) -> Result<Option<ProofTree>, QueryError> {
    query_result(&saturate(store), f)
}

pub fn query_result(result: &SaturationResult, f: &Form) -> Result<Option<ProofTree>, QueryError> {
    if !f.is_atomic_statement() {
        return Err(QueryError::IllFormedQuery(f.to_string()));
    }
    Ok(result.proof(f))
}
