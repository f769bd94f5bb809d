//! The finite statement space saturation works in.

use std::collections::BTreeSet;

use crate::labels::{label_closure, GenLabel, Label, LabelKind};
use crate::lang::{BdLPair, Form, Principal, SataId, Trustable};

use super::store::{SchemaInstance, TrustStore};

pub fn labels_of<'a, I>(forms: I) -> BTreeSet<GenLabel>
where
    I: IntoIterator<Item = &'a Form>,
{
    let mut out = BTreeSet::new();
    for f in forms {
        f.visit_labels(&mut |g| {
            out.insert(g.clone());
        });
    }
    out
}

pub fn names_of<'a, I>(forms: I) -> BTreeSet<SataId>
where
    I: IntoIterator<Item = &'a Form>,
{
    let mut out = BTreeSet::new();
    for f in forms {
        f.visit_names(&mut |id| {
            out.insert(id.clone());
        });
    }
    out
}

/// Local axiom label closure. `bound` is always included so that the
/// consequents of A5 and A6 stay inside the universe.
pub fn lalc<'a, I>(forms: I, las: &BTreeSet<SchemaInstance>) -> BTreeSet<GenLabel>
where
    I: IntoIterator<Item = &'a Form>,
{
    let mut seeds = labels_of(forms);
    seeds.extend(las.iter().flat_map(|s| s.labels()).cloned());
    seeds.insert(GenLabel::bound());
    label_closure(&seeds)
}

/// The names and labels a store's limited universe ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    pub principal: Principal,
    pub names: BTreeSet<SataId>,
    pub labels: BTreeSet<GenLabel>,
    /// Base labels of `labels`.
    pub bases: BTreeSet<Label>,
}

impl Universe {
    pub fn of_store(store: &TrustStore) -> Universe {
        let labels = lalc(store.assumptions(), store.las());
        let mut names = names_of(store.assumptions());
        names.extend(store.las().iter().filter_map(|s| s.name()).cloned());
        let bases = labels.iter().map(|g| g.base.clone()).collect();
        Universe {
            principal: store.principal().clone(),
            names,
            labels,
            bases,
        }
    }

    fn has_pair(&self, pair: &BdLPair) -> bool {
        self.names.contains(&pair.id) && self.labels.contains(&pair.label)
    }

    pub fn contains(&self, form: &Form) -> bool {
        match form {
            Form::Says { speaker, body } => self.names.contains(speaker) && self.has_pair(body),
            Form::Trusts { who, what } if *who == self.principal => match what {
                Trustable::BdL(p) => self.has_pair(p),
                Trustable::Says { speaker, body } => {
                    self.names.contains(speaker) && self.has_pair(body)
                }
            },
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        let n = self.names.len();
        let l = self.labels.len();
        n * l + 2 * n * n * l
    }

    /// Every statement of the universe, in `Form` order.
    pub fn enumerate(&self) -> BTreeSet<Form> {
        let mut out = BTreeSet::new();
        for id in &self.names {
            for g in &self.labels {
                let pair = BdLPair::new(id.clone(), g.clone());
                out.insert(Form::trusts_bdl(self.principal.clone(), pair.clone()));
                for speaker in &self.names {
                    out.insert(Form::trusts_says(
                        self.principal.clone(),
                        speaker.clone(),
                        pair.clone(),
                    ));
                    out.insert(Form::says(speaker.clone(), pair.clone()));
                }
            }
        }
        out
    }

    /// Universe base labels strictly narrower than `base`.
    pub fn narrowings<'a>(&'a self, base: &'a Label) -> impl Iterator<Item = &'a Label> + 'a {
        self.bases
            .iter()
            .filter(move |b| *b != base && base.weakly_broadens(b))
    }

    pub fn has_label(&self, kind: LabelKind, base: &Label) -> bool {
        self.labels.contains(&GenLabel::new(kind, base.clone()))
    }
}

pub fn limited_universe(store: &TrustStore) -> BTreeSet<Form> {
    Universe::of_store(store).enumerate()
}
