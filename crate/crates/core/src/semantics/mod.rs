//! Finite Kripke models and truth evaluation.
//!
//! A model fixes worlds, a reflexive accessibility relation per principal,
//! and for every world: which SATAs carry each label, what each SATA utters,
//! and the binding sets used to decide whether a domain and an onion address
//! belong together.

mod axioms;
mod eval;
mod random;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{GenLabel, Label, LabelKind};
use crate::lang::{parse_bdl_pair, BdLPair, Principal, SataId};

pub use axioms::{check_axioms, check_axioms_counted, AxiomBounds, Counterexample};
pub use eval::{satisfies, semantic_entails, GfpOrder, Valuation};
pub use random::{impose_store, random_model, random_model_for, ModelSizes};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("name {0} is not in the model")]
    UnknownName(SataId),
    #[error("label {0} is not in the model")]
    UnknownLabel(Label),
    #[error("principal {0} is not in the model")]
    UnknownPrincipal(Principal),
    #[error("world {0} does not exist")]
    UnknownWorld(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("access for {principal} is not reflexive at world {world}")]
    NotReflexive { principal: Principal, world: usize },
    #[error("world {world}: binding of {sata} to {other} is outside the global relation")]
    BindingOutsideGlobal { world: usize, sata: SataId, other: SataId },
    #[error("world {world}: {speaker} utters something but not its own binding")]
    MissingSelfBound { world: usize, speaker: SataId },
    #[error("world {world}: holders of {narrower} are not all holders of {broader}")]
    IncoherentLabels { world: usize, narrower: Label, broader: Label },
    #[error("label set is not closed upwards: {0} is missing")]
    LabelsNotClosed(Label),
    #[error(transparent)]
    Unknown(#[from] SemanticsError),
    #[error("malformed model: {0}")]
    Malformed(String),
}

/// A labeled pair with indices into the model's name and label tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub id: usize,
    pub kind: LabelKind,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    /// Holders of each label, by label index. The entry for `bound` stays empty.
    pub members: Vec<BTreeSet<usize>>,
    pub utterances: Vec<BTreeSet<Pair>>,
    pub bind1: Vec<BTreeSet<usize>>,
    pub bind2: Vec<BTreeSet<usize>>,
}

impl World {
    fn empty(names: usize, labels: usize) -> Self {
        World {
            members: vec![BTreeSet::new(); labels],
            utterances: vec![BTreeSet::new(); names],
            bind1: vec![BTreeSet::new(); names],
            bind2: vec![BTreeSet::new(); names],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    principals: Vec<Principal>,
    /// `access[p][w]` is the set of worlds principal `p` considers from `w`.
    access: Vec<Vec<BTreeSet<usize>>>,
    names: Vec<SataId>,
    /// Index 0 is always `bound`.
    labels: Vec<Label>,
    beta1: Vec<BTreeSet<usize>>,
    beta2: Vec<BTreeSet<usize>>,
    worlds: Vec<World>,
}

impl KripkeModel {
    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn names(&self) -> &[SataId] {
        &self.names
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn principals(&self) -> &[Principal] {
        &self.principals
    }

    pub fn name_index(&self, id: &SataId) -> Result<usize, SemanticsError> {
        self.names
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| SemanticsError::UnknownName(id.clone()))
    }

    pub fn label_index(&self, l: &Label) -> Result<usize, SemanticsError> {
        self.labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| SemanticsError::UnknownLabel(l.clone()))
    }

    pub fn principal_index(&self, p: &Principal) -> Result<usize, SemanticsError> {
        self.principals
            .iter()
            .position(|x| x == p)
            .ok_or_else(|| SemanticsError::UnknownPrincipal(p.clone()))
    }

    pub fn successors(&self, principal: usize, world: usize) -> &BTreeSet<usize> {
        &self.access[principal][world]
    }

    pub fn pair_index(&self, pair: &BdLPair) -> Result<Pair, SemanticsError> {
        Ok(Pair {
            id: self.name_index(&pair.id)?,
            kind: pair.label.kind,
            label: self.label_index(&pair.label.base)?,
        })
    }

    pub fn pair(&self, p: Pair) -> BdLPair {
        BdLPair::new(
            self.names[p.id].clone(),
            GenLabel::new(p.kind, self.labels[p.label].clone()),
        )
    }

    /// Checks reflexivity, binding containment, utterance closure and label coherence.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (p, rel) in self.access.iter().enumerate() {
            for (w, succ) in rel.iter().enumerate() {
                if !succ.contains(&w) {
                    return Err(ModelError::NotReflexive {
                        principal: self.principals[p].clone(),
                        world: w,
                    });
                }
            }
        }
        for l in &self.labels {
            for b in l.up_closure() {
                if !self.labels.contains(&b) {
                    return Err(ModelError::LabelsNotClosed(b));
                }
            }
        }
        for (w, world) in self.worlds.iter().enumerate() {
            for (n, (b1, b2)) in world.bind1.iter().zip(&world.bind2).enumerate() {
                let outside = b1
                    .difference(&self.beta1[n])
                    .chain(b2.difference(&self.beta2[n]))
                    .next();
                if let Some(&m) = outside {
                    return Err(ModelError::BindingOutsideGlobal {
                        world: w,
                        sata: self.names[n].clone(),
                        other: self.names[m].clone(),
                    });
                }
            }
            for (n, said) in world.utterances.iter().enumerate() {
                let own = Pair {
                    id: n,
                    kind: LabelKind::Plain,
                    label: 0,
                };
                if !said.is_empty() && !said.contains(&own) {
                    return Err(ModelError::MissingSelfBound {
                        world: w,
                        speaker: self.names[n].clone(),
                    });
                }
            }
            for (i, narrower) in self.labels.iter().enumerate() {
                for (j, broader) in self.labels.iter().enumerate() {
                    if i != j
                        && broader.weakly_broadens(narrower)
                        && !world.members[i].is_subset(&world.members[j])
                    {
                        return Err(ModelError::IncoherentLabels {
                            world: w,
                            narrower: narrower.clone(),
                            broader: broader.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn builder(
        names: Vec<SataId>,
        labels: Vec<Label>,
        principals: Vec<Principal>,
        worlds: usize,
    ) -> ModelBuilder {
        ModelBuilder::new(names, labels, principals, worlds)
    }

    pub fn into_builder(self) -> ModelBuilder {
        ModelBuilder { model: self }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<KripkeModel, ModelError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let model = file.into_model()?;
        model.validate()?;
        Ok(model)
    }
}

/// Mutable construction. Access relations start out reflexive.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    model: KripkeModel,
}

impl ModelBuilder {
    pub fn new(names: Vec<SataId>, labels: Vec<Label>, principals: Vec<Principal>, worlds: usize) -> Self {
        let mut all = vec![Label::Bound];
        for l in labels {
            for b in l.up_closure() {
                if !all.contains(&b) {
                    all.push(b);
                }
            }
        }
        let n = names.len();
        let access = principals
            .iter()
            .map(|_| (0..worlds).map(|w| BTreeSet::from([w])).collect())
            .collect();
        ModelBuilder {
            model: KripkeModel {
                access,
                beta1: vec![BTreeSet::new(); n],
                beta2: vec![BTreeSet::new(); n],
                worlds: vec![World::empty(n, all.len()); worlds],
                names,
                labels: all,
                principals,
            },
        }
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn access(&mut self, principal: usize, from: usize, to: usize) -> &mut Self {
        self.model.access[principal][from].insert(to);
        self
    }

    /// Puts `id` under `label` at `world`, and under every broader label.
    pub fn member(&mut self, world: usize, label: usize, id: usize) -> &mut Self {
        let l = self.model.labels[label].clone();
        for (j, b) in self.model.labels.iter().enumerate() {
            if !b.is_bound() && b.weakly_broadens(&l) {
                self.model.worlds[world].members[j].insert(id);
            }
        }
        self
    }

    /// Adds an utterance together with the speaker's own binding.
    pub fn utter(&mut self, world: usize, speaker: usize, pair: Pair) -> &mut Self {
        let said = &mut self.model.worlds[world].utterances[speaker];
        said.insert(pair);
        said.insert(Pair {
            id: speaker,
            kind: LabelKind::Plain,
            label: 0,
        });
        self
    }

    pub fn bind1(&mut self, world: usize, id: usize, to: usize) -> &mut Self {
        self.model.beta1[id].insert(to);
        self.model.worlds[world].bind1[id].insert(to);
        self
    }

    pub fn bind2(&mut self, world: usize, id: usize, to: usize) -> &mut Self {
        self.model.beta2[id].insert(to);
        self.model.worlds[world].bind2[id].insert(to);
        self
    }

    /// Makes `id` bound at `world` through its own pair.
    pub fn self_bind(&mut self, world: usize, id: usize) -> &mut Self {
        self.bind1(world, id, id).bind2(world, id, id)
    }

    pub fn global_binding(&mut self, id: usize, b1: BTreeSet<usize>, b2: BTreeSet<usize>) -> &mut Self {
        self.model.beta1[id].extend(b1);
        self.model.beta2[id].extend(b2);
        self
    }

    pub fn build(self) -> Result<KripkeModel, ModelError> {
        self.model.validate()?;
        Ok(self.model)
    }
}

// On-disk form.

#[derive(Debug, Serialize, Deserialize)]
struct BindingEntry {
    sata: SataId,
    with: Vec<SataId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct UtteranceEntry {
    speaker: SataId,
    pairs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WorldFile {
    #[serde(default)]
    labels: BTreeMap<String, Vec<SataId>>,
    #[serde(default)]
    utterances: Vec<UtteranceEntry>,
    #[serde(default)]
    bind1: Vec<BindingEntry>,
    #[serde(default)]
    bind2: Vec<BindingEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    names: Vec<SataId>,
    labels: Vec<Label>,
    /// Principal text to `[from, to]` edges.
    access: BTreeMap<String, Vec<[usize; 2]>>,
    #[serde(default)]
    beta1: Vec<BindingEntry>,
    #[serde(default)]
    beta2: Vec<BindingEntry>,
    worlds: Vec<WorldFile>,
}

fn bindings(model: &KripkeModel, b: &[BTreeSet<usize>]) -> Vec<BindingEntry> {
    b.iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(n, s)| BindingEntry {
            sata: model.names[n].clone(),
            with: s.iter().map(|&m| model.names[m].clone()).collect(),
        })
        .collect()
}

impl From<&KripkeModel> for ModelFile {
    fn from(m: &KripkeModel) -> Self {
        let access = m
            .principals
            .iter()
            .zip(&m.access)
            .map(|(p, rel)| {
                let edges = rel
                    .iter()
                    .enumerate()
                    .flat_map(|(w, succ)| succ.iter().map(move |&v| [w, v]))
                    .collect();
                (p.to_string(), edges)
            })
            .collect();
        let worlds = m
            .worlds
            .iter()
            .map(|w| WorldFile {
                labels: w
                    .members
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(l, s)| (m.labels[l].to_string(), s.iter().map(|&n| m.names[n].clone()).collect()))
                    .collect(),
                utterances: w
                    .utterances
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(n, s)| UtteranceEntry {
                        speaker: m.names[n].clone(),
                        pairs: s.iter().map(|&p| m.pair(p).to_string()).collect(),
                    })
                    .collect(),
                bind1: bindings(m, &w.bind1),
                bind2: bindings(m, &w.bind2),
            })
            .collect();
        ModelFile {
            names: m.names.clone(),
            labels: m.labels.iter().filter(|l| !l.is_bound()).cloned().collect(),
            access,
            beta1: bindings(m, &m.beta1),
            beta2: bindings(m, &m.beta2),
            worlds,
        }
    }
}

fn parse_principal(text: &str) -> Result<Principal, ModelError> {
    let t = text.trim();
    if t.starts_with('(') {
        let pair = parse_bdl_pair(t).map_err(|e| ModelError::Malformed(e.to_string()))?;
        if !pair.label.is_plain_bound() {
            return Err(ModelError::Malformed(format!("principal `{t}` carries a label")));
        }
        Ok(Principal::Sata(pair.id))
    } else if t.is_empty() {
        Err(ModelError::Malformed("empty principal".into()))
    } else {
        Ok(Principal::client(t))
    }
}

impl ModelFile {
    fn into_model(self) -> Result<KripkeModel, ModelError> {
        let principals = self
            .access
            .keys()
            .map(|k| parse_principal(k))
            .collect::<Result<Vec<_>, _>>()?;
        let nworlds = self.worlds.len();
        let mut b = ModelBuilder::new(self.names, self.labels, principals, nworlds);
        // The file is authoritative about access; drop the default loops.
        for rel in &mut b.model.access {
            rel.iter_mut().for_each(BTreeSet::clear);
        }
        for (p, edges) in self.access.values().enumerate() {
            for &[from, to] in edges {
                if from >= nworlds || to >= nworlds {
                    return Err(SemanticsError::UnknownWorld(from.max(to)).into());
                }
                b.access(p, from, to);
            }
        }
        let m = b.model.clone();
        let global = |entries: &[BindingEntry]| -> Result<Vec<BTreeSet<usize>>, ModelError> {
            let mut out = vec![BTreeSet::new(); m.names.len()];
            for e in entries {
                let n = m.name_index(&e.sata)?;
                for o in &e.with {
                    out[n].insert(m.name_index(o)?);
                }
            }
            Ok(out)
        };
        b.model.beta1 = global(&self.beta1)?;
        b.model.beta2 = global(&self.beta2)?;
        for (w, wf) in self.worlds.iter().enumerate() {
            let mut world = World::empty(m.names.len(), m.labels.len());
            for (l, holders) in &wf.labels {
                let label = Label::parse(l).map_err(|e| ModelError::Malformed(e.to_string()))?;
                let li = m.label_index(&label)?;
                for h in holders {
                    world.members[li].insert(m.name_index(h)?);
                }
            }
            for u in &wf.utterances {
                let n = m.name_index(&u.speaker)?;
                for p in &u.pairs {
                    let pair = parse_bdl_pair(p).map_err(|e| ModelError::Malformed(e.to_string()))?;
                    world.utterances[n].insert(m.pair_index(&pair)?);
                }
            }
            world.bind1 = global(&wf.bind1)?;
            world.bind2 = global(&wf.bind2)?;
            b.model.worlds[w] = world;
        }
        Ok(b.model)
    }
}
