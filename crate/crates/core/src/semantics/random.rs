//! Seeded random models, and repairing a model until a store's assumptions hold.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{SchemaInstance, TrustStore, Universe};
use crate::labels::{Label, LabelKind};
use crate::lang::{BdLPair, Form, Principal, SataId, Trustable};

use super::eval::Valuation;
use super::{KripkeModel, ModelBuilder, Pair, SemanticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSizes {
    pub worlds: usize,
    pub names: usize,
    pub label_depth: usize,
}

impl Default for ModelSizes {
    fn default() -> Self {
        ModelSizes {
            worlds: 3,
            names: 2,
            label_depth: 2,
        }
    }
}

fn random_labels(rng: &mut ChaCha8Rng, depth: usize) -> Vec<Label> {
    let alphabet: Vec<String> = (0..depth.max(2)).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let len = rng.gen_range(1..=depth.max(1));
        let segs: Vec<&String> = alphabet.choose_multiple(rng, len).collect();
        let text = segs.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(":");
        out.push(Label::parse(&text).expect("generated labels are well formed"));
    }
    out
}

/// Makes the union of all access relations transitive by folding its
/// transitive closure into the first principal's relation.
fn close_access(b: &mut ModelBuilder) {
    let m = b.model();
    let n = m.world_count();
    let mut reach: Vec<BTreeSet<usize>> = (0..n)
        .map(|w| (0..m.principals.len()).flat_map(|p| m.access[p][w].iter().copied()).collect())
        .collect();
    loop {
        let mut changed = false;
        for w in 0..n {
            let next: BTreeSet<usize> = reach[w].iter().flat_map(|&v| reach[v].iter().copied()).collect();
            if !next.is_subset(&reach[w]) {
                reach[w].extend(next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for (w, succ) in reach.into_iter().enumerate() {
        for v in succ {
            b.access(0, w, v);
        }
    }
}

fn random_into(rng: &mut ChaCha8Rng, b: &mut ModelBuilder) {
    let (nw, nn, nl, np) = {
        let m = b.model();
        (m.world_count(), m.names.len(), m.labels.len(), m.principals.len())
    };
    for p in 0..np {
        for w in 0..nw {
            for v in 0..nw {
                if rng.gen_bool(0.3) {
                    b.access(p, w, v);
                }
            }
        }
    }
    close_access(b);

    for n in 0..nn {
        let g1: BTreeSet<usize> = (0..nn).filter(|&m| rng.gen_bool(if m == n { 0.8 } else { 0.2 })).collect();
        let g2: BTreeSet<usize> = (0..nn).filter(|&m| rng.gen_bool(if m == n { 0.8 } else { 0.2 })).collect();
        for w in 0..nw {
            for &m in &g1 {
                if rng.gen_bool(0.7) {
                    b.bind1(w, n, m);
                }
            }
            for &m in &g2 {
                if rng.gen_bool(0.7) {
                    b.bind2(w, n, m);
                }
            }
        }
        b.global_binding(n, g1, g2);
    }

    for w in 0..nw {
        for l in 1..nl {
            for n in 0..nn {
                if rng.gen_bool(0.35) {
                    b.member(w, l, n);
                }
            }
        }
        for speaker in 0..nn {
            for _ in 0..rng.gen_range(0..=3) {
                let pair = Pair {
                    id: rng.gen_range(0..nn),
                    kind: *LabelKind::ALL.choose(rng).expect("three kinds"),
                    label: rng.gen_range(0..nl),
                };
                b.utter(w, speaker, pair);
            }
        }
    }
}

/// A random model with principals `P` and `Q`.
pub fn random_model(seed: u64, sizes: ModelSizes) -> KripkeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..sizes.names.max(1))
        .map(|i| SataId::new(format!("d{i}.example"), format!("onion{i}")))
        .collect();
    let labels = random_labels(&mut rng, sizes.label_depth);
    let mut b = ModelBuilder::new(
        names,
        labels,
        vec![Principal::client("P"), Principal::client("Q")],
        sizes.worlds.max(1),
    );
    random_into(&mut rng, &mut b);
    b.build().expect("generated models are well formed")
}

/// A random model over the store's vocabulary in which every assumption of
/// the store holds at every world.
pub fn random_model_for(store: &TrustStore, seed: u64, worlds: usize) -> KripkeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Universe::of_store(store);
    let mut names: Vec<SataId> = u.names.iter().cloned().collect();
    if names.is_empty() {
        names.push(SataId::new("d0.example", "onion0"));
    }
    let me = store.principal().clone();
    let other = if me == Principal::client("Q") { "R" } else { "Q" };
    let mut b = ModelBuilder::new(
        names,
        u.bases.iter().cloned().collect(),
        vec![me, Principal::client(other)],
        worlds.max(1),
    );
    random_into(&mut rng, &mut b);
    let m = b.build().expect("generated models are well formed");
    impose_store(m, store).expect("the model covers the store's vocabulary")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Need {
    world: usize,
    pair: Pair,
}

struct Imposer {
    b: ModelBuilder,
    done: BTreeSet<Need>,
}

impl Imposer {
    fn wk(&self, narrower: usize, broader: usize) -> bool {
        let l = &self.b.model().labels;
        l[broader].weakly_broadens(&l[narrower])
    }

    fn say_everywhere(&mut self, speaker: usize, body: Pair) {
        for w in 0..self.b.model().world_count() {
            self.b.utter(w, speaker, body);
            if body.kind == LabelKind::SattDel {
                self.b.utter(
                    w,
                    speaker,
                    Pair {
                        kind: LabelKind::Satt,
                        ..body
                    },
                );
            }
        }
    }

    /// Adds membership and bindings until `need` holds. Only called once
    /// utterances are final, since truth is monotone in everything else.
    fn require(&mut self, need: Need) {
        let mut work = vec![need];
        while let Some(Need { world: w, pair }) = work.pop() {
            if !self.done.insert(Need { world: w, pair }) {
                continue;
            }
            let Pair { id, kind, label } = pair;
            match kind {
                LabelKind::Plain => {
                    self.b.self_bind(w, id);
                    if label != 0 {
                        self.b.member(w, label, id);
                    }
                }
                LabelKind::Satt => {
                    work.push(Need {
                        world: w,
                        pair: Pair { kind: LabelKind::Plain, label: 0, id },
                    });
                    let said = &self.b.model().worlds[w].utterances;
                    for p1 in &said[id] {
                        if p1.kind != LabelKind::Plain || !self.wk(p1.label, label) {
                            continue;
                        }
                        let answered = said[p1.id]
                            .iter()
                            .any(|p2| p2.kind == LabelKind::Plain && p2.id == p1.id && self.wk(p2.label, p1.label));
                        if answered {
                            work.push(Need { world: w, pair: *p1 });
                        }
                    }
                }
                LabelKind::SattDel => {
                    work.push(Need {
                        world: w,
                        pair: Pair { kind: LabelKind::Satt, ..pair },
                    });
                    let said = &self.b.model().worlds[w].utterances;
                    for p1 in &said[id] {
                        if p1.kind == LabelKind::Plain || !self.wk(p1.label, label) {
                            continue;
                        }
                        for p2 in &said[p1.id] {
                            if !self.wk(p2.label, p1.label) {
                                continue;
                            }
                            let kind = match (p1.kind, p2.kind) {
                                (LabelKind::SattDel, LabelKind::Satt) => LabelKind::SattDel,
                                (LabelKind::Satt, LabelKind::Plain) => LabelKind::Satt,
                                _ => continue,
                            };
                            work.push(Need {
                                world: w,
                                pair: Pair { id: p1.id, kind, label: p2.label },
                            });
                        }
                    }
                }
            }
        }
    }

    fn require_everywhere(&mut self, pair: Pair) {
        for w in 0..self.b.model().world_count() {
            self.require(Need { world: w, pair });
        }
    }
}

/// Extends `model` until every assumption of `store` holds at every world:
/// its sattestations, its trusted statements and its schema instances.
pub fn impose_store(model: KripkeModel, store: &TrustStore) -> Result<KripkeModel, SemanticsError> {
    let me = model.principal_index(store.principal())?;
    let mut says = Vec::new();
    let mut trusted = Vec::new();
    let says_of = |m: &KripkeModel, speaker: &SataId, body: &BdLPair| -> Result<(usize, Pair), SemanticsError> {
        Ok((m.name_index(speaker)?, m.pair_index(body)?))
    };
    for f in store.ts() {
        if let Form::Says { speaker, body } = f {
            says.push(says_of(&model, speaker, body)?);
        }
    }
    for f in store.itrust() {
        if let Form::Trusts { what, .. } = f {
            match what {
                Trustable::BdL(pair) => trusted.push(model.pair_index(pair)?),
                Trustable::Says { speaker, body } => says.push(says_of(&model, speaker, body)?),
            }
        }
    }
    let mut las = Vec::new();
    for s in store.las() {
        las.push(match s {
            SchemaInstance::LasDel { from, to } => {
                let probe = |g: &crate::labels::GenLabel| model.label_index(&g.base).map(|l| (g.kind, l));
                (Some((probe(from)?, probe(to)?)), None)
            }
            SchemaInstance::LasSatt(d) => (None, Some((model.name_index(d)?, LabelKind::Satt))),
            SchemaInstance::LasSattDel(d) => (None, Some((model.name_index(d)?, LabelKind::SattDel))),
        });
    }

    let mut imp = Imposer {
        b: model.into_builder(),
        done: BTreeSet::new(),
    };
    for (speaker, body) in says {
        imp.say_everywhere(speaker, body);
    }
    for pair in trusted {
        imp.require_everywhere(pair);
    }
    let nl = imp.b.model().labels.len();
    for (_, every) in &las {
        if let Some((id, kind)) = *every {
            for label in 0..nl {
                imp.require_everywhere(Pair { id, kind, label });
            }
        }
    }

    let dels: Vec<_> = las.iter().filter_map(|(d, _)| *d).collect();
    if !dels.is_empty() {
        loop {
            let model = imp.b.model().clone();
            let val = Valuation::new(&model);
            let trusts = |w: usize, p: Pair| model.successors(me, w).iter().all(|&v| val.pair_holds(v, p));
            let mut pending = Vec::new();
            for w in 0..model.world_count() {
                for id in 0..model.names.len() {
                    for &((k1, l1), (k2, l2)) in &dels {
                        let to = Pair { id, kind: k2, label: l2 };
                        if trusts(w, Pair { id, kind: k1, label: l1 }) && !trusts(w, to) {
                            pending.extend(model.successors(me, w).iter().map(|&v| Need { world: v, pair: to }));
                        }
                    }
                }
            }
            let before = imp.done.len();
            for n in pending {
                imp.require(n);
            }
            if imp.done.len() == before {
                break;
            }
        }
    }

    Ok(imp.b.build().expect("repairs keep the model well formed"))
}
