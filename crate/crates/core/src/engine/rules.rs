//! Forward rule matching: every axiom and schema instance whose premises are
//! all present, restricted to conclusions inside the universe.

use std::collections::{BTreeMap, BTreeSet};

use crate::labels::{GenLabel, Label, LabelKind};
use crate::lang::{BdLPair, Form, Principal, SataId, Trustable};

use super::proof::{Axiom, Justification, SideCondition, Source, Step};
use super::store::{SchemaInstance, TrustStore};
use super::universe::Universe;

/// Lookup tables over a set of present statements.
struct Index<'a> {
    /// `P trusts (id, g)` grouped by id.
    bdl: BTreeMap<&'a SataId, Vec<&'a GenLabel>>,
    /// `P trusts s says body` grouped by speaker.
    tsays: BTreeMap<&'a SataId, Vec<&'a BdLPair>>,
    says: Vec<(&'a SataId, &'a BdLPair)>,
}

impl<'a> Index<'a> {
    fn build(present: &'a BTreeSet<Form>, p: &Principal) -> Self {
        let mut ix = Index {
            bdl: BTreeMap::new(),
            tsays: BTreeMap::new(),
            says: Vec::new(),
        };
        for f in present {
            match f {
                Form::Trusts { who, what } if who == p => match what {
                    Trustable::BdL(pair) => ix.bdl.entry(&pair.id).or_default().push(&pair.label),
                    Trustable::Says { speaker, body } => {
                        ix.tsays.entry(speaker).or_default().push(body)
                    }
                },
                Form::Says { speaker, body } => ix.says.push((speaker, body)),
                _ => {}
            }
        }
        ix
    }

    fn bdl_of_kind(&self, kind: LabelKind) -> impl Iterator<Item = (&'a SataId, &'a Label)> + '_ {
        self.bdl.iter().flat_map(move |(id, gs)| {
            gs.iter()
                .filter(move |g| g.kind == kind)
                .map(move |g| (*id, &g.base))
        })
    }

    fn tsays_from(&self, speaker: &SataId) -> &[&'a BdLPair] {
        self.tsays.get(speaker).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Collects candidate conclusions, keeping the preferred step for each.
struct Candidates<'u> {
    universe: &'u Universe,
    best: BTreeMap<Form, Step>,
}

impl Candidates<'_> {
    fn offer(&mut self, conclusion: Form, rule: Justification, premises: Vec<Form>, sc: Vec<SideCondition>) {
        if !self.universe.contains(&conclusion) {
            return;
        }
        let step = Step {
            rule,
            premises,
            side_conditions: sc,
        };
        match self.best.get(&conclusion) {
            Some(old) if old.preference_key() <= step.preference_key() => {}
            _ => {
                self.best.insert(conclusion, step);
            }
        }
    }
}

/// Every conclusion derivable in one step from `present`, with its preferred step.
/// Conclusions already in `present` are included; callers filter.
pub fn derive_all(present: &BTreeSet<Form>, store: &TrustStore, universe: &Universe) -> BTreeMap<Form, Step> {
    let p = store.principal();
    let ix = Index::build(present, p);
    let mut out = Candidates {
        universe,
        best: BTreeMap::new(),
    };
    let tb = |id: &SataId, g: GenLabel| Form::trusts_bdl(p.clone(), BdLPair::new(id.clone(), g));
    let ts = |s: &SataId, body: &BdLPair| Form::trusts_says(p.clone(), s.clone(), body.clone());
    let ax = Justification::Axiom;

    // A1: broaden plain labels.
    for (id, l2) in ix.bdl_of_kind(LabelKind::Plain) {
        for l1 in l2.up_closure() {
            if &l1 != l2 {
                let sc = vec![SideCondition::new(l2, &l1)];
                out.offer(tb(id, GenLabel::plain(l1)), ax(Axiom::A1), vec![tb(id, GenLabel::plain(l2.clone()))], sc);
            }
        }
    }

    // A2, A3, A4: sattestation with concurrence of the sattestee.
    let triples = [
        (Axiom::A2, LabelKind::Satt, LabelKind::Plain, LabelKind::Plain),
        (Axiom::A3, LabelKind::SattDel, LabelKind::SattDel, LabelKind::Satt),
        (Axiom::A4, LabelKind::SattDel, LabelKind::Satt, LabelKind::Plain),
    ];
    for (axiom, k1, k2, k3) in triples {
        for (d1, l1) in ix.bdl_of_kind(k1) {
            for b1 in ix.tsays_from(d1) {
                let l2 = &b1.label.base;
                if b1.label.kind != k2 || !l1.weakly_broadens(l2) {
                    continue;
                }
                let d2 = &b1.id;
                for b2 in ix.tsays_from(d2) {
                    let l3 = &b2.label.base;
                    if b2.label.kind != k3 || !l2.weakly_broadens(l3) {
                        continue;
                    }
                    if axiom == Axiom::A2 && b2.id != *d2 {
                        continue;
                    }
                    let conclusion = match axiom {
                        Axiom::A2 => GenLabel::plain(l2.clone()),
                        Axiom::A3 => GenLabel::sattdel(l3.clone()),
                        _ => GenLabel::satt(l3.clone()),
                    };
                    let premises = vec![tb(d1, GenLabel::new(k1, l1.clone())), ts(d1, b1), ts(d2, b2)];
                    let sc = vec![SideCondition::new(l2, l1), SideCondition::new(l3, l2)];
                    out.offer(tb(d2, conclusion), ax(axiom), premises, sc);
                }
            }
        }
    }

    for (id, gs) in &ix.bdl {
        for g in gs {
            let premise = tb(id, (*g).clone());
            // A5
            if !g.is_plain_bound() {
                out.offer(tb(id, GenLabel::bound()), ax(Axiom::A5), vec![premise.clone()], vec![]);
            }
            match g.kind {
                LabelKind::Plain => {}
                LabelKind::Satt | LabelKind::SattDel => {
                    let axiom = if g.kind == LabelKind::Satt { Axiom::A9 } else { Axiom::A10 };
                    for l2 in universe.narrowings(&g.base) {
                        let sc = vec![SideCondition::new(l2, &g.base)];
                        out.offer(tb(id, GenLabel::new(g.kind, l2.clone())), ax(axiom), vec![premise.clone()], sc);
                    }
                    if g.kind == LabelKind::SattDel {
                        out.offer(tb(id, GenLabel::satt(g.base.clone())), ax(Axiom::A7), vec![premise.clone()], vec![]);
                    }
                }
            }
        }
    }

    for (s, bodies) in &ix.tsays {
        for b in bodies {
            let premise = ts(s, b);
            // A6
            let own = BdLPair::bound((*s).clone());
            if **b != own {
                out.offer(ts(s, &own), ax(Axiom::A6), vec![premise.clone()], vec![]);
            }
            // A8
            if b.label.kind == LabelKind::SattDel {
                let weaker = BdLPair::new(b.id.clone(), GenLabel::satt(b.label.base.clone()));
                out.offer(ts(s, &weaker), ax(Axiom::A8), vec![premise], vec![]);
            }
        }
    }

    // A11
    for (s, b) in &ix.says {
        out.offer(ts(s, b), ax(Axiom::A11), vec![Form::says((*s).clone(), (*b).clone())], vec![]);
    }

    for schema in store.las() {
        let rule = Justification::Schema(schema.clone());
        match schema {
            SchemaInstance::LasDel { from, to } => {
                for (id, gs) in &ix.bdl {
                    if gs.contains(&from) {
                        out.offer(tb(id, to.clone()), rule.clone(), vec![tb(id, from.clone())], vec![]);
                    }
                }
            }
            SchemaInstance::LasSatt(id) | SchemaInstance::LasSattDel(id) => {
                let kind = if matches!(schema, SchemaInstance::LasSatt(_)) {
                    LabelKind::Satt
                } else {
                    LabelKind::SattDel
                };
                for base in &universe.bases {
                    out.offer(tb(id, GenLabel::new(kind, base.clone())), rule.clone(), vec![], vec![]);
                }
            }
        }
    }

    out.best
}

/// Steps for the store's own assumptions.
pub fn assumption_steps(store: &TrustStore) -> BTreeMap<Form, Step> {
    let mut out = BTreeMap::new();
    for f in store.ts() {
        out.insert(f.clone(), Step::assumption(Source::Ts));
    }
    // itrust wins if a statement somehow appears in both.
    for f in store.itrust() {
        out.insert(f.clone(), Step::assumption(Source::Itrust));
    }
    out
}
