//! Falsification search for the axioms over a finite model.

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::labels::{GenLabel, Label, LabelKind};
use crate::lang::{BdLPair, Form, Principal, SataId};

use super::eval::Valuation;
use super::KripkeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomBounds {
    /// Deepest conjunction nesting used for the conjunction axioms.
    pub conjunction_depth: usize,
}

impl Default for AxiomBounds {
    fn default() -> Self {
        AxiomBounds { conjunction_depth: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub axiom: &'static str,
    pub instance: Form,
    pub world: usize,
}

impl Serialize for Counterexample {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Counterexample", 3)?;
        st.serialize_field("axiom", self.axiom)?;
        st.serialize_field("instance", &self.instance.to_string())?;
        st.serialize_field("world", &self.world)?;
        st.end()
    }
}

fn conj(parts: Vec<Form>) -> Form {
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one conjunct");
    it.fold(first, Form::and)
}

fn wk(broader: &Label, narrower: &Label) -> Form {
    Form::WkOrder {
        narrower: narrower.clone(),
        broader: broader.clone(),
    }
}

struct Search<'a> {
    val: Valuation<'a>,
    found: Vec<Counterexample>,
    instances: usize,
}

impl Search<'_> {
    fn check(&mut self, axiom: &'static str, instance: Form) {
        self.instances += 1;
        for w in 0..self.val.model().world_count() {
            let ok = self
                .val
                .satisfies(w, &instance)
                .expect("instances only use the model's vocabulary");
            if !ok {
                self.found.push(Counterexample {
                    axiom,
                    instance: instance.clone(),
                    world: w,
                });
            }
        }
    }
}

/// Every instance of the axioms over the model's principals, names and
/// labels that is false at some world.
pub fn check_axioms(model: &KripkeModel, bounds: AxiomBounds) -> Vec<Counterexample> {
    check_axioms_counted(model, bounds).0
}

/// As [`check_axioms`], also returning the number of instances examined.
pub fn check_axioms_counted(model: &KripkeModel, bounds: AxiomBounds) -> (Vec<Counterexample>, usize) {
    let mut s = Search {
        val: Valuation::new(model),
        found: Vec::new(),
        instances: 0,
    };
    let names = model.names();
    let labels = model.labels();
    let gens: Vec<GenLabel> = labels
        .iter()
        .flat_map(|l| LabelKind::ALL.map(|k| GenLabel::new(k, l.clone())))
        .collect();
    let pair = |id: &SataId, k: LabelKind, l: &Label| BdLPair::new(id.clone(), GenLabel::new(k, l.clone()));
    let tb = |p: &Principal, id: &SataId, k: LabelKind, l: &Label| Form::trusts_bdl(p.clone(), pair(id, k, l));
    let ts = |p: &Principal, s: &SataId, body: BdLPair| Form::trusts_says(p.clone(), s.clone(), body);
    use LabelKind::{Plain, Satt, SattDel};

    for p in model.principals() {
        for d in names {
            for l1 in labels {
                for l2 in labels {
                    s.check(
                        "A1",
                        Form::implies(conj(vec![wk(l1, l2), tb(p, d, Plain, l2)]), tb(p, d, Plain, l1)),
                    );
                    s.check(
                        "A9",
                        Form::implies(conj(vec![wk(l1, l2), tb(p, d, Satt, l1)]), tb(p, d, Satt, l2)),
                    );
                    s.check(
                        "A10",
                        Form::implies(conj(vec![wk(l1, l2), tb(p, d, SattDel, l1)]), tb(p, d, SattDel, l2)),
                    );
                }
                s.check("A7", Form::implies(tb(p, d, SattDel, l1), tb(p, d, Satt, l1)));
            }
            for g in &gens {
                s.check(
                    "A5",
                    Form::implies(
                        Form::trusts_bdl(p.clone(), BdLPair::new(d.clone(), g.clone())),
                        tb(p, d, Plain, &Label::Bound),
                    ),
                );
            }
            for d2 in names {
                for g in &gens {
                    let body = BdLPair::new(d2.clone(), g.clone());
                    s.check(
                        "A6",
                        Form::implies(ts(p, d, body.clone()), ts(p, d, BdLPair::bound(d.clone()))),
                    );
                    s.check(
                        "A11",
                        Form::implies(Form::says(d.clone(), body.clone()), ts(p, d, body)),
                    );
                }
                for l in labels {
                    s.check(
                        "A8",
                        Form::implies(ts(p, d, pair(d2, SattDel, l)), ts(p, d, pair(d2, Satt, l))),
                    );
                }
            }
        }

        for l1 in labels {
            for l2 in labels {
                for l3 in labels {
                    let order = || vec![wk(l1, l2), wk(l2, l3)];
                    for d1 in names {
                        for d2 in names {
                            let mut a2 = order();
                            a2.extend([
                                tb(p, d1, Satt, l1),
                                ts(p, d1, pair(d2, Plain, l2)),
                                ts(p, d2, pair(d2, Plain, l3)),
                            ]);
                            s.check("A2", Form::implies(conj(a2), tb(p, d2, Plain, l2)));
                            for d3 in names {
                                let mut a3 = order();
                                a3.extend([
                                    tb(p, d1, SattDel, l1),
                                    ts(p, d1, pair(d2, SattDel, l2)),
                                    ts(p, d2, pair(d3, Satt, l3)),
                                ]);
                                s.check("A3", Form::implies(conj(a3), tb(p, d2, SattDel, l3)));
                                let mut a4 = order();
                                a4.extend([
                                    tb(p, d1, SattDel, l1),
                                    ts(p, d1, pair(d2, Satt, l2)),
                                    ts(p, d2, pair(d3, Plain, l3)),
                                ]);
                                s.check("A4", Form::implies(conj(a4), tb(p, d2, Satt, l3)));
                            }
                        }
                    }
                }
            }
        }
    }

    // Conjunction axioms over a small stock of atoms.
    if let (Some(p), Some(d0), Some(dn)) = (model.principals().first(), names.first(), names.last()) {
        let top = labels.last().expect("bound is always present");
        let atoms = vec![
            Form::BdL(BdLPair::bound(d0.clone())),
            Form::BdL(pair(dn, Plain, top)),
            Form::says(d0.clone(), BdLPair::bound(d0.clone())),
            tb(p, dn, Satt, top),
        ];
        let mut stock = atoms.clone();
        for _ in 2..bounds.conjunction_depth {
            let grown: Vec<Form> = stock
                .iter()
                .flat_map(|a| atoms.iter().map(move |b| Form::and(a.clone(), b.clone())))
                .collect();
            stock.extend(grown);
        }
        for a in &stock {
            for b in &stock {
                let ab = Form::and(a.clone(), b.clone());
                s.check("A12a", Form::implies(ab.clone(), a.clone()));
                s.check("A12b", Form::implies(ab, Form::and(b.clone(), a.clone())));
            }
        }
        for a in &atoms {
            for b in &atoms {
                for c in &atoms {
                    let left = Form::and(a.clone(), Form::and(b.clone(), c.clone()));
                    let right = Form::and(Form::and(a.clone(), b.clone()), c.clone());
                    s.check("A12c", Form::implies(left, right));
                }
            }
        }
    }

    (s.found, s.instances)
}
