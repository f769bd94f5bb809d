//! Derivation records, proof trees and an independent step checker.

use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::labels::{GenLabel, Label, LabelKind};
use crate::lang::{BdLPair, Form, Principal, SataId, Trustable};

use super::store::{SchemaInstance, TrustStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
    A11,
}

impl Axiom {
    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Itrust,
    Ts,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Justification {
    Assumption(Source),
    Axiom(Axiom),
    Schema(SchemaInstance),
}

impl Justification {
    /// Preference order when several rules derive the same statement.
    pub fn rank(&self) -> u8 {
        match self {
            Justification::Assumption(_) => 0,
            Justification::Axiom(a) => a.number(),
            Justification::Schema(SchemaInstance::LasDel { .. }) => 12,
            Justification::Schema(SchemaInstance::LasSatt(_)) => 13,
            Justification::Schema(SchemaInstance::LasSattDel(_)) => 14,
        }
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Assumption(Source::Itrust) => f.write_str("assumption:itrust"),
            Justification::Assumption(Source::Ts) => f.write_str("assumption:ts"),
            Justification::Axiom(a) => write!(f, "{a}"),
            Justification::Schema(s) => write!(f, "{s}"),
        }
    }
}

/// `narrower >= broader`, discharged syntactically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SideCondition {
    pub narrower: Label,
    pub broader: Label,
}

impl SideCondition {
    pub fn new(narrower: &Label, broader: &Label) -> Self {
        SideCondition {
            narrower: narrower.clone(),
            broader: broader.clone(),
        }
    }

    pub fn holds(&self) -> bool {
        self.broader.weakly_broadens(&self.narrower)
    }

    pub fn to_form(&self) -> Form {
        Form::WkOrder {
            narrower: self.narrower.clone(),
            broader: self.broader.clone(),
        }
    }
}

/// One derivation step: the rule used and its instantiated antecedents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: Justification,
    pub premises: Vec<Form>,
    pub side_conditions: Vec<SideCondition>,
}

impl Step {
    pub fn assumption(source: Source) -> Step {
        Step {
            rule: Justification::Assumption(source),
            premises: Vec::new(),
            side_conditions: Vec::new(),
        }
    }

    /// Tie-break key: lowest rule first, then the lexicographically smallest premise set.
    pub fn preference_key(&self) -> (u8, Vec<String>) {
        let mut rendered: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        rendered.sort();
        (self.rule.rank(), rendered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub conclusion: Form,
    pub rule: Justification,
    pub premises: Vec<ProofTree>,
    pub side_conditions: Vec<SideCondition>,
}

impl ProofTree {
    pub fn is_leaf(&self) -> bool {
        self.premises.is_empty()
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::size).sum::<usize>()
    }

    /// Re-checks every node against the rule it cites.
    pub fn verify(&self, store: &TrustStore) -> Result<(), ProofError> {
        let step = Step {
            rule: self.rule.clone(),
            premises: self.premises.iter().map(|p| p.conclusion.clone()).collect(),
            side_conditions: self.side_conditions.clone(),
        };
        check_step(store, &self.conclusion, &step)?;
        self.premises.iter().try_for_each(|p| p.verify(store))
    }
}

impl Serialize for ProofTree {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ProofTree", 4)?;
        st.serialize_field("conclusion", &self.conclusion.to_string())?;
        st.serialize_field("rule", &self.rule.to_string())?;
        st.serialize_field("premises", &self.premises)?;
        let sc: Vec<String> = self
            .side_conditions
            .iter()
            .map(|c| c.to_form().to_string())
            .collect();
        st.serialize_field("side_conditions", &sc)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{rule} does not justify `{conclusion}`: {reason}")]
pub struct ProofError {
    pub conclusion: String,
    pub rule: String,
    pub reason: String,
}

// Pattern views used by the checker.

fn trust_bdl<'a>(f: &'a Form, p: &Principal) -> Option<&'a BdLPair> {
    match f {
        Form::Trusts {
            who,
            what: Trustable::BdL(pair),
        } if who == p => Some(pair),
        _ => None,
    }
}

fn trust_says<'a>(f: &'a Form, p: &Principal) -> Option<(&'a SataId, &'a BdLPair)> {
    match f {
        Form::Trusts {
            who,
            what: Trustable::Says { speaker, body },
        } if who == p => Some((speaker, body)),
        _ => None,
    }
}

fn base_of(g: &GenLabel, kind: LabelKind) -> Option<&Label> {
    (g.kind == kind).then_some(&g.base)
}

/// Checks a single step without consulting the matcher that produced it.
pub fn check_step(store: &TrustStore, conclusion: &Form, step: &Step) -> Result<(), ProofError> {
    let fail = |reason: &str| ProofError {
        conclusion: conclusion.to_string(),
        rule: step.rule.to_string(),
        reason: reason.to_string(),
    };
    for sc in &step.side_conditions {
        if !sc.holds() {
            return Err(fail(&format!("side condition `{}` is false", sc.to_form())));
        }
    }
    let p = store.principal();
    let prem = &step.premises;
    let arity = |n: usize| {
        if prem.len() == n {
            Ok(())
        } else {
            Err(fail(&format!("expected {n} premises, found {}", prem.len())))
        }
    };
    let cited = |narrower: &Label, broader: &Label| {
        step.side_conditions
            .contains(&SideCondition::new(narrower, broader))
    };
    let ok = |cond: bool, reason: &str| if cond { Ok(()) } else { Err(fail(reason)) };

    match &step.rule {
        Justification::Assumption(Source::Itrust) => {
            arity(0)?;
            ok(store.itrust().contains(conclusion), "not in itrust")
        }
        Justification::Assumption(Source::Ts) => {
            arity(0)?;
            ok(store.ts().contains(conclusion), "not in ts")
        }
        Justification::Axiom(ax) => match ax {
            Axiom::A1 => {
                arity(1)?;
                let c = trust_bdl(conclusion, p).ok_or_else(|| fail("conclusion shape"))?;
                let a = trust_bdl(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                let l1 = base_of(&c.label, LabelKind::Plain).ok_or_else(|| fail("plain label"))?;
                let l2 = base_of(&a.label, LabelKind::Plain).ok_or_else(|| fail("plain label"))?;
                ok(a.id == c.id, "identity mismatch")?;
                ok(cited(l2, l1) && l1.weakly_broadens(l2), "needs l1 <= l2")
            }
            Axiom::A2 | Axiom::A3 | Axiom::A4 => {
                arity(3)?;
                let (k1, k2, k3) = match ax {
                    Axiom::A2 => (LabelKind::Satt, LabelKind::Plain, LabelKind::Plain),
                    Axiom::A3 => (LabelKind::SattDel, LabelKind::SattDel, LabelKind::Satt),
                    _ => (LabelKind::SattDel, LabelKind::Satt, LabelKind::Plain),
                };
                let root = trust_bdl(&prem[0], p).ok_or_else(|| fail("first premise shape"))?;
                let (s1, b1) = trust_says(&prem[1], p).ok_or_else(|| fail("second premise"))?;
                let (s2, b2) = trust_says(&prem[2], p).ok_or_else(|| fail("third premise"))?;
                let l1 = base_of(&root.label, k1).ok_or_else(|| fail("first label kind"))?;
                let l2 = base_of(&b1.label, k2).ok_or_else(|| fail("second label kind"))?;
                let l3 = base_of(&b2.label, k3).ok_or_else(|| fail("third label kind"))?;
                ok(*s1 == root.id, "sattestor mismatch")?;
                ok(*s2 == b1.id, "sattestee must be the speaker of the last premise")?;
                if *ax == Axiom::A2 {
                    ok(b2.id == b1.id, "A2 needs the sattestee to speak about itself")?;
                }
                ok(cited(l2, l1) && l1.weakly_broadens(l2), "needs l1 <= l2")?;
                ok(cited(l3, l2) && l2.weakly_broadens(l3), "needs l2 <= l3")?;
                let (want_label, want_id) = match ax {
                    Axiom::A2 => (GenLabel::plain(l2.clone()), &b1.id),
                    Axiom::A3 => (GenLabel::sattdel(l3.clone()), &b1.id),
                    _ => (GenLabel::satt(l3.clone()), &b1.id),
                };
                let want = Form::trusts_bdl(p.clone(), BdLPair::new(want_id.clone(), want_label));
                ok(*conclusion == want, "conclusion does not match the consequent")
            }
            Axiom::A5 => {
                arity(1)?;
                let a = trust_bdl(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                let want = Form::trusts_bdl(p.clone(), BdLPair::bound(a.id.clone()));
                ok(*conclusion == want, "conclusion must be the bound pair")
            }
            Axiom::A6 => {
                arity(1)?;
                let (s, _) = trust_says(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                let want = Form::trusts_says(p.clone(), s.clone(), BdLPair::bound(s.clone()));
                ok(*conclusion == want, "conclusion must be the speaker's own binding")
            }
            Axiom::A7 => {
                arity(1)?;
                let a = trust_bdl(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                let l = base_of(&a.label, LabelKind::SattDel).ok_or_else(|| fail("kind"))?;
                let want = Form::trusts_bdl(
                    p.clone(),
                    BdLPair::new(a.id.clone(), GenLabel::satt(l.clone())),
                );
                ok(*conclusion == want, "consequent mismatch")
            }
            Axiom::A8 => {
                arity(1)?;
                let (s, b) = trust_says(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                let l = base_of(&b.label, LabelKind::SattDel).ok_or_else(|| fail("kind"))?;
                let want = Form::trusts_says(
                    p.clone(),
                    s.clone(),
                    BdLPair::new(b.id.clone(), GenLabel::satt(l.clone())),
                );
                ok(*conclusion == want, "consequent mismatch")
            }
            Axiom::A9 | Axiom::A10 => {
                arity(1)?;
                let kind = if *ax == Axiom::A9 {
                    LabelKind::Satt
                } else {
                    LabelKind::SattDel
                };
                let a = trust_bdl(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                let c = trust_bdl(conclusion, p).ok_or_else(|| fail("conclusion shape"))?;
                let l1 = base_of(&a.label, kind).ok_or_else(|| fail("premise kind"))?;
                let l2 = base_of(&c.label, kind).ok_or_else(|| fail("conclusion kind"))?;
                ok(a.id == c.id, "identity mismatch")?;
                ok(cited(l2, l1) && l1.weakly_broadens(l2), "needs l1 <= l2")
            }
            Axiom::A11 => {
                arity(1)?;
                let Form::Says { speaker, body } = &prem[0] else {
                    return Err(fail("premise must be a says-statement"));
                };
                let want = Form::trusts_says(p.clone(), speaker.clone(), body.clone());
                ok(*conclusion == want, "consequent mismatch")
            }
        },
        Justification::Schema(schema) => {
            ok(store.las().contains(schema), "schema instance not in las")?;
            match schema {
                SchemaInstance::LasDel { from, to } => {
                    arity(1)?;
                    let a = trust_bdl(&prem[0], p).ok_or_else(|| fail("premise shape"))?;
                    ok(a.label == *from, "antecedent label mismatch")?;
                    let want = Form::trusts_bdl(p.clone(), BdLPair::new(a.id.clone(), to.clone()));
                    ok(*conclusion == want, "consequent mismatch")
                }
                SchemaInstance::LasSatt(id) | SchemaInstance::LasSattDel(id) => {
                    arity(0)?;
                    let kind = if matches!(schema, SchemaInstance::LasSatt(_)) {
                        LabelKind::Satt
                    } else {
                        LabelKind::SattDel
                    };
                    let c = trust_bdl(conclusion, p).ok_or_else(|| fail("conclusion shape"))?;
                    ok(c.id == *id && c.label.kind == kind, "instance mismatch")
                }
            }
        }
    }
}
