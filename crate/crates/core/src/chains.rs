//! Reading the structure of a derivation back out of its proof.
//!
//! Every derived trust in a labeled pair is rooted in something the
//! principal holds locally: an initial trust, a local schema instance, or a
//! sattestation by someone it already trusts as a sattestor. [`explain`]
//! names the case that applies, and for delegatable sattestor labels
//! [`extract_chain`] recovers the whole sequence of delegations.

use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::engine::{Axiom, Justification, SaturationResult, SchemaInstance, Source};
use crate::labels::{GenLabel, Label, LabelKind};
use crate::lang::{BdLPair, Form, Principal, SataId, Trustable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("`{0}` is not derived")]
    NotDerived(String),
    #[error("`{0}` is not a trust in a labeled pair")]
    NotTrustBdl(String),
    #[error("`{0}` does not carry a delegatable sattestor label")]
    NotSattDel(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLink {
    pub id: SataId,
    pub label: Label,
}

impl Serialize for ChainLink {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ChainLink", 3)?;
        st.serialize_field("domain", &self.id.domain)?;
        st.serialize_field("onion", &self.id.onion)?;
        st.serialize_field("label", &self.label)?;
        st.end()
    }
}

/// Where a delegation chain starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootCase {
    ItrustRoot,
    LasSattDelRoot,
    /// Started by `LAS-Del(g, sattestor*(l0))`; holds `g`.
    LasDelRoot(GenLabel),
}

impl fmt::Display for RootCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootCase::ItrustRoot => f.write_str("itrust"),
            RootCase::LasSattDelRoot => f.write_str("las-sattdel"),
            RootCase::LasDelRoot(g) => write!(f, "las-del({g})"),
        }
    }
}

/// `links[0]` is the root, repeated as `links[1]`; the last link is the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegationChain {
    pub links: Vec<ChainLink>,
    pub root: RootCase,
}

impl Serialize for DelegationChain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DelegationChain", 2)?;
        st.serialize_field("links", &self.links)?;
        st.serialize_field("root", &self.root.to_string())?;
        st.end()
    }
}

/// The case of the relevant characterization that a derived trust falls under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    /// Some other trust in the same pair, with label `label`, is derived.
    BoundFromTrust { label: GenLabel },
    /// `sattestor` is trusted for `sattestor(bound)` and said the pair is bound.
    BoundSattested { sattestor: SataId },
    BoundInItrust,
    /// Initially trusted with the narrower-or-equal `label`.
    PlainInItrust { label: Label },
    /// `LAS-Del(antecedent, label)` applied to a derived trust.
    PlainLasDel { antecedent: GenLabel, label: Label },
    /// Derived from `sattestor`, trusted for `sattestor(sattestor_label)`,
    /// saying the pair has `label`.
    PlainSattested {
        sattestor: SataId,
        sattestor_label: Label,
        label: Label,
    },
    SattInItrust { label: Label },
    SattLasSatt,
    SattLasDel { antecedent: GenLabel, label: Label },
    SattFromSattDel { label: Label },
    /// `sattestor` is trusted for `sattestor*(sattestor_label)` and said the
    /// pair is `sattestor(label)`.
    SattDelegated {
        sattestor: SataId,
        sattestor_label: Label,
        label: Label,
    },
    Delegation(DelegationChain),
}

impl Condition {
    /// (characterization, case) in the numbering used by the explanation output:
    /// 1 bound, 2 sattestor-free, 3 sattestor, 4 delegatable sattestor.
    pub fn case(&self) -> (u8, u8) {
        match self {
            Condition::BoundFromTrust { .. } => (1, 1),
            Condition::BoundSattested { .. } => (1, 2),
            Condition::BoundInItrust => (1, 3),
            Condition::PlainInItrust { .. } => (2, 1),
            Condition::PlainLasDel { .. } => (2, 2),
            Condition::PlainSattested { .. } => (2, 3),
            Condition::SattInItrust { .. } => (3, 1),
            Condition::SattLasSatt => (3, 2),
            Condition::SattLasDel { .. } => (3, 3),
            Condition::SattFromSattDel { .. } => (3, 4),
            Condition::SattDelegated { .. } => (3, 5),
            Condition::Delegation(_) => (4, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustExplanation {
    pub target: Form,
    pub condition: Condition,
}

impl Serialize for TrustExplanation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (prop, case) = self.condition.case();
        let mut st = s.serialize_struct("TrustExplanation", 4)?;
        st.serialize_field("target", &self.target.to_string())?;
        st.serialize_field("proposition", &prop)?;
        match &self.condition {
            Condition::Delegation(chain) => st.serialize_field("chain", chain)?,
            other => {
                st.serialize_field("condition", &case)?;
                st.serialize_field("witnesses", &witnesses(other))?;
            }
        }
        st.end()
    }
}

fn witnesses(c: &Condition) -> Vec<String> {
    match c {
        Condition::BoundFromTrust { label } => vec![label.to_string()],
        Condition::BoundSattested { sattestor } => vec![sattestor.to_string()],
        Condition::BoundInItrust | Condition::SattLasSatt => vec![],
        Condition::PlainInItrust { label }
        | Condition::SattInItrust { label }
        | Condition::SattFromSattDel { label } => vec![label.to_string()],
        Condition::PlainLasDel { antecedent, label } | Condition::SattLasDel { antecedent, label } => {
            vec![antecedent.to_string(), label.to_string()]
        }
        Condition::PlainSattested {
            sattestor,
            sattestor_label,
            label,
        }
        | Condition::SattDelegated {
            sattestor,
            sattestor_label,
            label,
        } => vec![sattestor.to_string(), sattestor_label.to_string(), label.to_string()],
        Condition::Delegation(_) => vec![],
    }
}

fn target_pair<'a>(target: &'a Form, p: &Principal) -> Option<&'a BdLPair> {
    match target {
        Form::Trusts {
            who,
            what: Trustable::BdL(pair),
        } if who == p => Some(pair),
        _ => None,
    }
}

fn pair_of(f: &Form) -> &BdLPair {
    match f {
        Form::Trusts {
            what: Trustable::BdL(pair),
            ..
        } => pair,
        _ => unreachable!("walks only visit trusts in labeled pairs"),
    }
}

fn says_body(f: &Form) -> (&SataId, &BdLPair) {
    match f {
        Form::Trusts {
            what: Trustable::Says { speaker, body },
            ..
        } => (speaker, body),
        _ => unreachable!("premise is a trusted says-statement"),
    }
}

pub fn explain(result: &SaturationResult, target: &Form) -> Result<TrustExplanation, ChainError> {
    let pair = target_pair(target, result.store().principal())
        .ok_or_else(|| ChainError::NotTrustBdl(target.to_string()))?;
    if !result.contains(target) {
        return Err(ChainError::NotDerived(target.to_string()));
    }
    let condition = match pair.label.kind {
        _ if pair.label.is_plain_bound() => explain_bound(result, target),
        LabelKind::Plain => explain_plain(result, target),
        LabelKind::Satt => explain_satt(result, target),
        LabelKind::SattDel => Condition::Delegation(extract_chain(result, target)?),
    };
    Ok(TrustExplanation {
        target: target.clone(),
        condition,
    })
}

fn explain_bound(result: &SaturationResult, target: &Form) -> Condition {
    let step = result.step(target).expect("derived statements have steps");
    match &step.rule {
        Justification::Assumption(_) => Condition::BoundInItrust,
        Justification::Axiom(Axiom::A2) => Condition::BoundSattested {
            sattestor: pair_of(&step.premises[0]).id.clone(),
        },
        Justification::Axiom(Axiom::A5) => Condition::BoundFromTrust {
            label: pair_of(&step.premises[0]).label.clone(),
        },
        Justification::Schema(SchemaInstance::LasDel { from, .. }) => {
            Condition::BoundFromTrust { label: from.clone() }
        }
        other => unreachable!("{other} cannot conclude a bound trust"),
    }
}

fn explain_plain(result: &SaturationResult, target: &Form) -> Condition {
    let mut current = target.clone();
    loop {
        let step = result.step(&current).expect("derived statements have steps");
        let label = pair_of(&current).label.base.clone();
        match &step.rule {
            Justification::Assumption(_) => return Condition::PlainInItrust { label },
            Justification::Axiom(Axiom::A1) => current = step.premises[0].clone(),
            Justification::Axiom(Axiom::A2) => {
                let root = pair_of(&step.premises[0]);
                return Condition::PlainSattested {
                    sattestor: root.id.clone(),
                    sattestor_label: root.label.base.clone(),
                    label,
                };
            }
            Justification::Schema(SchemaInstance::LasDel { from, .. }) => {
                return Condition::PlainLasDel {
                    antecedent: from.clone(),
                    label,
                }
            }
            other => unreachable!("{other} cannot conclude a plain trust"),
        }
    }
}

fn explain_satt(result: &SaturationResult, target: &Form) -> Condition {
    let mut current = target.clone();
    loop {
        let step = result.step(&current).expect("derived statements have steps");
        let label = pair_of(&current).label.base.clone();
        match &step.rule {
            Justification::Assumption(_) => return Condition::SattInItrust { label },
            Justification::Axiom(Axiom::A9) => current = step.premises[0].clone(),
            Justification::Axiom(Axiom::A7) => return Condition::SattFromSattDel { label },
            Justification::Axiom(Axiom::A4) => {
                let root = pair_of(&step.premises[0]);
                let (_, said) = says_body(&step.premises[1]);
                return Condition::SattDelegated {
                    sattestor: root.id.clone(),
                    sattestor_label: root.label.base.clone(),
                    label: said.label.base.clone(),
                };
            }
            Justification::Schema(SchemaInstance::LasSatt(_)) => return Condition::SattLasSatt,
            Justification::Schema(SchemaInstance::LasDel { from, .. }) => {
                return Condition::SattLasDel {
                    antecedent: from.clone(),
                    label,
                }
            }
            other => unreachable!("{other} cannot conclude a sattestor trust"),
        }
    }
}

/// The delegation chain induced by the recorded proof of `target`.
pub fn extract_chain(result: &SaturationResult, target: &Form) -> Result<DelegationChain, ChainError> {
    let pair = target_pair(target, result.store().principal())
        .ok_or_else(|| ChainError::NotTrustBdl(target.to_string()))?;
    if pair.label.kind != LabelKind::SattDel {
        return Err(ChainError::NotSattDel(target.to_string()));
    }
    if !result.contains(target) {
        return Err(ChainError::NotDerived(target.to_string()));
    }
    let link = |f: &Form| {
        let p = pair_of(f);
        ChainLink {
            id: p.id.clone(),
            label: p.label.base.clone(),
        }
    };

    // Collected from the target backwards.
    let mut links = vec![link(target)];
    let mut current = target.clone();
    let root = loop {
        let step = result.step(&current).expect("derived statements have steps");
        match &step.rule {
            Justification::Axiom(Axiom::A10) => current = step.premises[0].clone(),
            Justification::Axiom(Axiom::A3) => {
                current = step.premises[0].clone();
                links.push(link(&current));
            }
            Justification::Assumption(Source::Itrust) => break RootCase::ItrustRoot,
            Justification::Schema(SchemaInstance::LasSattDel(_)) => break RootCase::LasSattDelRoot,
            Justification::Schema(SchemaInstance::LasDel { from, .. }) => {
                break RootCase::LasDelRoot(from.clone())
            }
            other => unreachable!("{other} cannot conclude a delegatable sattestor trust"),
        }
    };
    links.push(link(&current));
    links.reverse();
    Ok(DelegationChain { links, root })
}

fn sattdel_trust(p: &Principal, l: &ChainLink) -> Form {
    Form::trusts_bdl(
        p.clone(),
        BdLPair::new(l.id.clone(), GenLabel::sattdel(l.label.clone())),
    )
}

/// Checks a chain against the result, condition by condition, using only
/// membership and label comparisons.
pub fn validate_chain(result: &SaturationResult, chain: &DelegationChain) -> bool {
    chain_violations(result, chain).is_empty()
}

/// Names of the chain conditions that fail. The numbering follows the
/// order the conditions are stated in: 1 last link derived, 2 root case,
/// 3 labels broaden backwards and each link is derived, 4 consecutive
/// links are joined by a trusted sattestation, 5 the root is duplicated.
pub fn chain_violations(result: &SaturationResult, chain: &DelegationChain) -> Vec<u8> {
    let mut bad = Vec::new();
    let links = &chain.links;
    if links.len() < 2 {
        return vec![5];
    }
    let p = result.store().principal();
    let k = links.len() - 1;
    let last = &links[k];

    if !result.contains(&sattdel_trust(p, last)) {
        bad.push(1);
    }

    let root = &links[0];
    let root_ok = match &chain.root {
        RootCase::ItrustRoot => {
            result.store().itrust().contains(&sattdel_trust(p, root)) && root.label.weakly_broadens(&last.label)
        }
        RootCase::LasSattDelRoot => result
            .store()
            .las()
            .contains(&SchemaInstance::LasSattDel(root.id.clone())),
        RootCase::LasDelRoot(g) => {
            let schema = SchemaInstance::LasDel {
                from: g.clone(),
                to: GenLabel::sattdel(root.label.clone()),
            };
            let antecedent = Form::trusts_bdl(p.clone(), BdLPair::new(root.id.clone(), g.clone()));
            result.store().las().contains(&schema)
                && result.contains(&antecedent)
                && root.label.weakly_broadens(&last.label)
        }
    };
    if !root_ok {
        bad.push(2);
    }

    let ordered = links.windows(2).all(|w| w[0].label.weakly_broadens(&w[1].label));
    let derived = links[..k].iter().all(|l| result.contains(&sattdel_trust(p, l)));
    if !ordered || !derived {
        bad.push(3);
    }

    let linked = (1..k).all(|i| {
        let (from, to) = (&links[i], &links[i + 1]);
        result.resulta().iter().any(|f| match f {
            Form::Trusts {
                who,
                what: Trustable::Says { speaker, body },
            } => {
                who == p
                    && *speaker == from.id
                    && body.id == to.id
                    && body.label.kind == LabelKind::SattDel
                    && from.label.weakly_broadens(&body.label.base)
                    && body.label.base.weakly_broadens(&to.label)
            }
            _ => false,
        })
    });
    if !linked {
        bad.push(4);
    }

    if links[0].id != links[1].id {
        bad.push(5);
    }
    bad
}

/// Re-checks an explanation's witnesses against the result.
pub fn validate_explanation(result: &SaturationResult, e: &TrustExplanation) -> bool {
    let p = result.store().principal();
    let Some(pair) = target_pair(&e.target, p) else {
        return false;
    };
    let (d, l) = (&pair.id, &pair.label.base);
    let has = |id: &SataId, g: GenLabel| result.contains(&Form::trusts_bdl(p.clone(), BdLPair::new(id.clone(), g)));
    let said = |s: &SataId, g: GenLabel| {
        result.contains(&Form::trusts_says(p.clone(), s.clone(), BdLPair::new(d.clone(), g)))
    };
    let in_itrust = |g: GenLabel| {
        result
            .store()
            .itrust()
            .contains(&Form::trusts_bdl(p.clone(), BdLPair::new(d.clone(), g)))
    };
    let las = |s: SchemaInstance| result.store().las().contains(&s);
    let kind_ok = |k: LabelKind| pair.label.kind == k && !pair.label.is_plain_bound();

    match &e.condition {
        Condition::BoundFromTrust { label } => {
            pair.label.is_plain_bound() && !label.is_plain_bound() && has(d, label.clone())
        }
        Condition::BoundSattested { sattestor } => {
            pair.label.is_plain_bound()
                && has(sattestor, GenLabel::satt(Label::Bound))
                && said(sattestor, GenLabel::bound())
        }
        Condition::BoundInItrust => pair.label.is_plain_bound() && in_itrust(GenLabel::bound()),
        Condition::PlainInItrust { label } => {
            kind_ok(LabelKind::Plain) && l.weakly_broadens(label) && in_itrust(GenLabel::plain(label.clone()))
        }
        Condition::PlainLasDel { antecedent, label } => {
            kind_ok(LabelKind::Plain)
                && l.weakly_broadens(label)
                && las(SchemaInstance::LasDel {
                    from: antecedent.clone(),
                    to: GenLabel::plain(label.clone()),
                })
                && has(d, antecedent.clone())
        }
        Condition::PlainSattested {
            sattestor,
            sattestor_label,
            label,
        } => {
            kind_ok(LabelKind::Plain)
                && sattestor_label.weakly_broadens(label)
                && l.weakly_broadens(label)
                && has(sattestor, GenLabel::satt(sattestor_label.clone()))
                && said(sattestor, GenLabel::plain(label.clone()))
        }
        Condition::SattInItrust { label } => {
            kind_ok(LabelKind::Satt) && label.weakly_broadens(l) && in_itrust(GenLabel::satt(label.clone()))
        }
        Condition::SattLasSatt => kind_ok(LabelKind::Satt) && las(SchemaInstance::LasSatt(d.clone())),
        Condition::SattLasDel { antecedent, label } => {
            kind_ok(LabelKind::Satt)
                && label.weakly_broadens(l)
                && las(SchemaInstance::LasDel {
                    from: antecedent.clone(),
                    to: GenLabel::satt(label.clone()),
                })
                && has(d, antecedent.clone())
        }
        Condition::SattFromSattDel { label } => {
            kind_ok(LabelKind::Satt) && label.weakly_broadens(l) && has(d, GenLabel::sattdel(label.clone()))
        }
        Condition::SattDelegated {
            sattestor,
            sattestor_label,
            label,
        } => {
            kind_ok(LabelKind::Satt)
                && sattestor_label.weakly_broadens(label)
                && label.weakly_broadens(l)
                && has(sattestor, GenLabel::sattdel(sattestor_label.clone()))
                && said(sattestor, GenLabel::satt(label.clone()))
        }
        Condition::Delegation(chain) => {
            pair.label.kind == LabelKind::SattDel
                && chain.links.last() == Some(&ChainLink { id: d.clone(), label: l.clone() })
                && validate_chain(result, chain)
        }
    }
}
